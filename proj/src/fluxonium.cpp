#include "fluxread/fluxonium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluxread/errors.hpp"
#include "fluxread/parallel.hpp"

namespace fluxread {

namespace {

int enlarged_basis(int basis_size) {
  return static_cast<int>(std::ceil(1.25 * basis_size));
}

std::vector<double> referenced(const Eigen::VectorXd& evals, int n_levels) {
  std::vector<double> out(static_cast<std::size_t>(n_levels));
  for (int k = 0; k < n_levels; ++k) out[static_cast<std::size_t>(k)] = evals(k) - evals(0);
  return out;
}

}  // namespace

void FluxoniumParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0))
      throw ArgumentError(std::string(name) + " must be finite and > 0");
  };
  positive(e_j, "e_j");
  positive(e_c, "e_c");
  positive(e_l, "e_l");
  positive(omega_r_bare, "omega_r_bare");
  positive(kappa, "kappa");
  if (!(std::isfinite(g) && g >= 0.0)) throw ArgumentError("g must be finite and >= 0");
}

FluxoniumModel::FluxoniumModel(const FluxoniumParams& params, int basis_size)
    : params_(params), basis_size_(basis_size) {
  params_.validate();
  if (basis_size < 2) throw ArgumentError("basis_size must be >= 2");

  const int n = basis_size;
  const double phi_osc = std::pow(8.0 * params_.e_c / params_.e_l, 0.25);
  const double plasma = std::sqrt(8.0 * params_.e_c * params_.e_l);

  oscillator_diag_.resize(n);
  for (int k = 0; k < n; ++k) oscillator_diag_(k) = plasma * (k + 0.5);

  // phase = phi_osc / sqrt(2) (a + a^dag) is tridiagonal with zero diagonal.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 0; k < n - 1; ++k) sub(k) = phi_osc / std::sqrt(2.0) * std::sqrt(k + 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> phase;
  phase.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd& v = phase.eigenvectors();
  const Eigen::ArrayXd x = phase.eigenvalues().array();
  cos_phase_ = v * x.cos().matrix().asDiagonal() * v.transpose();
  sin_phase_ = v * x.sin().matrix().asDiagonal() * v.transpose();

  // n = i (a^dag - a) / (sqrt(2) phi_osc)
  charge_ = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n - 1; ++k) {
    const double el = std::sqrt(k + 1.0) / (std::sqrt(2.0) * phi_osc);
    charge_(k + 1, k) = el;
    charge_(k, k + 1) = -el;
  }
}

Eigen::MatrixXd FluxoniumModel::hamiltonian(FluxBias flux) const {
  // cos(phase - theta) = cos(phase) cos(theta) + sin(phase) sin(theta)
  const double theta = kTwoPi * flux.phi;
  Eigen::MatrixXd h = -params_.e_j * (std::cos(theta) * cos_phase_ + std::sin(theta) * sin_phase_);
  h.diagonal() += oscillator_diag_;
  return h;
}

std::vector<double> FluxoniumModel::energies(FluxBias flux, int n_levels) const {
  if (n_levels < 1 || n_levels > basis_size_) throw ArgumentError("n_levels out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian(flux), Eigen::EigenvaluesOnly);
  return referenced(solver.eigenvalues(), n_levels);
}

SpectrumResult FluxoniumModel::solve(FluxBias flux, int n_levels) const {
  if (n_levels < 1 || n_levels > basis_size_) throw ArgumentError("n_levels out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian(flux));
  const Eigen::MatrixXd vecs = solver.eigenvectors().leftCols(n_levels);

  SpectrumResult out;
  out.energies = referenced(solver.eigenvalues(), n_levels);
  out.basis_size = basis_size_;
  out.flux = flux;

  const Eigen::MatrixXd n_mat = vecs.transpose() * charge_ * vecs;
  out.n_elements = n_mat.cwiseAbs();
  // Symmetrize so |n_ij| == |n_ji| holds exactly rather than to rounding.
  out.n_elements = 0.5 * (out.n_elements + out.n_elements.transpose()).eval();

  out.parity.resize(static_cast<std::size_t>(n_levels));
  for (int i = 0; i < n_levels; ++i) {
    double p = 0.0;
    for (int k = 0; k < basis_size_; ++k) p += (k % 2 == 0 ? 1.0 : -1.0) * vecs(k, i) * vecs(k, i);
    out.parity[static_cast<std::size_t>(i)] = p;
  }
  return out;
}

void check_basis_request(int basis_size, int n_levels) {
  if (n_levels < 2) throw ArgumentError("n_levels must be >= 2");
  if (basis_size < 4 * n_levels) {
    std::ostringstream msg;
    msg << "basis_size " << basis_size << " too small for " << n_levels
        << " levels (need >= " << 4 * n_levels << ")";
    throw ArgumentError(msg.str());
  }
}

double max_relative_shift(const std::vector<double>& reference,
                          const std::vector<double>& candidate) {
  const double scale = std::max(std::abs(reference.back()), 1.0);
  double worst = 0.0;
  for (std::size_t k = 1; k < reference.size(); ++k) {
    const double denom = std::max(std::abs(reference[k]), 1e-6 * scale);
    worst = std::max(worst, std::abs(candidate[k] - reference[k]) / denom);
  }
  return worst;
}

namespace {

void verify_convergence(const FluxoniumModel& base, const FluxoniumModel& larger, FluxBias flux,
                        const std::vector<double>& energies, double tol) {
  const auto refined = larger.energies(flux, static_cast<int>(energies.size()));
  const double shift = max_relative_shift(refined, energies);
  if (!(shift < tol)) {
    std::ostringstream msg;
    msg << "basis_size " << base.basis_size() << " not converged at phi=" << flux.phi
        << ": relative shift " << shift << " >= " << tol;
    throw TruncationError(msg.str(), shift);
  }
}

}  // namespace

SpectrumResult diagonalize(const FluxoniumParams& params, FluxBias flux, int basis_size,
                           int n_levels, double convergence_tol) {
  check_basis_request(basis_size, n_levels);
  if (!std::isfinite(flux.phi)) throw ArgumentError("flux must be finite");
  const FluxoniumModel model(params, basis_size);
  const FluxoniumModel larger(params, enlarged_basis(basis_size));
  auto result = model.solve(flux, n_levels);
  verify_convergence(model, larger, flux, result.energies, convergence_tol);
  return result;
}

double transition_frequency(const SpectrumResult& spec, int i, int j) {
  if (i < 0 || j < i || j >= spec.n_levels())
    throw ArgumentError("transition_frequency needs 0 <= i <= j < n_levels");
  return spec.energies[static_cast<std::size_t>(j)] - spec.energies[static_cast<std::size_t>(i)];
}

double charge_element(const SpectrumResult& spec, int i, int j) {
  if (i < 0 || j < 0 || i >= spec.n_levels() || j >= spec.n_levels())
    throw ArgumentError("charge_element index out of range");
  return spec.n_elements(i, j);
}

std::vector<SpectrumResult> spectrum_vs_flux(const FluxoniumParams& params,
                                             std::span<const double> flux_grid, int n_levels,
                                             int basis_size) {
  if (flux_grid.empty()) throw ArgumentError("flux grid is empty");
  check_basis_request(basis_size, n_levels);
  const FluxoniumModel model(params, basis_size);
  const FluxoniumModel larger(params, enlarged_basis(basis_size));

  std::vector<SpectrumResult> out(flux_grid.size());
  std::vector<std::exception_ptr> failures(flux_grid.size());
  parallel_for(flux_grid.size(), [&](std::size_t i) {
    try {
      const FluxBias flux{flux_grid[i]};
      if (!std::isfinite(flux.phi)) throw ArgumentError("flux must be finite");
      out[i] = model.solve(flux, n_levels);
      verify_convergence(model, larger, flux, out[i].energies, kDefaultConvergenceTol);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw GridPointError(i, flux_grid[i], failures[i], what);
  }
  return out;
}

}  // namespace fluxread
