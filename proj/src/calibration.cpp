#include "fluxread/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fluxread/curve_fit.hpp"
#include "fluxread/errors.hpp"

namespace fluxread {

namespace {

void require_pairs(std::span<const double> x, std::span<const double> y, std::size_t minimum,
                   const char* op) {
  if (x.size() != y.size()) throw ArgumentError(std::string(op) + ": x and y lengths differ");
  if (x.size() < minimum) {
    std::ostringstream msg;
    msg << op << " needs at least " << minimum << " points";
    throw ArgumentError(msg.str());
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ArgumentError(std::string(op) + ": non-finite input");
}

}  // namespace

double fit_snr_slope(std::span<const double> amplitudes, std::span<const double> snr) {
  require_pairs(amplitudes, snr, 2, "fit_snr_slope");
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    sxy += amplitudes[i] * snr[i];
    sxx += amplitudes[i] * amplitudes[i];
  }
  if (sxx == 0.0) throw FitError("fit_snr_slope: all amplitudes are zero");
  return sxy / sxx;
}

CoherenceFit fit_coherence_gaussian(std::span<const double> amplitudes,
                                    std::span<const double> coherence) {
  require_pairs(amplitudes, coherence, 3, "fit_coherence_gaussian");
  for (double c : coherence)
    if (!(c > 0.0)) throw ArgumentError("fit_coherence_gaussian: coherence must be positive");

  // ln c = ln rho0 - e^2 / (2 sigma^2): ordinary regression in u = e^2.
  const auto n = static_cast<double>(amplitudes.size());
  double su = 0.0, sl = 0.0, suu = 0.0, sul = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    const double u = amplitudes[i] * amplitudes[i];
    const double l = std::log(coherence[i]);
    su += u;
    sl += l;
    suu += u * u;
    sul += u * l;
  }
  const double denom = n * suu - su * su;
  if (!(denom > 0.0)) throw FitError("fit_coherence_gaussian: amplitudes do not vary");
  const double slope = (n * sul - su * sl) / denom;
  const double intercept = (sl - slope * su) / n;
  const double scale = std::max(std::abs(sl / n), 1.0);
  if (!(slope < -1e-12 * scale / (suu / n)))
    throw FitError("fit_coherence_gaussian: coherence does not decay with amplitude");

  const double sigma_guess = std::sqrt(-1.0 / (2.0 * slope));
  const double rho_guess = std::exp(intercept);

  // Fit in units of the initial guesses so the solver works with O(1) numbers.
  const CurveModel model = [=](double e, const Eigen::VectorXd& p) {
    const double z = e / (sigma_guess * p(1));
    return rho_guess * p(0) * std::exp(-0.5 * z * z);
  };
  Eigen::VectorXd p0(2);
  p0 << 1.0, 1.0;
  const auto fit = fit_curve(model, amplitudes, coherence, p0);
  CoherenceFit out{rho_guess * fit.params(0), sigma_guess * std::abs(fit.params(1))};
  if (!(out.sigma_v > 0.0) || !std::isfinite(out.sigma_v))
    throw FitError("fit_coherence_gaussian: width did not converge");
  return out;
}

RamseyFit fit_ramsey(std::span<const double> phases, std::span<const double> sigma_z) {
  require_pairs(phases, sigma_z, 3, "fit_ramsey");
  const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
  if (*hi - *lo < 2.0 * std::numbers::pi * (1.0 - 1e-9))
    throw ArgumentError("fit_ramsey: phases must span at least 2 pi");

  const auto n = static_cast<Eigen::Index>(phases.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = phases[static_cast<std::size_t>(i)];
    design(i, 0) = std::cos(phi);
    design(i, 1) = std::sin(phi);
    design(i, 2) = 1.0;
    y(i) = sigma_z[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(y);

  // A cos(phi + phi0) = A cos(phi0) cos(phi) - A sin(phi0) sin(phi)
  RamseyFit out;
  out.amplitude = std::hypot(c(0), c(1));
  out.offset = c(2);
  const double spread = (y.array() - y.mean()).abs().maxCoeff();
  if (out.amplitude <= 1e-12 * std::max(spread, std::abs(out.offset)) || spread == 0.0) {
    out.amplitude = 0.0;
    out.flat = true;
  } else {
    out.phase = std::atan2(-c(1), c(0));
  }
  out.coherence = out.amplitude / 2.0;
  return out;
}

double efficiency(double a, double sigma_v) {
  if (!std::isfinite(a) || !std::isfinite(sigma_v)) throw ArgumentError("efficiency: non-finite input");
  return a * a * sigma_v * sigma_v;
}

EfficiencyFit make_efficiency_fit(double a, double sigma_v) {
  EfficiencyFit fit{a, sigma_v, efficiency(a, sigma_v), true};
  fit.plausible = fit.eta > 0.0 && fit.eta <= 1.0;
  return fit;
}

PhotonConversion photons_from_dac(double epsilon_v, double kappa, double chi, double sigma_v,
                                  double tau_total, double tau_pulse) {
  if (!(epsilon_v >= 0.0) || !(kappa > 0.0) || !(sigma_v > 0.0) || !(tau_total > 0.0) ||
      !(tau_pulse > 0.0))
    throw ArgumentError("photons_from_dac: inputs must be positive");
  if (chi == 0.0 || !std::isfinite(chi))
    throw ArgumentError("photons_from_dac: chi = 0 makes the conversion meaningless");
  PhotonConversion p{epsilon_v, kappa, chi, sigma_v, tau_total, tau_pulse, 0.0, 0.0};
  p.n_bar_total =
      epsilon_v * epsilon_v * kappa / (32.0 * sigma_v * sigma_v * chi * chi * tau_total);
  p.n_bar_active = p.n_bar_total * tau_total / tau_pulse;
  return p;
}

CrosstalkSolution crosstalk_compensate(const CrosstalkMatrix& matrix,
                                       const Eigen::VectorXd& target_flux) {
  const auto& m = matrix.m;
  if (m.rows() != m.cols() || m.rows() == 0) throw ArgumentError("crosstalk matrix must be square");
  if (target_flux.size() != m.rows()) throw ArgumentError("target length does not match matrix");
  if (!m.allFinite() || !target_flux.allFinite()) throw ArgumentError("non-finite crosstalk input");

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : INFINITY;
  if (!(cond < 1e14)) {
    std::ostringstream msg;
    msg << "crosstalk matrix is singular (condition number " << cond << ")";
    throw InversionError(msg.str(), cond);
  }

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd b = lu.solve(target_flux);
  // One step of iterative refinement.
  b += lu.solve(target_flux - m * b);
  return {b, cond};
}

LinewidthFit fit_linewidth(std::span<const double> freqs, std::span<const double> magnitude) {
  require_pairs(freqs, magnitude, 5, "fit_linewidth");
  std::vector<std::size_t> order(freqs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return freqs[a] < freqs[b]; });
  std::vector<double> x, y;
  for (auto i : order) {
    x.push_back(freqs[i]);
    y.push_back(magnitude[i]);
  }

  // Baseline from the outer tenth on each side; extremum is whichever of the
  // max/min departs further from it.
  const std::size_t edge = std::max<std::size_t>(1, x.size() / 10);
  double baseline = 0.0;
  for (std::size_t k = 0; k < edge; ++k) baseline += y[k] + y[y.size() - 1 - k];
  baseline /= 2.0 * static_cast<double>(edge);
  const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
  const bool dip = baseline - *min_it > *max_it - baseline;
  const auto ext = static_cast<std::size_t>((dip ? min_it : max_it) - y.begin());
  if (ext == 0 || ext + 1 == y.size()) throw FitError("fit_linewidth: no extremum inside the data");
  const double amp = y[ext] - baseline;
  if (amp == 0.0) throw FitError("fit_linewidth: flat data");

  // Half-maximum crossings for the width guess.
  const double half = baseline + 0.5 * amp;
  auto beyond = [&](double v) { return dip ? v > half : v < half; };
  std::size_t l = ext, r = ext;
  while (l > 0 && !beyond(y[l])) --l;
  while (r + 1 < y.size() && !beyond(y[r])) ++r;
  double width = x[r] - x[l];
  if (!(width > 0.0)) width = (x.back() - x.front()) / 4.0;

  // Work in shifted, scaled coordinates for a well-conditioned fit.
  const double x0 = x[ext];
  const double xs = width;
  const double ys = std::abs(amp);
  std::vector<double> u(x.size()), v(y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    u[k] = (x[k] - x0) / xs;
    v[k] = (y[k] - baseline) / ys;
  }
  const CurveModel model = [](double t, const Eigen::VectorXd& p) {
    const double z = 2.0 * (t - p(1)) / p(2);
    return p(3) + p(0) / (1.0 + z * z);
  };
  Eigen::VectorXd p0(4);
  p0 << (dip ? -1.0 : 1.0), 0.0, 1.0, 0.0;
  const auto fit = fit_curve(model, u, v, p0);

  LinewidthFit out;
  out.amplitude = fit.params(0) * ys;
  out.center = x0 + fit.params(1) * xs;
  out.kappa = std::abs(fit.params(2)) * xs;
  out.baseline = baseline + fit.params(3) * ys;
  if (!(out.kappa > 0.0)) throw FitError("fit_linewidth: width collapsed");
  return out;
}

}  // namespace fluxread
