#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "fluxread/units.hpp"

namespace fluxread {

inline constexpr int kDefaultBasisSize = 120;
inline constexpr int kDefaultLevels = 12;
inline constexpr double kDefaultConvergenceTol = 1e-8;

/// Device card: circuit energies, charge coupling and bare resonator.
/// All fields are angular frequencies (rad/s). Defaults are the measured
/// device (E_J/2pi = 3.82 GHz, E_C/2pi = 0.865 GHz, E_L/2pi = 0.822 GHz,
/// g/2pi = 37.2 MHz, omega_r/2pi = 5.175 GHz, kappa/2pi = 6.04 MHz).
struct FluxoniumParams {
  double e_j = from_hz(3.82e9);
  double e_c = from_hz(0.865e9);
  double e_l = from_hz(0.822e9);
  double g = from_hz(37.2e6);
  double omega_r_bare = from_hz(5.175e9);
  double kappa = from_hz(6.04e6);

  /// Throws ArgumentError unless energies, kappa and omega_r are positive and
  /// g is finite and non-negative.
  void validate() const;
};

/// External flux in units of the flux quantum.
struct FluxBias {
  double phi = 0.5;
};

struct SpectrumResult {
  std::vector<double> energies;  // ground referenced, ascending, rad/s
  Eigen::MatrixXd n_elements;    // |<i|n|j>|
  std::vector<double> parity;    // <i|P|i> for phi -> -phi; +-1 only at symmetric bias
  int basis_size = 0;
  FluxBias flux;

  int n_levels() const { return static_cast<int>(energies.size()); }
};

/// Fluxonium Hamiltonian 4 E_C n^2 - E_J cos(phi - 2 pi Phi_ext) + E_L phi^2 / 2
/// in the harmonic-oscillator basis of the LC part. The flux-independent
/// pieces (cos and sin of the phase operator, charge operator) are built once,
/// so repeated solves at different bias only cost one dense eigensolve.
class FluxoniumModel {
 public:
  FluxoniumModel(const FluxoniumParams& params, int basis_size);

  const FluxoniumParams& params() const { return params_; }
  int basis_size() const { return basis_size_; }

  /// Eigenvalues, charge matrix elements and parities of the lowest n_levels.
  SpectrumResult solve(FluxBias flux, int n_levels) const;

  /// Ground-referenced eigenvalues only (cheaper; used by root finding).
  std::vector<double> energies(FluxBias flux, int n_levels) const;

 private:
  Eigen::MatrixXd hamiltonian(FluxBias flux) const;

  FluxoniumParams params_;
  int basis_size_;
  Eigen::VectorXd oscillator_diag_;
  Eigen::MatrixXd cos_phase_;
  Eigen::MatrixXd sin_phase_;
  Eigen::MatrixXd charge_;  // real antisymmetric; n = i * charge_
};

/// Diagonalizes at one bias and verifies truncation: the energies must move by
/// less than convergence_tol (relative) when the basis grows by 25%.
/// Throws ArgumentError if basis_size < 4 n_levels or n_levels < 2 and
/// TruncationError if the convergence check fails.
SpectrumResult diagonalize(const FluxoniumParams& params, FluxBias flux,
                           int basis_size = kDefaultBasisSize, int n_levels = kDefaultLevels,
                           double convergence_tol = kDefaultConvergenceTol);

/// energies[j] - energies[i]; requires i <= j < n_levels.
double transition_frequency(const SpectrumResult& spec, int i, int j);

/// |<i|n|j>|
double charge_element(const SpectrumResult& spec, int i, int j);

/// One SpectrumResult per grid point, in grid order. Failures are reported as
/// GridPointError carrying the index and the original exception.
std::vector<SpectrumResult> spectrum_vs_flux(const FluxoniumParams& params,
                                             std::span<const double> flux_grid,
                                             int n_levels = kDefaultLevels,
                                             int basis_size = kDefaultBasisSize);

// Shared by diagonalize and the scans.
void check_basis_request(int basis_size, int n_levels);
double max_relative_shift(const std::vector<double>& reference,
                          const std::vector<double>& candidate);

}  // namespace fluxread
