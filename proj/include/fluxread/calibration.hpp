#pragma once

#include <Eigen/Dense>

#include <span>

namespace fluxread {

/// Measurement-efficiency extraction from a variable-strength measurement:
/// SNR slope a (1/V) and dephasing width sigma_v (V) give eta = a^2 sigma_v^2.
struct EfficiencyFit {
  double a = 0.0;
  double sigma_v = 0.0;
  double eta = 0.0;
  bool plausible = true;  // false when eta falls outside (0, 1]
};

/// Least-squares slope through the origin: a = sum(x y) / sum(x^2).
double fit_snr_slope(std::span<const double> amplitudes, std::span<const double> snr);

struct CoherenceFit {
  double rho0 = 0.0;     // |rho_01| at zero amplitude
  double sigma_v = 0.0;  // |rho_01(e)| = rho0 exp(-e^2 / (2 sigma_v^2))
};

/// Two-parameter Gaussian fit. Initial guess from the log-linear regression
/// of ln|rho| on e^2, then refined by nonlinear least squares. Throws FitError
/// when the data do not decay.
CoherenceFit fit_coherence_gaussian(std::span<const double> amplitudes,
                                    std::span<const double> coherence);

struct RamseyFit {
  double amplitude = 0.0;  // A >= 0
  double phase = 0.0;      // phi0 in (-pi, pi]
  double offset = 0.0;     // B
  double coherence = 0.0;  // A / 2
  bool flat = false;       // set when no oscillation is resolved (A = 0)
};

/// sigma_z(phi) = A cos(phi + phi0) + B, solved as linear least squares in
/// (cos phi, sin phi, 1). The phases must span at least 2 pi.
RamseyFit fit_ramsey(std::span<const double> phases, std::span<const double> sigma_z);

/// a^2 sigma^2
double efficiency(double a, double sigma_v);

EfficiencyFit make_efficiency_fit(double a, double sigma_v);

struct PhotonConversion {
  double epsilon_v = 0.0;
  double kappa = 0.0;
  double chi = 0.0;
  double sigma_v = 0.0;
  double tau_total = 0.0;
  double tau_pulse = 0.0;
  double n_bar_total = 0.0;   // eps^2 kappa / (32 sigma^2 chi^2 tau_total)
  double n_bar_active = 0.0;  // n_bar_total tau_total / tau_pulse
};

/// Photon number from the dephasing rate Gamma_d = 8 chi^2 n / kappa
/// accumulated over tau_total. kappa and chi are angular frequencies.
PhotonConversion photons_from_dac(double epsilon_v, double kappa, double chi, double sigma_v,
                                  double tau_total, double tau_pulse);

struct CrosstalkMatrix {
  Eigen::MatrixXd m;  // flux at loop i per unit setting of channel j
};

struct CrosstalkSolution {
  Eigen::VectorXd bias;
  double condition_number = 0.0;
};

/// Channel settings b with m b = target_flux. Throws InversionError (carrying
/// the condition number) when m is singular or too ill-conditioned to invert.
CrosstalkSolution crosstalk_compensate(const CrosstalkMatrix& matrix,
                                       const Eigen::VectorXd& target_flux);

struct LinewidthFit {
  double kappa = 0.0;  // full width at half maximum, same units as the x axis
  double center = 0.0;
  double amplitude = 0.0;  // signed: negative for a dip
  double baseline = 0.0;
};

/// Lorentzian y = baseline + amplitude / (1 + (2 (x - center) / kappa)^2).
/// Throws FitError when the extremum sits on the edge of the data.
LinewidthFit fit_linewidth(std::span<const double> freqs, std::span<const double> magnitude);

}  // namespace fluxread
