#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fluxread/dispersive.hpp"
#include "fluxread/fluxonium.hpp"

namespace fluxread {

using cplx = std::complex<double>;

/// Flux trajectory: raised-cosine ramp from base to base + delta over
/// rise_time, flat for hold_time, then the mirrored ramp back to base.
struct FluxPulse {
  FluxBias base;
  double delta_flux = 0.0;
  double rise_time = 0.0;
  double hold_time = 0.0;
  double sample_dt = 1e-9;
  std::vector<double> samples;  // Phi(k * sample_dt) over [0, 2 rise + hold]

  double at(double t) const;
  double hold_flux() const { return base.phi + delta_flux; }
};

/// Throws ResolutionError if rise_time > 0 and dt >= rise_time / 4.
FluxPulse make_flux_pulse(FluxBias base, double delta_flux, double rise_time, double hold_time,
                          double dt);

struct DriveSpec {
  double omega_ro = 0.0;
  double n_bar = 0.0;
  double epsilon = 0.0;
};

/// Cavity detunings from the drive. plus belongs to |1>, minus to |0>:
///   Delta_pm = (omega_r0 + omega_r1)/2 - omega_ro +- chi
struct Detunings {
  double plus = 0.0;
  double minus = 0.0;
};

Detunings detunings(const DispersivePoint& point, double omega_ro);

/// Drive amplitude giving a state-averaged steady photon number n_bar:
///   eps = sqrt(2 n / ((D+^2 + k^2/4)^-1 + (D-^2 + k^2/4)^-1))
double drive_from_photons(double n_bar, double delta_plus, double delta_minus, double kappa);

/// DriveSpec whose epsilon is set from the detunings at `readout_flux`.
DriveSpec make_drive(const FluxoniumParams& params, FluxBias readout_flux, double omega_ro,
                     double n_bar, int n_levels = kDefaultLevels);

/// omega_r0 + chi at the sweet spot (midpoint of the two dressed frequencies).
double default_readout_frequency(const FluxoniumParams& params, int n_levels = kDefaultLevels);

struct CavityTrajectory {
  std::vector<double> time;
  std::vector<double> flux;
  std::vector<cplx> alpha0, alpha1;
  std::vector<cplx> alpha_in;
  std::vector<cplx> alpha_out0, alpha_out1;
  // Running integrals of alpha_out from t = 0, integrated alongside the field.
  std::vector<cplx> integral_out0, integral_out1;
  double kappa = 0.0;
  double dt = 0.0;

  double duration() const { return time.empty() ? 0.0 : time.back(); }
  /// Linear interpolation of integral_out{state} at time t in [0, duration].
  cplx integral_out(int state, double t) const;
};

// What integrate_cavity does when the flux excursion carries a 0/1 transition
// across omega_r: refuse, or integrate through using regularized_resonator_pull.
enum class CrossingPolicy { reject, regularized };

struct CavityOptions {
  int n_levels = kDefaultLevels;
  CrossingPolicy crossing = CrossingPolicy::reject;
  int table_points = 200;    // flux nodes for chi(t) interpolation
  double drive_delay = 0.0;  // drive switches on at this time; flux pulse starts at 0
};

/// Integrates
///   d alpha / dt = -i Delta(t) alpha - kappa/2 alpha - sqrt(kappa) alpha_in
/// for |0> (Delta_-) and |1> (Delta_+) with RK4 from alpha(0) = 0, where
/// alpha_in = -eps / sqrt(kappa) while the drive is on.
/// Throws DivergenceError if the pulse reaches or crosses a resonance and
/// ResolutionError if dt > min(1/kappa, 2 pi / max|Delta|) / 20.
CavityTrajectory integrate_cavity(const FluxoniumParams& params, const FluxPulse& pulse,
                                  const DriveSpec& drive, double duration, double dt,
                                  const CavityOptions& options = {});

struct SnrOptions {
  double acquisition_offset = 0.0;   // reported tau = simulated tau + offset
  double noise_normalization = 1.0;  // global scale on the vacuum-noise SNR
};

struct SnrCurve {
  std::vector<double> tau;  // reported integration time
  std::vector<double> snr;
  std::vector<double> err_snr_limited;
};

/// SNR(tau) = c sqrt(2 eta / tau) |int_0^tau (alpha_out1 - alpha_out0) dt| on
/// every trajectory sample (tau > 0), shifted by the acquisition offset.
SnrCurve snr_vs_time(const CavityTrajectory& traj, double eta, const SnrOptions& options = {});

/// Same, evaluated at the requested reported times. Throws ArgumentError for
/// any tau outside [offset, offset + duration].
SnrCurve snr_vs_time(const CavityTrajectory& traj, double eta, std::span<const double> taus,
                     const SnrOptions& options = {});

/// 0.5 erfc(snr / 2)
double snr_limited_error(double snr);

/// Inverse of snr_limited_error for err in (0, 0.5].
double snr_for_error(double err);

/// Noise normalization that places the SNR-limited error at `target_error`
/// for reported integration time `tau`.
double fit_noise_normalization(const CavityTrajectory& traj, double eta, double tau,
                               double target_error, double acquisition_offset);

}  // namespace fluxread
