#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fluxread/fluxonium.hpp"

namespace fluxread {

inline constexpr double kDefaultResonanceGuard = from_hz(100e3);
inline constexpr double kDefaultMistWindow = from_hz(50e6);
inline constexpr double kCrossingPrescanStep = 1e-4;

struct Transition {
  int from = 0;
  int to = 0;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Resonator pulls for the two computational states at one bias.
/// omega_ri = omega_r_bare + chi_i and chi = (omega_r1 - omega_r0) / 2.
/// When `divergent` is set the numeric fields are NaN and `offending` names
/// the transition inside the resonance guard.
struct DispersivePoint {
  FluxBias flux;
  double chi0 = 0.0;
  double chi1 = 0.0;
  double chi = 0.0;
  double omega_r0 = 0.0;
  double omega_r1 = 0.0;
  bool divergent = false;
  std::optional<Transition> offending;
};

struct ResonanceFlag {
  FluxBias flux;
  Transition transition;
  int harmonic = 1;
  double detuning = 0.0;  // |omega_ji - m omega_r|
};

/// Second-order resonator pull for qubit level `level`:
///   g^2 sum_{j != level} |n_{j,level}|^2 2 w_j / (omega_r^2 - w_j^2),  w_j = E_j - E_level.
/// Throws DivergenceError if any |w_j| is within `guard` of omega_r.
double resonator_pull(const SpectrumResult& spec, int level, double g, double omega_r,
                      double guard = kDefaultResonanceGuard);

/// Resonator pull with each co-rotating term G^2 / d (G = g |n_j,level|,
/// d = omega_r - |w_j|) replaced by G^2 d / (d^2 + G^2). This is the diabatic
/// shift for a transition swept quickly through omega_r: continuous in d,
/// bounded by G / 2 on resonance, and within G^4 / |d|^3 of resonator_pull
/// away from it. Never throws.
double regularized_resonator_pull(const SpectrumResult& spec, int level, double g, double omega_r);

/// Dispersive data from an existing spectrum (n_levels >= 6).
DispersivePoint dispersive_point(const FluxoniumParams& params, const SpectrumResult& spec,
                                 double guard = kDefaultResonanceGuard);

DispersivePoint dispersive_point(const FluxoniumParams& params, FluxBias flux,
                                 int n_levels = kDefaultLevels,
                                 double guard = kDefaultResonanceGuard);

/// (omega_r0, omega_r1)
std::pair<double, double> dressed_frequencies(const FluxoniumParams& params, FluxBias flux,
                                              int n_levels = kDefaultLevels);

/// Points inside the resonance guard come back flagged instead of throwing.
std::vector<DispersivePoint> chi_vs_flux(const FluxoniumParams& params,
                                         std::span<const double> flux_grid,
                                         int n_levels = kDefaultLevels,
                                         double guard = kDefaultResonanceGuard);

/// Fluxes in [lo, hi] where a transition out of |0> or |1> equals omega_r.
/// Bisection on brackets from a 1e-4 pre-scan; sorted by flux.
std::vector<ResonanceFlag> divergence_scan(const FluxoniumParams& params, double flux_lo,
                                           double flux_hi, int n_levels = kDefaultLevels);

/// Multi-photon proximity flags |omega_ji - m omega_r| < window for i in {0,1},
/// m = 1..max_harmonic. One flag per contiguous in-window stretch, placed at
/// the exact crossing when there is one and at the closest pre-scan point
/// otherwise. Sorted by ascending detuning.
std::vector<ResonanceFlag> mist_scan(const FluxoniumParams& params, double flux_lo,
                                     double flux_hi, int n_levels = kDefaultLevels,
                                     int max_harmonic = 3, double window = kDefaultMistWindow);

}  // namespace fluxread
