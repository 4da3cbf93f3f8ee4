#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fluxread/dispersive.hpp"
#include "fluxread/fluxonium.hpp"
#include "fluxread/readout.hpp"
#include "fluxread/shots.hpp"

namespace fluxread {

struct SolverConfig {
  int basis_size = kDefaultBasisSize;
  int n_levels = kDefaultLevels;
};

struct SpectrumConfig {
  std::vector<double> flux_grid{0.5};
  int max_level = 6;  // columns omega_01 .. omega_0{max_level}
};

struct ChiConfig {
  std::vector<double> flux_grid{0.5};
  double resonance_guard = kDefaultResonanceGuard;
  double mist_window = kDefaultMistWindow;
  int mist_max_harmonic = 3;
};

struct PulseConfig {
  double base_flux = 0.5;
  double delta_flux = 0.1567;
  double rise_time = 50e-9;
  double hold_time = 2e-6;
  double sample_dt = 0.5e-9;
};

struct DriveConfig {
  std::optional<double> omega_ro;  // rad/s; unset -> sweet-spot midpoint
  double n_bar = 75.0;
  double delay = 0.0;
};

struct ReadoutConfig {
  double duration = 500e-9;
  double dt = 0.5e-9;
  double eta = 0.0604;
  double acquisition_offset = 40e-9;
  // Unset means: calibrate so the flux-pulse curve passes through
  // (anchor_tau, anchor_error).
  std::optional<double> noise_normalization = 1.0;
  double anchor_tau = 360e-9;
  double anchor_error = 1e-3;
  std::vector<double> tau_grid;  // empty -> 10 ns steps over the simulated window
  bool sweet_spot = true;
  bool flux_pulse = true;
  int table_points = 200;
  CrossingPolicy crossing = CrossingPolicy::reject;
};

struct NoiseConfig {
  double p_init0 = 0.0;
  double p_init1 = 0.0;
  double t1 = 10e-6;
  double t1_sweet_spot = 10e-6;
};

struct ShotConfig {
  std::size_t n_shots = 0;
  std::uint64_t seed = 1;
  std::optional<double> dump_tau;
};

struct SweepConfig {
  std::vector<double> delta_flux{0.1567};
  std::vector<double> n_bar{75.0};
  double tau = 200e-9;
};

struct CalibrationConfig {
  std::filesystem::path snr_csv;
  std::filesystem::path coherence_csv;
  std::vector<std::filesystem::path> ramsey_csvs;
  std::vector<double> ramsey_amplitudes;
  std::filesystem::path transmission_csv;  // x in Hz
  double epsilon_v = 0.4;
  double chi = from_hz(0.92e6);
  double tau_total = 3.79e-6;
  double tau_pulse = 2.27e-6;
};

struct ExperimentConfig {
  FluxoniumParams device;
  SolverConfig solver;
  SpectrumConfig spectrum;
  ChiConfig chi;
  PulseConfig pulse;
  DriveConfig drive;
  ReadoutConfig readout;
  NoiseConfig noise;
  ShotConfig shots;
  SweepConfig sweep;
  CalibrationConfig calibration;
  bool paper_mode = false;
  std::filesystem::path source;
};

/// Parses an INI/TOML-style file (`[section]`, `key = value`, `#` comments,
/// `[a, b]` arrays, `*_range = [lo, hi]` with `*_points = n` grids). Unknown
/// keys and physically invalid values raise ConfigError naming file, line,
/// section and key.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Same checks load_config applies after parsing; callers that build configs
/// in code use it before running commands.
void validate_config(const ExperimentConfig& config);

}  // namespace fluxread
