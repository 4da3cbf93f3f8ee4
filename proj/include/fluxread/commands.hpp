#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fluxread/config.hpp"
#include "fluxread/readout.hpp"

namespace fluxread {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;   // overrides [shots] seed
  std::optional<std::size_t> shots;    // overrides [shots] n_shots
  bool svg = false;
  std::ostream* log = nullptr;         // progress and summaries; null = silent
};

enum class ReadoutMode { flux_pulse, sweet_spot };

/// Pulse, drive and cavity trajectory for one readout mode of a config.
struct ReadoutSimulation {
  ReadoutMode mode = ReadoutMode::flux_pulse;
  FluxPulse pulse;
  DriveSpec drive;
  CavityTrajectory trajectory;
};

ReadoutSimulation simulate_readout(const ExperimentConfig& config, ReadoutMode mode);

/// Same as above with the pulse amplitude and photon number replaced.
ReadoutSimulation simulate_readout(const ExperimentConfig& config, double delta_flux, double n_bar);

/// The configured constant, or the one that puts the flux-pulse curve through
/// (anchor_tau, anchor_error) when the config says `auto`.
double resolve_noise_normalization(const ExperimentConfig& config);

/// Taus for readout curves: the configured grid, or 10 ns steps from
/// offset + 10 ns to the end of the window.
std::vector<double> readout_tau_grid(const ExperimentConfig& config);

struct ReadoutTable {
  SnrCurve curve;
  std::vector<double> err_assignment;  // empty when no shots were taken
};

ReadoutTable readout_table(const ExperimentConfig& config, const ReadoutSimulation& sim,
                           double noise_normalization, std::size_t n_shots, std::uint64_t seed);

// Each command writes its files into options.out_dir and returns the process
// exit code. Config problems surface as ConfigError, compute failures as Error.
int cmd_spectrum(const ExperimentConfig& config, const CommandOptions& options);
int cmd_chi(const ExperimentConfig& config, const CommandOptions& options);
int cmd_readout(const ExperimentConfig& config, const CommandOptions& options);
int cmd_calibrate(const ExperimentConfig& config, const CommandOptions& options);
int cmd_sweep(const ExperimentConfig& config, const CommandOptions& options);

/// Maps an exception from a command to the documented exit code:
/// 2 for configuration/usage problems, 1 for everything else.
int exit_code_for(const std::exception& error);

}  // namespace fluxread
