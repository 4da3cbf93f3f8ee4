#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "fluxread/readout.hpp"

namespace fluxread {

/// Error mechanisms beyond amplifier noise: preparation flips and relaxation
/// of |1> during the measurement. Excitation 0 -> 1 is not modeled.
struct NoiseModel {
  double p_init0 = 0.0;  // P(prepared |0>, actually |1>)
  double p_init1 = 0.0;  // P(prepared |1>, actually |0>)
  double t1 = std::numeric_limits<double>::infinity();
  double eta = 1.0;

  void validate() const;
};

/// Integrated heterodyne results. `prepared[k]` is the intended state of shot k.
struct ShotSet {
  std::vector<int> prepared;
  std::vector<std::complex<double>> integrated;
  double tau = 0.0;
  std::uint64_t seed = 0;
};

/// Shots are generated in chunks of this many; chunk c draws from
/// mt19937_64(seed_seq{seed_lo, seed_hi, c}), so output depends only on the
/// seed and n_shots, never on the worker count.
inline constexpr std::size_t kShotChunk = 4096;

/// n_shots shots per prepared state (2 n_shots total, |0> block first).
/// tau is the reported integration time; options carry the acquisition
/// offset and noise normalization used by snr_vs_time, and the noise is scaled
/// so that the noiseless two-state separation reproduces that SNR.
ShotSet sample_shots(const CavityTrajectory& traj, const NoiseModel& noise, double tau,
                     std::size_t n_shots, std::uint64_t seed, const SnrOptions& options = {});

struct GaussianFit {
  std::complex<double> axis{1.0, 0.0};  // unit vector from cluster 0 to cluster 1
  double mu0 = 0.0;
  double mu1 = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double threshold = 0.0;

  double project(std::complex<double> z) const { return (z * std::conj(axis)).real(); }
  /// |mu1 - mu0| / sqrt(sigma0^2 + sigma1^2)
  double snr() const;
};

/// Projects onto the line through the cluster means, fits one Gaussian per
/// prepared label, thresholds at the equal-density point between the means.
GaussianFit fit_gaussians(const ShotSet& shots);

struct AssignmentResult {
  double error = 0.0;  // (P(0|1) + P(1|0)) / 2
  double p0_given1 = 0.0;
  double p1_given0 = 0.0;
};

AssignmentResult assignment_error(const ShotSet& shots, const GaussianFit& fit);

/// CSV with header `prepared,i,q`.
void write_shots_csv(std::ostream& os, const ShotSet& shots);

}  // namespace fluxread
