#include "fluxread/shots.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "fluxread/curve_fit.hpp"
#include "fluxread/errors.hpp"
#include "fluxread/io.hpp"
#include "fluxread/parallel.hpp"

namespace fluxread {

void NoiseModel::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError(std::string(name) + " must be in [0, 1]");
  };
  prob(p_init0, "p_init0");
  prob(p_init1, "p_init1");
  if (!(t1 > 0.0)) throw ArgumentError("t1 must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("eta must be in (0, 1]");
}

ShotSet sample_shots(const CavityTrajectory& traj, const NoiseModel& noise, double tau,
                     std::size_t n_shots, std::uint64_t seed, const SnrOptions& options) {
  noise.validate();
  if (n_shots < 1) throw ArgumentError("n_shots must be >= 1");
  if (!(options.noise_normalization > 0.0)) throw ArgumentError("noise_normalization must be > 0");
  const double sim = tau - options.acquisition_offset;
  if (!(sim > 0.0 && sim <= traj.duration() * (1.0 + 1e-12)))
    throw ArgumentError("tau outside the simulated window");
  const double t_end = std::min(sim, traj.duration());

  // Signal c sqrt(eta) int alpha_out dt with per-quadrature noise sqrt(tau)/2
  // gives |mu1 - mu0| / sqrt(s0^2 + s1^2) = c sqrt(2 eta / tau) |delta int|.
  const double scale = options.noise_normalization * std::sqrt(noise.eta);
  const double noise_std = std::sqrt(t_end) / 2.0;
  const cplx end0 = traj.integral_out(0, t_end);
  const cplx end1 = traj.integral_out(1, t_end);
  const bool relaxes = std::isfinite(noise.t1);

  const std::size_t total = 2 * n_shots;
  ShotSet out;
  out.tau = tau;
  out.seed = seed;
  out.prepared.resize(total);
  out.integrated.resize(total);

  const std::size_t chunks = (total + kShotChunk - 1) / kShotChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, noise_std);
    std::exponential_distribution<double> decay(relaxes ? 1.0 / noise.t1 : 1.0);

    const std::size_t begin = c * kShotChunk;
    const std::size_t end = std::min(total, begin + kShotChunk);
    for (std::size_t k = begin; k < end; ++k) {
      const int prepared = k < n_shots ? 0 : 1;
      const double flip = uniform(rng);
      const double jump = relaxes ? decay(rng) : 0.0;
      const double nq_i = gauss(rng);
      const double nq_q = gauss(rng);

      int state = prepared;
      if (flip < (prepared == 0 ? noise.p_init0 : noise.p_init1)) state = 1 - prepared;

      cplx integral = state == 0 ? end0 : end1;
      if (state == 1 && relaxes && jump < t_end) {
        // |1> until the jump, then the |0> response for the rest of the window.
        integral = traj.integral_out(1, jump) + (end0 - traj.integral_out(0, jump));
      }
      out.prepared[k] = prepared;
      out.integrated[k] = scale * integral + cplx{nq_i, nq_q};
    }
  });
  return out;
}

double GaussianFit::snr() const {
  return std::abs(mu1 - mu0) / std::sqrt(sigma0 * sigma0 + sigma1 * sigma1);
}

namespace {

// Equal-density point of two normal pdfs between their means; midpoint if the
// quadratic has no root there.
double equal_density_point(double m0, double s0, double m1, double s1) {
  const double mid = 0.5 * (m0 + m1);
  const double a = 1.0 / (s1 * s1) - 1.0 / (s0 * s0);
  const double b = 2.0 * (m0 / (s0 * s0) - m1 / (s1 * s1));
  const double c = m1 * m1 / (s1 * s1) - m0 * m0 / (s0 * s0) + 2.0 * std::log(s1 / s0);
  const double lo = std::min(m0, m1);
  const double hi = std::max(m0, m1);
  if (std::abs(a) < 1e-12 * std::abs(b)) {
    const double x = -c / b;
    return (x >= lo && x <= hi) ? x : mid;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return mid;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  for (double x : {q / a, c / q})
    if (std::isfinite(x) && x >= lo && x <= hi) return x;
  return mid;
}

}  // namespace

GaussianFit fit_gaussians(const ShotSet& shots) {
  if (shots.prepared.size() != shots.integrated.size())
    throw ArgumentError("shot set has mismatched lengths");
  cplx sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t k = 0; k < shots.prepared.size(); ++k) {
    const int label = shots.prepared[k];
    if (label != 0 && label != 1) throw ArgumentError("labels must be 0 or 1");
    sum[label] += shots.integrated[k];
    ++count[label];
  }
  if (count[0] == 0 || count[1] == 0) throw ArgumentError("both labels must be present");

  GaussianFit fit;
  const cplx sep = sum[1] / static_cast<double>(count[1]) - sum[0] / static_cast<double>(count[0]);
  fit.axis = std::abs(sep) > 0.0 ? sep / std::abs(sep) : cplx{1.0, 0.0};

  std::vector<double> proj[2];
  for (std::size_t k = 0; k < shots.prepared.size(); ++k)
    proj[shots.prepared[k]].push_back(fit.project(shots.integrated[k]));

  const auto g0 = fit_gaussian_histogram(proj[0]);
  const auto g1 = fit_gaussian_histogram(proj[1]);
  fit.mu0 = g0.mean;
  fit.sigma0 = g0.sigma;
  fit.mu1 = g1.mean;
  fit.sigma1 = g1.sigma;
  fit.threshold = equal_density_point(fit.mu0, fit.sigma0, fit.mu1, fit.sigma1);
  return fit;
}

AssignmentResult assignment_error(const ShotSet& shots, const GaussianFit& fit) {
  if (!std::isfinite(fit.threshold)) throw ArgumentError("fit threshold must be finite");
  const bool one_above = fit.mu1 >= fit.mu0;
  std::size_t wrong[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (std::size_t k = 0; k < shots.prepared.size(); ++k) {
    const int label = shots.prepared[k];
    const bool above = fit.project(shots.integrated[k]) > fit.threshold;
    const int assigned = above == one_above ? 1 : 0;
    ++count[label];
    wrong[label] += assigned != label;
  }
  AssignmentResult r;
  r.p1_given0 = count[0] ? static_cast<double>(wrong[0]) / static_cast<double>(count[0]) : 0.0;
  r.p0_given1 = count[1] ? static_cast<double>(wrong[1]) / static_cast<double>(count[1]) : 0.0;
  r.error = 0.5 * (r.p0_given1 + r.p1_given0);
  return r;
}

void write_shots_csv(std::ostream& os, const ShotSet& shots) {
  os << "prepared,i,q\n";
  for (std::size_t k = 0; k < shots.prepared.size(); ++k)
    os << shots.prepared[k] << ',' << format_double(shots.integrated[k].real()) << ','
       << format_double(shots.integrated[k].imag()) << '\n';
}

}  // namespace fluxread
