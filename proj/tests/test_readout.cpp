#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "fluxread/errors.hpp"
#include "fluxread/readout.hpp"

using namespace fluxread;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const FluxoniumParams kDevice{};

FluxPulse paper_pulse() { return make_flux_pulse(FluxBias{0.5}, 0.1567, 50e-9, 2e-6, 0.5e-9); }
FluxPulse flat_pulse() { return make_flux_pulse(FluxBias{0.5}, 0.0, 50e-9, 2e-6, 0.5e-9); }

CavityOptions swept() {
  CavityOptions o;
  o.crossing = CrossingPolicy::regularized;
  return o;
}

// Plain bisection on the closed-form error, independent of erfc_inv.
double bisect_snr(double err) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(mid / 2.0) > err ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("flux pulse shape") {
  const auto flat = flat_pulse();
  for (double t : {0.0, 10e-9, 75e-9, 1e-6, 3e-6}) CHECK(flat.at(t) == 0.5);

  const auto p = paper_pulse();
  CHECK(std::abs(p.at(75e-9) - 0.6567) < 1e-12);
  CHECK(std::abs(p.at(25e-9) - (0.5 + 0.1567 / 2)) < 1e-12);
  CHECK(p.at(0.0) == 0.5);
  CHECK(p.at(-1e-9) == 0.5);
  CHECK(p.at(2.1e-6 + 1e-9) == 0.5);  // back at base after the down ramp
  for (std::size_t k = 1; k < p.samples.size(); ++k) {
    const double t = static_cast<double>(k) * p.sample_dt;
    if (t <= 50e-9) CHECK(p.samples[k] >= p.samples[k - 1]);
  }
}

TEST_CASE("pulse sampling must resolve the rise") {
  CHECK_THROWS_AS(make_flux_pulse(FluxBias{0.5}, 0.1, 50e-9, 1e-6, 12.5e-9), ResolutionError);
  CHECK_THROWS_AS(make_flux_pulse(FluxBias{0.5}, 0.1, 50e-9, 1e-6, 20e-9), ResolutionError);
  CHECK_NOTHROW(make_flux_pulse(FluxBias{0.5}, 0.1, 50e-9, 1e-6, 12e-9));
  CHECK_THROWS_AS(make_flux_pulse(FluxBias{0.5}, 0.1, -1e-9, 1e-6, 1e-9), ArgumentError);
  CHECK_THROWS_AS(make_flux_pulse(FluxBias{0.5}, 0.1, 50e-9, 1e-6, 0.0), ArgumentError);
}

TEST_CASE("drive amplitude from photon number") {
  const double kappa = kDevice.kappa;
  CHECK(rel(drive_from_photons(75.0, 0.0, 0.0, kappa), std::sqrt(75.0) * kappa / 2.0) < 1e-12);
  CHECK(drive_from_photons(0.0, 1e6, -1e6, kappa) == 0.0);
  CHECK_THROWS_AS(drive_from_photons(-1.0, 0.0, 0.0, kappa), ArgumentError);
  CHECK_THROWS_AS(drive_from_photons(1.0, 0.0, 0.0, 0.0), ArgumentError);

  const double dp = from_hz(-0.38e6), dm = from_hz(1.80e6);
  const double eps = drive_from_photons(75.0, dp, dm, kappa);
  const double k2 = kappa * kappa / 4.0;
  const double n_avg = 0.5 * (eps * eps / (dp * dp + k2) + eps * eps / (dm * dm + k2));
  CHECK(std::abs(n_avg - 75.0) < 1e-6);
}

TEST_CASE("steady state matches the Lorentzian and the photon-number contract") {
  const auto pulse = flat_pulse();
  const double omega_ro = default_readout_frequency(kDevice);
  const auto drive = make_drive(kDevice, FluxBias{0.5}, omega_ro, 75.0);
  const auto traj = integrate_cavity(kDevice, pulse, drive, 3e-6, 0.5e-9);

  const auto point = dispersive_point(kDevice, FluxBias{0.5});
  const auto d = detunings(point, omega_ro);
  const double k2 = kDevice.kappa * kDevice.kappa / 4.0;
  const double n0 = drive.epsilon * drive.epsilon / (d.minus * d.minus + k2);
  const double n1 = drive.epsilon * drive.epsilon / (d.plus * d.plus + k2);
  CHECK(rel(std::norm(traj.alpha0.back()), n0) < 1e-6);
  CHECK(rel(std::norm(traj.alpha1.back()), n1) < 1e-6);
  CHECK(std::abs(0.5 * (std::norm(traj.alpha0.back()) + std::norm(traj.alpha1.back())) - 75.0) < 1e-6 * 75.0);
}

TEST_CASE("no drive, no field") {
  const auto traj = integrate_cavity(kDevice, paper_pulse(), DriveSpec{from_hz(5.1747e9), 0.0, 0.0},
                                     500e-9, 0.5e-9, swept());
  for (std::size_t k = 0; k < traj.time.size(); ++k) {
    CHECK(traj.alpha0[k] == cplx{});
    CHECK(traj.alpha1[k] == cplx{});
  }
}

TEST_CASE("resonant ring-up follows the closed form") {
  // Drive exactly at the |0> cavity frequency: alpha0 = (2 eps / kappa)(1 - exp(-kappa t / 2)).
  const auto point = dispersive_point(kDevice, FluxBias{0.5});
  const double kappa = kDevice.kappa;
  const DriveSpec drive{point.omega_r0, 75.0, std::sqrt(75.0) * kappa / 2.0};
  const auto traj = integrate_cavity(kDevice, flat_pulse(), drive, 600e-9, 0.25e-9);

  const double window = 5.0 / kappa;
  CHECK(std::abs(window - 131.7e-9) < 0.5e-9);

  const double n_ss = 75.0;
  for (std::size_t k = 0; k < traj.time.size(); k += 40) {
    const double x = 1.0 - std::exp(-kappa * traj.time[k] / 2.0);
    CHECK(std::abs(std::norm(traj.alpha0[k]) - n_ss * x * x) < 1e-6 * n_ss);
  }
  // Photon fraction at the 5/kappa window, and the time at which it reaches 99%.
  const double at_window = std::pow(1.0 - std::exp(-2.5), 2);
  const auto k_win = static_cast<std::size_t>(std::llround(window / traj.dt));
  const double frac = std::norm(traj.alpha0[k_win]) / n_ss;
  const double expect = std::pow(1.0 - std::exp(-kappa * traj.time[k_win] / 2.0), 2);
  CHECK(std::abs(frac - expect) < 1e-6);
  CHECK(std::abs(expect - at_window) < 5e-3);
  const double t99 = 2.0 * std::log(1.0 / (1.0 - std::sqrt(0.99))) / kappa;
  std::size_t first = 0;
  while (first < traj.time.size() && std::norm(traj.alpha0[first]) < 0.99 * n_ss) ++first;
  REQUIRE(first < traj.time.size());
  CHECK(std::abs(traj.time[first] - t99) <= traj.dt);
}

TEST_CASE("input-output boundary condition holds pointwise") {
  const auto drive = make_drive(kDevice, FluxBias{0.6567}, from_hz(5.1747e9), 75.0);
  const auto traj = integrate_cavity(kDevice, paper_pulse(), drive, 500e-9, 0.5e-9, swept());
  const double sk = std::sqrt(kDevice.kappa);
  for (std::size_t k = 0; k < traj.time.size(); ++k) {
    CHECK(std::abs(traj.alpha_out0[k] - traj.alpha_in[k] - sk * traj.alpha0[k]) < 1e-12 * (1.0 + std::abs(traj.alpha_out0[k])));
    CHECK(std::abs(traj.alpha_out1[k] - traj.alpha_in[k] - sk * traj.alpha1[k]) < 1e-12 * (1.0 + std::abs(traj.alpha_out1[k])));
  }
  CHECK(traj.integral_out0.front() == cplx{});
}

TEST_CASE("field is linear in the drive amplitude") {
  auto drive = make_drive(kDevice, FluxBias{0.6567}, from_hz(5.1747e9), 30.0);
  const auto a = integrate_cavity(kDevice, paper_pulse(), drive, 300e-9, 0.5e-9, swept());
  drive.epsilon *= 2.0;
  const auto b = integrate_cavity(kDevice, paper_pulse(), drive, 300e-9, 0.5e-9, swept());
  for (std::size_t k = 1; k < a.time.size(); ++k) {
    CHECK(std::abs(b.alpha0[k] - 2.0 * a.alpha0[k]) < 1e-9 * std::abs(b.alpha0[k]));
    CHECK(std::abs(b.alpha1[k] - 2.0 * a.alpha1[k]) < 1e-9 * std::abs(b.alpha1[k]));
  }
}

TEST_CASE("halving dt leaves SNR(400 ns) unchanged") {
  const auto drive = make_drive(kDevice, FluxBias{0.6567}, from_hz(5.1747e9), 75.0);
  const auto a = integrate_cavity(kDevice, paper_pulse(), drive, 500e-9, 0.5e-9, swept());
  const auto b = integrate_cavity(kDevice, paper_pulse(), drive, 500e-9, 0.25e-9, swept());
  const std::array<double, 1> tau{400e-9};
  const double sa = snr_vs_time(a, 0.0604, tau).snr.front();
  const double sb = snr_vs_time(b, 0.0604, tau).snr.front();
  CHECK(rel(sa, sb) < 1e-4);
}

TEST_CASE("integrator step must resolve the cavity") {
  const auto drive = make_drive(kDevice, FluxBias{0.5}, default_readout_frequency(kDevice), 10.0);
  CHECK_THROWS_AS(integrate_cavity(kDevice, flat_pulse(), drive, 500e-9, 10e-9), ResolutionError);
  CHECK_THROWS_AS(integrate_cavity(kDevice, flat_pulse(), drive, 500.3e-9, 0.5e-9), ArgumentError);
  CHECK_THROWS_AS(integrate_cavity(kDevice, flat_pulse(), drive, 0.0, 0.5e-9), ArgumentError);
}

TEST_CASE("crossing policy decides how the 1-3 resonance is traversed") {
  const auto drive = make_drive(kDevice, FluxBias{0.6567}, from_hz(5.1747e9), 75.0);
  try {
    integrate_cavity(kDevice, paper_pulse(), drive, 500e-9, 0.5e-9);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.from() == 1);
    CHECK(e.to() == 3);
    CHECK(std::abs(e.flux() - 0.5157) < 2e-3);
  }
  CHECK_NOTHROW(integrate_cavity(kDevice, paper_pulse(), drive, 500e-9, 0.5e-9, swept()));
}

TEST_CASE("SNR-limited error") {
  CHECK(snr_limited_error(0.0) == 0.5);
  double prev = 0.5;
  for (double s = 0.25; s <= 30.0; s += 0.25) {
    const double e = snr_limited_error(s);
    CHECK(e <= prev);
    if (s >= 20.0) CHECK(e < 1e-20);
    prev = e;
  }
  CHECK_THROWS_AS(snr_limited_error(-0.1), ArgumentError);
  CHECK_THROWS_AS(snr_limited_error(NAN), ArgumentError);

  CHECK(std::abs(snr_for_error(1e-3) - bisect_snr(1e-3)) < 1e-9);
  CHECK(std::abs(bisect_snr(1e-3) - 4.3703) < 1e-4);
  for (double e : {0.4, 0.1, 1e-2, 1e-5, 1e-9})
    CHECK(rel(snr_limited_error(snr_for_error(e)), e) < 1e-9);
  CHECK_THROWS_AS(snr_for_error(0.0), ArgumentError);
  CHECK_THROWS_AS(snr_for_error(0.6), ArgumentError);
}

TEST_CASE("zero dispersive shift gives zero SNR") {
  FluxoniumParams p;
  p.g = 0.0;
  const auto drive = make_drive(p, FluxBias{0.6567}, from_hz(5.1747e9), 75.0);
  const auto traj = integrate_cavity(p, paper_pulse(), drive, 500e-9, 0.5e-9);
  const auto curve = snr_vs_time(traj, 0.0604);
  for (std::size_t k = 0; k < curve.snr.size(); ++k) {
    CHECK(curve.snr[k] == 0.0);
    CHECK(curve.err_snr_limited[k] == 0.5);
  }
}

TEST_CASE("SNR evaluation window and scaling") {
  const auto drive = make_drive(kDevice, FluxBias{0.6567}, from_hz(5.1747e9), 75.0);
  const auto traj = integrate_cavity(kDevice, paper_pulse(), drive, 500e-9, 0.5e-9, swept());
  SnrOptions opts;
  opts.acquisition_offset = 40e-9;
  const std::array<double, 2> bad_lo{30e-9, 100e-9};
  const std::array<double, 1> bad_hi{541e-9};
  CHECK_THROWS_AS(snr_vs_time(traj, 0.0604, bad_lo, opts), ArgumentError);
  CHECK_THROWS_AS(snr_vs_time(traj, 0.0604, bad_hi, opts), ArgumentError);
  CHECK_THROWS_AS(snr_vs_time(traj, 0.0, opts), ArgumentError);
  CHECK_THROWS_AS(snr_vs_time(traj, 1.5, opts), ArgumentError);

  // SNR scales as sqrt(eta) and linearly with the normalization.
  const std::array<double, 1> tau{360e-9};
  const double base = snr_vs_time(traj, 0.0604, tau, opts).snr.front();
  CHECK(rel(snr_vs_time(traj, 4 * 0.0604, tau, opts).snr.front(), 2.0 * base) < 1e-12);
  opts.noise_normalization = 3.0;
  CHECK(rel(snr_vs_time(traj, 0.0604, tau, opts).snr.front(), 3.0 * base) < 1e-12);

  const double c = fit_noise_normalization(traj, 0.0604, 360e-9, 1e-3, 40e-9);
  opts.noise_normalization = c;
  CHECK(rel(snr_vs_time(traj, 0.0604, tau, opts).err_snr_limited.front(), 1e-3) < 1e-9);
}
