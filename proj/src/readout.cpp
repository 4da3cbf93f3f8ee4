#include "fluxread/readout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "fluxread/errors.hpp"

namespace fluxread {

namespace {

struct DispersiveTable {
  std::vector<double> flux;
  std::vector<double> chi0;
  std::vector<double> chi1;

  std::pair<double, double> at(double phi) const {
    if (flux.size() == 1) return {chi0.front(), chi1.front()};
    const double lo = flux.front();
    const double hi = flux.back();
    const double x = std::clamp(phi, lo, hi);
    const double pos = (x - lo) / (hi - lo) * static_cast<double>(flux.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(pos), flux.size() - 2);
    const double w = pos - static_cast<double>(k);
    return {chi0[k] + w * (chi0[k + 1] - chi0[k]), chi1[k] + w * (chi1[k + 1] - chi1[k])};
  }
};

DispersiveTable build_table(const FluxoniumParams& params, const FluxPulse& pulse,
                            const CavityOptions& options) {
  const double lo = std::min(pulse.base.phi, pulse.hold_flux());
  const double hi = std::max(pulse.base.phi, pulse.hold_flux());
  std::vector<double> grid;
  if (hi == lo) {
    grid = {lo};
  } else {
    const int n = std::max(options.table_points, 2);
    grid.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  }

  const auto spectra = spectrum_vs_flux(params, grid, options.n_levels);

  // A transition can cross omega_r between two nodes without landing inside
  // the guard at either; catch that from the sign of |w_ij| - omega_r.
  // With g = 0 nothing couples, so there is nothing to cross.
  const bool check = options.crossing == CrossingPolicy::reject && params.g != 0.0;
  for (std::size_t k = 0; check && k + 1 < spectra.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = i + 1; j < options.n_levels; ++j) {
        const double a = transition_frequency(spectra[k], i, j) - params.omega_r_bare;
        const double b = transition_frequency(spectra[k + 1], i, j) - params.omega_r_bare;
        if ((a < 0.0) != (b < 0.0)) {
          const double phi = 0.5 * (grid[k] + grid[k + 1]);
          std::ostringstream msg;
          msg << "flux pulse crosses the " << i << "->" << j
              << " resonance with omega_r near phi=" << phi;
          throw DivergenceError(msg.str(), phi, i, j);
        }
      }
    }
  }

  DispersiveTable table;
  table.flux = grid;
  for (const auto& spec : spectra) {
    if (options.crossing == CrossingPolicy::regularized) {
      table.chi0.push_back(regularized_resonator_pull(spec, 0, params.g, params.omega_r_bare));
      table.chi1.push_back(regularized_resonator_pull(spec, 1, params.g, params.omega_r_bare));
      continue;
    }
    const auto p = dispersive_point(params, spec);
    table.chi0.push_back(p.chi0);
    table.chi1.push_back(p.chi1);
  }
  return table;
}

}  // namespace

double FluxPulse::at(double t) const {
  const double down_start = rise_time + hold_time;
  if (t <= 0.0) return base.phi;
  if (t < rise_time) return base.phi + delta_flux * 0.5 * (1.0 - std::cos(std::numbers::pi * t / rise_time));
  if (t <= down_start) return hold_flux();
  const double s = t - down_start;
  if (s < rise_time) return base.phi + delta_flux * 0.5 * (1.0 + std::cos(std::numbers::pi * s / rise_time));
  return base.phi;
}

FluxPulse make_flux_pulse(FluxBias base, double delta_flux, double rise_time, double hold_time,
                          double dt) {
  if (!std::isfinite(base.phi) || !std::isfinite(delta_flux))
    throw ArgumentError("flux pulse needs finite base and delta");
  if (!(rise_time >= 0.0) || !(hold_time >= 0.0) || !std::isfinite(rise_time + hold_time))
    throw ArgumentError("rise_time and hold_time must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("sample_dt must be > 0");
  if (rise_time > 0.0 && dt >= rise_time / 4.0) {
    std::ostringstream msg;
    msg << "sample_dt " << dt << " cannot resolve a rise time of " << rise_time;
    throw ResolutionError(msg.str());
  }

  FluxPulse p;
  p.base = base;
  p.delta_flux = delta_flux;
  p.rise_time = rise_time;
  p.hold_time = hold_time;
  p.sample_dt = dt;
  const double total = 2.0 * rise_time + hold_time;
  const auto n = static_cast<std::size_t>(std::floor(total / dt + 1e-9)) + 1;
  p.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) p.samples[k] = p.at(static_cast<double>(k) * dt);
  return p;
}

Detunings detunings(const DispersivePoint& point, double omega_ro) {
  const double mid = 0.5 * (point.omega_r0 + point.omega_r1) - omega_ro;
  return {mid + point.chi, mid - point.chi};
}

double drive_from_photons(double n_bar, double delta_plus, double delta_minus, double kappa) {
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw ArgumentError("n_bar must be >= 0");
  if (!(kappa > 0.0)) throw ArgumentError("kappa must be > 0");
  const double k2 = kappa * kappa / 4.0;
  const double inv = 1.0 / (delta_plus * delta_plus + k2) + 1.0 / (delta_minus * delta_minus + k2);
  return std::sqrt(2.0 * n_bar / inv);
}

DriveSpec make_drive(const FluxoniumParams& params, FluxBias readout_flux, double omega_ro,
                     double n_bar, int n_levels) {
  const auto point = dispersive_point(params, readout_flux, n_levels);
  const auto d = detunings(point, omega_ro);
  return {omega_ro, n_bar, drive_from_photons(n_bar, d.plus, d.minus, params.kappa)};
}

double default_readout_frequency(const FluxoniumParams& params, int n_levels) {
  const auto p = dispersive_point(params, FluxBias{0.5}, n_levels);
  return p.omega_r0 + p.chi;
}

cplx CavityTrajectory::integral_out(int state, double t) const {
  const auto& integral = state == 0 ? integral_out0 : integral_out1;
  if (time.empty()) throw ArgumentError("empty trajectory");
  const double tol = 1e-9 * std::max(dt, 1e-300);
  if (t < -tol || t > time.back() + tol) throw ArgumentError("time outside trajectory");
  const double pos = std::clamp(t / dt, 0.0, static_cast<double>(time.size() - 1));
  const auto k = std::min(static_cast<std::size_t>(pos), time.size() - 1);
  if (k + 1 >= time.size()) return integral.back();
  const double w = pos - static_cast<double>(k);
  return integral[k] + w * (integral[k + 1] - integral[k]);
}

CavityTrajectory integrate_cavity(const FluxoniumParams& params, const FluxPulse& pulse,
                                  const DriveSpec& drive, double duration, double dt,
                                  const CavityOptions& options) {
  params.validate();
  if (!(duration > 0.0) || !(dt > 0.0)) throw ArgumentError("duration and dt must be > 0");
  if (!(drive.epsilon >= 0.0) || !std::isfinite(drive.epsilon) || !(drive.n_bar >= 0.0))
    throw ArgumentError("drive amplitude and n_bar must be >= 0");
  if (!(options.drive_delay >= 0.0)) throw ArgumentError("drive_delay must be >= 0");
  const double steps_real = duration / dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (steps == 0 || std::abs(steps_real - static_cast<double>(steps)) > 1e-6 * steps_real)
    throw ArgumentError("duration must be a whole number of steps dt");

  const auto table = build_table(params, pulse, options);
  const double kappa = params.kappa;
  const double sqrt_kappa = std::sqrt(kappa);

  double max_detuning = 0.0;
  for (std::size_t k = 0; k < table.flux.size(); ++k) {
    DispersivePoint p;
    p.omega_r0 = params.omega_r_bare + table.chi0[k];
    p.omega_r1 = params.omega_r_bare + table.chi1[k];
    p.chi = (p.omega_r1 - p.omega_r0) / 2.0;
    const auto d = detunings(p, drive.omega_ro);
    max_detuning = std::max({max_detuning, std::abs(d.plus), std::abs(d.minus)});
  }
  double dt_limit = 1.0 / kappa;
  if (max_detuning > 0.0) dt_limit = std::min(dt_limit, kTwoPi / max_detuning);
  dt_limit /= 20.0;
  if (dt > dt_limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt " << dt << " exceeds the cavity resolution limit " << dt_limit;
    throw ResolutionError(msg.str());
  }

  auto detuning_at = [&](double t) {
    const auto [c0, c1] = table.at(pulse.at(t));
    const double mid = params.omega_r_bare + 0.5 * (c0 + c1) - drive.omega_ro;
    const double chi = 0.5 * (c1 - c0);
    return std::pair{mid - chi, mid + chi};  // (|0>, |1>)
  };
  auto drive_on = [&](double t) { return t >= options.drive_delay ? 1.0 : 0.0; };

  // y = (alpha0, alpha1, int alpha0, int alpha1)
  using State = std::array<cplx, 4>;
  const cplx i_unit{0.0, 1.0};
  auto rhs = [&](double t, const State& y) {
    const auto [d0, d1] = detuning_at(t);
    const double source = drive.epsilon * drive_on(t);
    State dy;
    dy[0] = -i_unit * d0 * y[0] - 0.5 * kappa * y[0] + source;
    dy[1] = -i_unit * d1 * y[1] - 0.5 * kappa * y[1] + source;
    dy[2] = y[0];
    dy[3] = y[1];
    return dy;
  };
  auto axpy = [](const State& y, double h, const State& k) {
    State out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = y[i] + h * k[i];
    return out;
  };

  CavityTrajectory traj;
  traj.kappa = kappa;
  traj.dt = dt;
  const std::size_t n = steps + 1;
  traj.time.resize(n);
  traj.flux.resize(n);
  traj.alpha0.resize(n);
  traj.alpha1.resize(n);
  traj.alpha_in.resize(n);
  traj.alpha_out0.resize(n);
  traj.alpha_out1.resize(n);
  traj.integral_out0.resize(n);
  traj.integral_out1.resize(n);

  State y{};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (k > 0) {
      const double t0 = static_cast<double>(k - 1) * dt;
      const State k1 = rhs(t0, y);
      const State k2 = rhs(t0 + 0.5 * dt, axpy(y, 0.5 * dt, k1));
      const State k3 = rhs(t0 + 0.5 * dt, axpy(y, 0.5 * dt, k2));
      const State k4 = rhs(t0 + dt, axpy(y, dt, k3));
      for (std::size_t i = 0; i < 4; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const cplx a_in = -drive.epsilon / sqrt_kappa * drive_on(t);
    const double on_time = std::max(0.0, t - options.drive_delay);
    const cplx in_integral = -drive.epsilon / sqrt_kappa * on_time;
    traj.time[k] = t;
    traj.flux[k] = pulse.at(t);
    traj.alpha0[k] = y[0];
    traj.alpha1[k] = y[1];
    traj.alpha_in[k] = a_in;
    traj.alpha_out0[k] = a_in + sqrt_kappa * y[0];
    traj.alpha_out1[k] = a_in + sqrt_kappa * y[1];
    traj.integral_out0[k] = in_integral + sqrt_kappa * y[2];
    traj.integral_out1[k] = in_integral + sqrt_kappa * y[3];
  }
  return traj;
}

namespace {

void check_snr_inputs(double eta, const SnrOptions& options) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("eta must be in (0, 1]");
  if (!(options.acquisition_offset >= 0.0)) throw ArgumentError("acquisition_offset must be >= 0");
  if (!(options.noise_normalization > 0.0)) throw ArgumentError("noise_normalization must be > 0");
}

double snr_from_integrals(cplx i0, cplx i1, double tau_sim, double eta, double c) {
  if (tau_sim <= 0.0) return 0.0;
  return c * std::sqrt(2.0 * eta / tau_sim) * std::abs(i1 - i0);
}

}  // namespace

SnrCurve snr_vs_time(const CavityTrajectory& traj, double eta, const SnrOptions& options) {
  check_snr_inputs(eta, options);
  SnrCurve curve;
  for (std::size_t k = 1; k < traj.time.size(); ++k) {
    const double s = snr_from_integrals(traj.integral_out0[k], traj.integral_out1[k], traj.time[k],
                                        eta, options.noise_normalization);
    curve.tau.push_back(traj.time[k] + options.acquisition_offset);
    curve.snr.push_back(s);
    curve.err_snr_limited.push_back(snr_limited_error(s));
  }
  return curve;
}

SnrCurve snr_vs_time(const CavityTrajectory& traj, double eta, std::span<const double> taus,
                     const SnrOptions& options) {
  check_snr_inputs(eta, options);
  SnrCurve curve;
  const double tol = 1e-9 * traj.dt;
  for (double tau : taus) {
    const double sim = tau - options.acquisition_offset;
    if (!(sim >= -tol && sim <= traj.duration() + tol)) {
      std::ostringstream msg;
      msg << "tau " << tau << " outside the simulated window [" << options.acquisition_offset
          << ", " << options.acquisition_offset + traj.duration() << "]";
      throw ArgumentError(msg.str());
    }
    const double t = std::clamp(sim, 0.0, traj.duration());
    const double s = snr_from_integrals(traj.integral_out(0, t), traj.integral_out(1, t), t, eta,
                                        options.noise_normalization);
    curve.tau.push_back(tau);
    curve.snr.push_back(s);
    curve.err_snr_limited.push_back(snr_limited_error(s));
  }
  return curve;
}

double snr_limited_error(double snr) {
  if (!(snr >= 0.0)) throw ArgumentError("snr must be >= 0");
  return 0.5 * std::erfc(snr / 2.0);
}

double snr_for_error(double err) {
  if (!(err > 0.0 && err <= 0.5)) throw ArgumentError("error must be in (0, 0.5]");
  return 2.0 * boost::math::erfc_inv(2.0 * err);
}

double fit_noise_normalization(const CavityTrajectory& traj, double eta, double tau,
                               double target_error, double acquisition_offset) {
  SnrOptions opts;
  opts.acquisition_offset = acquisition_offset;
  const std::array<double, 1> taus{tau};
  const double raw = snr_vs_time(traj, eta, taus, opts).snr.front();
  if (!(raw > 0.0)) throw FitError("no signal separation to normalize");
  return snr_for_error(target_error) / raw;
}

}  // namespace fluxread
