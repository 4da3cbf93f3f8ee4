#include "fluxread/commands.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "fluxread/calibration.hpp"
#include "fluxread/dispersive.hpp"
#include "fluxread/errors.hpp"
#include "fluxread/io.hpp"
#include "fluxread/parallel.hpp"
#include "fluxread/shots.hpp"

namespace fluxread {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not usable");
}

std::ostream* logger(const CommandOptions& o) { return o.log; }

void note(const CommandOptions& o, const std::string& line) {
  if (auto* os = logger(o)) *os << line << '\n';
}

double omega_ro_for(const ExperimentConfig& c) {
  return c.drive.omega_ro ? *c.drive.omega_ro : default_readout_frequency(c.device, c.solver.n_levels);
}

NoiseModel noise_for(const ExperimentConfig& c, ReadoutMode mode) {
  NoiseModel n;
  n.p_init0 = c.noise.p_init0;
  n.p_init1 = c.noise.p_init1;
  n.t1 = mode == ReadoutMode::flux_pulse ? c.noise.t1 : c.noise.t1_sweet_spot;
  n.eta = c.readout.eta;
  return n;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

// JSON has no NaN; non-finite numbers become null.
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

ReadoutSimulation simulate_readout(const ExperimentConfig& c, double delta_flux, double n_bar) {
  ReadoutSimulation sim;
  sim.mode = delta_flux == 0.0 ? ReadoutMode::sweet_spot : ReadoutMode::flux_pulse;
  sim.pulse = make_flux_pulse(FluxBias{c.pulse.base_flux}, delta_flux, c.pulse.rise_time,
                              c.pulse.hold_time, c.pulse.sample_dt);
  sim.drive = make_drive(c.device, FluxBias{sim.pulse.hold_flux()}, omega_ro_for(c), n_bar,
                         c.solver.n_levels);
  CavityOptions opts;
  opts.n_levels = c.solver.n_levels;
  opts.table_points = c.readout.table_points;
  opts.drive_delay = c.drive.delay;
  opts.crossing = c.readout.crossing;
  sim.trajectory = integrate_cavity(c.device, sim.pulse, sim.drive, c.readout.duration, c.readout.dt, opts);
  return sim;
}

ReadoutSimulation simulate_readout(const ExperimentConfig& c, ReadoutMode mode) {
  auto sim = simulate_readout(c, mode == ReadoutMode::flux_pulse ? c.pulse.delta_flux : 0.0, c.drive.n_bar);
  sim.mode = mode;
  return sim;
}

double resolve_noise_normalization(const ExperimentConfig& c) {
  if (c.readout.noise_normalization) return *c.readout.noise_normalization;
  const auto sim = simulate_readout(c, ReadoutMode::flux_pulse);
  return fit_noise_normalization(sim.trajectory, c.readout.eta, c.readout.anchor_tau,
                                 c.readout.anchor_error, c.readout.acquisition_offset);
}

std::vector<double> readout_tau_grid(const ExperimentConfig& c) {
  if (!c.readout.tau_grid.empty()) return c.readout.tau_grid;
  std::vector<double> taus;
  constexpr double step = 10e-9;
  const auto n = static_cast<int>(std::floor(c.readout.duration / step + 1e-9));
  for (int k = 1; k <= n; ++k) taus.push_back(c.readout.acquisition_offset + k * step);
  return taus;
}

ReadoutTable readout_table(const ExperimentConfig& c, const ReadoutSimulation& sim,
                           double noise_normalization, std::size_t n_shots, std::uint64_t seed) {
  const SnrOptions snr_opts{c.readout.acquisition_offset, noise_normalization};
  const auto taus = readout_tau_grid(c);
  ReadoutTable table;
  table.curve = snr_vs_time(sim.trajectory, c.readout.eta, taus, snr_opts);
  if (n_shots == 0) return table;

  const auto noise = noise_for(c, sim.mode);
  table.err_assignment.assign(taus.size(), kNaN);
  parallel_for(taus.size(), [&](std::size_t i) {
    const auto shots = sample_shots(sim.trajectory, noise, taus[i], n_shots, seed + i, snr_opts);
    table.err_assignment[i] = assignment_error(shots, fit_gaussians(shots)).error;
  });
  return table;
}

int cmd_spectrum(const ExperimentConfig& c, const CommandOptions& o) {
  validate_config(c);
  prepare_out_dir(o.out_dir);
  const auto specs = spectrum_vs_flux(c.device, c.spectrum.flux_grid, c.solver.n_levels, c.solver.basis_size);

  std::vector<std::string> header{"flux"};
  for (int k = 1; k <= c.spectrum.max_level; ++k) header.push_back("omega_0" + std::to_string(k) + "_hz");
  std::vector<std::vector<double>> rows;
  for (const auto& s : specs) {
    std::vector<double> row{s.flux.phi};
    for (int k = 1; k <= c.spectrum.max_level; ++k) row.push_back(to_hz(transition_frequency(s, 0, k)));
    rows.push_back(std::move(row));
  }
  write_csv(o.out_dir / "spectrum.csv", header, rows);
  note(o, "spectrum: " + std::to_string(rows.size()) + " flux points -> " + (o.out_dir / "spectrum.csv").string());

  if (o.svg && rows.size() > 1) {
    SvgPlot plot{"Transition frequencies", "flux (flux quanta)", "frequency (GHz)", false, {}};
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    for (int k = 1; k <= c.spectrum.max_level; ++k) {
      SvgSeries s{"0-" + std::to_string(k), colors[(k - 1) % 6], {}, {}};
      for (const auto& row : rows) {
        s.x.push_back(row[0]);
        s.y.push_back(row[static_cast<std::size_t>(k)] / 1e9);
      }
      plot.series.push_back(std::move(s));
    }
    write_svg(o.out_dir / "spectrum.svg", plot);
  }
  return 0;
}

int cmd_chi(const ExperimentConfig& c, const CommandOptions& o) {
  validate_config(c);
  prepare_out_dir(o.out_dir);
  const auto& grid = c.chi.flux_grid;
  const auto points = chi_vs_flux(c.device, grid, c.solver.n_levels, c.chi.resonance_guard);

  std::vector<std::vector<double>> rows;
  for (const auto& p : points) {
    if (p.divergent) rows.push_back({p.flux.phi, kNaN, kNaN, kNaN, 1.0});
    else rows.push_back({p.flux.phi, to_hz(p.chi), to_hz(p.omega_r0), to_hz(p.omega_r1), 0.0});
  }

  const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<ResonanceFlag> mist;
  std::size_t n_roots = 0;
  for (double a = lo; a < hi; a += 1.0) {
    const double b = std::min(hi, a + 1.0);
    // With g = 0 the resonator is decoupled and crossings pull nothing.
    if (c.device.g > 0.0) {
      for (const auto& root : divergence_scan(c.device, a, b, c.solver.n_levels)) {
        rows.push_back({root.flux.phi, kNaN, kNaN, kNaN, 1.0});
        ++n_roots;
      }
    }
    if (c.chi.mist_window > 0.0) {
      const auto flags = mist_scan(c.device, a, b, c.solver.n_levels, c.chi.mist_max_harmonic, c.chi.mist_window);
      mist.insert(mist.end(), flags.begin(), flags.end());
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x[0] < y[0]; });
  write_csv(o.out_dir / "chi.csv", {"flux", "chi_hz", "omega_r0_hz", "omega_r1_hz", "divergence_flag"}, rows);

  std::stable_sort(mist.begin(), mist.end(), [](const auto& x, const auto& y) { return x.flux.phi < y.flux.phi; });
  std::vector<std::vector<double>> mist_rows;
  for (const auto& f : mist)
    mist_rows.push_back({f.flux.phi, static_cast<double>(f.transition.from), static_cast<double>(f.transition.to),
                         static_cast<double>(f.harmonic), to_hz(f.detuning)});
  write_csv(o.out_dir / "mist.csv", {"flux", "from", "to", "harmonic", "detuning_hz"}, mist_rows);
  note(o, "chi: " + std::to_string(points.size()) + " grid points, " + std::to_string(n_roots) +
              " divergence roots, " + std::to_string(mist.size()) + " multi-photon flags");

  if (o.svg) {
    SvgPlot plot{"Dispersive shift", "flux (flux quanta)", "chi / 2pi (MHz)", false, {}};
    SvgSeries s{"chi", "#1f77b4", {}, {}};
    for (const auto& row : rows) {
      // Clip near divergences so the finite part of the curve stays readable.
      if (!std::isfinite(row[1]) || std::abs(row[1]) > 20e6) continue;
      s.x.push_back(row[0]);
      s.y.push_back(row[1] / 1e6);
    }
    plot.series.push_back(std::move(s));
    write_svg(o.out_dir / "chi.svg", plot);
  }
  return 0;
}

int cmd_readout(const ExperimentConfig& c, const CommandOptions& o) {
  validate_config(c);
  prepare_out_dir(o.out_dir);
  const std::size_t n_shots = o.shots.value_or(c.shots.n_shots);
  const std::uint64_t seed = o.seed.value_or(c.shots.seed);
  const double norm = resolve_noise_normalization(c);
  note(o, "readout: noise normalization " + format_double(norm));

  SvgPlot plot{"Readout error", "integration time (ns)", "error", true, {}};
  struct Mode {
    ReadoutMode mode;
    bool enabled;
    const char* file;
    const char* label;
    const char* color;
    std::uint64_t seed_offset;
  };
  const Mode modes[] = {
      {ReadoutMode::flux_pulse, c.readout.flux_pulse, "readout_fpa.csv", "FPA", "#d62728", 0},
      {ReadoutMode::sweet_spot, c.readout.sweet_spot, "readout_ss.csv", "SS", "#1f77b4", 1ull << 32},
  };
  for (const auto& m : modes) {
    if (!m.enabled) continue;
    const auto sim = simulate_readout(c, m.mode);
    const auto table = readout_table(c, sim, norm, n_shots, seed + m.seed_offset);
    const auto& curve = table.curve;

    std::vector<std::string> header{"tau", "snr", "err_snr_limited"};
    if (n_shots > 0) header.push_back("err_assignment");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < curve.tau.size(); ++i) {
      rows.push_back({curve.tau[i], curve.snr[i], curve.err_snr_limited[i]});
      if (n_shots > 0) rows.back().push_back(table.err_assignment[i]);
    }
    write_csv(o.out_dir / m.file, header, rows);
    note(o, std::string("readout: ") + m.label + " chi/2pi = " +
                format_double(to_hz(dispersive_point(c.device, FluxBias{sim.pulse.hold_flux()}, c.solver.n_levels).chi)) +
                " Hz -> " + (o.out_dir / m.file).string());

    if (c.shots.dump_tau && n_shots > 0) {
      const SnrOptions snr_opts{c.readout.acquisition_offset, norm};
      const auto shots = sample_shots(sim.trajectory, noise_for(c, m.mode), *c.shots.dump_tau, n_shots,
                                      seed + m.seed_offset + (1ull << 40), snr_opts);
      std::ofstream os(o.out_dir / (std::string("shots_") + (m.mode == ReadoutMode::flux_pulse ? "fpa" : "ss") + ".csv"),
                       std::ios::binary);
      if (!os) throw Error("cannot write shot dump");
      write_shots_csv(os, shots);
    }

    std::vector<double> tau_ns(curve.tau.size());
    std::transform(curve.tau.begin(), curve.tau.end(), tau_ns.begin(), [](double t) { return t * 1e9; });
    plot.series.push_back({std::string(m.label) + " SNR-limited", m.color, tau_ns, curve.err_snr_limited, false, false});
    if (n_shots > 0)
      plot.series.push_back({std::string(m.label) + " assignment", m.color, tau_ns, table.err_assignment, true, false});
  }
  if (o.svg) write_svg(o.out_dir / "readout.svg", plot);
  return 0;
}

int cmd_calibrate(const ExperimentConfig& c, const CommandOptions& o) {
  validate_config(c);
  const auto& cal = c.calibration;
  if (cal.snr_csv.empty()) throw ConfigError("[calibration] snr_csv is required");
  if (cal.coherence_csv.empty() && cal.ramsey_csvs.empty())
    throw ConfigError("[calibration] needs coherence_csv or ramsey_csvs");
  if (!cal.ramsey_csvs.empty() && cal.coherence_csv.empty() && cal.ramsey_amplitudes.size() != cal.ramsey_csvs.size())
    throw ConfigError("[calibration] ramsey_amplitudes must list one amplitude per ramsey_csvs entry");
  // Read every input before computing so a missing file is reported up front.
  const auto snr = read_xy_csv(cal.snr_csv);
  XYData coherence;
  std::string sigma_source;
  if (!cal.coherence_csv.empty()) {
    coherence = read_xy_csv(cal.coherence_csv);
    sigma_source = "coherence_csv";
  } else {
    std::vector<XYData> ramseys;
    for (const auto& p : cal.ramsey_csvs) ramseys.push_back(read_xy_csv(p));
    for (std::size_t i = 0; i < ramseys.size(); ++i) {
      const auto fit = fit_ramsey(ramseys[i].x, ramseys[i].y);
      if (fit.flat) continue;  // fully dephased; carries no width information
      coherence.x.push_back(cal.ramsey_amplitudes[i]);
      coherence.y.push_back(fit.coherence);
    }
    sigma_source = "ramsey_csvs";
  }
  std::optional<XYData> transmission;
  if (!cal.transmission_csv.empty()) transmission = read_xy_csv(cal.transmission_csv);
  prepare_out_dir(o.out_dir);

  const double a = fit_snr_slope(snr.x, snr.y);
  const auto coh = fit_coherence_gaussian(coherence.x, coherence.y);
  const auto eff = make_efficiency_fit(a, coh.sigma_v);
  double kappa = c.device.kappa;
  std::string kappa_source = "device";
  if (transmission) {
    kappa = from_hz(fit_linewidth(transmission->x, transmission->y).kappa);
    kappa_source = "transmission_csv";
  }
  const auto photons = photons_from_dac(cal.epsilon_v, kappa, cal.chi, coh.sigma_v, cal.tau_total, cal.tau_pulse);

  nlohmann::json report;
  report["a"] = a;
  report["sigma_v"] = coh.sigma_v;
  report["eta"] = eff.eta;
  report["eta_plausible"] = eff.plausible;
  report["n_bar_total"] = number_or_null(photons.n_bar_total);
  report["n_bar_active"] = number_or_null(photons.n_bar_active);
  report["kappa"] = kappa;
  report["kappa_hz"] = to_hz(kappa);
  report["kappa_source"] = kappa_source;
  report["chi_hz"] = to_hz(cal.chi);
  report["epsilon_v"] = cal.epsilon_v;
  report["tau_total"] = cal.tau_total;
  report["tau_pulse"] = cal.tau_pulse;
  report["rho0"] = coh.rho0;
  report["sigma_source"] = sigma_source;
  write_json(o.out_dir / "calibration_report.json", report);
  note(o, "calibrate: eta = " + format_double(eff.eta) + (eff.plausible ? "" : " (outside (0, 1])") +
              ", n_bar_total = " + format_double(photons.n_bar_total) +
              ", n_bar_active = " + format_double(photons.n_bar_active));
  return 0;
}

int cmd_sweep(const ExperimentConfig& c, const CommandOptions& o) {
  validate_config(c);
  prepare_out_dir(o.out_dir);
  const std::size_t n_shots = o.shots.value_or(c.shots.n_shots);
  const std::uint64_t seed = o.seed.value_or(c.shots.seed);
  const double norm = resolve_noise_normalization(c);
  const SnrOptions snr_opts{c.readout.acquisition_offset, norm};
  const auto& deltas = c.sweep.delta_flux;
  const auto& photons = c.sweep.n_bar;
  const std::size_t cells = deltas.size() * photons.size();

  struct Cell {
    double snr = kNaN, err_snr = kNaN, err_assign = kNaN;
    bool divergent = false;
  };
  std::vector<Cell> out(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const double d = deltas[idx / photons.size()];
    const double nb = photons[idx % photons.size()];
    Cell cell;
    try {
      const auto sim = simulate_readout(c, d, nb);
      const double tau = c.sweep.tau;
      const auto curve = snr_vs_time(sim.trajectory, c.readout.eta, std::span<const double>(&tau, 1), snr_opts);
      cell.snr = curve.snr[0];
      cell.err_snr = curve.err_snr_limited[0];
      if (n_shots > 0) {
        const auto shots = sample_shots(sim.trajectory, noise_for(c, sim.mode), tau, n_shots, seed + idx, snr_opts);
        cell.err_assign = assignment_error(shots, fit_gaussians(shots)).error;
      }
    } catch (const DivergenceError&) {
      cell.divergent = true;
    }
    out[idx] = cell;
  });

  std::vector<std::string> header{"delta_flux", "flux", "n_bar", "snr", "err_snr_limited"};
  if (n_shots > 0) header.push_back("err_assignment");
  header.push_back("divergence_flag");
  std::vector<std::vector<double>> rows;
  std::size_t best = cells;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < cells; ++idx) {
    const double d = deltas[idx / photons.size()];
    const double nb = photons[idx % photons.size()];
    const auto& cell = out[idx];
    std::vector<double> row{d, c.pulse.base_flux + d, nb, cell.snr, cell.err_snr};
    if (n_shots > 0) row.push_back(cell.err_assign);
    row.push_back(cell.divergent ? 1.0 : 0.0);
    rows.push_back(std::move(row));
    const double value = n_shots > 0 ? cell.err_assign : cell.err_snr;
    if (std::isfinite(value) && value < best_value) {
      best_value = value;
      best = idx;
    }
  }
  write_csv(o.out_dir / "sweep.csv", header, rows);

  nlohmann::json summary;
  summary["tau"] = c.sweep.tau;
  summary["objective"] = n_shots > 0 ? "err_assignment" : "err_snr_limited";
  summary["cells"] = cells;
  if (best < cells) {
    const double d = deltas[best / photons.size()];
    summary["delta_flux"] = d;
    summary["flux"] = c.pulse.base_flux + d;
    summary["n_bar"] = photons[best % photons.size()];
    summary["value"] = best_value;
    note(o, "sweep: best cell delta_flux = " + format_double(d) + ", n_bar = " +
                format_double(photons[best % photons.size()]) + ", " + summary["objective"].get<std::string>() +
                " = " + format_double(best_value));
  } else {
    summary["delta_flux"] = nullptr;
    note(o, "sweep: every cell hit the divergence guard");
  }
  write_json(o.out_dir / "sweep_best.json", summary);
  return 0;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return 2;
  return 1;
}

}  // namespace fluxread
