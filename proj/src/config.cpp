#include "fluxread/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fluxread/errors.hpp"

namespace fluxread {

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

// Drops a trailing `# ...` that is not inside quotes, then surrounding quotes.
std::string clean_value(const std::string& raw) {
  bool quoted = false;
  std::size_t cut = raw.size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '"') quoted = !quoted;
    if (raw[i] == '#' && !quoted) {
      cut = i;
      break;
    }
  }
  std::string v = trim(raw.substr(0, cut));
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    index_lines();
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty())
        fail(section, "", "keys must live inside a [section]");
      for (const auto& [key, value] : body) values_[section][key] = clean_value(value.data());
    }
  }

  bool has(const std::string& s, const std::string& k) const {
    auto it = values_.find(s);
    return it != values_.end() && it->second.count(k);
  }

  const std::string& raw(const std::string& s, const std::string& k) {
    used_.insert(s + "." + k);
    return values_.at(s).at(k);
  }

  [[noreturn]] void fail(const std::string& s, const std::string& k, const std::string& what) const {
    std::ostringstream msg;
    msg << path_.string();
    if (auto it = lines_.find(s + "." + k); it != lines_.end()) msg << ":" << it->second;
    msg << ": [" << s << "]";
    if (!k.empty()) msg << " " << k;
    msg << ": " << what;
    throw ConfigError(msg.str());
  }

  double number(const std::string& s, const std::string& k) {
    return parse_number(s, k, raw(s, k));
  }

  void get(const std::string& s, const std::string& k, double& out) {
    if (has(s, k)) out = number(s, k);
  }

  void get(const std::string& s, const std::string& k, int& out) {
    if (!has(s, k)) return;
    const double v = number(s, k);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(s, k, "expected an integer");
    out = static_cast<int>(v);
  }

  void get(const std::string& s, const std::string& k, std::size_t& out) {
    if (!has(s, k)) return;
    const double v = number(s, k);
    if (v != std::floor(v) || v < 0 || v > 1e15) fail(s, k, "expected a non-negative integer");
    out = static_cast<std::size_t>(v);
  }

  void get_seed(const std::string& s, const std::string& k, std::uint64_t& out) {
    if (!has(s, k)) return;
    const auto& v = raw(s, k);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(s, k, "expected an unsigned integer");
  }

  void get(const std::string& s, const std::string& k, bool& out) {
    if (!has(s, k)) return;
    const auto& v = raw(s, k);
    if (v == "true") out = true;
    else if (v == "false") out = false;
    else fail(s, k, "expected true or false");
  }

  void get(const std::string& s, const std::string& k, std::filesystem::path& out) {
    if (has(s, k)) out = resolve(raw(s, k));
  }

  // Frequencies are written in Hz and stored as angular frequencies.
  void get_hz(const std::string& s, const std::string& k, double& out) {
    if (has(s, k)) out = from_hz(number(s, k));
  }

  std::vector<std::string> list(const std::string& s, const std::string& k) {
    std::string v = raw(s, k);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(s, k, "expected [a, b, ...]");
    std::vector<std::string> items;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = clean_value(item);
      if (!item.empty()) items.push_back(item);
    }
    return items;
  }

  void get_list(const std::string& s, const std::string& k, std::vector<double>& out) {
    if (!has(s, k)) return;
    out.clear();
    for (const auto& item : list(s, k)) out.push_back(parse_number(s, k, item));
  }

  void get_paths(const std::string& s, const std::string& k, std::vector<std::filesystem::path>& out) {
    if (!has(s, k)) return;
    out.clear();
    for (const auto& item : list(s, k)) out.push_back(resolve(item));
  }

  // `name = [..]` or `name_range = [lo, hi]` with `name_points = n`.
  void get_grid(const std::string& s, const std::string& name, std::vector<double>& out) {
    const bool explicit_list = has(s, name);
    const bool range = has(s, name + "_range");
    if (explicit_list && range) fail(s, name, "give either a list or a range, not both");
    if (explicit_list) {
      get_list(s, name, out);
      if (out.empty()) fail(s, name, "grid is empty");
      return;
    }
    if (!range) {
      if (has(s, name + "_points")) fail(s, name + "_points", "needs " + name + "_range");
      return;
    }
    std::vector<double> bounds;
    get_list(s, name + "_range", bounds);
    if (bounds.size() != 2) fail(s, name + "_range", "expected [lo, hi]");
    int points = 0;
    if (!has(s, name + "_points")) fail(s, name + "_range", "needs " + name + "_points");
    get(s, name + "_points", points);
    if (points < 1) fail(s, name + "_points", "must be at least 1");
    if (points == 1 && bounds[0] != bounds[1]) fail(s, name + "_points", "one point needs lo == hi");
    out.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
      out[static_cast<std::size_t>(i)] =
          points == 1 ? bounds[0] : bounds[0] + (bounds[1] - bounds[0]) * i / (points - 1);
  }

  void reject_unknown() const {
    for (const auto& [section, keys] : values_)
      for (const auto& [key, value] : keys)
        if (!used_.count(section + "." + key)) fail(section, key, "unknown key");
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  double parse_number(const std::string& s, const std::string& k, const std::string& v) const {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
      fail(s, k, "expected a finite number, got '" + v + "'");
    return out;
  }

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : path_.parent_path() / q;
  }

  void index_lines() {
    std::ifstream is(path_);
    std::string line, section;
    for (int n = 1; std::getline(is, line); ++n) {
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        lines_[section + "."] = n;
      } else if (auto eq = line.find('='); eq != std::string::npos) {
        lines_[section + "." + trim(line.substr(0, eq))] = n;
      }
    }
  }

  std::filesystem::path path_;
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::map<std::string, int> lines_;
  std::set<std::string> used_;
};

void load_into(Reader& r, ExperimentConfig& c) {
  auto& d = c.device;
  r.get_hz("device", "e_j_hz", d.e_j);
  r.get_hz("device", "e_c_hz", d.e_c);
  r.get_hz("device", "e_l_hz", d.e_l);
  r.get_hz("device", "g_hz", d.g);
  r.get_hz("device", "omega_r_hz", d.omega_r_bare);
  r.get_hz("device", "kappa_hz", d.kappa);

  r.get("solver", "basis_size", c.solver.basis_size);
  r.get("solver", "n_levels", c.solver.n_levels);

  r.get_grid("spectrum", "flux", c.spectrum.flux_grid);
  r.get("spectrum", "max_level", c.spectrum.max_level);

  r.get_grid("chi", "flux", c.chi.flux_grid);
  r.get_hz("chi", "resonance_guard_hz", c.chi.resonance_guard);
  r.get_hz("chi", "mist_window_hz", c.chi.mist_window);
  r.get("chi", "mist_max_harmonic", c.chi.mist_max_harmonic);

  r.get("pulse", "base_flux", c.pulse.base_flux);
  r.get("pulse", "delta_flux", c.pulse.delta_flux);
  r.get("pulse", "rise_time", c.pulse.rise_time);
  r.get("pulse", "hold_time", c.pulse.hold_time);
  r.get("pulse", "sample_dt", c.pulse.sample_dt);

  if (r.has("drive", "omega_ro_hz")) {
    if (r.raw("drive", "omega_ro_hz") == "auto") c.drive.omega_ro.reset();
    else c.drive.omega_ro = from_hz(r.number("drive", "omega_ro_hz"));
  }
  r.get("drive", "n_bar", c.drive.n_bar);
  r.get("drive", "delay", c.drive.delay);

  r.get("readout", "duration", c.readout.duration);
  r.get("readout", "dt", c.readout.dt);
  r.get("readout", "eta", c.readout.eta);
  r.get("readout", "acquisition_offset", c.readout.acquisition_offset);
  if (r.has("readout", "noise_normalization")) {
    if (r.raw("readout", "noise_normalization") == "auto") c.readout.noise_normalization.reset();
    else c.readout.noise_normalization = r.number("readout", "noise_normalization");
  }
  r.get("readout", "anchor_tau", c.readout.anchor_tau);
  r.get("readout", "anchor_error", c.readout.anchor_error);
  r.get_grid("readout", "tau", c.readout.tau_grid);
  r.get("readout", "sweet_spot", c.readout.sweet_spot);
  r.get("readout", "flux_pulse", c.readout.flux_pulse);
  r.get("readout", "table_points", c.readout.table_points);
  if (r.has("readout", "crossing_policy")) {
    const auto& v = r.raw("readout", "crossing_policy");
    if (v == "reject") c.readout.crossing = CrossingPolicy::reject;
    else if (v == "regularized") c.readout.crossing = CrossingPolicy::regularized;
    else r.fail("readout", "crossing_policy", "expected reject or regularized");
  }

  r.get("noise", "p_init0", c.noise.p_init0);
  r.get("noise", "p_init1", c.noise.p_init1);
  r.get("noise", "t1", c.noise.t1);
  r.get("noise", "t1_sweet_spot", c.noise.t1_sweet_spot);

  r.get("shots", "n_shots", c.shots.n_shots);
  r.get_seed("shots", "seed", c.shots.seed);
  if (r.has("shots", "dump_tau")) c.shots.dump_tau = r.number("shots", "dump_tau");

  r.get_grid("sweep", "delta_flux", c.sweep.delta_flux);
  r.get_grid("sweep", "n_bar", c.sweep.n_bar);
  r.get("sweep", "tau", c.sweep.tau);

  auto& cal = c.calibration;
  r.get("calibration", "snr_csv", cal.snr_csv);
  r.get("calibration", "coherence_csv", cal.coherence_csv);
  r.get_paths("calibration", "ramsey_csvs", cal.ramsey_csvs);
  r.get_list("calibration", "ramsey_amplitudes", cal.ramsey_amplitudes);
  r.get("calibration", "transmission_csv", cal.transmission_csv);
  r.get("calibration", "epsilon_v", cal.epsilon_v);
  r.get_hz("calibration", "chi_hz", cal.chi);
  r.get("calibration", "tau_total", cal.tau_total);
  r.get("calibration", "tau_pulse", cal.tau_pulse);

  r.get("run", "paper_mode", c.paper_mode);
}

// Runs every check; `where(section, key)` turns a failure into a diagnostic.
void check_all(const ExperimentConfig& c,
               const std::function<void(const std::string&, const std::string&, const std::string&)>& bad) {
  const auto& d = c.device;
  if (!(d.e_j > 0)) bad("device", "e_j_hz", "must be positive");
  if (!(d.e_c > 0)) bad("device", "e_c_hz", "must be positive");
  if (!(d.e_l > 0)) bad("device", "e_l_hz", "must be positive");
  if (!(d.g >= 0)) bad("device", "g_hz", "must be non-negative");
  if (!(d.omega_r_bare > 0)) bad("device", "omega_r_hz", "must be positive");
  if (!(d.kappa > 0)) bad("device", "kappa_hz", "must be positive");

  if (c.solver.n_levels < 6) bad("solver", "n_levels", "at least 6 levels are needed for chi");
  if (c.solver.basis_size < 4 * c.solver.n_levels)
    bad("solver", "basis_size", "must be at least 4 * n_levels");

  if (c.spectrum.max_level < 1 || c.spectrum.max_level >= c.solver.n_levels)
    bad("spectrum", "max_level", "must lie in [1, n_levels)");
  for (double f : c.spectrum.flux_grid)
    if (!std::isfinite(f)) bad("spectrum", "flux", "non-finite flux");
  if (c.spectrum.flux_grid.empty()) bad("spectrum", "flux", "grid is empty");
  if (c.chi.flux_grid.empty()) bad("chi", "flux", "grid is empty");
  if (!(c.chi.resonance_guard > 0)) bad("chi", "resonance_guard_hz", "must be positive");
  if (!(c.chi.mist_window >= 0)) bad("chi", "mist_window_hz", "must be non-negative");
  if (c.chi.mist_max_harmonic < 1) bad("chi", "mist_max_harmonic", "must be at least 1");

  const auto& p = c.pulse;
  if (!(p.rise_time > 0)) bad("pulse", "rise_time", "must be positive");
  if (!(p.hold_time >= 0)) bad("pulse", "hold_time", "must be non-negative");
  if (!(p.sample_dt > 0)) bad("pulse", "sample_dt", "must be positive");
  else if (!(p.sample_dt < p.rise_time / 4))
    bad("pulse", "sample_dt", "cannot resolve the rise time (need sample_dt < rise_time / 4)");

  if (c.drive.omega_ro && !(*c.drive.omega_ro > 0)) bad("drive", "omega_ro_hz", "must be positive");
  if (!(c.drive.n_bar >= 0)) bad("drive", "n_bar", "must be non-negative");
  if (!(c.drive.delay >= 0)) bad("drive", "delay", "must be non-negative");

  const auto& ro = c.readout;
  if (!(ro.dt > 0)) bad("readout", "dt", "must be positive");
  if (!(ro.duration > 0)) bad("readout", "duration", "must be positive");
  else if (ro.dt > 0) {
    const double steps = ro.duration / ro.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6 * steps)
      bad("readout", "duration", "must be a whole number of dt steps");
  }
  if (!(ro.eta > 0 && ro.eta <= 1)) bad("readout", "eta", "must lie in (0, 1]");
  if (!(ro.acquisition_offset >= 0)) bad("readout", "acquisition_offset", "must be non-negative");
  if (ro.noise_normalization && !(*ro.noise_normalization > 0))
    bad("readout", "noise_normalization", "must be positive or auto");
  if (!ro.noise_normalization) {
    if (!ro.flux_pulse) bad("readout", "noise_normalization", "auto needs flux_pulse = true");
    if (!(ro.anchor_error > 0 && ro.anchor_error < 0.5)) bad("readout", "anchor_error", "must lie in (0, 0.5)");
    if (!(ro.anchor_tau > ro.acquisition_offset &&
          ro.anchor_tau <= ro.acquisition_offset + ro.duration))
      bad("readout", "anchor_tau", "must lie inside the acquisition window");
  }
  for (double t : ro.tau_grid)
    if (!(t >= ro.acquisition_offset && t <= ro.acquisition_offset + ro.duration * (1 + 1e-12)))
      bad("readout", "tau", "every tau must lie in [acquisition_offset, acquisition_offset + duration]");
  if (!ro.sweet_spot && !ro.flux_pulse) bad("readout", "flux_pulse", "enable at least one readout mode");
  if (ro.table_points < 2) bad("readout", "table_points", "must be at least 2");

  const auto& n = c.noise;
  if (!(n.p_init0 >= 0 && n.p_init0 <= 1)) bad("noise", "p_init0", "must lie in [0, 1]");
  if (!(n.p_init1 >= 0 && n.p_init1 <= 1)) bad("noise", "p_init1", "must lie in [0, 1]");
  if (!(n.t1 > 0)) bad("noise", "t1", "must be positive");
  if (!(n.t1_sweet_spot > 0)) bad("noise", "t1_sweet_spot", "must be positive");

  if (c.shots.dump_tau && !(*c.shots.dump_tau >= ro.acquisition_offset &&
                            *c.shots.dump_tau <= ro.acquisition_offset + ro.duration))
    bad("shots", "dump_tau", "must lie inside the acquisition window");

  if (c.sweep.delta_flux.empty()) bad("sweep", "delta_flux", "grid is empty");
  if (c.sweep.n_bar.empty()) bad("sweep", "n_bar", "grid is empty");
  for (double nb : c.sweep.n_bar)
    if (!(nb >= 0)) bad("sweep", "n_bar", "photon numbers must be non-negative");
  if (!(c.sweep.tau >= ro.acquisition_offset && c.sweep.tau <= ro.acquisition_offset + ro.duration))
    bad("sweep", "tau", "must lie inside the acquisition window");

  const auto& cal = c.calibration;
  if (!(cal.epsilon_v >= 0)) bad("calibration", "epsilon_v", "must be non-negative");
  if (!(cal.chi != 0 && std::isfinite(cal.chi))) bad("calibration", "chi_hz", "must be non-zero");
  if (!(cal.tau_total > 0)) bad("calibration", "tau_total", "must be positive");
  if (!(cal.tau_pulse > 0 && cal.tau_pulse <= cal.tau_total))
    bad("calibration", "tau_pulse", "must lie in (0, tau_total]");
  if (!cal.ramsey_amplitudes.empty() && cal.ramsey_amplitudes.size() != cal.ramsey_csvs.size())
    bad("calibration", "ramsey_amplitudes", "needs one amplitude per ramsey_csvs entry");
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  Reader reader(path);
  ExperimentConfig config;
  config.source = path;
  load_into(reader, config);
  reader.reject_unknown();
  check_all(config, [&](const std::string& s, const std::string& k, const std::string& what) {
    reader.fail(s, k, what);
  });
  return config;
}

void validate_config(const ExperimentConfig& config) {
  check_all(config, [&](const std::string& s, const std::string& k, const std::string& what) {
    throw ConfigError("[" + s + "] " + k + ": " + what);
  });
}

}  // namespace fluxread
