#include "fluxread/dispersive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fluxread/errors.hpp"
#include "fluxread/parallel.hpp"

namespace fluxread {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_levels(int n_levels, int minimum, const char* op) {
  if (n_levels < minimum) {
    std::ostringstream msg;
    msg << op << " needs n_levels >= " << minimum;
    throw ArgumentError(msg.str());
  }
}

void require_range(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw ArgumentError("flux range must be finite with lo < hi");
  if (hi - lo > 1.0) throw ArgumentError("flux range must lie within one period");
}

// Transitions whose frequency can hit the resonator: out of |0> and |1>,
// upward only ((1,0) is the same transition as (0,1)).
std::vector<Transition> computational_transitions(int n_levels) {
  std::vector<Transition> out;
  for (int i = 0; i < 2; ++i)
    for (int j = i + 1; j < n_levels; ++j) out.push_back({i, j});
  return out;
}

struct Prescan {
  std::vector<double> flux;
  std::vector<std::vector<double>> energies;
};

Prescan prescan(const FluxoniumModel& model, double lo, double hi, int n_levels) {
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / kCrossingPrescanStep));
  Prescan out;
  out.flux.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    out.flux[k] = k == steps ? hi : lo + static_cast<double>(k) * kCrossingPrescanStep;
  out.energies.resize(out.flux.size());
  parallel_for(out.flux.size(), [&](std::size_t k) {
    out.energies[k] = model.energies(FluxBias{out.flux[k]}, n_levels);
  });
  return out;
}

double residual(const std::vector<double>& e, Transition t, double target) {
  return e[static_cast<std::size_t>(t.to)] - e[static_cast<std::size_t>(t.from)] - target;
}

// Bisection to ~1e-12 in flux; returns (flux, |residual|).
std::pair<double, double> bisect(const FluxoniumModel& model, int n_levels, Transition t,
                                 double target, double a, double b, double fa) {
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = residual(model.energies(FluxBias{m}, n_levels), t, target);
    if (fm == 0.0) return {m, 0.0};
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  const double root = 0.5 * (a + b);
  return {root, std::abs(residual(model.energies(FluxBias{root}, n_levels), t, target))};
}

}  // namespace

double resonator_pull(const SpectrumResult& spec, int level, double g, double omega_r,
                      double guard) {
  if (level < 0 || level >= spec.n_levels()) throw ArgumentError("level out of range");
  if (g == 0.0) return 0.0;  // decoupled: no resonance can pull the cavity
  double pull = 0.0;
  const double ei = spec.energies[static_cast<std::size_t>(level)];
  for (int j = 0; j < spec.n_levels(); ++j) {
    if (j == level) continue;
    const double w = spec.energies[static_cast<std::size_t>(j)] - ei;
    if (std::abs(std::abs(w) - omega_r) < guard) {
      const Transition t{std::min(level, j), std::max(level, j)};
      std::ostringstream msg;
      msg << "transition " << t.from << "->" << t.to << " within resonance guard of omega_r at phi="
          << spec.flux.phi;
      throw DivergenceError(msg.str(), spec.flux.phi, t.from, t.to);
    }
    const double n = spec.n_elements(level, j);
    pull += n * n * 2.0 * w / (omega_r * omega_r - w * w);
  }
  return g * g * pull;
}

double regularized_resonator_pull(const SpectrumResult& spec, int level, double g, double omega_r) {
  if (level < 0 || level >= spec.n_levels()) throw ArgumentError("level out of range");
  double pull = 0.0;
  const double ei = spec.energies[static_cast<std::size_t>(level)];
  for (int j = 0; j < spec.n_levels(); ++j) {
    if (j == level) continue;
    const double w = spec.energies[static_cast<std::size_t>(j)] - ei;
    const double coupling = g * spec.n_elements(level, j);
    const double d = omega_r - std::abs(w);
    const double near = coupling * coupling * d / (d * d + coupling * coupling);
    const double far = coupling * coupling / (omega_r + std::abs(w));
    pull += std::copysign(1.0, w) * (near - far);
  }
  return pull;
}

DispersivePoint dispersive_point(const FluxoniumParams& params, const SpectrumResult& spec,
                                 double guard) {
  require_levels(spec.n_levels(), 6, "dispersive_point");
  DispersivePoint p;
  p.flux = spec.flux;
  p.chi0 = resonator_pull(spec, 0, params.g, params.omega_r_bare, guard);
  p.chi1 = resonator_pull(spec, 1, params.g, params.omega_r_bare, guard);
  p.omega_r0 = params.omega_r_bare + p.chi0;
  p.omega_r1 = params.omega_r_bare + p.chi1;
  p.chi = (p.omega_r1 - p.omega_r0) / 2.0;
  return p;
}

DispersivePoint dispersive_point(const FluxoniumParams& params, FluxBias flux, int n_levels,
                                 double guard) {
  require_levels(n_levels, 6, "dispersive_point");
  return dispersive_point(params, diagonalize(params, flux, kDefaultBasisSize, n_levels), guard);
}

std::pair<double, double> dressed_frequencies(const FluxoniumParams& params, FluxBias flux,
                                              int n_levels) {
  const auto p = dispersive_point(params, flux, n_levels);
  return {p.omega_r0, p.omega_r1};
}

std::vector<DispersivePoint> chi_vs_flux(const FluxoniumParams& params,
                                         std::span<const double> flux_grid, int n_levels,
                                         double guard) {
  require_levels(n_levels, 6, "chi_vs_flux");
  const auto spectra = spectrum_vs_flux(params, flux_grid, n_levels);
  std::vector<DispersivePoint> out(spectra.size());
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    try {
      out[k] = dispersive_point(params, spectra[k], guard);
    } catch (const DivergenceError& e) {
      DispersivePoint p;
      p.flux = spectra[k].flux;
      p.chi0 = p.chi1 = p.chi = p.omega_r0 = p.omega_r1 = kNaN;
      p.divergent = true;
      p.offending = Transition{e.from(), e.to()};
      out[k] = p;
    }
  }
  return out;
}

std::vector<ResonanceFlag> divergence_scan(const FluxoniumParams& params, double flux_lo,
                                           double flux_hi, int n_levels) {
  require_range(flux_lo, flux_hi);
  check_basis_request(kDefaultBasisSize, n_levels);
  const FluxoniumModel model(params, kDefaultBasisSize);
  const auto scan = prescan(model, flux_lo, flux_hi, n_levels);
  const double target = params.omega_r_bare;

  std::vector<ResonanceFlag> out;
  for (const auto t : computational_transitions(n_levels)) {
    for (std::size_t k = 0; k + 1 < scan.flux.size(); ++k) {
      const double fa = residual(scan.energies[k], t, target);
      const double fb = residual(scan.energies[k + 1], t, target);
      if (fa == 0.0) {
        out.push_back({FluxBias{scan.flux[k]}, t, 1, 0.0});
        continue;
      }
      if ((fa < 0.0) == (fb < 0.0) || fb == 0.0) continue;
      const auto [root, det] = bisect(model, n_levels, t, target, scan.flux[k], scan.flux[k + 1], fa);
      out.push_back({FluxBias{root}, t, 1, det});
    }
    const double last = residual(scan.energies.back(), t, target);
    if (last == 0.0) out.push_back({FluxBias{scan.flux.back()}, t, 1, 0.0});
  }
  std::sort(out.begin(), out.end(),
            [](const ResonanceFlag& a, const ResonanceFlag& b) { return a.flux.phi < b.flux.phi; });
  return out;
}

std::vector<ResonanceFlag> mist_scan(const FluxoniumParams& params, double flux_lo,
                                     double flux_hi, int n_levels, int max_harmonic,
                                     double window) {
  require_range(flux_lo, flux_hi);
  require_levels(n_levels, 8, "mist_scan");
  if (max_harmonic < 1) throw ArgumentError("max_harmonic must be >= 1");
  if (!(window >= 0.0)) throw ArgumentError("window must be >= 0");
  check_basis_request(kDefaultBasisSize, n_levels);

  std::vector<ResonanceFlag> out;
  if (window == 0.0) return out;

  const FluxoniumModel model(params, kDefaultBasisSize);
  const auto scan = prescan(model, flux_lo, flux_hi, n_levels);

  for (const auto t : computational_transitions(n_levels)) {
    for (int m = 1; m <= max_harmonic; ++m) {
      const double target = m * params.omega_r_bare;
      std::size_t k = 0;
      const std::size_t n = scan.flux.size();
      while (k < n) {
        if (std::abs(residual(scan.energies[k], t, target)) >= window) {
          ++k;
          continue;
        }
        // Contiguous in-window run [begin, k).
        const std::size_t begin = k;
        while (k < n && std::abs(residual(scan.energies[k], t, target)) < window) ++k;

        std::optional<ResonanceFlag> flag;
        for (std::size_t q = begin; q + 1 < k && !flag; ++q) {
          const double fa = residual(scan.energies[q], t, target);
          const double fb = residual(scan.energies[q + 1], t, target);
          if (fa == 0.0) flag = ResonanceFlag{FluxBias{scan.flux[q]}, t, m, 0.0};
          else if ((fa < 0.0) != (fb < 0.0)) {
            const auto [root, det] = bisect(model, n_levels, t, target, scan.flux[q], scan.flux[q + 1], fa);
            flag = ResonanceFlag{FluxBias{root}, t, m, det};
          }
        }
        if (!flag) {
          std::size_t best = begin;
          for (std::size_t q = begin; q < k; ++q)
            if (std::abs(residual(scan.energies[q], t, target)) <
                std::abs(residual(scan.energies[best], t, target)))
              best = q;
          flag = ResonanceFlag{FluxBias{scan.flux[best]}, t, m,
                               std::abs(residual(scan.energies[best], t, target))};
        }
        out.push_back(*flag);
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ResonanceFlag& a, const ResonanceFlag& b) {
    return a.detuning < b.detuning;
  });
  return out;
}

}  // namespace fluxread
