#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fluxread/errors.hpp"
#include "fluxread/fluxonium.hpp"
#include "oracle/fd_fluxonium.hpp"

using namespace fluxread;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

oracle::FdSpectrum fd(const FluxoniumParams& p, double phi, int levels) {
  return oracle::fd_spectrum(p.e_j, p.e_c, p.e_l, phi, levels);
}

}  // namespace

TEST_CASE("default params carry the device card") {
  const FluxoniumParams p;
  CHECK(to_hz(p.e_j) == doctest::Approx(3.82e9));
  CHECK(to_hz(p.e_c) == doctest::Approx(0.865e9));
  CHECK(to_hz(p.e_l) == doctest::Approx(0.822e9));
  CHECK(to_hz(p.g) == doctest::Approx(37.2e6));
  CHECK(to_hz(p.omega_r_bare) == doctest::Approx(5.175e9));
  CHECK(to_hz(p.kappa) == doctest::Approx(6.04e6));
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("invalid params are rejected") {
  FluxoniumParams p;
  p.e_l = 0.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.g = -1.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
}

TEST_CASE("basis requests are checked") {
  const FluxoniumParams p;
  CHECK_THROWS_AS(diagonalize(p, {}, 40, 12), ArgumentError);   // < 4 * n_levels
  CHECK_THROWS_AS(diagonalize(p, {}, 120, 1), ArgumentError);   // n_levels < 2
  CHECK_THROWS_AS(diagonalize(p, FluxBias{NAN}), ArgumentError);
}

TEST_CASE("an unconverged truncation raises TruncationError") {
  const FluxoniumParams p;
  try {
    diagonalize(p, FluxBias{0.5}, 8, 2);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(e.relative_shift() > kDefaultConvergenceTol);
  }
}

TEST_CASE("default basis converges over a full period") {
  const FluxoniumParams p;
  for (int k = 0; k <= 20; ++k) {
    const FluxBias f{k / 20.0};
    const auto a = FluxoniumModel(p, kDefaultBasisSize).energies(f, kDefaultLevels);
    const auto b = FluxoniumModel(p, 150).energies(f, kDefaultLevels);
    CHECK(max_relative_shift(b, a) < 1e-8);
  }
}

TEST_CASE("spectrum result invariants") {
  const auto s = diagonalize(FluxoniumParams{}, FluxBias{0.63});
  REQUIRE(s.n_levels() == kDefaultLevels);
  CHECK(s.energies[0] == 0.0);
  for (int i = 1; i < s.n_levels(); ++i) CHECK(s.energies[i] >= s.energies[i - 1]);
  for (int i = 0; i < s.n_levels(); ++i)
    for (int j = 0; j < s.n_levels(); ++j) CHECK(charge_element(s, i, j) == charge_element(s, j, i));
  CHECK(transition_frequency(s, 3, 3) == 0.0);
  CHECK(transition_frequency(s, 0, 2) == s.energies[2]);
  CHECK_THROWS_AS(transition_frequency(s, 2, 1), ArgumentError);
  CHECK_THROWS_AS(transition_frequency(s, 0, 12), ArgumentError);
  CHECK_THROWS_AS(charge_element(s, -1, 0), ArgumentError);
}

TEST_CASE("periodicity and reflection hold to 1e-9") {
  const FluxoniumParams p;
  const FluxoniumModel model(p, kDefaultBasisSize);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 12; ++trial) {
    const double phi = u(rng);
    const auto a = model.energies(FluxBias{phi}, 8);
    const auto b = model.energies(FluxBias{phi + 1.0}, 8);
    const auto r1 = model.energies(FluxBias{0.5 + phi}, 8);
    const auto r2 = model.energies(FluxBias{0.5 - phi}, 8);
    for (std::size_t i = 1; i < a.size(); ++i) {
      CHECK(rel(a[i], b[i]) < 1e-9);
      CHECK(rel(r1[i], r2[i]) < 1e-9);
    }
  }
  // The explicit example pair from the contract.
  const auto x = model.energies(FluxBias{0.3}, 6);
  const auto y = model.energies(FluxBias{1.3}, 6);
  for (std::size_t i = 1; i < x.size(); ++i) CHECK(rel(x[i], y[i]) < 1e-9);
}

TEST_CASE("sweet-spot parity selection rule") {
  const auto s = diagonalize(FluxoniumParams{}, FluxBias{0.5});
  CHECK(charge_element(s, 0, 2) < 1e-6);
  for (int i = 0; i < s.n_levels(); ++i) {
    CHECK(std::abs(std::abs(s.parity[i]) - 1.0) < 1e-9);
    for (int j = 0; j < s.n_levels(); ++j)
      if (i != j && s.parity[i] * s.parity[j] > 0) CHECK(charge_element(s, i, j) < 1e-6);
  }
}

TEST_CASE("phase-grid oracle: sweet-spot matrix elements") {
  const FluxoniumParams p;
  const auto s = diagonalize(p, FluxBias{0.5});
  const auto o = fd(p, 0.5, 8);
  CHECK(rel(charge_element(s, 0, 1), o.n_abs[0][1]) < 1e-4);
  CHECK(o.n_abs[0][2] < 1e-6);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      CHECK(std::abs(charge_element(s, i, j) - o.n_abs[i][j]) < 1e-4 * std::max(1.0, o.n_abs[i][j]));
}

TEST_CASE("phase-grid oracle: first six transitions on 11 flux points") {
  const FluxoniumParams p;
  for (int k = 0; k <= 10; ++k) {
    const double phi = 0.4 + 0.035 * k;
    const auto s = diagonalize(p, FluxBias{phi}, kDefaultBasisSize, 8);
    const auto o = fd(p, phi, 8);
    for (int j = 1; j <= 6; ++j) {
      INFO("phi = " << phi << " level " << j);
      CHECK(rel(s.energies[j], o.energies[j]) < 1e-4);
    }
  }
}

TEST_CASE("spectrum_vs_flux keeps grid order and matches diagonalize") {
  const FluxoniumParams p;
  const std::vector<double> one{0.5};
  const auto single = spectrum_vs_flux(p, one);
  REQUIRE(single.size() == 1);
  const auto direct = diagonalize(p, FluxBias{0.5});
  for (int i = 0; i < direct.n_levels(); ++i) CHECK(single[0].energies[i] == direct.energies[i]);

  const std::vector<double> grid{0.7, 0.3, 0.45, 0.55};
  const auto many = spectrum_vs_flux(p, grid, 6);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(many[k].flux.phi == grid[k]);
  CHECK(rel(transition_frequency(many[1], 0, 1), transition_frequency(many[0], 0, 1)) < 1e-9);
  CHECK(rel(transition_frequency(many[2], 0, 1), transition_frequency(many[3], 0, 1)) < 1e-9);

  CHECK_THROWS_AS(spectrum_vs_flux(p, std::vector<double>{}), ArgumentError);
}

TEST_CASE("grid errors carry the failing index") {
  const FluxoniumParams p;
  const std::vector<double> grid{0.5, 0.6, NAN};
  try {
    spectrum_vs_flux(p, grid, 6);
    FAIL("expected GridPointError");
  } catch (const GridPointError& e) {
    CHECK(e.index() == 2);
    CHECK_THROWS_AS(std::rethrow_exception(e.cause()), ArgumentError);
  }
}

TEST_CASE("omega_01 rises monotonically from the sweet spot (oracle-checked)") {
  const FluxoniumParams p;
  std::vector<double> grid;
  for (int k = 0; k <= 32; ++k) grid.push_back(0.5 + 0.005 * k);
  const auto specs = spectrum_vs_flux(p, grid, 6);
  for (std::size_t k = 1; k < specs.size(); ++k)
    CHECK(transition_frequency(specs[k], 0, 1) > transition_frequency(specs[k - 1], 0, 1));
  for (std::size_t k = 0; k < grid.size(); k += 8)
    CHECK(rel(transition_frequency(specs[k], 0, 1), fd(p, grid[k], 3).energies[1]) < 1e-4);
}

TEST_CASE("0-2 transition reaches the resonator between 0.69 and 0.71") {
  const FluxoniumParams p;
  const double lo = transition_frequency(diagonalize(p, FluxBias{0.69}), 0, 2) - p.omega_r_bare;
  const double hi = transition_frequency(diagonalize(p, FluxBias{0.71}), 0, 2) - p.omega_r_bare;
  CHECK(lo * hi < 0.0);
}
