// Writes synthetic calibration inputs with known ground truth:
// SNR slope a, dephasing width sigma_v and resonator linewidth kappa.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "fluxread/io.hpp"

namespace {

void write_xy(const std::filesystem::path& path, const char* header, const std::vector<double>& x,
              const std::vector<double>& y) {
  std::ofstream os(path, std::ios::binary);
  os << header << '\n';
  for (std::size_t i = 0; i < x.size(); ++i)
    os << fluxread::format_double(x[i]) << ',' << fluxread::format_double(y[i]) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic calibration data"};
  std::string out = "data";
  double a = 35.47, sigma_v = 6.93e-3, kappa_hz = 6.04e6, noise = 5e-4;
  std::uint64_t seed = 7;
  app.add_option("--out", out)->capture_default_str();
  app.add_option("--a", a)->capture_default_str();
  app.add_option("--sigma-v", sigma_v)->capture_default_str();
  app.add_option("--kappa-hz", kappa_hz)->capture_default_str();
  app.add_option("--noise", noise, "relative Gaussian noise")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto jitter = [&](double v) { return v * (1.0 + noise * gauss(rng)); };

  std::vector<double> amps, snr, coh;
  for (int k = 1; k <= 12; ++k) amps.push_back(k * 2.5e-3);
  for (double e : amps) {
    snr.push_back(jitter(a * e));
    coh.push_back(jitter(0.5 * std::exp(-e * e / (2 * sigma_v * sigma_v))));
  }
  write_xy(std::filesystem::path(out) / "snr_vs_amplitude.csv", "amplitude_v,snr", amps, snr);
  write_xy(std::filesystem::path(out) / "coherence_vs_amplitude.csv", "amplitude_v,coherence", amps, coh);

  // Ramsey traces at four of the amplitudes: sigma_z = 2|rho| cos(phi + phi0).
  const double ramsey_amps[] = {2.5e-3, 5e-3, 7.5e-3, 10e-3};
  for (int r = 0; r < 4; ++r) {
    const double rho = 0.5 * std::exp(-ramsey_amps[r] * ramsey_amps[r] / (2 * sigma_v * sigma_v));
    std::vector<double> phi, z;
    for (int k = 0; k <= 40; ++k) {
      phi.push_back(2 * std::numbers::pi * k / 40.0);
      z.push_back(2 * rho * std::cos(phi.back() + 0.3) + noise * gauss(rng));
    }
    write_xy(std::filesystem::path(out) / ("ramsey_" + std::to_string(r) + ".csv"), "phase_rad,sigma_z", phi, z);
  }

  std::vector<double> f, mag;
  const double f0 = 5.175e9;
  for (int k = -60; k <= 60; ++k) {
    f.push_back(f0 + k * 0.25e6);
    const double x = 2 * (f.back() - f0) / kappa_hz;
    mag.push_back(jitter(1.0 - 0.8 / (1 + x * x)));
  }
  write_xy(std::filesystem::path(out) / "transmission.csv", "frequency_hz,magnitude", f, mag);
  std::cout << "wrote synthetic calibration data to " << out << '\n';
  return 0;
}
