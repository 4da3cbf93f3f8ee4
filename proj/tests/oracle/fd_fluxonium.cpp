#include "fd_fluxonium.hpp"

#include <lapacke.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

// Shifted-inverse iteration with a banded LU of (H - shift).
std::vector<double> eigenvector(const std::vector<double>& diag, double off1, double off2, double shift) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  const lapack_int kl = 2, ku = 2, ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab * n), 0.0);
  auto at = [&](lapack_int i, lapack_int j) -> double& {
    return ab[static_cast<std::size_t>(kl + ku + i - j + j * ldab)];
  };
  for (lapack_int j = 0; j < n; ++j) {
    for (lapack_int i = std::max<lapack_int>(0, j - 2); i <= std::min(n - 1, j + 2); ++i) {
      const lapack_int d = std::abs(i - j);
      at(i, j) = d == 0 ? diag[static_cast<std::size_t>(i)] - shift : (d == 1 ? off1 : off2);
    }
  }
  std::vector<lapack_int> piv(static_cast<std::size_t>(n));
  if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), ldab, piv.data()) < 0)
    throw std::runtime_error("dgbtrf failed");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (lapack_int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = 1.0 + 0.01 * std::sin(0.37 * k);
  for (int it = 0; it < 4; ++it) {
    LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab.data(), ldab, piv.data(), v.data(), n);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

}  // namespace

struct Discretisation {
  std::vector<double> diag;
  double off1 = 0.0, off2 = 0.0, h = 0.0;
  std::vector<double> w;  // lowest eigenvalues, absolute
};

Discretisation solve(double e_j, double e_c, double e_l, double phi_ext, int levels, int points,
                     double half_width) {
  const lapack_int n = points;
  const double h = 2.0 * half_width / (n - 1);
  const double kin = 4.0 * e_c / (12.0 * h * h);
  // -4 E_C d^2/dphi^2 with the (-1, 16, -30, 16, -1) / 12h^2 stencil.
  const double off1 = -16.0 * kin, off2 = kin;
  std::vector<double> diag(static_cast<std::size_t>(n));
  for (lapack_int k = 0; k < n; ++k) {
    const double phi = -half_width + k * h;
    diag[static_cast<std::size_t>(k)] =
        30.0 * kin - e_j * std::cos(phi - 2.0 * std::numbers::pi * phi_ext) + 0.5 * e_l * phi * phi;
  }

  const lapack_int kd = 2, ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab * n), 0.0);
  for (lapack_int j = 0; j < n; ++j) {
    ab[static_cast<std::size_t>(kd + j * ldab)] = diag[static_cast<std::size_t>(j)];
    if (j >= 1) ab[static_cast<std::size_t>(kd - 1 + j * ldab)] = off1;
    if (j >= 2) ab[static_cast<std::size_t>(kd - 2 + j * ldab)] = off2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  lapack_int found = 0;
  double q = 0.0, z = 0.0;
  const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, kd, ab.data(), ldab, &q, 1,
                                         0.0, 0.0, 1, levels, 0.0, &found, w.data(), &z, 1, ifail.data());
  if (info != 0 || found != levels) throw std::runtime_error("dsbevx failed");
  w.resize(static_cast<std::size_t>(levels));
  return {diag, off1, off2, h, w};
}

std::vector<double> fd_energies(double e_j, double e_c, double e_l, double phi_ext, int levels, int points,
                                double half_width) {
  const auto d = solve(e_j, e_c, e_l, phi_ext, levels, points, half_width);
  std::vector<double> out;
  for (double x : d.w) out.push_back(x - d.w[0]);
  return out;
}

FdSpectrum fd_spectrum(double e_j, double e_c, double e_l, double phi_ext, int levels, int points,
                       double half_width) {
  const auto [diag, off1, off2, h, w] = solve(e_j, e_c, e_l, phi_ext, levels, points, half_width);
  const lapack_int n = points;

  std::vector<std::vector<double>> vecs;
  for (int i = 0; i < levels; ++i) {
    // Nudge the shift below the eigenvalue so the LU stays non-singular.
    const double gap = i + 1 < levels ? w[static_cast<std::size_t>(i + 1)] - w[static_cast<std::size_t>(i)]
                                      : w[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i - 1)];
    vecs.push_back(eigenvector(diag, off1, off2, w[static_cast<std::size_t>(i)] - 1e-7 * gap));
  }

  FdSpectrum out;
  for (int i = 0; i < levels; ++i) out.energies.push_back(w[static_cast<std::size_t>(i)] - w[0]);
  // n = -i d/dphi; the stencil (1, -8, 0, 8, -1) / 12h is fourth order.
  out.n_abs.assign(static_cast<std::size_t>(levels), std::vector<double>(static_cast<std::size_t>(levels), 0.0));
  out.d_phi = out.n_abs;
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) {
      const auto& a = vecs[static_cast<std::size_t>(i)];
      const auto& b = vecs[static_cast<std::size_t>(j)];
      double s = 0.0;
      for (lapack_int k = 2; k + 2 < n; ++k) {
        const auto u = static_cast<std::size_t>(k);
        s += a[u] * (b[u - 2] - 8.0 * b[u - 1] + 8.0 * b[u + 1] - b[u + 2]) / (12.0 * h);
      }
      out.d_phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
      out.n_abs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::abs(s);
    }
  }
  return out;
}

}  // namespace oracle
