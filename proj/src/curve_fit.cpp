#include "fluxread/curve_fit.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fluxread/errors.hpp"

namespace fluxread {

namespace {

struct Residuals {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const CurveModel* model;
  std::span<const double> x, y, sigma;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = sigma.empty() ? 1.0 : sigma[i];
      r(static_cast<Eigen::Index>(i)) = (y[i] - (*model)(x[i], p)) / s;
    }
    return 0;
  }
};

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

CurveFitResult fit_curve(const CurveModel& model, std::span<const double> x,
                         std::span<const double> y, const Eigen::VectorXd& initial,
                         std::span<const double> sigma) {
  if (x.size() != y.size() || (!sigma.empty() && sigma.size() != x.size()))
    throw FitError("fit inputs have mismatched lengths");
  if (x.size() < static_cast<std::size_t>(initial.size()))
    throw FitError("fewer points than parameters");

  Residuals f{&model, x, y, sigma, static_cast<int>(initial.size())};
  Eigen::NumericalDiff<Residuals> diff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(diff);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;

  Eigen::VectorXd p = initial;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
    throw FitError("least-squares solver rejected the inputs");
  if (!p.allFinite()) throw FitError("least-squares fit diverged");

  Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
  f(p, r);
  return {p, r.squaredNorm(), static_cast<int>(lm.iter)};
}

GaussianPeak fit_gaussian_histogram(std::span<const double> samples) {
  if (samples.size() < 3) throw FitError("need at least 3 samples for a Gaussian fit");
  std::vector<double> v(samples.begin(), samples.end());
  const double center = median(v);
  std::vector<double> dev(v.size());
  std::transform(v.begin(), v.end(), dev.begin(), [&](double s) { return std::abs(s - center); });
  double width = 1.4826 * median(dev);
  if (!(width > 0.0)) {
    // MAD vanishes when more than half the samples coincide; fall back to the std.
    double var = 0.0;
    for (double s : v) var += (s - center) * (s - center);
    width = std::sqrt(var / static_cast<double>(v.size()));
  }
  if (!(width > 0.0) || !std::isfinite(width)) throw FitError("degenerate samples: zero spread");

  const double lo = center - 4.0 * width;
  const double hi = center + 4.0 * width;
  std::size_t inside = 0;
  for (double s : v) inside += (s >= lo && s < hi);
  const auto bins = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::sqrt(static_cast<double>(inside)) / 2.0), 16, 200);
  const double bw = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double s : v) {
    if (s < lo || s >= hi) continue;
    counts[std::min(bins - 1, static_cast<std::size_t>((s - lo) / bw))] += 1.0;
  }

  std::vector<double> xs(bins), sig(bins);
  double peak = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    xs[b] = lo + (static_cast<double>(b) + 0.5) * bw;
    sig[b] = std::sqrt(std::max(counts[b], 1.0));
    peak = std::max(peak, counts[b]);
  }

  // Parameterized in units of the robust width so the solver sees O(1) values.
  const CurveModel gauss = [center, width](double x, const Eigen::VectorXd& p) {
    const double z = ((x - center) / width - p(1)) / p(2);
    return p(0) * std::exp(-0.5 * z * z);
  };
  Eigen::VectorXd p0(3);
  p0 << peak, 0.0, 1.0;
  const auto fit = fit_curve(gauss, xs, counts, p0, sig);
  GaussianPeak out{fit.params(0), center + width * fit.params(1), width * std::abs(fit.params(2))};
  if (!(out.sigma > 0.0)) throw FitError("Gaussian fit collapsed to zero width");
  return out;
}

}  // namespace fluxread
