#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace fluxread {

using CurveModel = std::function<double(double x, const Eigen::VectorXd& params)>;

struct CurveFitResult {
  Eigen::VectorXd params;
  double chi_square = 0.0;
  int iterations = 0;
};

/// Weighted nonlinear least squares, sum_i ((y_i - f(x_i; p)) / s_i)^2, by
/// Levenberg-Marquardt with forward-difference Jacobian. `sigma` may be empty
/// (unit weights). Throws FitError when the solver rejects the inputs or the
/// result is not finite.
CurveFitResult fit_curve(const CurveModel& model, std::span<const double> x,
                         std::span<const double> y, const Eigen::VectorXd& initial,
                         std::span<const double> sigma = {});

struct GaussianPeak {
  double amplitude = 0.0;
  double mean = 0.0;
  double sigma = 0.0;
};

/// Fits a single Gaussian curve to the histogram of `samples` around their
/// dominant mode (median +- 4 robust widths), Poisson-weighted. Outliers from
/// a second population far from the mode do not pull the fit.
GaussianPeak fit_gaussian_histogram(std::span<const double> samples);

}  // namespace fluxread
