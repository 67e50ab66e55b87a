// Parametric univariate margin families: distribution function, quantile,
// parameter gradient of the distribution function and MLE influence function.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "hybridcop/extended_real.hpp"

namespace hybridcop {

struct Uniform01 {};

struct NormalMargin {
  double mean = 0.0;
  double sd = 1.0;
};

struct ExponentialMargin {
  double rate = 1.0;
};

using MarginFamily = std::variant<Uniform01, NormalMargin, ExponentialMargin>;

/// Throws std::invalid_argument unless the parameters lie in the open parameter space.
void validate(const MarginFamily& family);

double margin_cdf(const MarginFamily& family, double x);
double margin_cdf(const MarginFamily& family, const ExtendedReal& x);

/// Left-continuous inverse inf{x : F(x) >= u}; -inf at u = 0.
ExtendedReal margin_quantile(const MarginFamily& family, double u);

/// Number of free parameters (0 for the uniform margin).
int parameter_count(const MarginFamily& family);
Eigen::VectorXd parameters(const MarginFamily& family);
MarginFamily with_parameters(const MarginFamily& family, const Eigen::VectorXd& theta);

/// Gradient of F(x; theta) with respect to theta, (d/dmu, d/dsigma) for the
/// normal family and d/dlambda for the exponential family. Zero at +-inf.
Eigen::VectorXd margin_grad(const MarginFamily& family, const ExtendedReal& x);

/// Influence function of the maximum likelihood estimator at the true parameter.
Eigen::VectorXd margin_influence(const MarginFamily& family, double x);

/// E[psi psi^T] under the family itself: diag(sigma^2, sigma^2 / 2) for the
/// normal MLE and lambda^2 for the exponential MLE.
Eigen::MatrixXd influence_second_moment(const MarginFamily& family);

/// Maximum likelihood fit of the same family to a sample. Normal uses the
/// divisor-n standard deviation; exponential the reciprocal mean.
MarginFamily fit_mle(const MarginFamily& family_tag, std::span<const double> sample);

/// "uniform", "normal:MU:SIGMA", "exponential:LAMBDA" (also "normal" and
/// "exponential" with standard parameters).
MarginFamily parse_margin_family(std::string_view text);
std::string to_string(const MarginFamily& family);
std::string family_name(const MarginFamily& family);

}  // namespace hybridcop
