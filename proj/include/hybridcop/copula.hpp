// Closed-form copula families with first-order partial derivatives and
// conditional-inversion samplers.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "hybridcop/rng.hpp"

namespace hybridcop {

/// Row-major n x p matrix; rows are observations.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class CopulaModel {
 public:
  enum class Family { kIndependence, kClayton, kFgm };

  static CopulaModel independence(int dim);
  /// theta > 0, bivariate.
  static CopulaModel clayton(double theta);
  /// theta in [-1, 1], bivariate.
  static CopulaModel fgm(double theta);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  double theta() const { return theta_; }

  /// C(u); throws std::domain_error outside the unit cube.
  double cdf(std::span<const double> u) const;

  /// dC/du_j at u (j zero-based). Only defined for 0 < u_j < 1; callers
  /// apply the indicator of (0, 1) themselves.
  double partial(int j, std::span<const double> u) const;

  /// n i.i.d. draws from C by conditional inversion.
  RowMatrix sample(std::size_t n, Rng& rng) const;

  /// Bivariate margin (j, k) evaluated at (s, t): C with ones elsewhere.
  double pair_cdf(int j, int k, double s, double t) const;

  std::string to_string() const;

 private:
  CopulaModel(Family f, int dim, double theta) : family_(f), dim_(dim), theta_(theta) {}

  Family family_;
  int dim_;
  double theta_;
};

/// "independence", "clayton", "fgm" with the given parameter and dimension.
CopulaModel make_copula(std::string_view name, double theta, int dim);

}  // namespace hybridcop
