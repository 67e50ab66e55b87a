// Covariance kernels of the limit processes alpha (joint) and beta_j
// (margins) and the variance of the hybrid limit
//   alpha(u) - sum_j dC_j(u) beta_j(u_j).
//
// Every limit process is of the form p_S^{-1} G(1_S a), where G is the
// Brownian bridge of one observation (indicators and values), S is the set of
// columns that must be observed for the observation to enter the estimator,
// and a is a centered influence function of the values:
//
//   alpha(u)        S = all columns,  a = 1{U <= u} - C(u)
//   beta_j(s)       S = {j},          a = 1{U_j <= s} - s          (empirical)
//                                     a = Fdot_j(q_s)' psi_j(X_j)   (parametric)
//                                     a = 0                         (known)
//
// Under MCAR the covariance of two such processes factorizes as
//   p_{S u T} / (p_S p_T) * Cov(a(X), b(X)).
// The empirical beta_j(s) is alpha at (1, ..., s, ..., 1).
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hybridcop/estimators.hpp"
#include "hybridcop/scheme.hpp"

namespace hybridcop {

/// A value with its Monte Carlo standard error (0 for closed forms).
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct AlphaAt {
  Point u;
};
struct BetaAt {
  std::size_t j;
  double s;
};
using LimitProcess = std::variant<AlphaAt, BetaAt>;

struct LinearTerm {
  double coef;
  LimitProcess process;
};

struct McOptions {
  std::size_t draws = 1'000'000;
  std::uint64_t seed = 0x5eed'c0b1'a000'0001ULL;
};

class LimitCovariance {
 public:
  explicit LimitCovariance(SchemeSpec scheme, McOptions mc = {});

  const SchemeSpec& scheme() const { return scheme_; }

  /// Covariance of two limit-process values. Closed form whenever one exists;
  /// otherwise a seeded Monte Carlo integral with its standard error.
  Estimate cov(const LimitProcess& a, const LimitProcess& b) const;

  /// Var(sum_k coef_k X_k), assembled by bilinearity. All Monte Carlo pairs
  /// share one sample, so the reported standard error is that of the whole
  /// Monte Carlo part.
  Estimate variance(std::span<const LinearTerm> terms) const;

  /// Covariance matrix of the given process values (Monte Carlo entries, if
  /// any, use the shared sample).
  Eigen::MatrixXd gram(std::span<const LimitProcess> processes) const;

 private:
  enum class Shape { kZero, kIndicator, kParametric };
  struct Resolved {
    Shape shape;
    unsigned columns;     // observation set S
    Point point;          // kIndicator: the event {U <= point}
    double center = 0.0;  // kIndicator: C(point)
    std::size_t j = 0;    // kParametric: margin index
    Eigen::VectorXd fdot; // kParametric: Fdot_j(F_j^{<-}(s))
  };

  Resolved resolve(const LimitProcess& p) const;
  double factor(const Resolved& a, const Resolved& b) const;
  /// Closed-form Cov(a, b) of the influence functions, if available.
  bool closed_form(const Resolved& a, const Resolved& b, double& out) const;
  double influence(const Resolved& r, std::span<const double> u) const;
  Estimate monte_carlo(std::span<const std::pair<double, std::pair<Resolved, Resolved>>> pairs) const;

  SchemeSpec scheme_;
  McOptions mc_;
};

// Kernel entry points (margin indices zero-based).
double cov_alpha(const SchemeSpec& scheme, const Point& u, const Point& v);
double cov_beta(const SchemeSpec& scheme, std::size_t j, double s, double t);
Estimate cov_beta_beta(const SchemeSpec& scheme, std::size_t j, std::size_t k, double s, double t,
                       McOptions mc = {});
Estimate cov_alpha_beta(const SchemeSpec& scheme, std::size_t j, const Point& u, double s,
                        McOptions mc = {});
/// Variance of the hybrid limit at an interior point; throws
/// std::domain_error if some u_j is 0 or 1.
Estimate limit_variance(const SchemeSpec& scheme, const Point& u, McOptions mc = {});

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace hybridcop
