// Univariate distribution functions on the extended real line and their
// left-continuous inverses.
//
// Conventions: G(-inf) = 0, G(+inf) = 1 and G^{<-}(u) = inf{x : G(x) >= u}
// with inf of the empty set equal to +inf. In particular G^{<-}(0) = -inf.
#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "hybridcop/extended_real.hpp"
#include "hybridcop/margin_family.hpp"

namespace hybridcop {

/// Empirical distribution function of a finite sample. Tied observations are
/// merged into one support point carrying their combined count, and all
/// probabilities are formed as count / n so that equal counts give bitwise
/// equal values.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::span<const double> sample);

  double eval(const ExtendedReal& x) const;
  double eval_left_limit(const ExtendedReal& x) const;
  ExtendedReal left_inverse(double u) const;

  std::size_t sample_size() const { return n_; }
  const std::vector<double>& support() const { return points_; }
  /// Cumulative counts: cum_counts()[k] observations are <= support()[k].
  const std::vector<std::size_t>& cum_counts() const { return cum_counts_; }
  double weight(std::size_t k) const;

 private:
  double ratio(std::size_t count) const {
    return static_cast<double>(count) / static_cast<double>(n_);
  }

  std::vector<double> points_;
  std::vector<std::size_t> cum_counts_;
  std::size_t n_ = 0;
};

/// Uniform handle over the distribution functions used as margins: an
/// empirical CDF, a fitted parametric CDF, or a known (true) parametric CDF.
class Cdf {
 public:
  enum class Kind { kEmpirical, kParametric, kKnown };

  static Cdf empirical(EmpiricalCdf cdf);
  static Cdf empirical(std::span<const double> sample) { return empirical(EmpiricalCdf(sample)); }
  static Cdf parametric(MarginFamily family);
  static Cdf known(MarginFamily family);

  Kind kind() const { return kind_; }
  bool is_continuous() const { return kind_ != Kind::kEmpirical; }

  double eval(const ExtendedReal& x) const;
  double eval(double x) const { return eval(ExtendedReal::finite(x)); }
  /// G(x-), the supremum of G(y) over y < x.
  double eval_left_limit(const ExtendedReal& x) const;
  /// Throws std::domain_error for u outside [0, 1].
  ExtendedReal left_inverse(double u) const;

  /// Precondition: kind() != kEmpirical.
  const MarginFamily& family() const;
  /// Precondition: kind() == kEmpirical.
  const EmpiricalCdf& empirical_cdf() const;

 private:
  Cdf(Kind kind, std::variant<EmpiricalCdf, MarginFamily> payload)
      : kind_(kind), payload_(std::move(payload)) {}

  Kind kind_;
  std::variant<EmpiricalCdf, MarginFamily> payload_;
};

}  // namespace hybridcop
