#include "hybridcop/distfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridcop {

EmpiricalCdf::EmpiricalCdf(std::span<const double> sample) : n_(sample.size()) {
  if (sample.empty()) throw std::invalid_argument("EmpiricalCdf: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw std::invalid_argument("EmpiricalCdf: non-finite observation");
  }
  std::sort(sorted.begin(), sorted.end());
  points_.reserve(sorted.size());
  cum_counts_.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!points_.empty() && points_.back() == sorted[i]) {
      ++cum_counts_.back();
    } else {
      points_.push_back(sorted[i]);
      cum_counts_.push_back(i + 1);
    }
  }
}

double EmpiricalCdf::weight(std::size_t k) const {
  const std::size_t below = k == 0 ? 0 : cum_counts_[k - 1];
  return ratio(cum_counts_.at(k) - below);
}

double EmpiricalCdf::eval(const ExtendedReal& x) const {
  if (x.is_neg_inf()) return 0.0;
  if (x.is_pos_inf()) return 1.0;
  const auto it = std::upper_bound(points_.begin(), points_.end(), x.value());
  if (it == points_.begin()) return 0.0;
  return ratio(cum_counts_[static_cast<std::size_t>(it - points_.begin()) - 1]);
}

double EmpiricalCdf::eval_left_limit(const ExtendedReal& x) const {
  if (x.is_neg_inf()) return 0.0;
  if (x.is_pos_inf()) return 1.0;
  const auto it = std::lower_bound(points_.begin(), points_.end(), x.value());
  if (it == points_.begin()) return 0.0;
  return ratio(cum_counts_[static_cast<std::size_t>(it - points_.begin()) - 1]);
}

ExtendedReal EmpiricalCdf::left_inverse(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("left_inverse: u outside [0, 1]");
  if (u == 0.0) return ExtendedReal::neg_inf();
  // First support point whose cumulative probability reaches u. The last one
  // has probability exactly 1, so the search always succeeds.
  const auto it = std::partition_point(cum_counts_.begin(), cum_counts_.end(),
                                       [&](std::size_t c) { return ratio(c) < u; });
  return ExtendedReal::finite(points_[static_cast<std::size_t>(it - cum_counts_.begin())]);
}

Cdf Cdf::empirical(EmpiricalCdf cdf) { return Cdf(Kind::kEmpirical, std::move(cdf)); }

Cdf Cdf::parametric(MarginFamily family) {
  validate(family);
  return Cdf(Kind::kParametric, std::move(family));
}

Cdf Cdf::known(MarginFamily family) {
  validate(family);
  return Cdf(Kind::kKnown, std::move(family));
}

double Cdf::eval(const ExtendedReal& x) const {
  if (kind_ == Kind::kEmpirical) return std::get<EmpiricalCdf>(payload_).eval(x);
  return margin_cdf(std::get<MarginFamily>(payload_), x);
}

double Cdf::eval_left_limit(const ExtendedReal& x) const {
  if (kind_ == Kind::kEmpirical) return std::get<EmpiricalCdf>(payload_).eval_left_limit(x);
  return margin_cdf(std::get<MarginFamily>(payload_), x);
}

ExtendedReal Cdf::left_inverse(double u) const {
  if (kind_ == Kind::kEmpirical) return std::get<EmpiricalCdf>(payload_).left_inverse(u);
  return margin_quantile(std::get<MarginFamily>(payload_), u);
}

const MarginFamily& Cdf::family() const {
  if (kind_ == Kind::kEmpirical) throw std::logic_error("Cdf::family on an empirical CDF");
  return std::get<MarginFamily>(payload_);
}

const EmpiricalCdf& Cdf::empirical_cdf() const {
  if (kind_ != Kind::kEmpirical) throw std::logic_error("Cdf::empirical_cdf on a parametric CDF");
  return std::get<EmpiricalCdf>(payload_);
}

}  // namespace hybridcop
