// Points of the extended real line [-inf, +inf].
#pragma once

#include <cmath>
#include <compare>
#include <ostream>
#include <stdexcept>

namespace hybridcop {

/// A value in [-inf, +inf]. The infinities are tagged explicitly instead of
/// being encoded as IEEE infinities, so that a CDF evaluated at -inf returns
/// exactly 0 without going through any floating-point arithmetic.
class ExtendedReal {
 public:
  enum class Kind { kNegInf = 0, kFinite = 1, kPosInf = 2 };

  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal neg_inf() { return ExtendedReal(Kind::kNegInf, 0.0); }
  static constexpr ExtendedReal pos_inf() { return ExtendedReal(Kind::kPosInf, 0.0); }
  static ExtendedReal finite(double x) {
    if (!std::isfinite(x)) {
      throw std::domain_error("ExtendedReal::finite: value is not finite");
    }
    return ExtendedReal(Kind::kFinite, x);
  }
  /// Maps IEEE +-inf onto the tagged infinities. NaN is rejected.
  static ExtendedReal from_double(double x) {
    if (std::isnan(x)) throw std::domain_error("ExtendedReal: NaN");
    if (x == -HUGE_VAL) return neg_inf();
    if (x == HUGE_VAL) return pos_inf();
    return ExtendedReal(Kind::kFinite, x);
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::kFinite; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::kNegInf; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::kPosInf; }

  /// Finite value; throws for the infinities.
  double value() const {
    if (!is_finite()) throw std::domain_error("ExtendedReal::value: infinite");
    return value_;
  }
  /// IEEE encoding, for printing and for formulas that tolerate infinities.
  double to_double() const {
    switch (kind_) {
      case Kind::kNegInf: return -HUGE_VAL;
      case Kind::kPosInf: return HUGE_VAL;
      default: return value_;
    }
  }

  friend constexpr std::strong_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) <=> static_cast<int>(b.kind_);
    if (a.kind_ != Kind::kFinite) return std::strong_ordering::equal;
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

  /// x <= *this for a finite x.
  constexpr bool dominates(double x) const {
    return kind_ == Kind::kPosInf || (kind_ == Kind::kFinite && x <= value_);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    switch (x.kind_) {
      case Kind::kNegInf: return os << "-inf";
      case Kind::kPosInf: return os << "+inf";
      default: return os << x.value_;
    }
  }

 private:
  constexpr ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::kFinite;
  double value_ = 0.0;
};

}  // namespace hybridcop
