#include "hybridcop/scheme.hpp"

#include <algorithm>
#include <stdexcept>

namespace hybridcop {

JointScheme parse_joint_scheme(std::string_view text) {
  if (text == "empirical") return JointScheme::kEmpirical;
  if (text == "complete-case") return JointScheme::kCompleteCase;
  throw std::invalid_argument("unknown joint scheme '" + std::string(text) + "'");
}

MarginScheme parse_margin_scheme(std::string_view text) {
  if (text == "empirical") return MarginScheme::kEmpirical;
  if (text == "available-case") return MarginScheme::kAvailableCase;
  if (text == "known") return MarginScheme::kKnown;
  if (text == "parametric") return MarginScheme::kParametric;
  throw std::invalid_argument("unknown margin scheme '" + std::string(text) + "'");
}

std::string to_string(JointScheme s) {
  return s == JointScheme::kEmpirical ? "empirical" : "complete-case";
}

std::string to_string(MarginScheme s) {
  switch (s) {
    case MarginScheme::kEmpirical: return "empirical";
    case MarginScheme::kAvailableCase: return "available-case";
    case MarginScheme::kKnown: return "known";
    case MarginScheme::kParametric: return "parametric";
  }
  return "?";
}

void validate(const ObservationModel& obs) {
  const auto in_unit = [](double p) { return p > 0.0 && p <= 1.0; };
  if (!in_unit(obs.px) || !in_unit(obs.py)) {
    throw std::invalid_argument("observation probabilities px, py must lie in (0, 1]");
  }
  if (!(obs.pxy > 0.0)) throw std::invalid_argument("pxy must be positive");
  const double lo = std::max(0.0, obs.px + obs.py - 1.0);
  const double hi = std::min(obs.px, obs.py);
  // Allow rounding in px + py - 1.
  if (obs.pxy < lo - 1e-12 || obs.pxy > hi) {
    throw std::invalid_argument("pxy violates the Frechet bounds [max(0, px + py - 1), min(px, py)]");
  }
}

SchemeSpec::SchemeSpec(CopulaModel copula, JointScheme joint, std::vector<MarginSpec> margins,
                       ObservationModel observation)
    : copula_(std::move(copula)),
      joint_(joint),
      margins_(std::move(margins)),
      observation_(observation) {
  if (margins_.size() != static_cast<std::size_t>(copula_.dim())) {
    throw std::invalid_argument("scheme: one margin specification per copula coordinate");
  }
  validate(observation_);
  for (const auto& m : margins_) {
    validate(m.truth);
    if (m.scheme == MarginScheme::kParametric &&
        std::holds_alternative<Uniform01>(m.truth)) {
      throw std::invalid_argument("parametric margins need a normal or exponential true margin");
    }
  }
  if (!observation_.all_observed()) {
    if (dim() != 2) throw std::invalid_argument("missing-data schemes are bivariate");
    if (joint_ == JointScheme::kEmpirical) {
      throw std::invalid_argument("the empirical joint estimator needs fully observed data");
    }
    const double p[2] = {observation_.px, observation_.py};
    for (std::size_t j = 0; j < 2; ++j) {
      if (margins_[j].scheme == MarginScheme::kEmpirical && p[j] < 1.0) {
        throw std::invalid_argument("empirical margins need fully observed columns");
      }
    }
  }
}

double SchemeSpec::observed_probability(unsigned columns) const {
  if (dim() != 2) return 1.0;
  switch (columns & 3u) {
    case 0u: return 1.0;
    case 1u: return observation_.px;
    case 2u: return observation_.py;
    default: return observation_.pxy;
  }
}

}  // namespace hybridcop
