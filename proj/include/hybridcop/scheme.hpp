// Description of an estimation scheme: the data-generating copula and true
// margins, the missingness law, and which estimator is used for the joint
// distribution function and for each margin.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hybridcop/copula.hpp"
#include "hybridcop/margin_family.hpp"

namespace hybridcop {

enum class JointScheme { kEmpirical, kCompleteCase };
enum class MarginScheme { kEmpirical, kAvailableCase, kKnown, kParametric };

JointScheme parse_joint_scheme(std::string_view text);
MarginScheme parse_margin_scheme(std::string_view text);
std::string to_string(JointScheme s);
std::string to_string(MarginScheme s);

struct MarginSpec {
  MarginScheme scheme = MarginScheme::kEmpirical;
  /// True margin F_j. For kParametric the fitted family is this family.
  MarginFamily truth = Uniform01{};
};

/// MCAR observation probabilities of the bivariate missing-data model:
/// P(I = 1) = px, P(J = 1) = py, P(I = J = 1) = pxy.
struct ObservationModel {
  double px = 1.0;
  double py = 1.0;
  double pxy = 1.0;

  bool all_observed() const { return px == 1.0 && py == 1.0 && pxy == 1.0; }
};

/// Throws std::invalid_argument unless 0 < px, py <= 1, pxy > 0 and pxy lies
/// within the Frechet bounds [max(0, px + py - 1), min(px, py)].
void validate(const ObservationModel& obs);

class SchemeSpec {
 public:
  SchemeSpec(CopulaModel copula, JointScheme joint, std::vector<MarginSpec> margins,
             ObservationModel observation = {});

  const CopulaModel& copula() const { return copula_; }
  std::size_t dim() const { return margins_.size(); }
  JointScheme joint() const { return joint_; }
  const std::vector<MarginSpec>& margins() const { return margins_; }
  const MarginSpec& margin(std::size_t j) const { return margins_.at(j); }
  const ObservationModel& observation() const { return observation_; }

  /// Probability that every column in `columns` (a bit set) is observed.
  double observed_probability(unsigned columns) const;

 private:
  CopulaModel copula_;
  JointScheme joint_;
  std::vector<MarginSpec> margins_;
  ObservationModel observation_;
};

}  // namespace hybridcop
