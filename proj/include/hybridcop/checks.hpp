// Deterministic checks: the inverse-map sandwich inequality, paired inversion
// decay, directional derivatives of (H; F) -> H o F^{<-}, copula partial
// derivatives and copula axioms.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hybridcop/copula.hpp"
#include "hybridcop/distfun.hpp"
#include "hybridcop/estimators.hpp"

namespace hybridcop {

struct SandwichResult {
  bool ok = true;
  double worst_slack = 0.0;  // min over u of both one-sided gaps
};

/// With gamma = r (F_n - F) and q = F_n^{<-}(u), checks
///   -gamma(q) <= r {F(q) - u} <= -gamma(q-)
/// for every u in (0, 1]. Slack down to -1e-12 counts as ok.
SandwichResult sandwich_check(const Cdf& estimate, const Cdf& truth, std::span<const double> u_grid,
                              double rate);
/// Empirical CDF of the sample against truth, rate sqrt(n).
SandwichResult sandwich_check(std::span<const double> sample, const Cdf& truth,
                              std::span<const double> u_grid);

/// sup_u | r {F(F_n^{<-}(u)) - u} + r {F_n(F^{<-}(u)) - u} |.
double paired_inversion_sup(const Cdf& estimate, const Cdf& truth, std::span<const double> u_grid,
                            double rate);

struct DecayRow {
  double x;      // n or t
  double value;  // median sup or sup distance
};

bool strictly_decreasing(std::span<const DecayRow> rows);

/// Median over reps of paired_inversion_sup for samples of size n drawn from
/// truth, for each n in the ladder.
std::vector<DecayRow> paired_inversion_check(const MarginFamily& truth, std::span<const double> u_grid,
                                             std::span<const std::size_t> ladder, std::size_t reps,
                                             std::uint64_t seed);

/// Direction h = (alpha, beta_1, ..., beta_p), all on the uniform scale; the
/// perturbed inputs are H + t alpha o F and F_j + t beta_j o F_j.
struct Perturbation {
  std::string name;
  std::function<double(std::span<const double>)> alpha;
  std::vector<std::function<double(double)>> beta;
};

struct HadamardCase {
  CopulaModel copula;
  std::vector<MarginFamily> margins;
  Perturbation direction;
};

std::vector<HadamardCase> builtin_perturbations();

/// For each t, sup over the grid of |(phi(theta + t h) - phi(theta)) / t - phi'(h)|.
/// Throws std::invalid_argument when some t makes a perturbed input an
/// invalid distribution function.
std::vector<DecayRow> hadamard_check(const HadamardCase& c, std::span<const double> t_ladder,
                                     const Grid& grid);

using PartialFn = std::function<double(const CopulaModel&, int, std::span<const double>)>;

/// Largest |partial_j - central difference| over random points in [0.01, 0.99]^p.
double finite_difference_error(const CopulaModel& copula, std::size_t points, std::uint64_t seed,
                               const PartialFn& partial = {});

struct AxiomReport {
  double grounded_error = 0.0;
  double margin_error = 0.0;
  double min_volume = 0.0;  // smallest rectangle volume
};
AxiomReport copula_axiom_check(const CopulaModel& copula, std::size_t rectangles, std::uint64_t seed);

struct SuiteResult {
  std::string name;
  bool passed;
  std::string detail;
};

struct CheckOptions {
  bool quick = false;
  /// Replaces CopulaModel::partial in the finite-difference suite.
  PartialFn partial;
};

/// sandwich, paired-inversion, hadamard, finite-difference, copula-axioms.
std::vector<SuiteResult> run_check_suites(const CheckOptions& options = {});

}  // namespace hybridcop
