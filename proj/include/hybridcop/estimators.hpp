// Joint and marginal distribution-function estimators and the hybrid copula
// estimator C_n(u) = H_n(F_{n,1}^{<-}(u_1), ..., F_{n,p}^{<-}(u_p)).
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridcop/copula.hpp"
#include "hybridcop/distfun.hpp"
#include "hybridcop/extended_real.hpp"
#include "hybridcop/margin_family.hpp"

namespace hybridcop {

using Point = std::vector<double>;
using Grid = std::vector<Point>;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when the data cannot support the requested estimator (missing
/// entries where none are allowed, no complete rows, a fully missing column).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x p observations with a per-cell observation mask. Unobserved cells are
/// never read; an observed cell must hold a finite number.
class DataMatrix {
 public:
  DataMatrix(RowMatrix values, BoolMatrix observed);
  static DataMatrix fully_observed(RowMatrix values);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

  bool is_observed(std::size_t i, std::size_t j) const {
    return observed_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Value of an observed cell; throws std::logic_error for a missing one.
  double value(std::size_t i, std::size_t j) const;

  bool row_complete(std::size_t i) const;
  bool fully_observed() const;
  std::size_t complete_rows() const;
  std::size_t observed_count(std::size_t j) const;
  /// Observed entries of column j in row order.
  std::vector<double> observed_column(std::size_t j) const;

  const RowMatrix& values() const { return values_; }
  const BoolMatrix& mask() const { return observed_; }

 private:
  RowMatrix values_;
  BoolMatrix observed_;
};

/// A p-variate distribution-function estimate.
class JointCdfEstimate {
 public:
  enum class Kind { kEmpiricalAllRows, kCompleteCase, kModel };

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  /// Number of rows the estimate is built from (0 for kModel).
  std::size_t retained_rows() const { return static_cast<std::size_t>(rows_.rows()); }

  /// Evaluates at x; exactly 0 if any coordinate is -inf.
  double eval(std::span<const ExtendedReal> x) const;
  /// j-th marginal distribution function of this estimate.
  double marginal_eval(std::size_t j, const ExtendedReal& x) const;

  /// The true H = C(F_1, ..., F_p), for diagnostics with a perfect joint.
  static JointCdfEstimate model(CopulaModel copula, std::vector<MarginFamily> margins);

 private:
  friend JointCdfEstimate fit_empirical_joint(const DataMatrix& data);
  friend JointCdfEstimate fit_complete_case_joint(const DataMatrix& data);

  JointCdfEstimate(Kind kind, RowMatrix rows, std::size_t dim)
      : kind_(kind), dim_(dim), rows_(std::move(rows)) {}

  Kind kind_;
  std::size_t dim_;
  RowMatrix rows_;
  std::optional<CopulaModel> copula_;
  std::vector<MarginFamily> margins_;
};

/// Empirical distribution function of all rows; every entry must be observed.
JointCdfEstimate fit_empirical_joint(const DataMatrix& data);
/// Empirical distribution function of the fully observed rows.
JointCdfEstimate fit_complete_case_joint(const DataMatrix& data);

struct MarginalCdfEstimate {
  enum class Kind { kEmpirical, kAvailableCase, kParametricPlugin, kKnown };

  Kind kind;
  std::size_t column;
  Cdf cdf;
};

/// Empirical margin of column j; the column must be fully observed.
MarginalCdfEstimate fit_empirical_margin(const DataMatrix& data, std::size_t j);
/// Empirical margin of the observed entries of column j.
MarginalCdfEstimate fit_available_case_margin(const DataMatrix& data, std::size_t j);
/// Maximum likelihood plug-in F_j(.; theta_hat) from the observed entries of
/// column j. `family` selects the family; its parameters are ignored.
MarginalCdfEstimate fit_parametric_margin(const DataMatrix& data, std::size_t j,
                                          const MarginFamily& family);
MarginalCdfEstimate known_margin(std::size_t j, const MarginFamily& family);

class HybridEstimator {
 public:
  HybridEstimator(JointCdfEstimate joint, std::vector<MarginalCdfEstimate> margins);

  std::size_t dim() const { return joint_.dim(); }
  const JointCdfEstimate& joint() const { return joint_; }
  const std::vector<MarginalCdfEstimate>& margins() const { return margins_; }

  /// C_n(u). Throws std::domain_error if u leaves the unit cube.
  double eval(std::span<const double> u) const;

 private:
  JointCdfEstimate joint_;
  std::vector<MarginalCdfEstimate> margins_;
};

/// r_n (C_n(u) - C(u)) on each grid point.
std::vector<double> process_eval(const HybridEstimator& est, const CopulaModel& truth, double rate,
                                 const Grid& grid);

/// r_n {F_{n,j}(F_j^{<-}(s)) - s}: the marginal estimation error in the
/// uniform scale.
double marginal_process(const HybridEstimator& est, const Cdf& true_margin, std::size_t j,
                        double rate, double s);

/// Remainder of the first-order representation of the hybrid process:
///   r_n (C_n(u) - C(u)) - r_n {H_n(F^{<-}(u)) - C(u)}
///     + sum_j dC_j(u) r_n {F_{n,j}(F_j^{<-}(u_j)) - u_j} 1{0 < u_j < 1}.
std::vector<double> representation_remainder(const HybridEstimator& est, const CopulaModel& truth,
                                             std::span<const Cdf> true_margins, double rate,
                                             const Grid& grid);

}  // namespace hybridcop
