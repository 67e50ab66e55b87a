#include "hybridcop/estimators.hpp"

#include <cmath>
#include <string>

namespace hybridcop {

namespace {

void check_column(const DataMatrix& data, std::size_t j) {
  if (j >= data.cols()) throw std::out_of_range("column index " + std::to_string(j) + " out of range");
}

void check_unit_cube(std::span<const double> u) {
  for (double x : u) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("point outside the unit cube");
  }
}

}  // namespace

// --- DataMatrix -------------------------------------------------------------

DataMatrix::DataMatrix(RowMatrix values, BoolMatrix observed)
    : values_(std::move(values)), observed_(std::move(observed)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("data matrix needs at least one row and one column");
  }
  if (observed_.rows() != values_.rows() || observed_.cols() != values_.cols()) {
    throw std::invalid_argument("observation mask does not match the data shape");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (observed_(i, j) && !std::isfinite(values_(i, j))) {
        throw std::invalid_argument("non-finite value in observed cell (row " +
                                    std::to_string(i + 1) + ", column " + std::to_string(j + 1) +
                                    ")");
      }
    }
  }
}

DataMatrix DataMatrix::fully_observed(RowMatrix values) {
  BoolMatrix mask = BoolMatrix::Constant(values.rows(), values.cols(), true);
  return DataMatrix(std::move(values), std::move(mask));
}

double DataMatrix::value(std::size_t i, std::size_t j) const {
  if (!is_observed(i, j)) throw std::logic_error("read of a missing cell");
  return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

bool DataMatrix::row_complete(std::size_t i) const {
  return observed_.row(static_cast<Eigen::Index>(i)).all();
}

bool DataMatrix::fully_observed() const { return observed_.all(); }

std::size_t DataMatrix::complete_rows() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < rows(); ++i) m += row_complete(i) ? 1 : 0;
  return m;
}

std::size_t DataMatrix::observed_count(std::size_t j) const {
  check_column(*this, j);
  return static_cast<std::size_t>(observed_.col(static_cast<Eigen::Index>(j)).count());
}

std::vector<double> DataMatrix::observed_column(std::size_t j) const {
  check_column(*this, j);
  std::vector<double> out;
  out.reserve(rows());
  for (std::size_t i = 0; i < rows(); ++i) {
    if (is_observed(i, j)) out.push_back(value(i, j));
  }
  return out;
}

// --- Joint estimates --------------------------------------------------------

JointCdfEstimate fit_empirical_joint(const DataMatrix& data) {
  if (!data.fully_observed()) {
    throw EstimationError("empirical joint estimator: data has missing entries");
  }
  return JointCdfEstimate(JointCdfEstimate::Kind::kEmpiricalAllRows, data.values(), data.cols());
}

JointCdfEstimate fit_complete_case_joint(const DataMatrix& data) {
  const std::size_t m = data.complete_rows();
  if (m == 0) throw EstimationError("complete-case joint estimator: no complete rows");
  RowMatrix rows(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(data.cols()));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (data.row_complete(i)) rows.row(r++) = data.values().row(static_cast<Eigen::Index>(i));
  }
  return JointCdfEstimate(JointCdfEstimate::Kind::kCompleteCase, std::move(rows), data.cols());
}

JointCdfEstimate JointCdfEstimate::model(CopulaModel copula, std::vector<MarginFamily> margins) {
  if (margins.size() != static_cast<std::size_t>(copula.dim())) {
    throw std::invalid_argument("model joint: one margin per copula coordinate required");
  }
  for (const auto& m : margins) validate(m);
  JointCdfEstimate est(Kind::kModel, RowMatrix(0, copula.dim()), margins.size());
  est.copula_ = std::move(copula);
  est.margins_ = std::move(margins);
  return est;
}

double JointCdfEstimate::eval(std::span<const ExtendedReal> x) const {
  if (x.size() != dim_) throw std::invalid_argument("joint eval: wrong dimension");
  for (const auto& xj : x) {
    if (xj.is_neg_inf()) return 0.0;
  }
  if (kind_ == Kind::kModel) {
    std::vector<double> u(dim_);
    for (std::size_t j = 0; j < dim_; ++j) u[j] = margin_cdf(margins_[j], x[j]);
    return copula_->cdf(u);
  }
  std::size_t count = 0;
  const Eigen::Index p = rows_.cols();
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    const double* row = rows_.row(i).data();
    bool inside = true;
    for (Eigen::Index j = 0; j < p && inside; ++j) inside = x[static_cast<std::size_t>(j)].dominates(row[j]);
    count += inside ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(rows_.rows());
}

double JointCdfEstimate::marginal_eval(std::size_t j, const ExtendedReal& x) const {
  std::vector<ExtendedReal> point(dim_, ExtendedReal::pos_inf());
  point.at(j) = x;
  return eval(point);
}

// --- Marginal estimates -----------------------------------------------------

MarginalCdfEstimate fit_empirical_margin(const DataMatrix& data, std::size_t j) {
  check_column(data, j);
  if (data.observed_count(j) != data.rows()) {
    throw EstimationError("empirical margin: column " + std::to_string(j + 1) +
                          " has missing entries");
  }
  return {MarginalCdfEstimate::Kind::kEmpirical, j, Cdf::empirical(data.observed_column(j))};
}

MarginalCdfEstimate fit_available_case_margin(const DataMatrix& data, std::size_t j) {
  check_column(data, j);
  const auto column = data.observed_column(j);
  if (column.empty()) throw EstimationError("column " + std::to_string(j + 1) + " fully missing");
  return {MarginalCdfEstimate::Kind::kAvailableCase, j, Cdf::empirical(column)};
}

MarginalCdfEstimate fit_parametric_margin(const DataMatrix& data, std::size_t j,
                                          const MarginFamily& family) {
  check_column(data, j);
  const auto column = data.observed_column(j);
  MarginFamily fitted;
  try {
    fitted = fit_mle(family, column);
  } catch (const std::exception& e) {
    throw EstimationError("parametric margin for column " + std::to_string(j + 1) + ": " +
                          e.what());
  }
  return {MarginalCdfEstimate::Kind::kParametricPlugin, j, Cdf::parametric(fitted)};
}

MarginalCdfEstimate known_margin(std::size_t j, const MarginFamily& family) {
  return {MarginalCdfEstimate::Kind::kKnown, j, Cdf::known(family)};
}

// --- Hybrid estimator -------------------------------------------------------

HybridEstimator::HybridEstimator(JointCdfEstimate joint, std::vector<MarginalCdfEstimate> margins)
    : joint_(std::move(joint)), margins_(std::move(margins)) {
  if (margins_.size() != joint_.dim()) {
    throw std::invalid_argument("hybrid estimator: need one margin per joint coordinate");
  }
}

double HybridEstimator::eval(std::span<const double> u) const {
  if (u.size() != dim()) throw std::invalid_argument("hybrid eval: wrong dimension");
  check_unit_cube(u);
  std::vector<ExtendedReal> x;
  x.reserve(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) x.push_back(margins_[j].cdf.left_inverse(u[j]));
  return joint_.eval(x);
}

std::vector<double> process_eval(const HybridEstimator& est, const CopulaModel& truth, double rate,
                                 const Grid& grid) {
  if (!(rate > 0.0)) throw std::invalid_argument("process_eval: rate must be positive");
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& u : grid) out.push_back(rate * (est.eval(u) - truth.cdf(u)));
  return out;
}

double marginal_process(const HybridEstimator& est, const Cdf& true_margin, std::size_t j,
                        double rate, double s) {
  const auto q = true_margin.left_inverse(s);
  return rate * (est.margins().at(j).cdf.eval(q) - s);
}

std::vector<double> representation_remainder(const HybridEstimator& est, const CopulaModel& truth,
                                             std::span<const Cdf> true_margins, double rate,
                                             const Grid& grid) {
  if (!(rate > 0.0)) throw std::invalid_argument("representation_remainder: rate must be positive");
  const std::size_t p = est.dim();
  if (true_margins.size() != p) {
    throw std::invalid_argument("representation_remainder: one true margin per coordinate");
  }
  std::vector<double> out;
  out.reserve(grid.size());
  std::vector<ExtendedReal> x(p);
  for (const auto& u : grid) {
    const double c = truth.cdf(u);
    const double process = rate * (est.eval(u) - c);
    for (std::size_t j = 0; j < p; ++j) x[j] = true_margins[j].left_inverse(u[j]);
    double r = process - rate * (est.joint().eval(x) - c);
    for (std::size_t j = 0; j < p; ++j) {
      if (u[j] > 0.0 && u[j] < 1.0) {
        r += truth.partial(static_cast<int>(j), u) *
             marginal_process(est, true_margins[j], j, rate, u[j]);
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace hybridcop
