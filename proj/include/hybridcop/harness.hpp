// Seeded Monte Carlo experiments on the hybrid copula process.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hybridcop/asymptotics.hpp"
#include "hybridcop/estimators.hpp"
#include "hybridcop/scheme.hpp"

namespace hybridcop {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws n rows: a copula sample mapped through the true margin quantiles,
/// then an MCAR mask with cell probabilities
/// {pxy, px - pxy, py - pxy, 1 - px - py + pxy}.
DataMatrix simulate_dataset(const SchemeSpec& scheme, std::size_t n, std::uint64_t seed);

/// Fits the scheme's joint and marginal estimators to data.
HybridEstimator fit_scheme(const SchemeSpec& scheme, const DataMatrix& data);

/// The true margins of the scheme as distribution-function handles.
std::vector<Cdf> true_margins(const SchemeSpec& scheme);

/// {0, 0.05, 0.1, ..., 0.9, 0.95, 1}^p.
Grid default_grid(std::size_t dim);

struct ExperimentConfig {
  SchemeSpec scheme;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 200;
  Grid grid;
  std::uint64_t master_seed = 42;
  unsigned threads = 1;
  /// Compute limit variances at interior grid points.
  bool compute_limits = true;
  McOptions mc;
};

/// Throws std::invalid_argument for R < 2, unsorted sizes or bad grid points.
void validate(const ExperimentConfig& config);

struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;     // divisor R - 1
  double variance_se = 0.0;  // sqrt((m4 - variance^2) / R)
};

struct MarginPointReport {
  std::size_t j;
  double s;
  SummaryStats process;  // r_n {F_{n,j}(F_j^{<-}(s)) - s}
  double limit_variance; // cov_beta(j; s, s)
};

struct GridPointReport {
  Point u;
  SummaryStats process;
  std::optional<Estimate> limit_variance;  // interior points only
  std::vector<MarginPointReport> margins;
};

struct SizeReport {
  std::size_t n = 0;
  std::size_t replications = 0;  // used
  std::size_t skipped = 0;
  std::vector<GridPointReport> points;
  double remainder_median = 0.0;
  double remainder_q90 = 0.0;
};

struct ExperimentReport {
  std::vector<SizeReport> sizes;
};

/// For each n and replication r, simulates with seed derive_seed(master, n, r),
/// fits, and records the process and sup-grid |remainder|. The report does
/// not depend on the number of threads. Replications whose estimators fail
/// are skipped; more than 1% skipped raises ExperimentError.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Raw per-replication paths of one sample size, for tests and diagnostics.
struct ReplicationPaths {
  Eigen::MatrixXd process;   // R x G
  std::vector<double> remainder_sup;
  std::vector<bool> skipped;
};
ReplicationPaths simulate_paths(const ExperimentConfig& config, std::size_t n);

/// Unbiased sample covariance (divisor R - 1) of the rows of an R x G matrix.
Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& paths);

SummaryStats summarize(std::span<const double> values);

/// Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double prob);

}  // namespace hybridcop
