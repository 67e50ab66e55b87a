#include "hybridcop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

#include "hybridcop/rng.hpp"

namespace hybridcop {

DataMatrix simulate_dataset(const SchemeSpec& scheme, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("simulate_dataset: n must be positive");
  Rng rng(seed);
  RowMatrix values = scheme.copula().sample(n, rng);
  const auto p = values.cols();
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& truth = scheme.margin(static_cast<std::size_t>(j)).truth;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      values(i, j) = margin_quantile(truth, values(i, j)).value();
    }
  }
  BoolMatrix mask = BoolMatrix::Constant(values.rows(), p, true);
  const auto& obs = scheme.observation();
  if (!obs.all_observed()) {
    const double both = obs.pxy;
    const double x_only = both + (obs.px - obs.pxy);
    const double y_only = x_only + (obs.py - obs.pxy);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double w = rng.uniform();
      if (w < both) continue;
      if (w < x_only) {
        mask(i, 1) = false;
      } else if (w < y_only) {
        mask(i, 0) = false;
      } else {
        mask(i, 0) = false;
        mask(i, 1) = false;
      }
    }
  }
  return DataMatrix(std::move(values), std::move(mask));
}

HybridEstimator fit_scheme(const SchemeSpec& scheme, const DataMatrix& data) {
  if (data.cols() != scheme.dim()) throw std::invalid_argument("data dimension does not match scheme");
  JointCdfEstimate joint = scheme.joint() == JointScheme::kEmpirical ? fit_empirical_joint(data)
                                                                      : fit_complete_case_joint(data);
  std::vector<MarginalCdfEstimate> margins;
  for (std::size_t j = 0; j < scheme.dim(); ++j) {
    const auto& spec = scheme.margin(j);
    switch (spec.scheme) {
      case MarginScheme::kEmpirical: margins.push_back(fit_empirical_margin(data, j)); break;
      case MarginScheme::kAvailableCase: margins.push_back(fit_available_case_margin(data, j)); break;
      case MarginScheme::kKnown: margins.push_back(known_margin(j, spec.truth)); break;
      case MarginScheme::kParametric:
        margins.push_back(fit_parametric_margin(data, j, spec.truth));
        break;
    }
  }
  return HybridEstimator(std::move(joint), std::move(margins));
}

std::vector<Cdf> true_margins(const SchemeSpec& scheme) {
  std::vector<Cdf> out;
  for (const auto& m : scheme.margins()) out.push_back(Cdf::known(m.truth));
  return out;
}

Grid default_grid(std::size_t dim) {
  std::vector<double> axis{0.0};
  for (int k = 1; k <= 19; ++k) {
    if (k == 1 || k == 19 || k % 2 == 0) axis.push_back(k / 20.0);
  }
  axis.push_back(1.0);
  Grid grid{{}};
  for (std::size_t d = 0; d < dim; ++d) {
    Grid next;
    for (const auto& prefix : grid) {
      for (double a : axis) {
        Point p = prefix;
        p.push_back(a);
        next.push_back(std::move(p));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

void validate(const ExperimentConfig& config) {
  if (config.replications < 2) throw std::invalid_argument("experiment needs at least 2 replications");
  if (config.sample_sizes.empty()) throw std::invalid_argument("experiment needs a sample size");
  for (std::size_t k = 0; k < config.sample_sizes.size(); ++k) {
    if (config.sample_sizes[k] == 0) throw std::invalid_argument("sample sizes must be positive");
    if (k > 0 && config.sample_sizes[k] <= config.sample_sizes[k - 1]) {
      throw std::invalid_argument("sample sizes must be strictly increasing");
    }
  }
  if (config.grid.empty()) throw std::invalid_argument("experiment needs at least one grid point");
  for (const auto& u : config.grid) {
    if (u.size() != config.scheme.dim()) throw std::invalid_argument("grid point has the wrong dimension");
    for (double x : u) {
      if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("grid point outside the unit cube");
    }
  }
  if (config.threads == 0) throw std::invalid_argument("threads must be positive");
}

namespace {

struct Replication {
  std::vector<double> process;               // G
  std::vector<double> margin_process;        // G * p
  double remainder_sup = 0.0;
  bool skipped = false;
};

Replication run_one(const ExperimentConfig& config, const std::vector<Cdf>& truth, std::size_t n,
                    std::size_t rep) {
  Replication out;
  const auto& scheme = config.scheme;
  const std::size_t p = scheme.dim();
  const DataMatrix data = simulate_dataset(scheme, n, derive_seed(config.master_seed, n, rep));
  std::optional<HybridEstimator> est;
  try {
    est.emplace(fit_scheme(scheme, data));
  } catch (const EstimationError&) {
    out.skipped = true;
    return out;
  }
  const double rate = std::sqrt(static_cast<double>(n));
  out.process = process_eval(*est, scheme.copula(), rate, config.grid);
  out.margin_process.reserve(config.grid.size() * p);
  for (const auto& u : config.grid) {
    for (std::size_t j = 0; j < p; ++j) {
      out.margin_process.push_back(marginal_process(*est, truth[j], j, rate, u[j]));
    }
  }
  const auto rem = representation_remainder(*est, scheme.copula(), truth, rate, config.grid);
  for (double r : rem) out.remainder_sup = std::max(out.remainder_sup, std::abs(r));
  return out;
}

std::vector<Replication> run_replications(const ExperimentConfig& config, std::size_t n) {
  const auto truth = true_margins(config.scheme);
  std::vector<Replication> reps(config.replications);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps.size()) return;
      try {
        reps[r] = run_one(config, truth, n, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = reps.size();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(config.threads, static_cast<unsigned>(reps.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t skipped = 0;
  for (const auto& r : reps) skipped += r.skipped ? 1 : 0;
  if (static_cast<double>(skipped) > 0.01 * static_cast<double>(reps.size())) {
    throw ExperimentError("n = " + std::to_string(n) + ": " + std::to_string(skipped) + " of " +
                          std::to_string(reps.size()) + " replications skipped (limit 1%)");
  }
  return reps;
}

}  // namespace

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  const double r = static_cast<double>(values.size());
  if (values.size() < 2) throw std::invalid_argument("summarize needs at least 2 values");
  for (double v : values) s.mean += v;
  s.mean /= r;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = (v - s.mean) * (v - s.mean);
    m2 += d;
    m4 += d * d;
  }
  s.variance = m2 / (r - 1.0);
  m4 /= r;
  s.variance_se = std::sqrt(std::max(0.0, m4 - s.variance * s.variance) / r);
  return s;
}

double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("sample_quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::domain_error("sample_quantile: prob outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ReplicationPaths simulate_paths(const ExperimentConfig& config, std::size_t n) {
  validate(config);
  const auto reps = run_replications(config, n);
  ReplicationPaths out;
  out.process = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reps.size()),
                                      static_cast<Eigen::Index>(config.grid.size()));
  for (std::size_t r = 0; r < reps.size(); ++r) {
    out.skipped.push_back(reps[r].skipped);
    out.remainder_sup.push_back(reps[r].remainder_sup);
    for (std::size_t g = 0; g < reps[r].process.size(); ++g) {
      out.process(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(g)) = reps[r].process[g];
    }
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto& scheme = config.scheme;
  const std::size_t p = scheme.dim();

  // Limits do not depend on n.
  std::vector<std::optional<Estimate>> limits(config.grid.size());
  std::vector<std::vector<double>> margin_limits(config.grid.size(), std::vector<double>(p));
  if (config.compute_limits) {
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
      const auto& u = config.grid[g];
      if (std::all_of(u.begin(), u.end(), [](double x) { return x > 0.0 && x < 1.0; })) {
        limits[g] = limit_variance(scheme, u, config.mc);
      }
      for (std::size_t j = 0; j < p; ++j) margin_limits[g][j] = cov_beta(scheme, j, u[j], u[j]);
    }
  }

  ExperimentReport report;
  for (std::size_t n : config.sample_sizes) {
    const auto reps = run_replications(config, n);
    SizeReport size;
    size.n = n;
    std::vector<const Replication*> used;
    for (const auto& r : reps) {
      if (r.skipped) {
        ++size.skipped;
      } else {
        used.push_back(&r);
      }
    }
    size.replications = used.size();
    std::vector<double> column(used.size());
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
      GridPointReport point;
      point.u = config.grid[g];
      for (std::size_t r = 0; r < used.size(); ++r) column[r] = used[r]->process[g];
      point.process = summarize(column);
      point.limit_variance = limits[g];
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t r = 0; r < used.size(); ++r) column[r] = used[r]->margin_process[g * p + j];
        point.margins.push_back(
            {j, point.u[j], summarize(column), config.compute_limits ? margin_limits[g][j] : 0.0});
      }
      size.points.push_back(std::move(point));
    }
    std::vector<double> sups;
    for (const auto* r : used) sups.push_back(r->remainder_sup);
    size.remainder_median = sample_quantile(sups, 0.5);
    size.remainder_q90 = sample_quantile(sups, 0.9);
    report.sizes.push_back(std::move(size));
  }
  return report;
}

Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& paths) {
  if (paths.rows() < 2) throw std::invalid_argument("estimate_covariance needs at least 2 rows");
  const Eigen::RowVectorXd mean = paths.colwise().mean();
  const Eigen::MatrixXd centered = paths.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(paths.rows() - 1);
}

}  // namespace hybridcop
