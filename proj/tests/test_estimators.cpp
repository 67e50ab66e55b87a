#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hybridcop/estimators.hpp"
#include "hybridcop/harness.hpp"
#include "oracles.hpp"

using namespace hybridcop;

namespace {

RowMatrix rows(std::initializer_list<std::initializer_list<double>> init) {
  RowMatrix m(static_cast<Eigen::Index>(init.size()), static_cast<Eigen::Index>(init.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : init) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

DataMatrix with_missing(RowMatrix values, std::initializer_list<std::pair<int, int>> missing) {
  BoolMatrix mask = BoolMatrix::Constant(values.rows(), values.cols(), true);
  for (auto [i, j] : missing) mask(i, j) = false;
  return DataMatrix(std::move(values), std::move(mask));
}

std::vector<ExtendedReal> pt(std::initializer_list<double> xs) {
  std::vector<ExtendedReal> out;
  for (double x : xs) out.push_back(ExtendedReal::from_double(x));
  return out;
}

HybridEstimator empirical_scheme(const DataMatrix& d) {
  std::vector<MarginalCdfEstimate> m;
  for (std::size_t j = 0; j < d.cols(); ++j) m.push_back(fit_empirical_margin(d, j));
  return HybridEstimator(fit_empirical_joint(d), std::move(m));
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(DataMatrix, Validation) {
  EXPECT_THROW(DataMatrix(RowMatrix(0, 2), BoolMatrix(0, 2)), std::invalid_argument);
  EXPECT_THROW(DataMatrix(RowMatrix::Zero(2, 2), BoolMatrix::Constant(2, 3, true)), std::invalid_argument);
  RowMatrix v = rows({{1, std::nan("")}});
  EXPECT_THROW(DataMatrix::fully_observed(v), std::invalid_argument);
  // NaN under the mask is fine.
  const DataMatrix d = with_missing(v, {{0, 1}});
  EXPECT_FALSE(d.fully_observed());
  EXPECT_THROW(d.value(0, 1), std::logic_error);
  EXPECT_EQ(d.observed_count(1), 0u);
}

TEST(EmpiricalJoint, Examples) {
  const DataMatrix d = DataMatrix::fully_observed(rows({{1, 1}, {2, 2}}));
  const auto h = fit_empirical_joint(d);
  EXPECT_EQ(h.eval(pt({1.5, 2.5})), 0.5);
  EXPECT_EQ(h.eval(pt({-kInf, 10})), 0.0);
  EXPECT_EQ(h.eval(pt({kInf, kInf})), 1.0);
}

TEST(EmpiricalJoint, RejectsMissing) {
  const DataMatrix d = with_missing(rows({{1, 1}, {2, 2}}), {{1, 0}});
  try {
    fit_empirical_joint(d);
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("missing entries"), std::string::npos);
  }
}

TEST(CompleteCaseJoint, Examples) {
  const auto h1 = fit_complete_case_joint(with_missing(rows({{1, 1}, {2, 0}}), {{1, 1}}));
  EXPECT_EQ(h1.eval(pt({1, 1})), 1.0);
  EXPECT_EQ(h1.retained_rows(), 1u);
  const auto h2 = fit_complete_case_joint(DataMatrix::fully_observed(rows({{1, 1}, {3, 3}})));
  EXPECT_EQ(h2.eval(pt({2, 2})), 0.5);
  try {
    fit_complete_case_joint(with_missing(rows({{1, 1}, {2, 2}}), {{0, 0}, {1, 1}}));
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("no complete rows"), std::string::npos);
  }
}

TEST(CompleteCaseJoint, MatchesEmpiricalOnFullData) {
  std::mt19937_64 gen(5);
  const DataMatrix d = DataMatrix::fully_observed(oracle::distinct_data(30, 3, gen));
  const auto a = fit_empirical_joint(d);
  const auto b = fit_complete_case_joint(d);
  std::normal_distribution<double> norm(0.0, 20.0);
  for (int k = 0; k < 500; ++k) {
    const auto x = pt({norm(gen), norm(gen), norm(gen)});
    EXPECT_EQ(a.eval(x), b.eval(x));
  }
}

TEST(AvailableCaseMargin, Examples) {
  const DataMatrix d = with_missing(rows({{1}, {2}, {3}}), {{1, 0}});
  const auto f = fit_available_case_margin(d, 0);
  EXPECT_EQ(f.cdf.eval(1.0), 0.5);
  EXPECT_EQ(fit_available_case_margin(DataMatrix::fully_observed(rows({{5}})), 0).cdf.eval(4.0), 0.0);
  EXPECT_THROW(fit_available_case_margin(with_missing(rows({{1}, {2}}), {{0, 0}, {1, 0}}), 0),
               EstimationError);
  // Fully observed column: same as the plain empirical margin.
  const DataMatrix full = DataMatrix::fully_observed(rows({{0.3}, {-1}, {2}, {0.3}}));
  const auto a = fit_available_case_margin(full, 0), b = fit_empirical_margin(full, 0);
  for (double x : {-2.0, -1.0, 0.0, 0.3, 1.0, 2.0, 3.0}) EXPECT_EQ(a.cdf.eval(x), b.cdf.eval(x));
}

TEST(ParametricMargin, Examples) {
  const auto n = fit_parametric_margin(DataMatrix::fully_observed(rows({{-1}, {1}})), 0, NormalMargin{});
  const auto& fam = std::get<NormalMargin>(n.cdf.family());
  EXPECT_DOUBLE_EQ(fam.mean, 0.0);
  EXPECT_DOUBLE_EQ(fam.sd, 1.0);
  const auto e =
      fit_parametric_margin(DataMatrix::fully_observed(rows({{2}, {2}, {2}, {2}})), 0, ExponentialMargin{});
  EXPECT_DOUBLE_EQ(std::get<ExponentialMargin>(e.cdf.family()).rate, 0.5);
  EXPECT_THROW(fit_parametric_margin(DataMatrix::fully_observed(rows({{0}, {0}})), 0, NormalMargin{}),
               EstimationError);
  EXPECT_THROW(fit_parametric_margin(DataMatrix::fully_observed(rows({{1}, {-1}})), 0, ExponentialMargin{}),
               EstimationError);
  // Only observed entries enter the fit.
  const auto m = fit_parametric_margin(with_missing(rows({{-1}, {100}, {1}}), {{1, 0}}), 0, NormalMargin{});
  EXPECT_DOUBLE_EQ(std::get<NormalMargin>(m.cdf.family()).mean, 0.0);
}

TEST(HybridEval, ZeroCoordinateGivesZero) {
  std::mt19937_64 gen(9);
  const DataMatrix d = DataMatrix::fully_observed(oracle::distinct_data(12, 2, gen));
  const auto est = empirical_scheme(d);
  for (double v : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(est.eval(std::vector<double>{0.0, v}), 0.0);
    EXPECT_EQ(est.eval(std::vector<double>{v, 0.0}), 0.0);
  }
  EXPECT_EQ(est.eval(std::vector<double>{1.0, 1.0}), 1.0);
  EXPECT_THROW(est.eval(std::vector<double>{1.2, 0.5}), std::domain_error);
  EXPECT_THROW(est.eval(std::vector<double>{0.5}), std::invalid_argument);
}

TEST(HybridEval, KnownUniformMarginsCountRows) {
  Rng rng(17);
  const auto u = CopulaModel::clayton(2.0).sample(40, rng);
  const DataMatrix d = DataMatrix::fully_observed(u);
  const HybridEstimator est(fit_empirical_joint(d), {known_margin(0, Uniform01{}), known_margin(1, Uniform01{})});
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif;
  for (int k = 0; k < 300; ++k) {
    const std::vector<double> v{unif(gen), unif(gen)};
    int count = 0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) count += (u(i, 0) <= v[0] && u(i, 1) <= v[1]) ? 1 : 0;
    EXPECT_EQ(est.eval(v), count / 40.0);
  }
}

TEST(HybridEval, DeheuvelsEquivalenceOnLattice) {
  std::mt19937_64 gen(2024);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t p = rep % 2 ? 3 : 2;
    const std::size_t n = 1 + gen() % (p == 3 ? 20 : 50);
    const auto x = oracle::distinct_data(n, p, gen);
    const auto ranks = oracle::column_ranks(x);
    const auto est = empirical_scheme(DataMatrix::fully_observed(x));
    std::vector<std::size_t> k(p, 0);
    std::vector<double> u(p);
    while (true) {
      for (std::size_t j = 0; j < p; ++j) u[j] = static_cast<double>(k[j]) / static_cast<double>(n);
      ASSERT_EQ(est.eval(u), oracle::rank_copula(ranks, u)) << "n=" << n;
      std::size_t j = 0;
      while (j < p && ++k[j] > n) k[j++] = 0;
      if (j == p) break;
    }
  }
}

TEST(HybridEval, DeheuvelsEquivalenceOffLattice) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t p = rep % 2 ? 3 : 2;
    const std::size_t n = 1 + gen() % 50;
    const auto x = oracle::distinct_data(n, p, gen);
    const auto ranks = oracle::column_ranks(x);
    const auto est = empirical_scheme(DataMatrix::fully_observed(x));
    std::vector<double> u(p);
    for (int r = 0; r < 500; ++r) {
      for (auto& v : u) v = unif(gen);
      ASSERT_EQ(est.eval(u), oracle::ceil_rank_copula(ranks, u));
    }
  }
}

TEST(HybridEval, MonotoneAndBounded) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif;
  const auto x = oracle::distinct_data(25, 2, gen);
  const DataMatrix d = with_missing(x, {{0, 0}, {3, 1}, {7, 0}});
  const HybridEstimator est(fit_complete_case_joint(d),
                            {fit_available_case_margin(d, 0), fit_available_case_margin(d, 1)});
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> u{unif(gen), unif(gen)};
    const double c = est.eval(u);
    EXPECT_GE(c, 0.0);
    double bound = 1.0;
    for (std::size_t j = 0; j < 2; ++j) {
      bound = std::min(bound, est.joint().marginal_eval(j, est.margins()[j].cdf.left_inverse(u[j])));
    }
    EXPECT_LE(c, bound);
    const std::size_t j = static_cast<std::size_t>(k % 2);
    auto w = u;
    w[j] = std::min(1.0, w[j] + 0.1 * unif(gen));
    EXPECT_LE(c, est.eval(w));
  }
}

TEST(HybridEval, ReductionOnFullData) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unif;
  const DataMatrix d = DataMatrix::fully_observed(oracle::distinct_data(40, 2, gen));
  const auto a = empirical_scheme(d);
  const HybridEstimator b(fit_complete_case_joint(d),
                          {fit_available_case_margin(d, 0), fit_available_case_margin(d, 1)});
  for (int k = 0; k < 1000; ++k) {
    const std::vector<double> u{unif(gen), unif(gen)};
    EXPECT_EQ(a.eval(u), b.eval(u));
  }
}

TEST(ProcessEval, Examples) {
  Rng rng(4);
  const auto u = CopulaModel::independence(2).sample(4, rng);
  const auto est = empirical_scheme(DataMatrix::fully_observed(u));
  const auto ranks = oracle::column_ranks(u);
  const auto out = process_eval(est, CopulaModel::independence(2), 2.0, {{0.5, 0.5}});
  EXPECT_DOUBLE_EQ(out[0], 2.0 * (oracle::rank_copula(ranks, {0.5, 0.5}) - 0.25));

  // Comonotone sample: the estimate is min(u1, u2).
  const auto comon = empirical_scheme(DataMatrix::fully_observed(rows({{1, 1}, {2, 2}})));
  EXPECT_DOUBLE_EQ(process_eval(comon, CopulaModel::independence(2), 1.0, {{0.5, 0.5}})[0], 0.25);
  EXPECT_THROW(process_eval(comon, CopulaModel::independence(2), 0.0, {{0.5, 0.5}}), std::invalid_argument);
}

TEST(Remainder, PerfectEstimatesVanish) {
  const auto c = CopulaModel::clayton(1.5);
  const std::vector<MarginFamily> fam{NormalMargin{1.0, 2.0}, ExponentialMargin{0.5}};
  const HybridEstimator est(JointCdfEstimate::model(c, fam), {known_margin(0, fam[0]), known_margin(1, fam[1])});
  const std::vector<Cdf> truth{Cdf::known(fam[0]), Cdf::known(fam[1])};
  for (double r : representation_remainder(est, c, truth, 10.0, default_grid(2))) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(Remainder, BoundaryDropsMarginalTerms) {
  Rng rng(12);
  const auto c = CopulaModel::clayton(1.0);
  const auto u = c.sample(50, rng);
  const DataMatrix d = DataMatrix::fully_observed(u);
  const auto est = empirical_scheme(d);
  const std::vector<Cdf> truth{Cdf::known(Uniform01{}), Cdf::known(Uniform01{})};
  const double rate = std::sqrt(50.0);
  const Grid grid{{0.0, 0.4}, {0.7, 0.0}, {1.0, 0.3}};
  const auto rem = representation_remainder(est, c, truth, rate, grid);
  const auto h = fit_empirical_joint(d);
  // u_1 = 0: everything vanishes.
  EXPECT_EQ(rem[0], 0.0);
  EXPECT_EQ(rem[1], 0.0);
  // u_1 = 1: only the second marginal term survives.
  const Point g = grid[2];
  const double proc = rate * (est.eval(g) - c.cdf(g));
  const double joint = rate * (h.eval(pt({1.0, 0.3})) - c.cdf(g));
  const double beta2 = rate * (est.margins()[1].cdf.eval(0.3) - 0.3);
  EXPECT_NEAR(rem[2], proc - joint + c.partial(1, g) * beta2, 1e-12);
}
