#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hybridcop/asymptotics.hpp"
#include "hybridcop/normal.hpp"
#include "oracles.hpp"

using namespace hybridcop;

namespace {

SchemeSpec make(CopulaModel c, JointScheme joint, MarginScheme margins, MarginFamily truth = Uniform01{},
                ObservationModel obs = {}) {
  std::vector<MarginSpec> m(static_cast<std::size_t>(c.dim()), MarginSpec{margins, truth});
  return SchemeSpec(std::move(c), joint, std::move(m), obs);
}

SchemeSpec empirical(CopulaModel c) { return make(std::move(c), JointScheme::kEmpirical, MarginScheme::kEmpirical); }

SchemeSpec missing(CopulaModel c, double px = 0.8, double py = 0.8, double pxy = 0.64) {
  return make(std::move(c), JointScheme::kCompleteCase, MarginScheme::kAvailableCase, Uniform01{},
              ObservationModel{px, py, pxy});
}

const Point kMid{0.5, 0.5};

}  // namespace

TEST(Kernels, AlphaExamples) {
  EXPECT_DOUBLE_EQ(cov_alpha(empirical(CopulaModel::independence(2)), kMid, kMid), 0.1875);
  EXPECT_DOUBLE_EQ(cov_alpha(missing(CopulaModel::independence(2)), kMid, kMid), 0.29296875);
  for (const auto& c : {CopulaModel::clayton(1.0), CopulaModel::fgm(-0.5)}) {
    EXPECT_EQ(cov_alpha(missing(c), Point{0.0, 0.7}, kMid), 0.0);
    EXPECT_EQ(cov_alpha(empirical(c), kMid, Point{0.3, 0.0}), 0.0);
  }
  // Off-diagonal: C(u ^ v) - C(u) C(v).
  const auto c = CopulaModel::clayton(2.0);
  const Point u{0.3, 0.8}, v{0.6, 0.4};
  EXPECT_NEAR(cov_alpha(empirical(c), u, v),
              c.cdf(Point{0.3, 0.4}) - c.cdf(u) * c.cdf(v), 1e-15);
}

TEST(Kernels, BetaExamples) {
  const auto m = missing(CopulaModel::independence(2));
  EXPECT_DOUBLE_EQ(cov_beta(m, 0, 0.5, 0.5), 0.3125);
  EXPECT_NEAR(cov_beta(m, 1, 0.2, 0.7), (0.2 - 0.14) / 0.8, 1e-15);
  const auto known = make(CopulaModel::clayton(1.0), JointScheme::kEmpirical, MarginScheme::kKnown);
  EXPECT_EQ(cov_beta(known, 0, 0.3, 0.6), 0.0);
  const auto par =
      make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kParametric, NormalMargin{});
  EXPECT_NEAR(cov_beta(par, 0, 0.5, 0.5), 1.0 / (2.0 * std::numbers::pi), 1e-15);
  // Normal with general parameters: phi(z_s) phi(z_t) (1 + z_s z_t / 2).
  const auto par2 = make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kParametric,
                         NormalMargin{3.0, 2.0});
  const double zs = normal::quantile(0.2), zt = normal::quantile(0.9);
  EXPECT_NEAR(cov_beta(par2, 1, 0.2, 0.9), normal::pdf(zs) * normal::pdf(zt) * (1.0 + zs * zt / 2.0), 1e-14);
  // Exponential: the only parameter direction gives (1-s) log(1-s) (1-t) log(1-t).
  const auto ex = make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kParametric,
                       ExponentialMargin{2.5});
  EXPECT_NEAR(cov_beta(ex, 0, 0.3, 0.6), 0.7 * std::log(0.7) * 0.4 * std::log(0.4), 1e-14);
}

TEST(Kernels, BetaVanishesAtEndpoints) {
  const std::vector<SchemeSpec> schemes{
      empirical(CopulaModel::clayton(1.0)), missing(CopulaModel::fgm(0.5)),
      make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kParametric, NormalMargin{}),
      make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kParametric, ExponentialMargin{})};
  for (const auto& s : schemes) {
    for (double t : {0.0, 0.3, 1.0}) {
      EXPECT_EQ(cov_beta(s, 0, 0.0, t), 0.0);
      EXPECT_EQ(cov_beta(s, 1, 1.0, t), 0.0);
    }
  }
}

TEST(Kernels, BetaBetaExamples) {
  EXPECT_EQ(cov_beta_beta(empirical(CopulaModel::independence(2)), 0, 1, 0.3, 0.8).value, 0.0);
  EXPECT_NEAR(cov_beta_beta(missing(CopulaModel::clayton(1.0)), 0, 1, 0.5, 0.5).value, 1.0 / 12.0, 1e-15);
  // p_XY / (p_X p_Y) in general.
  const auto m = missing(CopulaModel::fgm(1.0), 0.9, 0.7, 0.65);
  EXPECT_NEAR(cov_beta_beta(m, 1, 0, 0.5, 0.5).value, 0.65 / 0.63 * (0.3125 - 0.25), 1e-15);
  std::vector<MarginSpec> mixed{{MarginScheme::kKnown, Uniform01{}}, {MarginScheme::kEmpirical, Uniform01{}}};
  const SchemeSpec half(CopulaModel::clayton(2.0), JointScheme::kEmpirical, mixed);
  EXPECT_EQ(cov_beta_beta(half, 0, 1, 0.4, 0.4).value, 0.0);
  EXPECT_THROW(cov_beta_beta(half, 1, 1, 0.4, 0.4), std::invalid_argument);
}

TEST(Kernels, AlphaBetaExamples) {
  EXPECT_DOUBLE_EQ(cov_alpha_beta(empirical(CopulaModel::independence(2)), 0, kMid, 0.5).value, 0.125);
  const auto known = make(CopulaModel::fgm(0.5), JointScheme::kEmpirical, MarginScheme::kKnown);
  EXPECT_EQ(cov_alpha_beta(known, 1, kMid, 0.5).value, 0.0);
  for (const auto& s : {empirical(CopulaModel::clayton(1.0)), missing(CopulaModel::fgm(0.5))}) {
    EXPECT_EQ(cov_alpha_beta(s, 0, Point{0.0, 0.6}, 0.4).value, 0.0);
  }
  // Available-case: p_X^{-1} {C(u1 ^ s, u2) - C(u) s}.
  const auto c = CopulaModel::clayton(1.0);
  const auto m = missing(c);
  EXPECT_NEAR(cov_alpha_beta(m, 0, Point{0.6, 0.3}, 0.4).value,
              (c.cdf(Point{0.4, 0.3}) - c.cdf(Point{0.6, 0.3}) * 0.4) / 0.8, 1e-15);
}

TEST(Kernels, DomainErrors) {
  const auto s = empirical(CopulaModel::independence(2));
  EXPECT_THROW(cov_beta(s, 0, 1.5, 0.5), std::domain_error);
  EXPECT_THROW(cov_alpha(s, Point{0.5, -0.1}, kMid), std::domain_error);
  EXPECT_THROW(cov_alpha(s, Point{0.5}, kMid), std::invalid_argument);
  EXPECT_THROW(cov_beta(s, 2, 0.5, 0.5), std::out_of_range);
  EXPECT_THROW(limit_variance(s, Point{0.0, 0.5}), std::domain_error);
  EXPECT_THROW(limit_variance(s, Point{0.5, 1.0}), std::domain_error);
}

TEST(LimitVariance, Examples) {
  const auto known = make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kKnown);
  EXPECT_DOUBLE_EQ(limit_variance(known, kMid).value, 0.1875);
  const auto emp = limit_variance(empirical(CopulaModel::independence(2)), kMid);
  EXPECT_DOUBLE_EQ(emp.value, 0.0625);
  EXPECT_EQ(emp.std_error, 0.0);
  EXPECT_LT(emp.value, limit_variance(known, kMid).value);
}

TEST(LimitVariance, KnownMarginsReduceToAlpha) {
  for (const auto& c : {CopulaModel::clayton(0.5), CopulaModel::fgm(-1.0), CopulaModel::independence(3)}) {
    const auto s = make(c, JointScheme::kEmpirical, MarginScheme::kKnown);
    for (double a : {0.1, 0.5, 0.85}) {
      Point u(static_cast<std::size_t>(c.dim()), a);
      u[0] = 0.3;
      EXPECT_EQ(limit_variance(s, u).value, cov_alpha(s, u, u));
    }
  }
}

TEST(LimitVariance, ScalesWithCommonObservationProbability) {
  // With p_X = p_Y = p_XY = p every kernel is the complete-data kernel over p.
  for (const auto& c : {CopulaModel::clayton(1.0), CopulaModel::fgm(0.5), CopulaModel::independence(2)}) {
    for (double p : {0.5, 0.9}) {
      for (const Point& u : {kMid, Point{0.2, 0.7}}) {
        EXPECT_NEAR(limit_variance(missing(c, p, p, p), u).value, limit_variance(empirical(c), u).value / p,
                    1e-14);
      }
    }
  }
}

TEST(LimitVariance, FullObservationMatchesEmpirical) {
  for (const auto& c : {CopulaModel::clayton(2.0), CopulaModel::fgm(-0.3)}) {
    const auto a = empirical(c), b = missing(c, 1.0, 1.0, 1.0);
    const Point u{0.35, 0.6}, v{0.8, 0.15};
    EXPECT_EQ(cov_alpha(a, u, v), cov_alpha(b, u, v));
    EXPECT_EQ(cov_beta(a, 1, 0.2, 0.6), cov_beta(b, 1, 0.2, 0.6));
    EXPECT_EQ(cov_beta_beta(a, 0, 1, 0.2, 0.6).value, cov_beta_beta(b, 0, 1, 0.2, 0.6).value);
    EXPECT_EQ(cov_alpha_beta(a, 1, u, 0.4).value, cov_alpha_beta(b, 1, u, 0.4).value);
    EXPECT_EQ(limit_variance(a, u).value, limit_variance(b, u).value);
  }
}

TEST(LimitVariance, GaussianVectorSimulation) {
  // Kernel matrix of (alpha(u), beta_1(1/2), beta_2(1/2)) for the empirical
  // scheme under independence, written out by hand, then simulated.
  Eigen::Matrix3d k;
  k << 0.1875, 0.125, 0.125, 0.125, 0.25, 0.0, 0.125, 0.0, 0.25;
  const Eigen::Matrix3d l = k.llt().matrixL();
  const Eigen::Vector3d w(1.0, -0.5, -0.5);  // partials of uv at (1/2, 1/2)
  Rng rng(404);
  const int n = 400000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
    const double y = w.dot(l * z);
    sum += y;
    sumsq += y * y;
  }
  const double var = sumsq / n - (sum / n) * (sum / n);
  const double se = var * std::sqrt(2.0 / n);
  EXPECT_NEAR(var, 0.0625, 4.0 * se);
  EXPECT_NEAR(limit_variance(empirical(CopulaModel::independence(2)), kMid).value, var, 4.0 * se);
}

TEST(Parametric, CrossCovarianceClosedFormUnderIndependence) {
  // E[1{U <= u} psi(X_1)]' Fdot(q_s) = u_2 * Fdot(q_{u1})' E[psi psi'] Fdot(q_s).
  const auto s = make(CopulaModel::independence(2), JointScheme::kEmpirical, MarginScheme::kParametric,
                      NormalMargin{});
  const Point u{0.3, 0.6};
  const double z1 = normal::quantile(0.3), zs = normal::quantile(0.45);
  const double expect = 0.6 * normal::pdf(z1) * normal::pdf(zs) * (1.0 + z1 * zs / 2.0);
  const auto got = cov_alpha_beta(s, 0, u, 0.45);
  EXPECT_NEAR(got.value, expect, 1e-14);
  EXPECT_EQ(got.std_error, 0.0);
}

TEST(Parametric, CrossCovarianceAgreesWithQuadrature) {
  // E[1{U_1 <= u_1, U_2 <= u_2} psi(F^{<-}(U_1))]
  //   = int_0^{u_1} psi(F^{<-}(w)) dC/du_1(w, u_2) dw.
  const MarginFamily truth = NormalMargin{1.0, 2.0};
  for (const auto& c : {CopulaModel::clayton(1.0), CopulaModel::fgm(0.5)}) {
    const auto s = make(c, JointScheme::kEmpirical, MarginScheme::kParametric, truth);
    const Point u{0.4, 0.7};
    const double sarg = 0.6;
    const Eigen::VectorXd fdot = margin_grad(truth, margin_quantile(truth, sarg));
    const double integral = oracle::simpson(
        [&](double w) {
          const double x = margin_quantile(truth, w).value();
          return margin_influence(truth, x).dot(fdot) * c.partial(0, Point{w, u[1]});
        },
        1e-12, u[0], 20000);
    const auto got = cov_alpha_beta(s, 0, u, sarg);
    EXPECT_GT(got.std_error, 0.0);
    EXPECT_LT(got.std_error, 2e-3);
    EXPECT_NEAR(got.value, integral, 4.0 * got.std_error + 1e-6) << c.to_string();
  }
}

TEST(Parametric, LimitVarianceCarriesMonteCarloError) {
  const auto s =
      make(CopulaModel::clayton(1.0), JointScheme::kEmpirical, MarginScheme::kParametric, NormalMargin{});
  const auto v = limit_variance(s, kMid);
  EXPECT_GT(v.value, 0.0);
  EXPECT_GT(v.std_error, 0.0);
  // Same seed, same answer.
  EXPECT_EQ(limit_variance(s, kMid).value, v.value);
}

TEST(Gram, PositiveSemidefiniteOnSmallGrids) {
  std::vector<SchemeSpec> schemes;
  for (const auto& c : {CopulaModel::independence(2), CopulaModel::clayton(0.5), CopulaModel::clayton(2.0),
                        CopulaModel::fgm(-1.0), CopulaModel::fgm(1.0)}) {
    schemes.push_back(empirical(c));
    schemes.push_back(make(c, JointScheme::kEmpirical, MarginScheme::kKnown));
    schemes.push_back(missing(c));
    schemes.push_back(missing(c, 0.9, 0.6, 0.55));
  }
  for (const auto& c : {CopulaModel::independence(2), CopulaModel::clayton(1.0), CopulaModel::fgm(0.5)}) {
    schemes.push_back(make(c, JointScheme::kEmpirical, MarginScheme::kParametric, NormalMargin{}));
    schemes.push_back(make(c, JointScheme::kEmpirical, MarginScheme::kParametric, ExponentialMargin{2.0}));
  }
  const std::vector<double> axis{0.25, 0.5, 0.75};
  for (const auto& s : schemes) {
    std::vector<LimitProcess> procs;
    for (double a : axis) {
      for (double b : axis) procs.push_back(AlphaAt{Point{a, b}});
    }
    for (std::size_t j = 0; j < 2; ++j) {
      for (double a : axis) procs.push_back(BetaAt{j, a});
    }
    const Eigen::MatrixXd g = LimitCovariance(s).gram(procs);
    EXPECT_TRUE(g.isApprox(g.transpose()));
    EXPECT_GE(min_eigenvalue(g), -1e-9);
  }
}

TEST(Gram, MonteCarloEntriesMatchPairwiseCovariance) {
  const auto s =
      make(CopulaModel::clayton(1.0), JointScheme::kEmpirical, MarginScheme::kParametric, NormalMargin{});
  const std::vector<LimitProcess> procs{AlphaAt{Point{0.3, 0.6}}, BetaAt{0, 0.4}, BetaAt{1, 0.7}};
  const McOptions mc{200000};
  const Eigen::MatrixXd g = LimitCovariance(s, mc).gram(procs);
  for (std::size_t a = 0; a < procs.size(); ++a) {
    for (std::size_t b = 0; b < procs.size(); ++b) {
      const auto e = LimitCovariance(s, mc).cov(procs[a], procs[b]);
      EXPECT_NEAR(g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), e.value, 1e-12);
    }
  }
}

TEST(Gram, OneDimensionalEmpiricalIsBrownianBridge) {
  const auto s = empirical(CopulaModel::independence(1));
  for (double a : {0.1, 0.5, 0.9}) {
    for (double b : {0.2, 0.6}) {
      EXPECT_NEAR(cov_alpha(s, Point{a}, Point{b}), std::min(a, b) - a * b, 1e-15);
      EXPECT_NEAR(cov_beta(s, 0, a, b), std::min(a, b) - a * b, 1e-15);
    }
    // One-dimensional copula is the identity, so the hybrid limit vanishes.
    EXPECT_NEAR(limit_variance(s, Point{a}).value, 0.0, 1e-15);
  }
}
