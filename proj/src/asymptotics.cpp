#include "hybridcop/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "hybridcop/rng.hpp"

namespace hybridcop {

namespace {

unsigned all_columns(std::size_t p) { return (1u << p) - 1u; }

void check_probability(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("kernel argument outside [0, 1]");
}

}  // namespace

LimitCovariance::LimitCovariance(SchemeSpec scheme, McOptions mc)
    : scheme_(std::move(scheme)), mc_(mc) {
  if (mc_.draws < 2) throw std::invalid_argument("Monte Carlo integration needs >= 2 draws");
}

LimitCovariance::Resolved LimitCovariance::resolve(const LimitProcess& p) const {
  const std::size_t dim = scheme_.dim();
  if (const auto* a = std::get_if<AlphaAt>(&p)) {
    if (a->u.size() != dim) throw std::invalid_argument("alpha point has the wrong dimension");
    for (double x : a->u) check_probability(x);
    return {Shape::kIndicator, all_columns(dim), a->u, scheme_.copula().cdf(a->u), 0, {}};
  }
  const auto& b = std::get<BetaAt>(p);
  if (b.j >= dim) throw std::out_of_range("margin index out of range");
  check_probability(b.s);
  const auto& spec = scheme_.margin(b.j);
  const unsigned cols = 1u << b.j;
  // Pinned at both ends.
  if (b.s == 0.0 || b.s == 1.0) return {Shape::kZero, cols, {}, 0.0, b.j, {}};
  switch (spec.scheme) {
    case MarginScheme::kKnown:
      return {Shape::kZero, cols, {}, 0.0, b.j, {}};
    case MarginScheme::kEmpirical:
    case MarginScheme::kAvailableCase: {
      Point e(dim, 1.0);
      e[b.j] = b.s;
      return {Shape::kIndicator, cols, std::move(e), b.s, b.j, {}};
    }
    case MarginScheme::kParametric:
      return {Shape::kParametric, cols, {}, 0.0, b.j,
              margin_grad(spec.truth, margin_quantile(spec.truth, b.s))};
  }
  throw std::logic_error("unreachable");
}

double LimitCovariance::factor(const Resolved& a, const Resolved& b) const {
  if (a.columns == b.columns) return 1.0 / scheme_.observed_probability(a.columns);
  return scheme_.observed_probability(a.columns | b.columns) /
         (scheme_.observed_probability(a.columns) * scheme_.observed_probability(b.columns));
}

bool LimitCovariance::closed_form(const Resolved& a, const Resolved& b, double& out) const {
  const auto& copula = scheme_.copula();
  if (a.shape == Shape::kZero || b.shape == Shape::kZero) {
    out = 0.0;
    return true;
  }
  if (a.shape == Shape::kIndicator && b.shape == Shape::kIndicator) {
    Point meet(a.point.size());
    for (std::size_t k = 0; k < meet.size(); ++k) meet[k] = std::min(a.point[k], b.point[k]);
    out = copula.cdf(meet) - a.center * b.center;
    return true;
  }
  const bool independent = copula.family() == CopulaModel::Family::kIndependence;
  if (a.shape == Shape::kParametric && b.shape == Shape::kParametric) {
    if (a.j == b.j) {
      out = a.fdot.dot(influence_second_moment(scheme_.margin(a.j).truth) * b.fdot);
      return true;
    }
    if (independent) {
      out = 0.0;
      return true;
    }
    return false;
  }
  // Indicator against parametric: E[1{U <= x} psi_j] factorizes when the
  // event only involves coordinate j or the coordinates are independent, and
  // E[1{X_j <= q} psi_j(X_j)] = E[psi psi'] Fdot_j(q) for a maximum
  // likelihood influence function.
  const Resolved& ind = a.shape == Shape::kIndicator ? a : b;
  const Resolved& par = a.shape == Shape::kIndicator ? b : a;
  double others = 1.0;
  bool only_j = true;
  for (std::size_t k = 0; k < ind.point.size(); ++k) {
    if (k == par.j) continue;
    others *= ind.point[k];
    only_j = only_j && ind.point[k] == 1.0;
  }
  if (!only_j && !independent) return false;
  const auto& truth = scheme_.margin(par.j).truth;
  const Eigen::VectorXd g = margin_grad(truth, margin_quantile(truth, ind.point[par.j]));
  out = others * g.dot(influence_second_moment(truth) * par.fdot);
  return true;
}

double LimitCovariance::influence(const Resolved& r, std::span<const double> u) const {
  switch (r.shape) {
    case Shape::kZero:
      return 0.0;
    case Shape::kIndicator: {
      bool inside = true;
      for (std::size_t k = 0; k < u.size() && inside; ++k) inside = u[k] <= r.point[k];
      return (inside ? 1.0 : 0.0) - r.center;
    }
    case Shape::kParametric: {
      const auto& truth = scheme_.margin(r.j).truth;
      const double x = margin_quantile(truth, u[r.j]).value();
      return r.fdot.dot(margin_influence(truth, x));
    }
  }
  return 0.0;
}

Estimate LimitCovariance::monte_carlo(
    std::span<const std::pair<double, std::pair<Resolved, Resolved>>> pairs) const {
  if (pairs.empty()) return {};
  Rng rng(mc_.seed);
  const RowMatrix draws = scheme_.copula().sample(mc_.draws, rng);
  // Welford accumulation of the weighted sum of products.
  double mean = 0.0, m2 = 0.0;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    const std::span<const double> u(draws.row(i).data(), static_cast<std::size_t>(draws.cols()));
    double y = 0.0;
    for (const auto& [w, ab] : pairs) y += w * influence(ab.first, u) * influence(ab.second, u);
    const double delta = y - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (y - mean);
  }
  const double n = static_cast<double>(draws.rows());
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

Estimate LimitCovariance::cov(const LimitProcess& a, const LimitProcess& b) const {
  const Resolved ra = resolve(a), rb = resolve(b);
  double value = 0.0;
  if (closed_form(ra, rb, value)) return {factor(ra, rb) * value, 0.0};
  const std::array<std::pair<double, std::pair<Resolved, Resolved>>, 1> pairs{
      std::pair{factor(ra, rb), std::pair{ra, rb}}};
  return monte_carlo(pairs);
}

Estimate LimitCovariance::variance(std::span<const LinearTerm> terms) const {
  std::vector<Resolved> resolved;
  resolved.reserve(terms.size());
  for (const auto& t : terms) resolved.push_back(resolve(t.process));
  double closed = 0.0;
  std::vector<std::pair<double, std::pair<Resolved, Resolved>>> mc_pairs;
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = a; b < terms.size(); ++b) {
      const double w = terms[a].coef * terms[b].coef * (a == b ? 1.0 : 2.0);
      if (w == 0.0) continue;
      double value = 0.0;
      if (closed_form(resolved[a], resolved[b], value)) {
        closed += w * factor(resolved[a], resolved[b]) * value;
      } else {
        mc_pairs.push_back({w * factor(resolved[a], resolved[b]), {resolved[a], resolved[b]}});
      }
    }
  }
  const Estimate mc = monte_carlo(mc_pairs);
  return {closed + mc.value, mc.std_error};
}

Eigen::MatrixXd LimitCovariance::gram(std::span<const LimitProcess> processes) const {
  const auto n = static_cast<Eigen::Index>(processes.size());
  std::vector<Resolved> resolved;
  resolved.reserve(processes.size());
  for (const auto& p : processes) resolved.push_back(resolve(p));
  Eigen::MatrixXd g(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> mc_entries;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const auto& ra = resolved[static_cast<std::size_t>(a)];
      const auto& rb = resolved[static_cast<std::size_t>(b)];
      double value = 0.0;
      if (closed_form(ra, rb, value)) {
        g(a, b) = g(b, a) = factor(ra, rb) * value;
      } else {
        mc_entries.emplace_back(a, b);
      }
    }
  }
  if (mc_entries.empty()) return g;

  // One sample for every Monte Carlo entry.
  Rng rng(mc_.seed);
  const RowMatrix draws = scheme_.copula().sample(mc_.draws, rng);
  std::vector<double> sums(mc_entries.size(), 0.0);
  std::vector<double> infl(resolved.size());
  std::vector<Eigen::VectorXd> psi(scheme_.dim());
  std::vector<bool> parametric(scheme_.dim(), false);
  for (const auto& r : resolved) parametric[r.j] = parametric[r.j] || r.shape == Shape::kParametric;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    const std::span<const double> u(draws.row(i).data(), static_cast<std::size_t>(draws.cols()));
    // Margin influence once per column and draw.
    for (std::size_t j = 0; j < psi.size(); ++j) {
      if (!parametric[j]) continue;
      const auto& truth = scheme_.margin(j).truth;
      psi[j] = margin_influence(truth, margin_quantile(truth, u[j]).value());
    }
    for (std::size_t k = 0; k < resolved.size(); ++k) {
      const auto& r = resolved[k];
      infl[k] = r.shape == Shape::kParametric ? r.fdot.dot(psi[r.j]) : influence(r, u);
    }
    for (std::size_t e = 0; e < mc_entries.size(); ++e) {
      sums[e] += infl[static_cast<std::size_t>(mc_entries[e].first)] *
                 infl[static_cast<std::size_t>(mc_entries[e].second)];
    }
  }
  for (std::size_t e = 0; e < mc_entries.size(); ++e) {
    const auto [a, b] = mc_entries[e];
    g(a, b) = g(b, a) = factor(resolved[static_cast<std::size_t>(a)], resolved[static_cast<std::size_t>(b)]) *
                        sums[e] / static_cast<double>(draws.rows());
  }
  return g;
}

double cov_alpha(const SchemeSpec& scheme, const Point& u, const Point& v) {
  return LimitCovariance(scheme).cov(AlphaAt{u}, AlphaAt{v}).value;
}

double cov_beta(const SchemeSpec& scheme, std::size_t j, double s, double t) {
  return LimitCovariance(scheme).cov(BetaAt{j, s}, BetaAt{j, t}).value;
}

Estimate cov_beta_beta(const SchemeSpec& scheme, std::size_t j, std::size_t k, double s, double t,
                       McOptions mc) {
  if (j == k) throw std::invalid_argument("cov_beta_beta needs distinct margins");
  return LimitCovariance(scheme, mc).cov(BetaAt{j, s}, BetaAt{k, t});
}

Estimate cov_alpha_beta(const SchemeSpec& scheme, std::size_t j, const Point& u, double s,
                        McOptions mc) {
  return LimitCovariance(scheme, mc).cov(AlphaAt{u}, BetaAt{j, s});
}

Estimate limit_variance(const SchemeSpec& scheme, const Point& u, McOptions mc) {
  if (u.size() != scheme.dim()) throw std::invalid_argument("limit_variance: wrong dimension");
  for (double x : u) {
    if (!(x > 0.0 && x < 1.0)) {
      throw std::domain_error("limit_variance needs an interior point (0 < u_j < 1)");
    }
  }
  std::vector<LinearTerm> terms;
  terms.push_back({1.0, AlphaAt{u}});
  for (std::size_t j = 0; j < u.size(); ++j) {
    terms.push_back({-scheme.copula().partial(static_cast<int>(j), u), BetaAt{j, u[j]}});
  }
  return LimitCovariance(scheme, mc).variance(terms);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace hybridcop
