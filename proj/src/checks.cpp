#include "hybridcop/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hybridcop/harness.hpp"
#include "hybridcop/rng.hpp"

namespace hybridcop {

namespace {

constexpr double kSlack = 1e-12;

void check_unit_open_closed(double u) {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("sandwich_check: u must lie in (0, 1]");
}

// Volume of the box [a, b] under f, by inclusion-exclusion over the corners.
double box_volume(const std::function<double(std::span<const double>)>& f, const Point& a,
                  const Point& b) {
  const std::size_t p = a.size();
  Point corner(p);
  double vol = 0.0;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    int lower = 0;
    for (std::size_t k = 0; k < p; ++k) {
      const bool use_a = (mask >> k) & 1u;
      corner[k] = use_a ? a[k] : b[k];
      lower += use_a ? 1 : 0;
    }
    vol += (lower % 2 == 0 ? 1.0 : -1.0) * f(corner);
  }
  return vol;
}

std::string join(std::span<const DecayRow> rows) {
  std::ostringstream out;
  out.precision(4);
  for (std::size_t k = 0; k < rows.size(); ++k) out << (k ? " " : "") << rows[k].value;
  return out.str();
}

}  // namespace

SandwichResult sandwich_check(const Cdf& estimate, const Cdf& truth, std::span<const double> u_grid,
                              double rate) {
  SandwichResult res;
  bool first = true;
  for (double u : u_grid) {
    check_unit_open_closed(u);
    const ExtendedReal q = estimate.left_inverse(u);
    const double lower = -rate * (estimate.eval(q) - truth.eval(q));
    const double middle = rate * (truth.eval(q) - u);
    const double upper = -rate * (estimate.eval_left_limit(q) - truth.eval_left_limit(q));
    const double slack = std::min(middle - lower, upper - middle);
    if (first || slack < res.worst_slack) res.worst_slack = slack;
    first = false;
  }
  res.ok = res.worst_slack >= -kSlack;
  return res;
}

SandwichResult sandwich_check(std::span<const double> sample, const Cdf& truth,
                              std::span<const double> u_grid) {
  if (sample.empty()) throw std::invalid_argument("sandwich_check: empty sample");
  return sandwich_check(Cdf::empirical(sample), truth, u_grid,
                        std::sqrt(static_cast<double>(sample.size())));
}

double paired_inversion_sup(const Cdf& estimate, const Cdf& truth, std::span<const double> u_grid,
                            double rate) {
  double sup = 0.0;
  for (double u : u_grid) {
    const double a = rate * (truth.eval(estimate.left_inverse(u)) - u);
    const double b = rate * (estimate.eval(truth.left_inverse(u)) - u);
    sup = std::max(sup, std::abs(a + b));
  }
  return sup;
}

bool strictly_decreasing(std::span<const DecayRow> rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (!(rows[k].value < rows[k - 1].value)) return false;
  }
  return true;
}

std::vector<DecayRow> paired_inversion_check(const MarginFamily& truth, std::span<const double> u_grid,
                                             std::span<const std::size_t> ladder, std::size_t reps,
                                             std::uint64_t seed) {
  if (reps == 0) throw std::invalid_argument("paired_inversion_check needs replications");
  const Cdf true_cdf = Cdf::known(truth);
  std::vector<DecayRow> rows;
  for (std::size_t n : ladder) {
    if (n == 0) throw std::invalid_argument("paired_inversion_check: n must be positive");
    std::vector<double> sups;
    std::vector<double> sample(n);
    for (std::size_t r = 0; r < reps; ++r) {
      Rng rng(derive_seed(seed, n, r));
      for (auto& x : sample) x = margin_quantile(truth, rng.uniform()).value();
      sups.push_back(paired_inversion_sup(Cdf::empirical(sample), true_cdf, u_grid,
                                          std::sqrt(static_cast<double>(n))));
    }
    rows.push_back({static_cast<double>(n), sample_quantile(sups, 0.5)});
  }
  return rows;
}

std::vector<HadamardCase> builtin_perturbations() {
  std::vector<HadamardCase> cases;
  const auto bump = [](double s) { return s * (1.0 - s); };
  {
    Perturbation h{"independence, beta_1 = s(1-s)", {}, {bump, {}}};
    cases.push_back({CopulaModel::independence(2), {Uniform01{}, Uniform01{}}, h});
  }
  {
    const auto c = CopulaModel::independence(2);
    // alpha alone makes phi affine in t; beta_2 keeps the quotient nontrivial.
    Perturbation h{"independence, alpha = C(1-C), beta_2 = s(1-s)",
                   [c](std::span<const double> u) {
                     const double v = c.cdf(u);
                     return v * (1.0 - v);
                   },
                   {{}, bump}};
    cases.push_back({c, {Uniform01{}, Uniform01{}}, h});
  }
  {
    Perturbation h{"clayton(1), beta_1 = s(1-s), beta_2 = sin(2 pi s)/(4 pi)",
                   {},
                   {bump, [](double s) {
                      return std::sin(2.0 * std::numbers::pi * s) / (4.0 * std::numbers::pi);
                    }}};
    cases.push_back({CopulaModel::clayton(1.0), {NormalMargin{0.0, 1.0}, ExponentialMargin{2.0}}, h});
  }
  return cases;
}

namespace {

// inf{y in [0, 1] : y + t beta(y) >= u}, for u in (0, 1].
double perturbed_inverse(const std::function<double(double)>& beta, double t, double u) {
  double lo = 0.0, hi = 1.0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid + t * beta(mid) >= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void validate_perturbation(const HadamardCase& c, double t) {
  const std::size_t p = c.margins.size();
  for (std::size_t j = 0; j < p; ++j) {
    const auto& beta = c.direction.beta[j];
    if (!beta) continue;
    if (std::abs(beta(0.0)) > kSlack || std::abs(beta(1.0)) > kSlack) {
      throw std::invalid_argument("perturbation: beta_j must vanish at 0 and 1");
    }
    constexpr int kSteps = 2000;
    double prev = 0.0;
    for (int k = 0; k <= kSteps; ++k) {
      const double y = static_cast<double>(k) / kSteps;
      const double g = y + t * beta(y);
      if (g < prev - kSlack || g < -kSlack || g > 1.0 + kSlack) {
        throw std::invalid_argument("perturbation: F_j + t beta_j is not a distribution function");
      }
      prev = g;
    }
  }
  if (!c.direction.alpha) return;
  const auto h = [&](std::span<const double> u) { return c.copula.cdf(u) + t * c.direction.alpha(u); };
  const int m = p == 2 ? 100 : 10;
  std::vector<int> idx(p, 0);
  Point a(p), b(p);
  while (true) {
    for (std::size_t k = 0; k < p; ++k) {
      a[k] = static_cast<double>(idx[k]) / m;
      b[k] = static_cast<double>(idx[k] + 1) / m;
    }
    if (box_volume(h, a, b) < -kSlack) {
      throw std::invalid_argument("perturbation: H + t alpha is not a distribution function");
    }
    Point grounded = b;
    grounded[0] = 0.0;
    const double top = h(b);
    if (std::abs(h(grounded)) > kSlack || top < -kSlack || top > 1.0 + kSlack) {
      throw std::invalid_argument("perturbation: H + t alpha is not a distribution function");
    }
    std::size_t k = 0;
    while (k < p && ++idx[k] == m) idx[k++] = 0;
    if (k == p) break;
  }
}

double phi(const HadamardCase& c, double t, const Point& u) {
  const std::size_t p = u.size();
  Point w(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (u[j] <= 0.0) return 0.0;
    const auto& beta = c.direction.beta[j];
    const double y = beta && t != 0.0 ? perturbed_inverse(beta, t, u[j]) : u[j];
    // Round trip through the margin: x = F_j^{<-}(y), then F_j(x).
    w[j] = margin_cdf(c.margins[j], margin_quantile(c.margins[j], y));
  }
  double v = c.copula.cdf(w);
  if (c.direction.alpha && t != 0.0) v += t * c.direction.alpha(w);
  return v;
}

double phi_derivative(const HadamardCase& c, const Point& u) {
  double d = c.direction.alpha ? c.direction.alpha(u) : 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const auto& beta = c.direction.beta[j];
    if (!beta || !(u[j] > 0.0 && u[j] < 1.0)) continue;
    d -= c.copula.partial(static_cast<int>(j), u) * beta(u[j]);
  }
  return d;
}

}  // namespace

std::vector<DecayRow> hadamard_check(const HadamardCase& c, std::span<const double> t_ladder,
                                     const Grid& grid) {
  const std::size_t p = static_cast<std::size_t>(c.copula.dim());
  if (c.margins.size() != p || c.direction.beta.size() != p) {
    throw std::invalid_argument("hadamard_check: one margin and one beta per coordinate");
  }
  for (const auto& m : c.margins) validate(m);
  std::vector<DecayRow> rows;
  for (double t : t_ladder) {
    if (!(t > 0.0)) throw std::invalid_argument("hadamard_check: t must be positive");
    validate_perturbation(c, t);
    double sup = 0.0;
    for (const auto& u : grid) {
      if (u.size() != p) throw std::invalid_argument("hadamard_check: grid point has the wrong dimension");
      const double quotient = (phi(c, t, u) - phi(c, 0.0, u)) / t;
      sup = std::max(sup, std::abs(quotient - phi_derivative(c, u)));
    }
    rows.push_back({t, sup});
  }
  return rows;
}

double finite_difference_error(const CopulaModel& copula, std::size_t points, std::uint64_t seed,
                               const PartialFn& partial) {
  constexpr double h = 1e-5;
  const auto p = static_cast<std::size_t>(copula.dim());
  Rng rng(seed);
  Point u(p), lo(p), hi(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    for (auto& x : u) x = 0.01 + 0.98 * rng.uniform();
    for (std::size_t j = 0; j < p; ++j) {
      lo = u;
      hi = u;
      lo[j] -= h;
      hi[j] += h;
      const double fd = (copula.cdf(hi) - copula.cdf(lo)) / (2.0 * h);
      const int jj = static_cast<int>(j);
      const double exact = partial ? partial(copula, jj, u) : copula.partial(jj, u);
      worst = std::max(worst, std::abs(exact - fd));
    }
  }
  return worst;
}

AxiomReport copula_axiom_check(const CopulaModel& copula, std::size_t rectangles, std::uint64_t seed) {
  const auto p = static_cast<std::size_t>(copula.dim());
  Rng rng(seed);
  AxiomReport rep;
  const auto c = [&](std::span<const double> u) { return copula.cdf(u); };
  Point u(p), a(p), b(p);
  bool first = true;
  for (std::size_t i = 0; i < rectangles; ++i) {
    for (auto& x : u) x = rng.uniform();
    const std::size_t j = static_cast<std::size_t>(rng.next() % p);
    Point g = u;
    g[j] = 0.0;
    rep.grounded_error = std::max(rep.grounded_error, std::abs(copula.cdf(g)));
    Point e(p, 1.0);
    e[j] = u[j];
    rep.margin_error = std::max(rep.margin_error, std::abs(copula.cdf(e) - u[j]));
    for (std::size_t k = 0; k < p; ++k) {
      const double x = rng.uniform(), y = rng.uniform();
      a[k] = std::min(x, y);
      b[k] = std::max(x, y);
    }
    const double vol = box_volume(c, a, b);
    if (first || vol < rep.min_volume) rep.min_volume = vol;
    first = false;
  }
  return rep;
}

namespace {

std::vector<CopulaModel> check_families() {
  return {CopulaModel::independence(2), CopulaModel::independence(3), CopulaModel::clayton(0.5),
          CopulaModel::clayton(1.0),    CopulaModel::clayton(2.0),      CopulaModel::fgm(-1.0),
          CopulaModel::fgm(0.5),        CopulaModel::fgm(1.0)};
}

SuiteResult sandwich_suite(bool quick) {
  const std::size_t instances = quick ? 100 : 1000;
  Rng rng(0x5a17d1c4);
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next() % 200);
    const MarginFamily truth = i % 2 == 0 ? MarginFamily{Uniform01{}} : MarginFamily{NormalMargin{}};
    std::vector<double> sample(n);
    for (auto& x : sample) x = margin_quantile(truth, rng.uniform()).value();
    std::vector<double> grid;
    for (std::size_t k = 1; k <= n; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(n));
    for (int k = 0; k < 200; ++k) grid.push_back(rng.uniform());
    const auto res = sandwich_check(sample, Cdf::known(truth), grid);
    ok = ok && res.ok;
    worst = i == 0 ? res.worst_slack : std::min(worst, res.worst_slack);
  }
  std::ostringstream d;
  d << instances << " instances, worst slack " << worst;
  return {"sandwich", ok, d.str()};
}

SuiteResult paired_inversion_suite(bool quick) {
  std::vector<double> grid;
  for (int k = 1; k < 1000; ++k) grid.push_back(k / 1000.0);
  const std::vector<std::size_t> ladder{100, 400, 1600};
  const auto rows = paired_inversion_check(Uniform01{}, grid, ladder, quick ? 50 : 200, 0x9a1e3d);
  return {"paired-inversion", strictly_decreasing(rows), "medians " + join(rows)};
}

SuiteResult hadamard_suite() {
  const std::vector<double> ladder{1e-1, 1e-2, 1e-3};
  const Grid grid = default_grid(2);
  bool ok = true;
  std::string detail;
  for (const auto& c : builtin_perturbations()) {
    const auto rows = hadamard_check(c, ladder, grid);
    ok = ok && strictly_decreasing(rows) && rows.back().value < 1e-2;
    detail += (detail.empty() ? "" : "; ") + join(rows);
  }
  return {"hadamard", ok, detail};
}

SuiteResult finite_difference_suite(bool quick, const PartialFn& partial) {
  const std::size_t points = quick ? 1000 : 10000;
  double worst = 0.0;
  std::uint64_t seed = 0xfd0001;
  for (const auto& c : check_families()) worst = std::max(worst, finite_difference_error(c, points, seed++, partial));
  std::ostringstream d;
  d << "max error " << worst << " (tol 1e-06)";
  return {"finite-difference", worst <= 1e-6, d.str()};
}

SuiteResult axiom_suite(bool quick) {
  const std::size_t rects = quick ? 1000 : 10000;
  AxiomReport worst;
  std::uint64_t seed = 0xa8100;
  for (const auto& c : check_families()) {
    const auto r = copula_axiom_check(c, rects, seed++);
    worst.grounded_error = std::max(worst.grounded_error, r.grounded_error);
    worst.margin_error = std::max(worst.margin_error, r.margin_error);
    worst.min_volume = std::min(worst.min_volume, r.min_volume);
  }
  const bool ok = worst.grounded_error <= kSlack && worst.margin_error <= kSlack && worst.min_volume >= -kSlack;
  std::ostringstream d;
  d << "grounded " << worst.grounded_error << ", margins " << worst.margin_error << ", min volume "
    << worst.min_volume;
  return {"copula-axioms", ok, d.str()};
}

}  // namespace

std::vector<SuiteResult> run_check_suites(const CheckOptions& options) {
  return {sandwich_suite(options.quick), paired_inversion_suite(options.quick), hadamard_suite(),
          finite_difference_suite(options.quick, options.partial), axiom_suite(options.quick)};
}

}  // namespace hybridcop
