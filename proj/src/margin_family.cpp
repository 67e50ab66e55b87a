#include "hybridcop/margin_family.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hybridcop/detail/overloaded.hpp"
#include "hybridcop/normal.hpp"

namespace hybridcop {

namespace {

using detail::overloaded;

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void validate(const MarginFamily& family) {
  std::visit(overloaded{
                 [](const Uniform01&) {},
                 [](const NormalMargin& m) {
                   if (!std::isfinite(m.mean) || !(m.sd > 0.0) || !std::isfinite(m.sd)) {
                     throw std::invalid_argument("normal margin needs finite mean and sd > 0");
                   }
                 },
                 [](const ExponentialMargin& m) {
                   if (!(m.rate > 0.0) || !std::isfinite(m.rate)) {
                     throw std::invalid_argument("exponential margin needs rate > 0");
                   }
                 },
             },
             family);
}

double margin_cdf(const MarginFamily& family, double x) {
  return std::visit(overloaded{
                        [x](const Uniform01&) { return std::clamp(x, 0.0, 1.0); },
                        [x](const NormalMargin& m) { return normal::cdf((x - m.mean) / m.sd); },
                        [x](const ExponentialMargin& m) {
                          return x <= 0.0 ? 0.0 : -std::expm1(-m.rate * x);
                        },
                    },
                    family);
}

double margin_cdf(const MarginFamily& family, const ExtendedReal& x) {
  if (x.is_neg_inf()) return 0.0;
  if (x.is_pos_inf()) return 1.0;
  return margin_cdf(family, x.value());
}

ExtendedReal margin_quantile(const MarginFamily& family, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("margin_quantile: u outside [0, 1]");
  if (u == 0.0) return ExtendedReal::neg_inf();
  return std::visit(overloaded{
                        [u](const Uniform01&) { return ExtendedReal::finite(u); },
                        [u](const NormalMargin& m) {
                          if (u == 1.0) return ExtendedReal::pos_inf();
                          return ExtendedReal::finite(m.mean + m.sd * normal::quantile(u));
                        },
                        [u](const ExponentialMargin& m) {
                          if (u == 1.0) return ExtendedReal::pos_inf();
                          return ExtendedReal::finite(-std::log1p(-u) / m.rate);
                        },
                    },
                    family);
}

int parameter_count(const MarginFamily& family) {
  return std::visit(overloaded{
                        [](const Uniform01&) { return 0; },
                        [](const NormalMargin&) { return 2; },
                        [](const ExponentialMargin&) { return 1; },
                    },
                    family);
}

Eigen::VectorXd parameters(const MarginFamily& family) {
  return std::visit(overloaded{
                        [](const Uniform01&) { return Eigen::VectorXd(0); },
                        [](const NormalMargin& m) {
                          Eigen::VectorXd t(2);
                          t << m.mean, m.sd;
                          return t;
                        },
                        [](const ExponentialMargin& m) {
                          Eigen::VectorXd t(1);
                          t << m.rate;
                          return t;
                        },
                    },
                    family);
}

MarginFamily with_parameters(const MarginFamily& family, const Eigen::VectorXd& theta) {
  if (theta.size() != parameter_count(family)) {
    throw std::invalid_argument("with_parameters: wrong parameter count");
  }
  return std::visit(overloaded{
                        [](const Uniform01&) -> MarginFamily { return Uniform01{}; },
                        [&](const NormalMargin&) -> MarginFamily {
                          return NormalMargin{theta[0], theta[1]};
                        },
                        [&](const ExponentialMargin&) -> MarginFamily {
                          return ExponentialMargin{theta[0]};
                        },
                    },
                    family);
}

Eigen::VectorXd margin_grad(const MarginFamily& family, const ExtendedReal& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(parameter_count(family));
  if (!x.is_finite()) return g;
  const double v = x.value();
  std::visit(overloaded{
                 [](const Uniform01&) {},
                 [&](const NormalMargin& m) {
                   const double z = (v - m.mean) / m.sd;
                   const double phi = normal::pdf(z);
                   g[0] = -phi / m.sd;
                   g[1] = -z * phi / m.sd;
                 },
                 [&](const ExponentialMargin& m) {
                   g[0] = v <= 0.0 ? 0.0 : v * std::exp(-m.rate * v);
                 },
             },
             family);
  return g;
}

Eigen::VectorXd margin_influence(const MarginFamily& family, double x) {
  Eigen::VectorXd psi(parameter_count(family));
  std::visit(overloaded{
                 [](const Uniform01&) {},
                 [&](const NormalMargin& m) {
                   const double d = x - m.mean;
                   psi[0] = d;
                   psi[1] = (d * d - m.sd * m.sd) / (2.0 * m.sd);
                 },
                 [&](const ExponentialMargin& m) { psi[0] = m.rate - m.rate * m.rate * x; },
             },
             family);
  return psi;
}

Eigen::MatrixXd influence_second_moment(const MarginFamily& family) {
  const int d = parameter_count(family);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  std::visit(overloaded{
                 [](const Uniform01&) {},
                 [&](const NormalMargin& f) {
                   m(0, 0) = f.sd * f.sd;
                   m(1, 1) = 0.5 * f.sd * f.sd;
                 },
                 [&](const ExponentialMargin& f) { m(0, 0) = f.rate * f.rate; },
             },
             family);
  return m;
}

MarginFamily fit_mle(const MarginFamily& family_tag, std::span<const double> sample) {
  return std::visit(
      overloaded{
          [](const Uniform01&) -> MarginFamily {
            throw std::invalid_argument("fit_mle: the uniform margin has no parameters to fit");
          },
          [&](const NormalMargin&) -> MarginFamily {
            if (sample.size() < 2) {
              throw std::invalid_argument("normal fit needs at least 2 observations");
            }
            const double n = static_cast<double>(sample.size());
            const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
            double ss = 0.0;
            for (double x : sample) ss += (x - mean) * (x - mean);
            const double sd = std::sqrt(ss / n);
            if (!(sd > 0.0)) throw std::domain_error("normal fit is degenerate: zero variance");
            return NormalMargin{mean, sd};
          },
          [&](const ExponentialMargin&) -> MarginFamily {
            if (sample.empty()) {
              throw std::invalid_argument("exponential fit needs at least 1 observation");
            }
            double sum = 0.0;
            for (double x : sample) {
              if (!(x > 0.0)) throw std::domain_error("exponential fit needs positive data");
              sum += x;
            }
            return ExponentialMargin{static_cast<double>(sample.size()) / sum};
          },
      },
      family_tag);
}

MarginFamily parse_margin_family(std::string_view text) {
  const auto parts = split(text, ':');
  const auto name = parts[0];
  MarginFamily f;
  if (name == "uniform" && parts.size() == 1) {
    f = Uniform01{};
  } else if (name == "normal" && (parts.size() == 1 || parts.size() == 3)) {
    f = parts.size() == 1 ? NormalMargin{}
                          : NormalMargin{parse_double(parts[1]), parse_double(parts[2])};
  } else if (name == "exponential" && (parts.size() == 1 || parts.size() == 2)) {
    f = parts.size() == 1 ? ExponentialMargin{} : ExponentialMargin{parse_double(parts[1])};
  } else {
    throw std::invalid_argument("unknown margin family '" + std::string(text) + "'");
  }
  validate(f);
  return f;
}

std::string family_name(const MarginFamily& family) {
  return std::visit(overloaded{
                        [](const Uniform01&) { return std::string("uniform"); },
                        [](const NormalMargin&) { return std::string("normal"); },
                        [](const ExponentialMargin&) { return std::string("exponential"); },
                    },
                    family);
}

std::string to_string(const MarginFamily& family) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Uniform01&) { os << "uniform"; },
                 [&](const NormalMargin& m) { os << "normal:" << m.mean << ':' << m.sd; },
                 [&](const ExponentialMargin& m) { os << "exponential:" << m.rate; },
             },
             family);
  return os.str();
}

}  // namespace hybridcop
