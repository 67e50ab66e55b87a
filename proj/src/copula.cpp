#include "hybridcop/copula.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hybridcop {

namespace {

void check_cube(std::span<const double> u, int dim) {
  if (static_cast<int>(u.size()) != dim) throw std::invalid_argument("copula: wrong dimension");
  for (double x : u) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("copula: point outside the unit cube");
  }
}

// v^{-theta} - 1, accurate for v near 1.
double clayton_gen(double v, double theta) { return std::expm1(-theta * std::log(v)); }

}  // namespace

CopulaModel CopulaModel::independence(int dim) {
  if (dim < 1) throw std::invalid_argument("independence copula needs dim >= 1");
  return CopulaModel(Family::kIndependence, dim, 0.0);
}

CopulaModel CopulaModel::clayton(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("Clayton copula needs theta > 0");
  }
  return CopulaModel(Family::kClayton, 2, theta);
}

CopulaModel CopulaModel::fgm(double theta) {
  if (!(theta >= -1.0 && theta <= 1.0)) throw std::invalid_argument("FGM copula needs |theta| <= 1");
  return CopulaModel(Family::kFgm, 2, theta);
}

double CopulaModel::cdf(std::span<const double> u) const {
  check_cube(u, dim_);
  switch (family_) {
    case Family::kIndependence: {
      double c = 1.0;
      for (double x : u) c *= x;
      return c;
    }
    case Family::kClayton: {
      const double a = u[0], b = u[1];
      if (a == 0.0 || b == 0.0) return 0.0;
      if (a == 1.0) return b;
      if (b == 1.0) return a;
      // (a^-t + b^-t - 1)^(-1/t) = a (1 + a^t (b^-t - 1))^(-1/t)
      return a * std::pow(1.0 + std::pow(a, theta_) * clayton_gen(b, theta_), -1.0 / theta_);
    }
    case Family::kFgm: {
      const double a = u[0], b = u[1];
      return a * b * (1.0 + theta_ * (1.0 - a) * (1.0 - b));
    }
  }
  return 0.0;
}

double CopulaModel::partial(int j, std::span<const double> u) const {
  check_cube(u, dim_);
  if (j < 0 || j >= dim_) throw std::out_of_range("copula partial: bad coordinate");
  const auto ju = static_cast<std::size_t>(j);
  if (!(u[ju] > 0.0 && u[ju] < 1.0)) {
    throw std::domain_error("copula partial derivative needs 0 < u_j < 1");
  }
  switch (family_) {
    case Family::kIndependence: {
      double c = 1.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (k != ju) c *= u[k];
      }
      return c;
    }
    case Family::kClayton: {
      const double a = u[ju], b = u[1 - ju];
      if (b == 0.0) return 0.0;
      // a^(-t-1) (a^-t + b^-t - 1)^(-1/t-1) = (1 + a^t (b^-t - 1))^(-(1+t)/t)
      return std::pow(1.0 + std::pow(a, theta_) * clayton_gen(b, theta_),
                      -(1.0 + theta_) / theta_);
    }
    case Family::kFgm: {
      const double a = u[ju], b = u[1 - ju];
      return b * (1.0 + theta_ * (1.0 - 2.0 * a) * (1.0 - b));
    }
  }
  return 0.0;
}

RowMatrix CopulaModel::sample(std::size_t n, Rng& rng) const {
  RowMatrix out(static_cast<Eigen::Index>(n), dim_);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    switch (family_) {
      case Family::kIndependence:
        for (int k = 0; k < dim_; ++k) out(i, k) = rng.uniform();
        break;
      case Family::kClayton: {
        const double a = rng.uniform();
        const double w = rng.uniform();
        // Solve dC/du(a, v) = w for v.
        const double g = std::expm1(-theta_ / (1.0 + theta_) * std::log(w));
        out(i, 0) = a;
        out(i, 1) = std::pow(1.0 + std::pow(a, -theta_) * g, -1.0 / theta_);
        break;
      }
      case Family::kFgm: {
        const double a = rng.uniform();
        const double w = rng.uniform();
        // v + s v (1 - v) = w with s = theta (1 - 2a); stable root of the quadratic.
        const double s = theta_ * (1.0 - 2.0 * a);
        const double disc = (1.0 + s) * (1.0 + s) - 4.0 * s * w;
        out(i, 0) = a;
        out(i, 1) = 2.0 * w / ((1.0 + s) + std::sqrt(disc));
        break;
      }
    }
  }
  return out;
}

double CopulaModel::pair_cdf(int j, int k, double s, double t) const {
  std::vector<double> u(static_cast<std::size_t>(dim_), 1.0);
  u.at(static_cast<std::size_t>(j)) = s;
  u.at(static_cast<std::size_t>(k)) = t;
  return cdf(u);
}

std::string CopulaModel::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case Family::kIndependence: os << "independence(dim=" << dim_ << ")"; break;
    case Family::kClayton: os << "clayton(theta=" << theta_ << ")"; break;
    case Family::kFgm: os << "fgm(theta=" << theta_ << ")"; break;
  }
  return os.str();
}

CopulaModel make_copula(std::string_view name, double theta, int dim) {
  if (name == "independence") return CopulaModel::independence(dim);
  if (dim != 2) throw std::invalid_argument(std::string(name) + " copula is bivariate only");
  if (name == "clayton") return CopulaModel::clayton(theta);
  if (name == "fgm") return CopulaModel::fgm(theta);
  throw std::invalid_argument("unknown copula '" + std::string(name) + "'");
}

}  // namespace hybridcop
