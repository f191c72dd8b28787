#include "vgeo/weighted_spaces.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vgeo/error.hpp"

namespace vgeo {

WeightFn WeightFn::geometric(double gamma) {
  require(std::isfinite(gamma) && gamma > 1.0, "geometric weight needs gamma > 1");
  return WeightFn(Kind::Geometric, gamma, 0.0, 0.0);
}

WeightFn WeightFn::polynomial(double a, double center) {
  require(std::isfinite(a) && a >= 1.0, "polynomial weight needs exponent a >= 1");
  require(std::isfinite(center), "polynomial weight center must be finite");
  return WeightFn(Kind::Polynomial, 0.0, a, center);
}

WeightFn WeightFn::unit() { return WeightFn(Kind::Unit, 0.0, 0.0, 0.0); }

double WeightFn::log_eval(double x) const {
  switch (kind_) {
    case Kind::Geometric:
      return x * std::log(gamma_);
    case Kind::Polynomial:
      return exponent_ * std::log1p(std::abs(x - center_));
    case Kind::Unit:
      return 0.0;
  }
  return 0.0;
}

double WeightFn::operator()(double x) const {
  switch (kind_) {
    case Kind::Geometric:
      return std::pow(gamma_, x);
    case Kind::Polynomial:
      return std::pow(1.0 + std::abs(x - center_), exponent_);
    case Kind::Unit:
      return 1.0;
  }
  return 1.0;
}

std::string WeightFn::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::Geometric:
      out << "geometric(gamma=" << gamma_ << ")";
      break;
    case Kind::Polynomial:
      out << "polynomial(a=" << exponent_ << ", center=" << center_ << ")";
      break;
    case Kind::Unit:
      out << "unit";
      break;
  }
  return out.str();
}

GeometricDistance::GeometricDistance(double gamma) : gamma_(gamma) {
  require(std::isfinite(gamma) && gamma > 1.0, "geometric distance needs gamma > 1");
  log_gamma_ = std::log(gamma);
}

double GeometricDistance::log_distance(std::size_t i, std::size_t j) const {
  if (i == j) return -std::numeric_limits<double>::infinity();
  const std::size_t hi = std::max(i, j);
  const std::size_t lo = std::min(i, j);
  // gamma^hi (1 - gamma^(lo - hi))
  const double gap = static_cast<double>(hi - lo) * log_gamma_;
  return static_cast<double>(hi) * log_gamma_ + std::log(-std::expm1(-gap));
}

double GeometricDistance::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  return std::exp(log_distance(i, j));
}

namespace {

double ratio_in_log_space(double value, double log_weight) {
  const double magnitude = std::abs(value);
  if (magnitude == 0.0) return 0.0;
  return std::exp(std::log(magnitude) - log_weight);
}

}  // namespace

double weighted_norm(const WeightedVector& f) {
  require(!f.values.empty(), "weighted_norm of an empty vector");
  require(f.points.empty() || f.points.size() == f.values.size(),
          "weighted vector points/values length mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    require(std::isfinite(f.values[i]), "weighted vector has a non-finite entry");
    best = std::max(best, ratio_in_log_space(f.values[i], f.weight.log_eval(f.point(i))));
  }
  return best;
}

double weighted_norm(std::span<const double> values, const WeightFn& weight) {
  return weighted_norm(WeightedVector{{values.begin(), values.end()}, weight, {}});
}

double lipschitz_seminorm_m1(std::span<const double> f, const GeometricDistance& d,
                             std::size_t M) {
  require(M >= 1, "lipschitz_seminorm_m1 needs M >= 1");
  require(f.size() > M, "lipschitz_seminorm_m1: vector shorter than M + 1");
  double best = 0.0;
  for (std::size_t i = 0; i <= M; ++i) {
    for (std::size_t j = i + 1; j <= M; ++j) {
      const double diff = std::abs(f[i] - f[j]);
      if (diff == 0.0) continue;
      best = std::max(best, std::exp(std::log(diff) - d.log_distance(i, j)));
    }
  }
  return best;
}

double m1_from_weighted_norm_bound(double weighted_norm_value, double gamma) {
  require(std::isfinite(gamma) && gamma > 1.0, "m1 bound needs gamma > 1");
  require(weighted_norm_value >= 0.0, "m1 bound needs a nonnegative norm");
  return (gamma + 1.0) / (gamma - 1.0) * weighted_norm_value;
}

}  // namespace vgeo
