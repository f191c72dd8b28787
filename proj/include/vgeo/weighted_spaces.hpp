#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vgeo {

/// Lyapunov weight V >= 1 on a state space embedded in the real line.
///
/// Geometric weights V(n) = gamma^n are always handled through log_eval so
/// that ratios stay finite far beyond the point where gamma^n overflows.
class WeightFn {
 public:
  enum class Kind { Geometric, Polynomial, Unit };

  static WeightFn geometric(double gamma);
  /// V(x) = (1 + |x - center|)^a.
  static WeightFn polynomial(double a, double center = 0.0);
  /// V == 1; the sup-norm case.
  static WeightFn unit();

  double operator()(double x) const;
  double log_eval(double x) const;

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double exponent() const { return exponent_; }
  double center() const { return center_; }
  std::string describe() const;

 private:
  WeightFn(Kind kind, double gamma, double exponent, double center)
      : kind_(kind), gamma_(gamma), exponent_(exponent), center_(center) {}

  Kind kind_;
  double gamma_;
  double exponent_;
  double center_;
};

/// Restriction of an element of B_V to the states 0..M (or to grid points).
struct WeightedVector {
  std::vector<double> values;
  WeightFn weight;
  /// Location of entry i; empty means the integer state i.
  std::vector<double> points;

  double point(std::size_t i) const {
    return points.empty() ? static_cast<double>(i) : points[i];
  }
};

/// d(i, j) = |gamma^i - gamma^j| on the nonnegative integers.
class GeometricDistance {
 public:
  explicit GeometricDistance(double gamma);
  double operator()(std::size_t i, std::size_t j) const;
  double log_distance(std::size_t i, std::size_t j) const;
  double gamma() const { return gamma_; }

 private:
  double gamma_;
  double log_gamma_;
};

/// max_i |f(i)| / V(i) over the truncation window.
double weighted_norm(const WeightedVector& f);

/// Weighted sup norm of raw values against V at integer states 0..n-1.
double weighted_norm(std::span<const double> values, const WeightFn& weight);

/// max over 0 <= i < j <= M of |f(i) - f(j)| / |gamma^i - gamma^j|.
double lipschitz_seminorm_m1(std::span<const double> f, const GeometricDistance& d,
                             std::size_t M);

/// m_1(f) <= (gamma + 1)/(gamma - 1) |f|_1 for the geometric distance.
double m1_from_weighted_norm_bound(double weighted_norm_value, double gamma);

}  // namespace vgeo
