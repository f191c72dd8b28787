#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vgeo/kernel_catalog.hpp"
#include "vgeo/rate_formulas.hpp"
#include "vgeo/weighted_spaces.hpp"

namespace vgeo {

struct StationaryResult {
  std::vector<double> pi;
  double residual = 0.0;  // || pi P - pi ||_1
  std::size_t iterations = 0;
};

/// Left power iteration on the truncation to 0..M (whole grid for grid kernels, M ignored).
StationaryResult stationary(const Kernel& P, std::size_t M,
                            TruncationPolicy policy = TruncationPolicy::ReflectLast,
                            std::size_t max_iterations = 1'000'000);

struct DecayCurve {
  std::vector<std::size_t> n_values;
  std::vector<double> e_n;
  std::size_t i_lo = 0;
  std::size_t i_hi = 0;
  double pi_f = 0.0;
  double fitted_rho = 0.0;
  double fit_r2 = 0.0;
  std::size_t fit_from = 0;
  std::size_t fit_to = 0;
  bool underflow_truncated = false;
};

/// e_n = max_{i_lo <= i <= i_hi} |P^n f(i) - pi(f)| / V(i) for n = 1..n_max.
///
/// Countable kernels propagate exactly (no truncation error inside the window);
/// i_hi = 0 selects min(M/2, M - n_max * radius). Grid kernels use the dense matrix.
DecayCurve decay_curve(const Kernel& P, const WeightFn& V, const std::function<double(double)>& f,
                       std::size_t n_max, std::size_t M, std::size_t i_lo = 0,
                       std::size_t i_hi = 0);

/// Least-squares slope of ln e_n over the last half of the n-range with e_n > 1e-13.
void fit_decay(DecayCurve& curve);

/// Half the L1 distance between two mass vectors on the same grid.
double tv_distance(std::span<const double> a, std::span<const double> b);

/// mu P^n for mu = delta at grid index `start`, n = 0..n_max.
std::vector<std::vector<double>> grid_power_rows(const Kernel& P, std::size_t start,
                                                 std::size_t n_max);

struct AuditPoint {
  std::string model_hash;
  std::size_t n = 0;
  double lhs = 0.0;
  double scale = 0.0;  // RHS = prefactor * rho^n * scale
  double lhs_stderr = 0.0;
  std::string label;
};

struct AuditWorst {
  std::size_t n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string label;
};

struct BoundAudit {
  RateCertificate certificate;
  double max_ratio = 0.0;
  bool pass = false;
  std::size_t points = 0;
  double tolerance = 1e-9;
  AuditWorst worst_case;
};

/// Pass iff every lhs <= rhs (1 + tolerance) + 3 lhs_stderr. The certificate
/// must carry a "prefactor" constant.
BoundAudit audit_bound(const std::vector<AuditPoint>& data, const RateCertificate& cert,
                       double tolerance = 1e-9);

/// |P^n f(i) - pi(f)| against c1 kappa1^n m1(f) gamma^i for f = V_gamma and
/// f = 1_{j}, j <= j_max, with m1(1_{j}) = gamma^{1-j} / (gamma - 1).
std::vector<AuditPoint> lindley_audit_points(const Kernel& P, double gamma,
                                             const std::vector<double>& pi,
                                             const std::string& model_hash, std::size_t n_max,
                                             std::size_t i_max, std::size_t j_max);

/// TV(delta_x P^n, pi) against prefactor (1 + |x|) rho^n for n_from <= n <= n_max.
std::vector<AuditPoint> tv_audit_points(const Kernel& P, const std::vector<double>& pi,
                                        const std::string& model_hash,
                                        const std::vector<double>& starts, std::size_t n_from,
                                        std::size_t n_max);

/// TV curves (n = 0..n_max) from each start on the grid kernel.
std::vector<std::vector<double>> tv_curves(const Kernel& P, const std::vector<double>& pi,
                                           const std::vector<double>& starts, std::size_t n_max);

}  // namespace vgeo
