#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vgeo/kernel_catalog.hpp"
#include "vgeo/rate_formulas.hpp"

namespace vgeo {

/// Means and standard errors of per-sample statistics, computed in a fixed
/// number of independently seeded chunks so results do not depend on `threads`.
struct MonteCarloResult {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::size_t samples = 0;
};

MonteCarloResult monte_carlo(std::size_t n_samples, std::uint64_t seed, unsigned threads,
                             std::size_t n_stats,
                             const std::function<void(std::mt19937_64&, double*)>& sample);

enum class ContractionMethod { ClosedForm, MonteCarloUpperBound };

struct ContractionEstimate {
  double a = 1.0;
  double kappa1 = 0.0;
  double kappa_hat = 0.0;
  ContractionMethod method = ContractionMethod::ClosedForm;
  std::optional<double> mc_stderr;
};

ContractionEstimate contraction_estimate(const IFSModel& model, double a,
                                         std::size_t n_samples = 1'000'000,
                                         std::uint64_t seed = 1, unsigned threads = 0);

struct LindleyCertificate {
  double gamma = 0.0;
  double kappa1 = 0.0;
  std::vector<double> pi;
  double c1 = 0.0;
  double c_rho = 0.0;
  double tail_term = 0.0;        // pi(M) gamma^M, size of the last summand of c1
  double stationary_residual = 0.0;
  bool nonnegative_drift = false;  // E[increment] >= 0
};

LindleyCertificate lindley_certificate(const IncrementLaw& increments, double gamma,
                                       std::size_t M);

/// prefactor c1, rate kappa1; audit scale for f is m1(f) gamma^i.
RateCertificate lindley_rate_certificate(const LindleyCertificate& cert, const std::string& model,
                                         const nlohmann::json& params);

struct GeometricMHConstants {
  double gamma;
  double kappa1;
  double c_rho;
};

GeometricMHConstants geometric_mh_constants(double p);

struct XiBound {
  double a = 1.0;
  double delta = 0.0;
  double r = 0.0;
  double xi1 = 0.0;
  double xi = 0.0;
};

/// Smallest r on the grid {1e-3 * 1.01^k} with the drift ratio <= delta at
/// d(x, x0) in {r, 2r, 4r}; expectations by Monte Carlo.
XiBound xi_bound(const IFSModel& model, double a, double delta, std::size_t n_samples = 1'000'000,
                 std::uint64_t seed = 1, unsigned threads = 0);

struct ARConstants {
  double theta = 0.0;
  double a = 1.0;
  double noise_sd = 0.0;
  double M_noise = 0.0;
  double eps0 = 0.0;
  double r = 0.0;
  double rho_internal = 0.0;
  double xi1 = 0.0;
  double xi = 0.0;
  double pi_norm1 = 0.0;
  double pi_norm_a = 0.0;
  double c1_bound = 0.0;
  double d0 = 0.0;
  /// c1 d0 / |theta| with c1 = ||pi||_1: TV(mu P^n, pi) <= prefactor I_mu |theta|^n.
  double tv_prefactor = 0.0;
  std::optional<double> packaged_c;  // a = 2 contracting normals
  std::optional<double> xi_direct;   // a = 2 contracting normals
};

/// Gaussian AR(1) X_n = theta X_{n-1} + N(0, noise_sd^2).
ARConstants ar_constants(double theta, double a, double noise_sd);

/// Contracting normals: noise_sd^2 = 1 - theta^2, so pi = N(0,1).
ARConstants contracting_normals_constants(double theta, double a);

/// sup_x (1+|x|)^{-g} int (1+|y + theta x|)^g / (1+|y|)^b dy over x_grid.
double c_gamma_beta(double g, double b, double theta, const std::vector<double>& x_grid,
                    double y_cutoff = 1e4);

struct DeltaPoint {
  std::size_t n;
  double lhs;
  double lhs_stderr;
  double rhs;
  double ratio;
};

struct CouplingReport {
  double a = 1.0;
  double kappa1 = 0.0;
  double xi = 1.0;
  bool exact = false;
  std::vector<DeltaPoint> points;
  double max_ratio = 0.0;
  bool pass = false;
};

/// Coupled chains from x1 and x2 driven by the same noise; compares
/// E[d(X1,X2) (p(X1)+p(X2))^{a-1}] with xi^{(a-1)/a} kappa1^n d(x1,x2) (p(x1)+p(x2))^{a-1}.
CouplingReport appendix_d_inequality_check(const IFSModel& model, double a, std::size_t n_max,
                                            std::size_t n_samples, std::uint64_t seed, double x1,
                                            double x2, double xi, unsigned threads = 0);

}  // namespace vgeo
