#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vgeo/error.hpp"
#include "vgeo/rate_formulas.hpp"
#include "vgeo/spectral_oracle.hpp"

using namespace vgeo;

namespace {

double nearest_distance(const std::vector<std::complex<double>>& eigs, double target) {
  double best = 1e300;
  for (const auto& l : eigs) best = std::min(best, std::abs(l - target));
  return best;
}

}  // namespace

TEST_CASE("two-state spectrum by trace and determinant") {
  Eigen::MatrixXd A(2, 2);
  A << 0.7, 0.3, 0.4, 0.6;
  const auto eigs = full_spectrum(A);
  REQUIRE(eigs.size() == 2);
  CHECK(eigs[0].real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eigs[1].real() == doctest::Approx(0.3).epsilon(1e-14));
  const auto ident = full_spectrum(Eigen::MatrixXd::Identity(7, 7));
  for (const auto& l : ident) CHECK(std::abs(l - 1.0) < 1e-14);
}

TEST_CASE("transform with unit weight is the truncated matrix") {
  const Kernel P = make_birth_death(0.5, 0.3, 0.2, SparseRow{{0, 0.6}, {1, 0.4}});
  const TruncatedOperator T = build_truncation(P, WeightFn::unit(), 20);
  CHECK(T.matrix(0, 0) == 0.6);
  CHECK(T.matrix(0, 1) == 0.4);
  CHECK(T.matrix(5, 4) == 0.5);
  CHECK(T.matrix(5, 6) == 0.2);
}

TEST_CASE("transform entries for a geometric weight") {
  const double g = 1.8;
  const Kernel P = make_birth_death(0.5, 0.3, 0.2, SparseRow{{0, 0.6}, {1, 0.4}});
  const TruncatedOperator T = build_truncation(P, WeightFn::geometric(g), 40);
  for (Eigen::Index i = 1; i < 40; ++i) {
    CHECK(T.matrix(i, i + 1) == doctest::Approx(0.2 * g).epsilon(1e-13));
    CHECK(T.matrix(i, i - 1) == doctest::Approx(0.5 / g).epsilon(1e-13));
    CHECK(T.matrix(i, i) == doctest::Approx(0.3));
  }
}

TEST_CASE("substochastic truncation loses mass in the last row") {
  const LindleyModel m = make_geometric_mh(0.25);
  const TruncatedOperator T = build_truncation(m.kernel, WeightFn::unit(), 100);
  CHECK(T.matrix.row(100).sum() == doctest::Approx(1.0 - 0.125));
  CHECK(T.matrix.row(50).sum() == doctest::Approx(1.0));
}

TEST_CASE("rate selection from a spectrum") {
  const std::vector<std::complex<double>> a{1.0, 0.95, 0.3};
  const SpectrumReport ra = rate_from_spectrum(a, 0.5);
  CHECK(ra.rho_estimate == 0.95);
  CHECK(ra.simple_one);
  const SpectrumReport rb = rate_from_spectrum({1.0, 0.3}, 0.5);
  CHECK(rb.rho_estimate == 0.5);
  CHECK(rb.peripheral.empty());
  const SpectrumReport rc = rate_from_spectrum({0.9, 0.3}, 0.5);
  CHECK(rc.missing_unit_eigenvalue);
  const SpectrumReport rd = rate_from_spectrum({1.0, -1.0, 0.3}, 0.5);
  CHECK(rd.unit_circle_violation);
}

TEST_CASE("lambda(a) eigenvalue at M = 600") {
  const BirthDeathRate r = birth_death_rate(0.75, 0.2, 0.05, 0.1);
  const Kernel P = make_birth_death(0.75, 0.05, 0.2, SparseRow{{0, 0.1}, {1, 0.9}});
  const TruncatedOperator T = build_truncation(P, WeightFn::geometric(r.gamma_hat), 600);
  const SpectrumReport rep = rate_from_spectrum(full_spectrum(T), r.essential + 0.01);
  CHECK(std::abs(rep.rho_estimate - std::abs(0.1 + 0.75 * 0.9 / (0.1 - 0.8))) <= 2e-3);
}

TEST_CASE("growth of the lambda(a) eigenfunction") {
  const BirthDeathRate r = birth_death_rate(0.75, 0.2, 0.05, 0.1);
  const Kernel P = make_birth_death(0.75, 0.05, 0.2, SparseRow{{0, 0.1}, {1, 0.9}});
  const TruncatedOperator T = build_truncation(P, WeightFn::geometric(r.gamma_hat), 200);
  const Eigensystem es = full_eigensystem(T.matrix);
  CHECK(es.max_residual < 1e-10);
  std::size_t k = 0;
  while (std::abs(es.values[k] - *r.lambda_a) > 1e-6) ++k;
  const Eigen::VectorXcd g = es.vectors.col(static_cast<Eigen::Index>(k));
  // f(n) = V(n) g(n) should be proportional to z(a)^n
  const std::complex<double> z = (g(6) / g(5)) * r.gamma_hat;
  CHECK(std::abs(z - *r.z_a) < 1e-8);
  const EigenpairGrowth eg = eigen_growth_check(T, es.values[k], g, r.essential, 5, 120);
  const double beta = std::log(r.rho) / std::log(r.essential);
  CHECK(eg.beta == doctest::Approx(beta));
  // closed form: |z| <= gamma_hat^beta
  CHECK(std::abs(*r.z_a) <= std::pow(r.gamma_hat, beta));
  CHECK(eg.verdict);
}

TEST_CASE("growth exponent endpoints") {
  const Kernel P = make_birth_death(0.75, 0.05, 0.2, SparseRow{{0, 0.1}, {1, 0.9}});
  const TruncatedOperator T = build_truncation(P, WeightFn::geometric(1.5), 40);
  Eigen::VectorXcd g = Eigen::VectorXcd::Ones(41);
  CHECK(eigen_growth_check(T, 1.0, g, 0.8, 2, 30).beta == 0.0);
  CHECK(eigen_growth_check(T, 0.8, g, 0.8, 2, 30).beta == doctest::Approx(1.0));
  CHECK_THROWS_AS(eigen_growth_check(T, 0.5, g, 0.8, 2, 30), Error);
  CHECK_THROWS_AS(eigen_growth_check(T, 0.9, g, 0.8, 2, 35), Error);
}

TEST_CASE("M/M/1 edge eigenvalue is approached as M grows") {
  const Kernel P = make_mm1(1.0, 4.0, 0.1);
  const WeightFn V = WeightFn::geometric(2.0);
  const double d100 = nearest_distance(full_spectrum(build_truncation(P, V, 100)), 0.9);
  const double d300 = nearest_distance(full_spectrum(build_truncation(P, V, 300)), 0.9);
  CHECK(d300 < d100);
  // interior tridiagonal (0.2, 0.5, 0.2): edge gap about 0.2 (pi / M)^2
  CHECK(d300 == doctest::Approx(0.2 * std::pow(M_PI / 300.0, 2)).epsilon(0.05));
}

TEST_CASE("truncation table") {
  const auto id = truncation_convergence(make_identity(), WeightFn::unit(), TruncationPolicy::ReflectLast,
                                         {20, 40, 80}, 0.3);
  for (const auto& row : id) CHECK(row.rho_estimate == 0.3);
  const BirthDeathRate r = birth_death_rate(0.75, 0.2, 0.05, 0.3);
  const Kernel P = make_birth_death(0.75, 0.05, 0.2, SparseRow{{0, 0.3}, {1, 0.7}});
  const auto rows = truncation_convergence(P, WeightFn::geometric(r.gamma_hat), TruncationPolicy::Substochastic,
                                           {100, 200, 400}, 0.5, 1e-6, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].step_change == 0.0);
  for (const auto& row : rows) CHECK(row.max_subunit_modulus <= r.essential + 1e-9);
}
