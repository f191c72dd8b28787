#include <doctest.h>

#include <cmath>

#include "vgeo/error.hpp"
#include "vgeo/ifs_lab.hpp"

using namespace vgeo;

namespace {

IFSModel halving() {
  IFSModel m;
  m.label = "halving";
  m.step = [](double, double x) { return 0.5 * x; };
  m.lipschitz_coeff = [](double) { return 0.5; };
  m.sample_noise = [](std::mt19937_64&) { return 0.0; };
  m.distance = [](double x, double y) { return std::abs(x - y); };
  return m;
}

}  // namespace

TEST_CASE("contraction coefficients") {
  for (double a : {1.0, 2.0, 3.5}) {
    const ContractionEstimate e = contraction_estimate(make_gaussian_ar1(0.5, 1.0), a);
    CHECK(e.kappa_hat == doctest::Approx(0.5));
    CHECK(e.kappa1 == doctest::Approx(0.5));
  }
  CHECK(contraction_estimate(make_multiplicative_uniform(), 1.0).kappa1 == doctest::Approx(0.5));
  CHECK(contraction_estimate(make_multiplicative_uniform(), 2.0).kappa1 ==
        doctest::Approx(std::sqrt(1.0 / 3.0)));
  const ContractionEstimate mh = contraction_estimate(make_geometric_mh(0.25).ifs, 1.0);
  CHECK(mh.kappa1 == doctest::Approx(0.25 + 0.375 + 0.25));
  CHECK(mh.kappa1 == doctest::Approx(std::sqrt(0.25) + 0.75 / 2));
}

TEST_CASE("Monte Carlo contraction matches the closed form") {
  IFSModel m = make_multiplicative_uniform();
  m.closed = {};
  const ContractionEstimate e = contraction_estimate(m, 2.0, 400'000, 5);
  CHECK(e.method == ContractionMethod::MonteCarloUpperBound);
  CHECK(std::abs(e.kappa1 - std::sqrt(1.0 / 3.0)) <= 4 * *e.mc_stderr);
}

TEST_CASE("Monte Carlo results do not depend on the thread count") {
  auto draw = [](std::mt19937_64& rng, double* s) {
    s[0] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  };
  const MonteCarloResult one = monte_carlo(100'000, 9, 1, 1, draw);
  const MonteCarloResult many = monte_carlo(100'000, 9, 7, 1, draw);
  CHECK(one.mean[0] == many.mean[0]);
  CHECK(one.stderr_[0] == many.stderr_[0]);
}

TEST_CASE("Lindley certificate for geometric MH") {
  const LindleyCertificate c = lindley_certificate(make_geometric_mh(0.25).increments, 2.0, 300);
  CHECK(std::abs(c.c1 - 1.5) <= 1e-10);
  CHECK(std::abs(c.c_rho - 4.5) <= 1e-10);
  CHECK(c.kappa1 == doctest::Approx(0.875));
  for (std::size_t n = 0; n <= 40; ++n) CHECK(std::abs(c.pi[n] - 0.75 * std::pow(0.25, n)) <= 1e-10);
  const GeometricMHConstants g = geometric_mh_constants(0.25);
  CHECK(std::abs(g.gamma - c.gamma) <= 1e-10);
  CHECK(std::abs(g.kappa1 - c.kappa1) <= 1e-10);
  CHECK(std::abs(g.c_rho - c.c_rho) <= 1e-10);
}

TEST_CASE("Lindley certificate for a drifting walk") {
  const LindleyCertificate c = lindley_certificate({{-1, 0.7}, {1, 0.3}}, 1.2, 400);
  CHECK(c.kappa1 == doctest::Approx(0.7 / 1.2 + 0.3 * 1.2));
  CHECK(c.kappa1 < 1.0);
  CHECK_THROWS_AS(lindley_certificate({{1, 1.0}}, 1.2, 100), Error);
}

TEST_CASE("geometric MH constants") {
  const GeometricMHConstants a = geometric_mh_constants(0.25);
  CHECK(a.gamma == doctest::Approx(2.0));
  CHECK(a.kappa1 == doctest::Approx(0.875));
  CHECK(a.c_rho == doctest::Approx(4.5));
  CHECK(geometric_mh_constants(1e-12).kappa1 == doctest::Approx(0.5).epsilon(1e-5));
  const GeometricMHConstants b = geometric_mh_constants(0.81);
  CHECK(b.gamma == doctest::Approx(10.0 / 9.0));
  CHECK(b.kappa1 == doctest::Approx(0.995));
  CHECK(b.c_rho == doctest::Approx(36.1));
}

TEST_CASE("xi bound for a Gaussian AR(1), a = 1") {
  const double theta = 0.5;
  const IFSModel m = make_gaussian_ar1(theta, std::sqrt(1 - theta * theta));
  const double mean_abs = std::sqrt(2 * (1 - theta * theta) / M_PI);
  const double r_exact = (1 + mean_abs - 0.8) / (0.8 - theta);
  const XiBound x = xi_bound(m, 1.0, 0.8, 1'000'000, 3);
  CHECK(x.r >= r_exact * (1 - 2e-3));
  CHECK(x.r <= r_exact * 1.012);
  CHECK(x.xi >= 1.0);
  CHECK(x.xi == doctest::Approx(1 + x.xi1 * (1 + x.r) / 0.2));
}

TEST_CASE("xi bound for a noiseless contraction") {
  const XiBound x = xi_bound(halving(), 1.0, 0.8, 1000, 1);
  // (1 + r / 2) / (1 + r) = 0.8
  CHECK(x.r >= 2.0 / 3.0);
  CHECK(x.r <= 2.0 / 3.0 * 1.0101);
  CHECK(x.xi >= 1.0);
  CHECK(std::isfinite(x.xi1));
}

TEST_CASE("AR constants") {
  const ARConstants c = contracting_normals_constants(0.5, 1.0);
  CHECK(c.pi_norm1 == doctest::Approx(1 + std::sqrt(2 / M_PI)).epsilon(1e-10));
  CHECK(c.d0 == doctest::Approx(1 / std::sqrt(2 * M_PI * 0.75)).epsilon(1e-10));
  CHECK(c.tv_prefactor == doctest::Approx((std::sqrt(2 * M_PI) + 2) / (M_PI * std::sqrt(0.75))).epsilon(1e-10));
  CHECK(c.tv_prefactor == doctest::Approx(1.656423).epsilon(1e-6));
  CHECK(contracting_normals_constants(0.0, 1.0).d0 == 0.0);
  const ARConstants h = contracting_normals_constants(0.9, 1.0);
  CHECK(std::isfinite(h.c1_bound));
  CHECK(std::isfinite(h.xi));
  CHECK(h.c1_bound >= 1 + std::sqrt(2 / M_PI));
  const ARConstants two = contracting_normals_constants(0.5, 2.0);
  REQUIRE(two.xi_direct.has_value());
  CHECK(*two.xi_direct == 4.0);
}

TEST_CASE("C_{g,b} integrals") {
  const std::vector<double> xs{0.0, 0.5, 1.0, 3.0, 10.0};
  for (double b : {1.5, 2.0, 4.0})
    CHECK(c_gamma_beta(0.0, b, 0.5, xs) == doctest::Approx(2 / (b - 1)).epsilon(1e-6));
  CHECK(std::abs(c_gamma_beta(1.0, 3.0, 0.0, xs) - 2.0) <= 1e-4);
  double prev = 0.0;
  for (double b : {3.0, 2.5, 2.2, 2.1, 2.01}) {
    const double v = c_gamma_beta(1.0, b, 0.5, xs);
    CHECK(std::isfinite(v));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("coupling check in the exact cases") {
  const CouplingReport u = appendix_d_inequality_check(make_multiplicative_uniform(), 1.0, 30, 0, 1, 1.0, 0.0, 1.0);
  CHECK(u.exact);
  for (const auto& p : u.points) {
    CHECK(p.lhs == doctest::Approx(std::pow(0.5, static_cast<double>(p.n))).epsilon(1e-12));
    CHECK(std::abs(p.ratio - 1.0) <= 1e-12);
  }
  const CouplingReport ar = appendix_d_inequality_check(make_gaussian_ar1(0.5, 1.0), 1.0, 20, 0, 1, 2.0, -1.0, 1.0);
  for (const auto& p : ar.points) CHECK(std::abs(p.ratio - 1.0) <= 1e-12);
  CHECK(ar.pass);
}
