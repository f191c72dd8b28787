#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vgeo/convergence_verifier.hpp"
#include "vgeo/drift_analyzer.hpp"
#include "vgeo/ifs_lab.hpp"
#include "vgeo/rate_formulas.hpp"
#include "vgeo/spectral_oracle.hpp"
#include "vgeo/weighted_spaces.hpp"

using namespace vgeo;

namespace {

IncrementLaw random_law(std::mt19937_64& rng, int b) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IncrementLaw law;
  double total = 0.0;
  for (int k = -b; k <= b; ++k) {
    const double w = u(rng) < 0.2 ? 0.0 : u(rng);
    law[k] = w;
    total += w;
  }
  if (total == 0.0) {
    law[-1] = 1.0;
    total = 1.0;
  }
  for (auto& [k, w] : law) w /= total;
  return law;
}

std::vector<SparseRow> pooled_boundary(const IncrementLaw& law) {
  int b = 0;
  for (const auto& [k, a] : law) b = std::max(b, std::abs(k));
  std::vector<SparseRow> rows;
  for (int i = 0; i < b; ++i) {
    std::map<std::size_t, double> m;
    for (const auto& [k, a] : law)
      if (a > 0.0) m[static_cast<std::size_t>(std::max(0, i + k))] += a;
    SparseRow r;
    for (const auto& [j, v] : m) r.push_back({j, v});
    rows.push_back(r);
  }
  return rows;
}

// Birth-death triple with p > q.
std::array<double, 3> random_pqr(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  for (;;) {
    double p = u(rng), q = u(rng), r = u(rng) * 0.5;
    const double s = p + q + r;
    p /= s, q /= s, r /= s;
    if (p > q * 1.05) return {p, q, r};
  }
}

}  // namespace

TEST_CASE("catalog rows are stochastic") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const auto [p, q, r] = random_pqr(rng);
    const double a = u(rng);
    const Kernel bd = make_birth_death(p, r, q, SparseRow{{0, a}, {1, 1 - a}});
    const IncrementLaw law = random_law(rng, 1 + t % 3);
    const Kernel rw = make_homogeneous_rw(law, pooled_boundary(law));
    const Kernel ly = make_lindley(law, 1.0 + u(rng)).kernel;
    for (const Kernel* P : {&bd, &rw, &ly})
      for (std::size_t i = 0; i < 100; ++i) CHECK(std::abs(row_mass(P->row(i)) - 1.0) <= 1e-12);
  }
  for (double theta : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
    const GridModel m = make_contracting_normals(theta, 8.0, 201);
    const auto& d = m.kernel.dense();
    for (std::size_t i = 0; i < 201; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 201; ++j) s += d[i * 201 + j];
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("norm axioms and the m1 bound") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double gamma = 1.05 + (u(rng) + 1.0);
    const WeightFn V = WeightFn::geometric(gamma);
    const std::size_t M = 40;
    std::vector<double> f(M + 1), g(M + 1), fg(M + 1), cf(M + 1);
    const double c = 5 * u(rng);
    for (std::size_t i = 0; i <= M; ++i) {
      f[i] = u(rng) * V(i);
      g[i] = u(rng) * V(i);
      fg[i] = f[i] + g[i];
      cf[i] = c * f[i];
    }
    const double nf = weighted_norm(f, V);
    CHECK(weighted_norm(cf, V) == doctest::Approx(std::abs(c) * nf).epsilon(1e-13));
    CHECK(weighted_norm(fg, V) <= nf + weighted_norm(g, V) + 1e-13);
    CHECK(lipschitz_seminorm_m1(f, GeometricDistance(gamma), M) <= m1_from_weighted_norm_bound(nf, gamma) * (1 + 1e-12));
  }
}

TEST_CASE("m1 never exceeds the bound for |f|_1 = 1.5 at gamma = 2") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const WeightFn V = WeightFn::geometric(2.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> f(31);
    for (std::size_t i = 0; i <= 30; ++i) f[i] = u(rng) * V(i);
    const double n = weighted_norm(f, V);
    for (double& v : f) v *= 1.5 / n;
    CHECK(lipschitz_seminorm_m1(f, GeometricDistance(2.0), 30) <= 4.5 * (1 + 1e-12));
  }
}

TEST_CASE("spectra are invariant under the V-similarity") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    // p / q <= 1.3 keeps the raw truncation well conditioned
    std::uniform_real_distribution<double> u(0.2, 0.35);
    const double q = u(rng), p = q * (1.05 + 0.05 * t), r = 1 - p - q;
    const Kernel P = make_birth_death(p, r, q, SparseRow{{0, 0.5}, {1, 0.5}});
    const double gamma = std::sqrt(p / q);
    const TruncatedOperator A = build_truncation(P, WeightFn::geometric(gamma), 60, TruncationPolicy::ReflectLast);
    const TruncatedOperator B = build_truncation(P, WeightFn::unit(), 60, TruncationPolicy::ReflectLast);
    const auto ea = full_spectrum(A);
    auto eb = full_spectrum(B);
    for (const auto& l : ea) {
      auto it = std::min_element(eb.begin(), eb.end(), [&](auto x, auto y) { return std::abs(x - l) < std::abs(y - l); });
      CHECK(std::abs(*it - l) <= 1e-8);
      eb.erase(it);
    }
    // 1 is an eigenvalue under ReflectLast, and every modulus is below the max abs row sum
    double best = 1e300;
    for (const auto& l : ea) best = std::min(best, std::abs(l - 1.0));
    CHECK(best <= 1e-10);
    const double bound = A.matrix.cwiseAbs().rowwise().sum().maxCoeff();
    for (const auto& l : ea) CHECK(std::abs(l) <= bound + 1e-12);
  }
}

TEST_CASE("minorization bound is monotone") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 500; ++t) {
    const double rho = u(rng), m = 5 * u(rng), nu = u(rng), nv = 1 + 3 * u(rng);
    const double base = theorem21_bound(rho, m, nu, nv);
    CHECK(theorem21_bound(rho, m * 1.1 + 0.01, nu, nv) >= base - 1e-15);
    CHECK(theorem21_bound(rho, m, std::min(1.0, nu * 1.1), nv) <= base + 1e-15);
  }
}

TEST_CASE("homogeneous walks: ell_N^(1/N) equals phi(gamma)") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const IncrementLaw law = random_law(rng, 1 + t % 3);
    const Kernel P = make_homogeneous_rw(law, pooled_boundary(law));
    const double gamma = 1.1 + 0.1 * t;
    const DriftReport rep = ell_and_L(P, WeightFn::geometric(gamma), 10, 200);
    for (const auto& [N, v] : rep.ell) CHECK(std::abs(std::pow(v, 1.0 / N) - phi(law, gamma)) <= 1e-10);
    CHECK(rep.delta_V_estimate >= rep.L - 1e-10);
    CHECK(std::abs(rep.delta_V_estimate - rep.L) <= 1e-10);
  }
}

TEST_CASE("derivative test agrees with the phi minimum") {
  std::mt19937_64 rng(7);
  int disagreements = 0;
  for (int t = 0; t < 200; ++t) {
    const IncrementLaw law = random_law(rng, 1 + t % 3);
    if (law.at(0) == 1.0) continue;
    const bool by_sign = wd_feasibility_test(law).sign < 0;
    const bool by_min = minimize_phi(law, 50.0).feasible;
    if (by_sign != by_min) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("birth-death rate invariants") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  int case_b = 0;
  for (int t = 0; t < 2000 && case_b < 100; ++t) {
    const auto [p, q, r] = random_pqr(rng);
    const BirthDeathRate x = birth_death_rate(p, q, r, u(rng));
    CHECK(x.essential <= x.rho + 1e-15);
    CHECK(x.rho < 1.0);
    if (x.case_label == BirthDeathCase::CaseB_Lambda) {
      CHECK(x.essential < x.rho);
      CHECK(std::abs(*x.z_a) <= x.gamma_hat * (1 + 1e-12));
    } else {
      CHECK(x.rho == doctest::Approx(x.essential).epsilon(1e-14));
    }
    if (!x.a1) continue;
    ++case_b;
    // labels along increasing a follow lambda -> essential -> a0 branch
    auto rank = [](BirthDeathCase c) {
      switch (c) {
        case BirthDeathCase::CaseB_Lambda: return 0;
        case BirthDeathCase::CaseB_Essential: return 1;
        default: return 2;
      }
    };
    int last = 0;
    for (double a = 0.001; a < 1.0; a += 0.001) {
      if (std::abs(a - (1 - q)) < 1e-9) continue;
      const int k = rank(birth_death_rate(p, q, r, a).case_label);
      CHECK(k >= last);
      last = k;
    }
  }
  CHECK(case_b >= 100);
}

TEST_CASE("Lipschitz bound holds for random drifting Lindley walks") {
  std::mt19937_64 rng(9);
  int emitted = 0;
  for (int t = 0; t < 40 && emitted < 6; ++t) {
    const IncrementLaw law = random_law(rng, 1 + t % 2);
    double mean = 0.0;
    for (const auto& [k, a] : law) mean += k * a;
    if (mean > -0.1) continue;
    const PhiMinimum pm = minimize_phi(law, 4.0);
    const double gamma = 1.0 + 0.5 * (pm.gamma - 1.0);
    const LindleyModel m = make_lindley(law, gamma);
    const LindleyCertificate lc = lindley_certificate(law, gamma, 400);
    const RateCertificate cert = lindley_rate_certificate(lc, "lindley", {{"t", t}});
    const auto pts = lindley_audit_points(m.kernel, gamma, lc.pi, cert.model_hash, 60, 30, 20);
    CHECK(audit_bound(pts, cert).pass);
    RateCertificate neg = cert;
    neg.rho *= 0.5;
    CHECK_FALSE(audit_bound(pts, neg).pass);
    ++emitted;
  }
  CHECK(emitted >= 3);
}

TEST_CASE("xi bounds the iterated weight on the Gaussian grid") {
  const GridModel m = make_contracting_normals(0.5);
  const XiBound x = xi_bound(m.ifs, 1.0, 0.8, 200'000, 2);
  const std::size_t G = *m.kernel.finite_size();
  const auto& d = m.kernel.dense();
  std::vector<double> V(G), g(G), next(G);
  for (std::size_t i = 0; i < G; ++i) g[i] = V[i] = 1 + std::abs(m.kernel.state_value(i));
  double sup = 1.0;
  for (int n = 1; n <= 50; ++n) {
    for (std::size_t i = 0; i < G; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < G; ++j) acc += d[i * G + j] * g[j];
      next[i] = acc;
      sup = std::max(sup, acc / V[i]);
    }
    g.swap(next);
  }
  CHECK(x.xi >= sup);
}

TEST_CASE("composite Lipschitz moments do not grow with n") {
  for (const IFSModel& m : {make_geometric_mh(0.25).ifs, make_multiplicative_uniform()}) {
    const std::size_t n_max = 5;
    const MonteCarloResult mc = monte_carlo(200'000, 4, 0, n_max, [&](std::mt19937_64& rng, double* s) {
      double prod = 1.0;
      for (std::size_t n = 0; n < n_max; ++n) {
        prod *= m.lipschitz_coeff(m.sample_noise(rng));
        s[n] = prod;
      }
    });
    for (std::size_t n = 1; n < n_max; ++n) {
      const double k0 = std::pow(mc.mean[n - 1], 1.0 / n);
      const double k1 = std::pow(mc.mean[n], 1.0 / (n + 1));
      const double se = mc.stderr_[n] / mc.mean[n] * k1 / (n + 1) + mc.stderr_[n - 1] / mc.mean[n - 1] * k0 / n;
      CHECK(k1 <= k0 + 3 * se);
    }
  }
}

TEST_CASE("decay curves: two-step contraction and spectral agreement") {
  for (double a : {0.02, 0.1, 0.15}) {
    const BirthDeathRate r = birth_death_rate(0.75, 0.2, 0.05, a);
    REQUIRE(r.case_label == BirthDeathCase::CaseB_Lambda);
    const Kernel P = make_birth_death(0.75, 0.05, 0.2, SparseRow{{0, a}, {1, 1 - a}});
    const WeightFn V = WeightFn::geometric(r.gamma_hat);
    const DecayCurve c = decay_curve(P, V, [](double x) { return x == 0.0 ? 1.0 : 0.0; }, 200, 600);
    const SpectrumReport s = rate_from_spectrum(full_spectrum(build_truncation(P, V, 600)), r.essential + 0.01);
    CHECK(std::abs(c.fitted_rho - s.rho_estimate) <= 0.02);
    for (std::size_t k = c.fit_from - 1; k + 2 < c.fit_to; ++k)
      CHECK(c.e_n[k + 2] / c.e_n[k] <= std::pow(c.fitted_rho + 0.05, 2));
  }
}

TEST_CASE("lazy reversible chain decays monotonically") {
  const Kernel P = make_birth_death(0.3, 0.6, 0.1, SparseRow{{0, 0.7}, {1, 0.3}});
  const DecayCurve c = decay_curve(P, WeightFn::geometric(std::sqrt(3.0)), [](double x) { return x == 0.0 ? 1.0 : 0.0; }, 100, 400);
  for (std::size_t k = 0; k + 1 < c.e_n.size(); ++k) CHECK(c.e_n[k + 1] <= c.e_n[k] + 1e-12);
}
