#include "vgeo/drift_analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vgeo/error.hpp"

namespace vgeo {

DriftRatios drift_ratios(const Kernel& P, const WeightFn& V, std::size_t N, std::size_t M) {
  require(P.is_discrete(), "drift iteration needs a countable kernel");
  require(N >= 1, "drift iteration needs N >= 1");
  require(P.support_radius().has_value(), "drift iteration needs a bounded support radius");
  const std::size_t radius = *P.support_radius();
  const std::size_t needed = radius * N + P.boundary_rows();
  if (M < needed || M < radius * N) {
    std::ostringstream out;
    out << "M = " << M << " too small for N = " << N << ": need M >= " << needed;
    throw Error(out.str());
  }
  const std::size_t out_hi = M - radius * N;

  std::vector<SparseRow> rows;
  std::vector<std::size_t> reach;
  auto prefix_reach = [&](std::size_t hi) {
    while (rows.size() <= hi) {
      rows.push_back(P.row(rows.size()));
      const std::size_t r = max_column(rows.back());
      reach.push_back(reach.empty() ? r : std::max(reach.back(), r));
    }
    return reach[hi];
  };
  std::vector<std::size_t> ext(N + 1);
  ext[N] = out_hi;
  for (std::size_t k = N; k >= 1; --k) ext[k - 1] = std::max(ext[k], prefix_reach(ext[k]));
  if (ext[0] > M) {
    std::ostringstream out;
    out << "M = " << M << " too small for N = " << N << ": need M >= " << ext[0] + radius * N;
    throw Error(out.str());
  }

  std::vector<double> log_v(ext[0] + 1);
  for (std::size_t j = 0; j <= ext[0]; ++j) log_v[j] = V.log_eval(P.state_value(j));

  // Rows of the similarity transform V(i)^{-1} P(i,j) V(j).
  std::vector<SparseRow> scaled(ext[1] + 1);
  for (std::size_t i = 0; i <= ext[1]; ++i) {
    for (const auto& t : rows[i])
      scaled[i].push_back({t.to, t.prob * std::exp(log_v[t.to] - log_v[i])});
  }

  DriftRatios out{V, {}, {}};
  std::vector<double> u(ext[0] + 1, 1.0);
  for (std::size_t k = 1; k <= N; ++k) {
    std::vector<double> next(ext[k] + 1, 0.0);
    for (std::size_t i = 0; i <= ext[k]; ++i) {
      double acc = 0.0;
      for (const auto& t : scaled[i]) acc += t.prob * u[t.to];
      next[i] = acc;
    }
    u = next;
    out.ratios.push_back(u);
    out.extent.push_back(ext[k]);
  }
  return out;
}

WeightedVector iterated_weight(const Kernel& P, const WeightFn& V, std::size_t N, std::size_t M) {
  const DriftRatios d = drift_ratios(P, V, N, M);
  const std::size_t hi = M - *P.support_radius() * N;
  WeightedVector out{{}, V, {}};
  const auto& u = d.at(N);
  for (std::size_t i = 0; i <= hi; ++i)
    out.values.push_back(u[i] * std::exp(V.log_eval(P.state_value(i))));
  return out;
}

DriftReport ell_and_L(const Kernel& P, const WeightFn& V, std::size_t N_max, std::size_t M,
                      std::size_t tail_start) {
  require(N_max >= 1, "N_max must be >= 1");
  if (tail_start == 0) tail_start = M / 2;
  const DriftRatios d = drift_ratios(P, V, N_max, M);
  const std::size_t radius = *P.support_radius();
  require(tail_start < M - N_max * radius, "tail window is empty");

  DriftReport rep;
  rep.M = M;
  rep.tail_start = tail_start;
  rep.L = std::numeric_limits<double>::infinity();
  for (std::size_t N = 1; N <= N_max; ++N) {
    const auto& u = d.at(N);
    const std::size_t hi = std::min(d.extent[N - 1], M - N * radius);
    double best = 0.0;
    for (std::size_t i = tail_start; i <= hi; ++i) best = std::max(best, u[i]);
    rep.ell[N] = best;
    const double root = std::pow(best, 1.0 / static_cast<double>(N));
    if (root < rep.L) {
      rep.L = root;
      rep.N_star = N;
    }
  }
  rep.delta_V_estimate = rep.ell.at(1);
  rep.wd_feasible = rep.L < 1.0;

  const auto& u = d.at(rep.N_star);
  const double target = std::pow(rep.L, static_cast<double>(rep.N_star));
  for (std::size_t i = 0; i < tail_start; ++i) {
    if (u[i] <= target) continue;
    const double excess = std::exp(V.log_eval(P.state_value(i))) * (u[i] - target);
    rep.d_constant = std::max(rep.d_constant, excess);
  }
  return rep;
}

double phi(const IncrementLaw& increments, double gamma) {
  require(gamma > 0.0, "phi needs gamma > 0");
  double s = 0.0;
  for (const auto& [k, a] : increments) s += a * std::pow(gamma, k);
  return s;
}

PhiMinimum minimize_phi(const IncrementLaw& increments, double gamma_max) {
  validate_increment_law(increments);
  require(gamma_max > 1.0, "minimize_phi needs gamma_max > 1");
  double lo = 1.0;
  double hi = gamma_max;
  while (hi - lo > 1e-10) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (phi(increments, m1) <= phi(increments, m2))
      hi = m2;
    else
      lo = m1;
  }
  const double g = 0.5 * (lo + hi);
  const double value = phi(increments, g);
  return {g, value, value < 1.0 - 1e-12};
}

FeasibilityTest wd_feasibility_test(const IncrementLaw& increments) {
  validate_increment_law(increments);
  int b = 0;
  for (const auto& [k, a] : increments)
    if (a > 0.0) b = std::max(b, std::abs(k));
  const auto zero = increments.find(0);
  require(!(b == 0 || (zero != increments.end() && zero->second == 1.0)),
          "increment law is concentrated at 0: no derivative of phi at 1 is nonzero");

  FeasibilityTest res{0, 0, {}};
  for (int j = 1; j <= 2 * b; ++j) {
    double value = 0.0;
    double scale = 0.0;
    for (const auto& [k, a] : increments) {
      double falling = 1.0;
      for (int m = 0; m < j; ++m) falling *= static_cast<double>(k - m);
      value += a * falling;
      scale += std::abs(a * falling);
    }
    res.derivatives.push_back(value);
    if (std::abs(value) > 1e-12 * scale) {
      res.ell = j;
      res.sign = value < 0.0 ? -1 : 1;
      return res;
    }
  }
  throw Error("all derivatives of phi at 1 up to order 2b vanish");
}

double theorem21_bound(double rho, double M_drift, double nu_mass, double nu_V) {
  require(nu_mass > 0.0, "minorizing measure has zero mass");
  require(rho > 0.0 && rho < 1.0, "drift rate must lie in (0,1)");
  const double tau = std::max(0.0, M_drift - nu_V);
  return (rho * nu_mass + tau) / (nu_mass + tau);
}

double theorem21_bound(const MinorizationCertificate& cert, double nu_mass, double nu_V) {
  return theorem21_bound(cert.rho, cert.M_drift, nu_mass, nu_V);
}

MinorizationCertificate extract_minorization(const Kernel& P, const std::set<std::size_t>& S,
                                             const WeightFn& V, std::size_t M,
                                             std::optional<double> rho_override) {
  require(P.is_discrete(), "minorization needs a countable kernel");
  require(!S.empty(), "small set S is empty");
  require(*S.rbegin() <= M, "small set extends beyond M");

  auto log_v = [&](std::size_t j) { return V.log_eval(P.state_value(j)); };
  auto drift_ratio = [&](std::size_t i) {
    double acc = 0.0;
    for (const auto& t : P.row(i)) acc += t.prob * std::exp(log_v(t.to) - log_v(i));
    return acc;
  };

  MinorizationCertificate c;
  c.S.assign(S.begin(), S.end());
  bool first = true;
  for (const std::size_t i : S) {
    std::map<std::size_t, double> row;
    for (const auto& t : P.row(i)) row[t.to] = t.prob;
    if (first) {
      c.nu = row;
      first = false;
      continue;
    }
    for (auto& [j, v] : c.nu) {
      const auto it = row.find(j);
      v = (it == row.end()) ? 0.0 : std::min(v, it->second);
    }
  }
  std::erase_if(c.nu, [](const auto& kv) { return kv.second == 0.0; });

  if (rho_override) {
    c.rho = *rho_override;
  } else {
    c.rho = 0.0;
    for (std::size_t i = 0; i <= M; ++i)
      if (!S.contains(i)) c.rho = std::max(c.rho, drift_ratio(i));
  }
  require(c.rho < 1.0, "condition (D) not satisfied with this S");
  require(c.rho > 0.0, "drift rate outside S is zero");

  c.M_drift = 0.0;
  for (const std::size_t i : S) {
    const double vi = std::exp(log_v(i));
    c.M_drift = std::max(c.M_drift, vi * (drift_ratio(i) - c.rho));
  }
  for (const auto& [j, v] : c.nu) {
    c.nu_mass += v;
    c.nu_V += v * std::exp(log_v(j));
  }
  c.tau = std::max(0.0, c.M_drift - c.nu_V);
  c.bound = theorem21_bound(c.rho, c.M_drift, c.nu_mass, c.nu_V);
  return c;
}

}  // namespace vgeo
