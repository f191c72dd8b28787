#include "vgeo/convergence_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vgeo/error.hpp"

namespace vgeo {

namespace {

CsrMatrix dense_to_csr(const Kernel& P) {
  const std::size_t n = *P.finite_size();
  const auto& d = P.dense();
  CsrMatrix a;
  a.n = n;
  a.offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i * n + j] == 0.0) continue;
      a.cols.push_back(j);
      a.vals.push_back(d[i * n + j]);
    }
    a.offsets.push_back(a.cols.size());
  }
  return a;
}

double l1_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

StationaryResult stationary(const Kernel& P, std::size_t M, TruncationPolicy policy,
                            std::size_t max_iterations) {
  const CsrMatrix A = P.is_discrete() ? truncate(P, M, policy) : dense_to_csr(P);
  const std::size_t n = A.n;
  std::vector<double> pi(n, 0.0);
  if (P.is_discrete())
    pi[0] = 1.0;
  else
    std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(n));

  StationaryResult out;
  std::vector<double> next;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_at = 0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    A.left_multiply(pi, next);
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
    const double res = l1_gap(next, pi);
    pi.swap(next);
    out.iterations = it;
    out.residual = res;
    if (res <= 1e-14) break;
    if (res < best) {
      best = res;
      best_at = it;
    } else if (res <= 1e-12 && it - best_at > 1000) {
      break;
    }
  }
  if (out.residual > 1e-12)
    throw Error("stationary iteration stagnated; enlarge M or check for periodicity");
  // residual of the returned vector itself
  A.left_multiply(pi, next);
  out.residual = l1_gap(next, pi);
  out.pi = std::move(pi);
  return out;
}

void fit_decay(DecayCurve& curve) {
  curve.fitted_rho = 0.0;
  curve.fit_r2 = 0.0;
  curve.underflow_truncated = false;
  std::size_t last = 0;
  for (std::size_t k = 0; k < curve.e_n.size(); ++k) {
    if (!(curve.e_n[k] > 1e-13)) break;
    last = k + 1;
  }
  curve.underflow_truncated = last < curve.e_n.size();
  if (last < 2) return;
  const std::size_t first = last / 2;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = first; k < last; ++k) {
    xs.push_back(static_cast<double>(curve.n_values[k]));
    ys.push_back(std::log(curve.e_n[k]));
  }
  if (xs.size() < 2) return;
  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  curve.fitted_rho = std::exp(slope);
  curve.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  curve.fit_from = curve.n_values[first];
  curve.fit_to = curve.n_values[last - 1];
}

DecayCurve decay_curve(const Kernel& P, const WeightFn& V, const std::function<double(double)>& f,
                       std::size_t n_max, std::size_t M, std::size_t i_lo, std::size_t i_hi) {
  require(n_max >= 2, "decay curve needs n_max >= 2");
  DecayCurve curve;
  const StationaryResult st = stationary(P, M);
  curve.pi_f = 0.0;
  for (std::size_t i = 0; i < st.pi.size(); ++i) curve.pi_f += st.pi[i] * f(P.state_value(i));

  auto record = [&](std::size_t n, const std::vector<double>& g) {
    double e = 0.0;
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
      const double diff = std::abs(g[i] - curve.pi_f);
      if (diff == 0.0) continue;
      e = std::max(e, std::exp(std::log(diff) - V.log_eval(P.state_value(i))));
    }
    curve.n_values.push_back(n);
    curve.e_n.push_back(e);
  };

  if (P.is_discrete()) {
    require(P.support_radius().has_value(), "decay curve needs a bounded support radius");
    const std::size_t radius = *P.support_radius();
    require(M > n_max * radius, "M too small for n_max");
    if (i_hi == 0) i_hi = std::min(M / 2, M - n_max * radius);
    require(i_hi <= M - n_max * radius, "window extends past the exact propagation range");
    require(i_lo <= i_hi, "empty decay window");
    const ExactPropagator prop(P, i_hi, n_max);
    std::vector<double> g(prop.input_extent() + 1);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = f(P.state_value(i));
    for (std::size_t n = 1; n <= n_max; ++n) {
      g = prop.apply(g, n);
      record(n, g);
    }
  } else {
    const std::size_t G = *P.finite_size();
    if (i_hi == 0) i_hi = G - 1;
    require(i_hi < G && i_lo <= i_hi, "decay window outside the grid");
    const auto& d = P.dense();
    std::vector<double> g(G);
    for (std::size_t i = 0; i < G; ++i) g[i] = f(P.state_value(i));
    std::vector<double> next(G);
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (std::size_t i = 0; i < G; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < G; ++j) acc += d[i * G + j] * g[j];
        next[i] = acc;
      }
      g.swap(next);
      record(n, g);
    }
  }
  curve.i_lo = i_lo;
  curve.i_hi = i_hi;
  fit_decay(curve);
  return curve;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "tv_distance: measures live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

std::vector<std::vector<double>> grid_power_rows(const Kernel& P, std::size_t start,
                                                 std::size_t n_max) {
  require(!P.is_discrete(), "grid_power_rows needs a grid kernel");
  const std::size_t G = *P.finite_size();
  require(start < G, "start index outside the grid");
  const auto& d = P.dense();
  std::vector<std::vector<double>> out;
  std::vector<double> mu(G, 0.0);
  mu[start] = 1.0;
  out.push_back(mu);
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::vector<double> next(G, 0.0);
    for (std::size_t i = 0; i < G; ++i) {
      if (mu[i] == 0.0) continue;
      for (std::size_t j = 0; j < G; ++j) next[j] += mu[i] * d[i * G + j];
    }
    mu.swap(next);
    out.push_back(mu);
  }
  return out;
}

BoundAudit audit_bound(const std::vector<AuditPoint>& data, const RateCertificate& cert,
                       double tolerance) {
  const auto pre = cert.constants.find("prefactor");
  require(pre != cert.constants.end(), "certificate has no prefactor constant");
  BoundAudit out;
  out.certificate = cert;
  out.tolerance = tolerance;
  out.pass = true;
  out.max_ratio = 0.0;
  for (const auto& pt : data) {
    if (pt.model_hash != cert.model_hash)
      throw Error("audit data and certificate describe different models");
    const double rhs = pre->second * std::pow(cert.rho, static_cast<double>(pt.n)) * pt.scale;
    double ratio = 0.0;
    if (pt.lhs > 0.0) ratio = rhs > 0.0 ? pt.lhs / rhs : std::numeric_limits<double>::infinity();
    if (pt.lhs > rhs * (1.0 + tolerance) + 3.0 * pt.lhs_stderr) out.pass = false;
    if (ratio > out.max_ratio || out.points == 0) {
      out.max_ratio = std::max(out.max_ratio, ratio);
      out.worst_case = {pt.n, pt.lhs, rhs, pt.label};
    }
    ++out.points;
  }
  return out;
}

std::vector<AuditPoint> lindley_audit_points(const Kernel& P, double gamma,
                                             const std::vector<double>& pi,
                                             const std::string& model_hash, std::size_t n_max,
                                             std::size_t i_max, std::size_t j_max) {
  require(gamma > 1.0, "audit needs gamma > 1");
  const ExactPropagator prop(P, i_max, n_max);
  const double lg = std::log(gamma);
  std::vector<AuditPoint> pts;
  auto run = [&](const std::function<double(std::size_t)>& f, double m1, const std::string& name) {
    double pi_f = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) pi_f += pi[i] * f(i);
    std::vector<double> g(prop.input_extent() + 1);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = f(i);
    for (std::size_t n = 1; n <= n_max; ++n) {
      g = prop.apply(g, n);
      for (std::size_t i = 0; i <= i_max; ++i) {
        AuditPoint pt;
        pt.model_hash = model_hash;
        pt.n = n;
        pt.lhs = std::abs(g[i] - pi_f);
        pt.scale = m1 * std::exp(static_cast<double>(i) * lg);
        pt.label = name + " i=" + std::to_string(i);
        pts.push_back(pt);
      }
    }
  };
  run([lg](std::size_t i) { return std::exp(static_cast<double>(i) * lg); }, 1.0, "f=V");
  for (std::size_t j = 0; j <= j_max; ++j) {
    const double m1 = std::exp((1.0 - static_cast<double>(j)) * lg) / (gamma - 1.0);
    run([j](std::size_t i) { return i == j ? 1.0 : 0.0; }, m1, "f=1_{" + std::to_string(j) + "}");
  }
  return pts;
}

std::vector<std::vector<double>> tv_curves(const Kernel& P, const std::vector<double>& pi,
                                           const std::vector<double>& starts, std::size_t n_max) {
  std::vector<std::vector<double>> out;
  for (const double x : starts) {
    const auto rows = grid_power_rows(P, P.grid_points().nearest(x), n_max);
    std::vector<double> tv;
    for (const auto& r : rows) tv.push_back(tv_distance(r, pi));
    out.push_back(tv);
  }
  return out;
}

std::vector<AuditPoint> tv_audit_points(const Kernel& P, const std::vector<double>& pi,
                                        const std::string& model_hash,
                                        const std::vector<double>& starts, std::size_t n_from,
                                        std::size_t n_max) {
  const auto curves = tv_curves(P, pi, starts, n_max);
  std::vector<AuditPoint> pts;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const double x = P.state_value(P.grid_points().nearest(starts[s]));
    for (std::size_t n = n_from; n <= n_max; ++n) {
      AuditPoint pt;
      pt.model_hash = model_hash;
      pt.n = n;
      pt.lhs = curves[s][n];
      pt.scale = 1.0 + std::abs(x);
      pt.label = "x=" + std::to_string(x);
      pts.push_back(pt);
    }
  }
  return pts;
}

}  // namespace vgeo
