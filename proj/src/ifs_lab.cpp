#include "vgeo/ifs_lab.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vgeo/convergence_verifier.hpp"
#include "vgeo/error.hpp"

namespace vgeo {

namespace {

constexpr std::size_t kChunks = 64;

double gauss_half_line(const std::function<double(double)>& g) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

double normal_density(double y, double sd) {
  return std::exp(-0.5 * (y / sd) * (y / sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// E[(c + |Z|)^b] for Z ~ N(0, sd^2)
double folded_normal_moment(double c, double b, double sd) {
  if (sd == 0.0) return std::pow(c, b);
  return gauss_half_line([&](double y) { return 2.0 * std::pow(c + y, b) * normal_density(y, sd); });
}

}  // namespace

MonteCarloResult monte_carlo(std::size_t n_samples, std::uint64_t seed, unsigned threads,
                             std::size_t n_stats,
                             const std::function<void(std::mt19937_64&, double*)>& sample) {
  require(n_samples >= 2, "Monte Carlo needs at least 2 samples");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::vector<double>> sums(kChunks, std::vector<double>(n_stats, 0.0));
  std::vector<std::vector<double>> squares(kChunks, std::vector<double>(n_stats, 0.0));
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = n_samples * c / kChunks;
    const std::size_t end = n_samples * (c + 1) / kChunks;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::vector<double> stats(n_stats);
    for (std::size_t s = begin; s < end; ++s) {
      sample(rng, stats.data());
      for (std::size_t k = 0; k < n_stats; ++k) {
        sums[c][k] += stats[k];
        squares[c][k] += stats[k] * stats[k];
      }
    }
  };
  std::size_t next = 0;
  while (next < kChunks) {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads && next < kChunks; ++t, ++next)
      jobs.push_back(std::async(std::launch::async, run_chunk, next));
    for (auto& j : jobs) j.get();
  }
  MonteCarloResult out;
  out.samples = n_samples;
  const double n = static_cast<double>(n_samples);
  for (std::size_t k = 0; k < n_stats; ++k) {
    double s = 0.0;
    double q = 0.0;
    for (std::size_t c = 0; c < kChunks; ++c) {
      s += sums[c][k];
      q += squares[c][k];
    }
    const double mean = s / n;
    const double var = std::max(0.0, (q / n - mean * mean) * n / (n - 1.0));
    out.mean.push_back(mean);
    out.stderr_.push_back(std::sqrt(var / n));
  }
  return out;
}

ContractionEstimate contraction_estimate(const IFSModel& model, double a, std::size_t n_samples,
                                         std::uint64_t seed, unsigned threads) {
  require(a >= 1.0, "contraction estimate needs a >= 1");
  ContractionEstimate out;
  out.a = a;
  if (model.closed.lipschitz_moment && model.closed.kappa_hat) {
    out.kappa1 = std::pow(model.closed.lipschitz_moment(a), 1.0 / a);
    out.kappa_hat = model.closed.kappa_hat(a);
    out.method = ContractionMethod::ClosedForm;
    return out;
  }
  const MonteCarloResult mc =
      monte_carlo(n_samples, seed, threads, 1, [&](std::mt19937_64& rng, double* s) {
        s[0] = std::pow(model.lipschitz_coeff(model.sample_noise(rng)), a);
      });
  const double m = mc.mean[0];
  if (!(m < 1e12)) throw Error("Lipschitz moment diverges");
  out.kappa1 = std::pow(m, 1.0 / a);
  out.kappa_hat = out.kappa1;
  out.method = ContractionMethod::MonteCarloUpperBound;
  out.mc_stderr = m > 0.0 ? mc.stderr_[0] * out.kappa1 / (a * m) : 0.0;
  return out;
}

LindleyCertificate lindley_certificate(const IncrementLaw& increments, double gamma,
                                       std::size_t M) {
  const LindleyModel model = make_lindley(increments, gamma);
  LindleyCertificate c;
  c.gamma = gamma;
  c.kappa1 = model.ifs.closed.lipschitz_moment(1.0);
  if (c.kappa1 >= 1.0)
    throw Error("E[gamma^increment] >= 1: choose gamma closer to 1 or a walk with negative drift");
  double mean = 0.0;
  for (const auto& [v, prob] : increments) mean += prob * v;
  c.nonnegative_drift = mean >= 0.0;

  const StationaryResult st = stationary(model.kernel, M);
  c.pi = st.pi;
  c.stationary_residual = st.residual;
  const double lg = std::log(gamma);
  c.c1 = 0.0;
  for (std::size_t i = 0; i < c.pi.size(); ++i)
    c.c1 += c.pi[i] * std::exp(static_cast<double>(i) * lg);
  c.tail_term = c.pi.back() * std::exp(static_cast<double>(M) * lg);
  c.c_rho = c.c1 * (gamma + 1.0) / (gamma - 1.0);
  return c;
}

RateCertificate lindley_rate_certificate(const LindleyCertificate& cert, const std::string& model,
                                         const nlohmann::json& params) {
  RateCertificate r;
  r.model = model;
  r.params = params;
  r.rho = cert.kappa1;
  r.constants = {{"gamma", cert.gamma},
                 {"kappa1", cert.kappa1},
                 {"c1", cert.c1},
                 {"c_rho", cert.c_rho},
                 {"prefactor", cert.c1}};
  r.paper_case = "lindley.lipschitz_bound";
  r.model_hash = model_hash(model, params);
  return r;
}

GeometricMHConstants geometric_mh_constants(double p) {
  require(p > 0.0 && p < 1.0, "geometric MH needs p in (0,1)");
  const double s = std::sqrt(p);
  return {1.0 / s, s + (1.0 - p) / 2.0, (1.0 + s) * (1.0 + s) / (1.0 - s)};
}

XiBound xi_bound(const IFSModel& model, double a, double delta, std::size_t n_samples,
                 std::uint64_t seed, unsigned threads) {
  require(a >= 1.0, "xi bound needs a >= 1");
  require(delta < 1.0, "xi bound needs delta < 1");
  const bool integer_a = a == std::floor(a) && a <= 8.0;
  const int ia = static_cast<int>(a);
  // Statistics: E[L^a], xi1 integrand, then either mixed moments or raw (L, D) pairs.
  const std::size_t n_stats = integer_a ? 2 + static_cast<std::size_t>(ia) + 1 : 2;
  auto one = [&](std::mt19937_64& rng, double* s) {
    const double v = model.sample_noise(rng);
    const double L = model.lipschitz_coeff(v);
    const double D = model.distance(model.step(v, model.x0), model.x0);
    s[0] = std::pow(L, a);
    s[1] = std::pow(std::max(1.0, L) + D, a);
    if (integer_a)
      for (int k = 0; k <= ia; ++k) s[2 + k] = std::pow(1.0 + D, ia - k) * std::pow(L, k);
  };
  const MonteCarloResult mc = monte_carlo(n_samples, seed, threads, n_stats, one);
  require(mc.mean[0] < delta, "xi bound needs E[L^a] < delta");

  std::function<double(double)> ratio;
  std::vector<std::pair<double, double>> pairs;
  if (integer_a) {
    std::vector<double> coef(static_cast<std::size_t>(ia) + 1);
    for (int k = 0; k <= ia; ++k)
      coef[k] = boost::math::binomial_coefficient<double>(ia, k) * mc.mean[2 + k];
    ratio = [coef, a](double t) {
      double acc = 0.0;
      double tp = 1.0;
      for (double c : coef) {
        acc += c * tp;
        tp *= t;
      }
      return acc / std::pow(1.0 + t, a);
    };
  } else {
    // Non-integer exponent: keep the draws and average directly.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), 0xA5A5u};
    std::mt19937_64 rng(seq);
    const std::size_t kept = std::min<std::size_t>(n_samples, 200'000);
    for (std::size_t s = 0; s < kept; ++s) {
      const double v = model.sample_noise(rng);
      pairs.emplace_back(model.lipschitz_coeff(v), model.distance(model.step(v, model.x0), model.x0));
    }
    ratio = [&pairs, a](double t) {
      double acc = 0.0;
      for (const auto& [L, D] : pairs) acc += std::pow((1.0 + L * t + D) / (1.0 + t), a);
      return acc / static_cast<double>(pairs.size());
    };
  }

  XiBound out;
  out.a = a;
  out.delta = delta;
  out.xi1 = mc.mean[1];
  bool found = false;
  for (int k = 0;; ++k) {
    const double r = 1e-3 * std::pow(1.01, k);
    if (r > 1e6) break;
    if (ratio(r) <= delta && ratio(2.0 * r) <= delta && ratio(4.0 * r) <= delta) {
      out.r = r;
      found = true;
      break;
    }
  }
  if (!found) throw Error("no radius r <= 1e6 brings the drift ratio below delta");
  out.xi = 1.0 + out.xi1 * std::pow(1.0 + out.r, a) / (1.0 - delta);
  return out;
}

ARConstants ar_constants(double theta, double a, double noise_sd) {
  require(std::abs(theta) < 1.0, "AR constants need |theta| < 1");
  require(a >= 1.0, "AR constants need a >= 1");
  require(noise_sd >= 0.0, "noise standard deviation must be nonnegative");
  ARConstants c;
  c.theta = theta;
  c.a = a;
  c.noise_sd = noise_sd;
  const double th = std::abs(theta);
  // E|Z|^a = sd^a 2^{a/2} Gamma((a+1)/2) / sqrt(pi)
  const double abs_moment = std::pow(noise_sd, a) * std::pow(2.0, a / 2.0) *
                            boost::math::tgamma((a + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
  c.M_noise = std::pow(abs_moment, 1.0 / a);
  c.eps0 = (1.0 - th) / 2.0;
  c.r = std::max(0.0, (1.0 + c.M_noise - c.eps0) / c.eps0);
  c.rho_internal = std::pow((1.0 + th) / 2.0, a);
  c.xi1 = folded_normal_moment(th, a, noise_sd);
  c.xi = 1.0 + c.xi1 * std::pow(1.0 + c.r, a) / (1.0 - c.rho_internal);

  const IFSModel model = make_gaussian_ar1(theta, noise_sd);
  c.pi_norm1 = model.closed.stationary_norm(1.0);
  c.pi_norm_a = model.closed.stationary_norm(a);
  c.c1_bound = std::pow(c.xi, (a - 1.0) / a) * c.pi_norm1 * std::pow(1.0 + c.pi_norm_a, a - 1.0);
  if (noise_sd > 0.0) {
    const double max_density = 1.0 / (noise_sd * std::sqrt(2.0 * std::numbers::pi));
    c.d0 = 2.0 * th * max_density;
    c.tv_prefactor = c.pi_norm1 * 2.0 * max_density;
  }
  return c;
}

ARConstants contracting_normals_constants(double theta, double a) {
  ARConstants c = ar_constants(theta, a, std::sqrt(1.0 - theta * theta));
  if (a == 2.0) {
    c.xi_direct = 4.0;
    if (theta != 0.0) {
      const double s = std::sqrt(2.0 / std::numbers::pi);
      c.packaged_c = 2.0 * (1.0 + s) *
                     (1.0 + std::sqrt(2.0 + 2.0 * std::sqrt(2.0) / std::sqrt(std::numbers::pi))) /
                     std::abs(theta);
    }
  }
  return c;
}

double c_gamma_beta(double g, double b, double theta, const std::vector<double>& x_grid,
                    double y_cutoff) {
  require(g >= 0.0, "C_{gamma,beta} needs gamma >= 0");
  require(b > 1.0 + g, "C_{gamma,beta} diverges unless beta > 1 + gamma");
  require(!x_grid.empty(), "empty x grid");
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  double best = 0.0;
  for (const double x : x_grid) {
    const double shift = theta * x;
    const double Y = std::max(y_cutoff, 1e3 * (1.0 + std::abs(shift)));
    auto integrand = [&](double y) {
      return std::pow(1.0 + std::abs(y + shift), g) / std::pow(1.0 + std::abs(y), b);
    };
    std::vector<double> cuts{-Y, 0.0, -shift, Y};
    for (double m = 1.0; m < Y; m *= 4.0) {
      cuts.push_back(m);
      cuts.push_back(-m);
      cuts.push_back(m - shift);
      cuts.push_back(-m - shift);
    }
    std::erase_if(cuts, [Y](double v) { return v < -Y || v > Y; });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double inner = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      inner += Quad::integrate(integrand, cuts[k], cuts[k + 1], 10, 1e-13);
    // Tails |y| > Y: (1+|y+c|)^g ~ (1+|y|)^g (1 + g|c|/(1+|y|)).
    const double c = std::abs(shift);
    const double tail = std::pow(1.0 + Y, g - b + 1.0) / (b - g - 1.0) +
                        g * c * std::pow(1.0 + Y, g - b) / (b - g);
    inner += 2.0 * tail;
    best = std::max(best, inner / std::pow(1.0 + std::abs(x), g));
  }
  return best;
}

CouplingReport appendix_d_inequality_check(const IFSModel& model, double a, std::size_t n_max,
                                            std::size_t n_samples, std::uint64_t seed, double x1,
                                            double x2, double xi, unsigned threads) {
  require(a >= 1.0, "coupling check needs a >= 1");
  require(xi >= 1.0, "xi must be >= 1");
  CouplingReport rep;
  rep.a = a;
  rep.xi = xi;
  if (model.closed.lipschitz_moment) {
    rep.kappa1 = std::pow(model.closed.lipschitz_moment(a), 1.0 / a);
  } else {
    rep.kappa1 = contraction_estimate(model, a, n_samples, seed, threads).kappa1;
  }
  require(rep.kappa1 < 1.0, "coupling check needs kappa1 < 1");
  const double d12 = model.distance(x1, x2);
  const double weight0 = std::pow(model.p(x1) + model.p(x2), a - 1.0);
  auto rhs = [&](std::size_t n) {
    return std::pow(xi, (a - 1.0) / a) * std::pow(rep.kappa1, static_cast<double>(n)) * d12 *
           weight0;
  };

  rep.exact = model.closed.linear_difference && a == 1.0 && model.closed.lipschitz_moment;
  rep.pass = true;
  if (rep.exact) {
    // Coupled differences contract by L exactly; independence gives E[L]^n d.
    const double mean_l = model.closed.lipschitz_moment(1.0);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const double lhs = std::pow(mean_l, static_cast<double>(n)) * d12;
      const double r = rhs(n);
      const double ratio = r > 0.0 ? lhs / r : 0.0;
      rep.points.push_back({n, lhs, 0.0, r, ratio});
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (lhs > r * (1.0 + 1e-12)) rep.pass = false;
    }
    return rep;
  }

  const MonteCarloResult mc =
      monte_carlo(n_samples, seed, threads, n_max, [&](std::mt19937_64& rng, double* s) {
        double y1 = x1;
        double y2 = x2;
        for (std::size_t n = 0; n < n_max; ++n) {
          const double v = model.sample_noise(rng);
          y1 = model.step(v, y1);
          y2 = model.step(v, y2);
          s[n] = model.distance(y1, y2) * std::pow(model.p(y1) + model.p(y2), a - 1.0);
        }
      });
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double lhs = mc.mean[n - 1];
    const double se = mc.stderr_[n - 1];
    const double r = rhs(n);
    const double ratio = r > 0.0 ? lhs / r : 0.0;
    rep.points.push_back({n, lhs, se, r, ratio});
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (lhs > r + 3.0 * se) rep.pass = false;
  }
  return rep;
}

}  // namespace vgeo
