#include "vgeo/kernel_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vgeo/error.hpp"

namespace vgeo {

namespace {

constexpr double kRowTolerance = 1e-12;

std::string index_message(const std::string& what, std::size_t i) {
  std::ostringstream out;
  out << what << " at state " << i;
  return out.str();
}

void check_row(const SparseRow& row, std::size_t i) {
  double total = 0.0;
  for (const auto& t : row) {
    if (!(t.prob >= 0.0 && t.prob <= 1.0 + kRowTolerance))
      throw Error(index_message("transition probability outside [0,1]", i));
    total += t.prob;
  }
  if (std::abs(total - 1.0) > kRowTolerance) {
    std::ostringstream out;
    out.precision(17);
    out << "row sum " << total << " != 1 at state " << i;
    throw Error(out.str());
  }
}

// Sorts by destination, merges duplicates, drops exact zeros.
SparseRow normalize_row(SparseRow row) {
  std::sort(row.begin(), row.end(),
            [](const Transition& a, const Transition& b) { return a.to < b.to; });
  SparseRow merged;
  for (const auto& t : row) {
    if (!merged.empty() && merged.back().to == t.to)
      merged.back().prob += t.prob;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Transition& t) { return t.prob == 0.0; });
  return merged;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

void validate_increment_law(const IncrementLaw& law) {
  require(!law.empty(), "increment law is empty");
  double total = 0.0;
  for (const auto& [k, prob] : law) {
    require(prob >= 0.0 && prob <= 1.0, "increment probability outside [0,1]");
    total += prob;
  }
  require(std::abs(total - 1.0) <= kRowTolerance, "increment law does not sum to 1");
}

std::size_t max_column(const SparseRow& row) {
  std::size_t best = 0;
  for (const auto& t : row) best = std::max(best, t.to);
  return best;
}

double row_mass(const SparseRow& row) {
  double total = 0.0;
  for (const auto& t : row) total += t.prob;
  return total;
}

std::size_t Grid1D::nearest(double x) const {
  require(!points.empty(), "empty grid");
  const auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.begin()) return 0;
  if (it == points.end()) return points.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - points.begin());
  return (x - points[hi - 1] <= points[hi] - x) ? hi - 1 : hi;
}

Kernel::Kernel(std::string label, RowFn rows, std::optional<std::size_t> support_radius,
               std::size_t boundary_rows, std::optional<IncrementLaw> limit_law)
    : label_(std::move(label)),
      rows_(std::move(rows)),
      support_radius_(support_radius),
      boundary_rows_(boundary_rows),
      limit_law_(std::move(limit_law)) {}

Kernel Kernel::grid(std::string label, Grid1D grid, std::vector<double> dense_rows) {
  const std::size_t n = grid.size();
  require(dense_rows.size() == n * n, "grid kernel matrix has the wrong size");
  Kernel k(std::move(label), nullptr, std::nullopt, 0, std::nullopt);
  k.space_ = StateSpace::Grid1D;
  k.grid_ = std::make_shared<const Grid1D>(std::move(grid));
  k.dense_ = std::make_shared<const std::vector<double>>(std::move(dense_rows));
  return k;
}

SparseRow Kernel::row(std::size_t i) const {
  if (space_ == StateSpace::Grid1D) {
    const std::size_t n = grid_->size();
    require(i < n, "grid row index out of range");
    SparseRow out;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (*dense_)[i * n + j];
      if (v != 0.0) out.push_back({j, v});
    }
    return out;
  }
  SparseRow r = rows_(i);
  check_row(r, i);
  return r;
}

double Kernel::state_value(std::size_t i) const {
  if (space_ == StateSpace::Grid1D) return grid_->points.at(i);
  return static_cast<double>(i);
}

std::optional<std::size_t> Kernel::finite_size() const {
  if (space_ == StateSpace::Grid1D) return grid_->size();
  return std::nullopt;
}

const Grid1D& Kernel::grid_points() const {
  require(space_ == StateSpace::Grid1D, "kernel has no grid");
  return *grid_;
}

const std::vector<double>& Kernel::dense() const {
  require(space_ == StateSpace::Grid1D, "kernel has no dense matrix");
  return *dense_;
}

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += vals[k] * x[cols[k]];
    y[i] = acc;
  }
}

void CsrMatrix::left_multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) y[cols[k]] += xi * vals[k];
  }
}

double CsrMatrix::row_sum(std::size_t i) const {
  double acc = 0.0;
  for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += vals[k];
  return acc;
}

CsrMatrix truncate(const Kernel& kernel, std::size_t M, TruncationPolicy policy) {
  if (const auto size = kernel.finite_size()) require(M < *size, "truncation beyond grid size");
  CsrMatrix a;
  a.n = M + 1;
  a.offsets.push_back(0);
  for (std::size_t i = 0; i <= M; ++i) {
    double escaped = 0.0;
    double at_last = 0.0;
    bool has_last = false;
    for (const auto& t : kernel.row(i)) {
      if (t.to > M) {
        escaped += t.prob;
      } else if (t.to == M) {
        at_last += t.prob;
        has_last = true;
      } else {
        a.cols.push_back(t.to);
        a.vals.push_back(t.prob);
      }
    }
    if (policy == TruncationPolicy::ReflectLast) {
      at_last += escaped;
      has_last = has_last || escaped > 0.0;
    }
    if (has_last) {
      a.cols.push_back(M);
      a.vals.push_back(at_last);
    }
    a.offsets.push_back(a.cols.size());
  }
  return a;
}

ExactPropagator::ExactPropagator(const Kernel& kernel, std::size_t out_hi, std::size_t steps) {
  require(kernel.is_discrete(), "exact propagation needs a countable kernel");
  require(steps >= 1, "exact propagation needs at least one step");
  // extents_[k] = exact extent after k steps; computed backward from out_hi.
  std::vector<std::size_t> reach;  // reach[i] = max column of rows 0..i
  std::vector<SparseRow> rows;
  auto prefix_reach = [&](std::size_t hi) {
    while (rows.size() <= hi) {
      rows.push_back(kernel.row(rows.size()));
      const std::size_t r = max_column(rows.back());
      reach.push_back(reach.empty() ? r : std::max(reach.back(), r));
    }
    return reach[hi];
  };
  extents_.assign(steps + 1, 0);
  extents_[steps] = out_hi;
  for (std::size_t k = steps; k >= 1; --k)
    extents_[k - 1] = std::max(extents_[k], prefix_reach(extents_[k]));
  const std::size_t hi = extents_[1];
  prefix_reach(hi);
  rows_.n = hi + 1;
  rows_.offsets.push_back(0);
  for (std::size_t i = 0; i <= hi; ++i) {
    for (const auto& t : rows[i]) {
      rows_.cols.push_back(t.to);
      rows_.vals.push_back(t.prob);
    }
    rows_.offsets.push_back(rows_.cols.size());
  }
}

std::vector<double> ExactPropagator::apply(const std::vector<double>& f, std::size_t k) const {
  require(k >= 1 && k < extents_.size(), "propagation step out of range");
  require(f.size() > extents_[k - 1], "function not supplied far enough for exact propagation");
  const std::size_t hi = extents_[k];
  std::vector<double> out(hi + 1, 0.0);
  for (std::size_t i = 0; i <= hi; ++i) {
    double acc = 0.0;
    for (std::size_t q = rows_.offsets[i]; q < rows_.offsets[i + 1]; ++q)
      acc += rows_.vals[q] * f[rows_.cols[q]];
    out[i] = acc;
  }
  return out;
}

Kernel make_birth_death(CoefficientFn p, CoefficientFn r, CoefficientFn q, SparseRow boundary_row,
                        std::size_t validation_horizon) {
  boundary_row = normalize_row(std::move(boundary_row));
  check_row(boundary_row, 0);
  auto rows = [p, r, q, boundary_row](std::size_t n) -> SparseRow {
    if (n == 0) return boundary_row;
    SparseRow row{{n - 1, p(n)}, {n, r(n)}, {n + 1, q(n)}};
    std::erase_if(row, [](const Transition& t) { return t.prob == 0.0; });
    return row;
  };
  for (std::size_t n = 1; n <= validation_horizon; ++n) check_row(rows(n), n);
  return Kernel("birth_death", rows, 1, 1);
}

Kernel make_birth_death(double p, double r, double q, SparseRow boundary_row) {
  Kernel k = make_birth_death([p](std::size_t) { return p; }, [r](std::size_t) { return r; },
                              [q](std::size_t) { return q; }, std::move(boundary_row), 1);
  IncrementLaw law;
  if (p > 0) law[-1] = p;
  if (r > 0) law[0] = r;
  if (q > 0) law[1] = q;
  return Kernel("birth_death", [k](std::size_t i) { return k.row(i); }, 1, 1, law);
}

Kernel make_bounded_increment_rw(int b, std::function<std::vector<double>(std::size_t)> a,
                                 std::vector<SparseRow> boundary,
                                 std::optional<IncrementLaw> limit_law,
                                 std::size_t validation_horizon) {
  require(b >= 1, "bounded increment walk needs b >= 1");
  require(boundary.size() >= static_cast<std::size_t>(b),
          "bounded increment walk needs at least b boundary rows");
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    boundary[i] = normalize_row(std::move(boundary[i]));
    check_row(boundary[i], i);
  }
  const std::size_t width = 2 * static_cast<std::size_t>(b) + 1;
  auto rows = [b, a, boundary, width](std::size_t i) -> SparseRow {
    if (i < boundary.size()) return boundary[i];
    const std::vector<double> inc = a(i);
    if (inc.size() != width) throw Error(index_message("increment mass outside [-b, b]", i));
    SparseRow row;
    for (std::size_t k = 0; k < width; ++k) {
      if (inc[k] == 0.0) continue;
      const long j = static_cast<long>(i) + static_cast<long>(k) - b;
      row.push_back({static_cast<std::size_t>(j), inc[k]});
    }
    return row;
  };
  for (std::size_t i = boundary.size(); i <= boundary.size() + validation_horizon; ++i)
    check_row(rows(i), i);
  if (limit_law) validate_increment_law(*limit_law);
  return Kernel("bounded_rw", rows, static_cast<std::size_t>(b), boundary.size(),
                std::move(limit_law));
}

Kernel make_homogeneous_rw(const IncrementLaw& law, std::vector<SparseRow> boundary) {
  validate_increment_law(law);
  int b = 0;
  for (const auto& [k, prob] : law) b = std::max(b, std::abs(k));
  require(b >= 1, "homogeneous walk needs a nonzero increment");
  std::vector<double> inc(2 * static_cast<std::size_t>(b) + 1, 0.0);
  for (const auto& [k, prob] : law) inc[static_cast<std::size_t>(k + b)] = prob;
  return make_bounded_increment_rw(b, [inc](std::size_t) { return inc; }, std::move(boundary), law,
                                   1);
}

Kernel make_unbounded_increment_rw(double p, CoefficientFn q_seq, double tail_tolerance,
                                   std::size_t max_terms) {
  require(p > 0.0 && p < 1.0, "unbounded walk needs p in (0,1)");
  require(tail_tolerance > 0.0 && tail_tolerance < 1e-6, "tail tolerance must be tiny");
  SparseRow row0;
  double cumulative = 0.0;
  for (std::size_t n = 1; n <= max_terms; ++n) {
    const double qn = q_seq(n);
    require(qn >= 0.0 && qn <= 1.0, "q_n outside [0,1]");
    if (qn > 0.0) row0.push_back({n, qn});
    cumulative += qn;
    if (cumulative > 1.0 - tail_tolerance) break;
  }
  if (std::abs(cumulative - 1.0) > 1e-12) {
    std::ostringstream out;
    out.precision(17);
    out << "sum of q_n is " << cumulative << ", not 1";
    throw Error(out.str());
  }
  require(!row0.empty(), "q_n has no mass");
  row0.back().prob += 1.0 - cumulative;
  const double q = 1.0 - p;
  auto rows = [row0, p, q](std::size_t n) -> SparseRow {
    if (n == 0) return row0;
    return {{0, p}, {n + 1, q}};
  };
  return Kernel("unbounded_rw", rows, 1, 1);
}

Kernel make_identity() {
  return Kernel("identity", [](std::size_t i) -> SparseRow { return {{i, 1.0}}; }, 0, 0,
                IncrementLaw{{0, 1.0}});
}

Kernel make_mm1(double beta, double mu, double h) {
  require(beta > 0.0 && mu > 0.0, "M/M/1 rates must be positive");
  require(h > 0.0 && h < 1.0 / (beta + mu), "uniformization step too large");
  Kernel k = make_birth_death(mu * h, 1.0 - h * (beta + mu), beta * h,
                              SparseRow{{0, 1.0 - beta * h}, {1, beta * h}});
  return Kernel("mm1", [k](std::size_t i) { return k.row(i); }, 1, 1, k.limit_law());
}

Kernel make_poisson_mh() {
  auto rows = [](std::size_t n) -> SparseRow {
    if (n == 0) return {{0, 0.5}, {1, 0.5}};
    const double d = static_cast<double>(n);
    return {{n - 1, 0.5}, {n, d / (2.0 * (d + 1.0))}, {n + 1, 1.0 / (2.0 * (d + 1.0))}};
  };
  for (std::size_t n = 0; n <= 4096; ++n) check_row(rows(n), n);
  return Kernel("poisson_mh", rows, 1, 1, IncrementLaw{{-1, 0.5}, {0, 0.5}});
}

LindleyModel make_lindley(const IncrementLaw& increments, double gamma) {
  validate_increment_law(increments);
  require(gamma > 1.0, "Lindley distance needs gamma > 1");
  int reach_up = 0;
  for (const auto& [v, prob] : increments)
    if (prob > 0.0) reach_up = std::max(reach_up, v);
  int reach_down = 0;
  for (const auto& [v, prob] : increments)
    if (prob > 0.0) reach_down = std::max(reach_down, -v);

  auto rows = [increments](std::size_t i) -> SparseRow {
    SparseRow row;
    for (const auto& [v, prob] : increments) {
      if (prob == 0.0) continue;
      const long j = std::max(0L, static_cast<long>(i) + v);
      row.push_back({static_cast<std::size_t>(j), prob});
    }
    return normalize_row(std::move(row));
  };
  const std::size_t radius = static_cast<std::size_t>(std::max(reach_up, reach_down));
  Kernel kernel("lindley", rows, radius, static_cast<std::size_t>(reach_down), increments);

  std::vector<int> values;
  std::vector<double> weights;
  for (const auto& [v, prob] : increments) {
    values.push_back(v);
    weights.push_back(prob);
  }
  const double log_gamma = std::log(gamma);
  IFSModel ifs;
  ifs.label = "lindley";
  ifs.step = [](double v, double x) { return std::max(0.0, x + v); };
  ifs.lipschitz_coeff = [log_gamma](double v) { return std::exp(v * log_gamma); };
  ifs.sample_noise = [values, weights](std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    return static_cast<double>(values[pick(rng)]);
  };
  ifs.distance = [gamma](double x, double y) {
    return std::abs(std::pow(gamma, x) - std::pow(gamma, y));
  };
  ifs.x0 = 0.0;
  ifs.closed.lipschitz_moment = [increments, log_gamma](double a) {
    double m = 0.0;
    for (const auto& [v, prob] : increments) m += prob * std::exp(a * v * log_gamma);
    return m;
  };
  // Far from 0 the n-step map is a translation by the summed increments, so
  // L(v_n:v_1) = gamma^(v_1+...+v_n) and the moment factorizes.
  ifs.closed.kappa_hat = [m = ifs.closed.lipschitz_moment](double a) {
    return std::pow(m(a), 1.0 / a);
  };
  return LindleyModel{std::move(kernel), std::move(ifs), increments, gamma};
}

LindleyModel make_geometric_mh(double p) {
  require(p > 0.0 && p < 1.0, "geometric MH needs p in (0,1)");
  IncrementLaw law{{-1, 0.5}, {0, (1.0 - p) / 2.0}, {1, p / 2.0}};
  LindleyModel model = make_lindley(law, 1.0 / std::sqrt(p));
  model.ifs.label = "geometric_mh";
  const double gamma = model.gamma;
  // pi(n) = (1-p) p^n, p(n) = gamma^n
  model.ifs.closed.stationary_norm = [p, gamma](double b) {
    const double ratio = p * std::pow(gamma, b);
    require(ratio < 1.0, "stationary moment diverges");
    return std::pow((1.0 - p) / (1.0 - ratio), 1.0 / b);
  };
  model.kernel = Kernel("geometric_mh", [k = model.kernel](std::size_t i) { return k.row(i); },
                        1, 1, law);
  return model;
}

IFSModel make_gaussian_ar1(double theta, double noise_sd) {
  require(std::abs(theta) < 1.0, "AR(1) needs |theta| < 1");
  require(noise_sd >= 0.0, "noise standard deviation must be nonnegative");
  IFSModel ifs;
  ifs.label = "gaussian_ar1";
  ifs.step = [theta](double v, double x) { return theta * x + v; };
  ifs.lipschitz_coeff = [theta](double) { return std::abs(theta); };
  ifs.sample_noise = [noise_sd](std::mt19937_64& rng) {
    if (noise_sd == 0.0) return 0.0;
    std::normal_distribution<double> draw(0.0, noise_sd);
    return draw(rng);
  };
  ifs.distance = [](double x, double y) { return std::abs(x - y); };
  ifs.x0 = 0.0;
  ifs.closed.lipschitz_moment = [theta](double a) { return std::pow(std::abs(theta), a); };
  ifs.closed.kappa_hat = [theta](double) { return std::abs(theta); };
  const double stationary_sd = noise_sd / std::sqrt(1.0 - theta * theta);
  ifs.closed.stationary_norm = [stationary_sd](double b) {
    if (stationary_sd == 0.0) return 1.0;
    // E[(1 + |X|)^b] for X ~ N(0, s^2): twice the half-line integral.
    auto integrand = [stationary_sd, b](double x) {
      return 2.0 * std::pow(1.0 + x, b) * normal_pdf(x / stationary_sd) / stationary_sd;
    };
    const double m = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
    return std::pow(m, 1.0 / b);
  };
  ifs.closed.linear_difference = true;
  return ifs;
}

GridModel make_contracting_normals(double theta, double half_width, std::size_t points) {
  require(std::abs(theta) < 1.0, "contracting normals need |theta| < 1");
  require(points >= 32, "contracting normals grid needs at least 32 points");
  require(half_width > 0.0, "grid half-width must be positive");
  Grid1D grid;
  const double h = 2.0 * half_width / static_cast<double>(points - 1);
  for (std::size_t j = 0; j < points; ++j) {
    grid.points.push_back(-half_width + h * static_cast<double>(j));
    grid.weights.push_back((j == 0 || j + 1 == points) ? h / 2.0 : h);
  }
  const double sd = std::sqrt(1.0 - theta * theta);
  std::vector<double> dense(points * points, 0.0);
  for (std::size_t i = 0; i < points; ++i) {
    const double mean = theta * grid.points[i];
    double total = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
      const double v = grid.weights[j] * normal_pdf((grid.points[j] - mean) / sd) / sd;
      dense[i * points + j] = v;
      total += v;
    }
    for (std::size_t j = 0; j < points; ++j) dense[i * points + j] /= total;
  }
  IFSModel ifs = make_gaussian_ar1(theta, sd);
  ifs.label = "contracting_normals";
  return GridModel{Kernel::grid("contracting_normals", std::move(grid), std::move(dense)),
                   std::move(ifs), theta};
}

IFSModel make_multiplicative_uniform() {
  IFSModel ifs;
  ifs.label = "multiplicative_uniform";
  ifs.step = [](double v, double x) { return v * x; };
  ifs.lipschitz_coeff = [](double v) { return std::abs(v); };
  ifs.sample_noise = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> draw(0.0, 1.0);
    return draw(rng);
  };
  ifs.distance = [](double x, double y) { return std::abs(x - y); };
  ifs.x0 = 0.0;
  ifs.closed.lipschitz_moment = [](double a) { return 1.0 / (a + 1.0); };
  ifs.closed.kappa_hat = [](double a) { return std::pow(1.0 / (a + 1.0), 1.0 / a); };
  ifs.closed.stationary_norm = [](double) { return 1.0; };  // pi = delta_0
  ifs.closed.linear_difference = true;
  return ifs;
}

Kernel kernel_power(const Kernel& kernel, std::size_t N) {
  require(kernel.is_discrete(), "kernel_power needs a countable kernel");
  require(N >= 1, "kernel_power needs N >= 1");
  if (N == 1) return kernel;
  auto rows = [kernel, N](std::size_t i) -> SparseRow {
    std::map<std::size_t, double> mass{{i, 1.0}};
    for (std::size_t step = 0; step < N; ++step) {
      std::map<std::size_t, double> next;
      for (const auto& [state, w] : mass)
        for (const auto& t : kernel.row(state)) next[t.to] += w * t.prob;
      mass.swap(next);
    }
    SparseRow row;
    for (const auto& [state, w] : mass) row.push_back({state, w});
    // Renormalize the accumulated rounding so the row passes the 1e-12 check.
    const double total = row_mass(row);
    for (auto& t : row) t.prob /= total;
    return row;
  };
  std::optional<std::size_t> radius;
  std::size_t boundary = kernel.boundary_rows();
  if (kernel.support_radius()) {
    radius = *kernel.support_radius() * N;
    boundary += (N - 1) * *kernel.support_radius();
  }
  std::optional<IncrementLaw> law;
  if (kernel.limit_law()) {
    IncrementLaw acc{{0, 1.0}};
    for (std::size_t step = 0; step < N; ++step) {
      IncrementLaw next;
      for (const auto& [k1, w1] : acc)
        for (const auto& [k2, w2] : *kernel.limit_law()) next[k1 + k2] += w1 * w2;
      acc.swap(next);
    }
    law = acc;
  }
  std::ostringstream label;
  label << kernel.label() << "^" << N;
  return Kernel(label.str(), rows, radius, boundary, law);
}

}  // namespace vgeo
