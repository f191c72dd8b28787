#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vgeo {

/// Finite-support law of a random-walk increment: k -> P(step = k).
using IncrementLaw = std::map<int, double>;

/// Checks nonnegativity and total mass 1 within 1e-12.
void validate_increment_law(const IncrementLaw& law);

struct Transition {
  std::size_t to;
  double prob;
};

/// Transitions out of one state, sorted by destination, no duplicates.
using SparseRow = std::vector<Transition>;

std::size_t max_column(const SparseRow& row);
double row_mass(const SparseRow& row);

enum class StateSpace { CountableDiscrete, Grid1D };

/// How mass escaping a finite window 0..M is handled.
enum class TruncationPolicy { Substochastic, ReflectLast };

struct Grid1D {
  std::vector<double> points;
  std::vector<double> weights;  // trapezoid weights

  std::size_t size() const { return points.size(); }
  /// Index of the grid point closest to x.
  std::size_t nearest(double x) const;
};

/// A Markov transition law with row access.
///
/// Countable kernels generate rows on demand (the state space is infinite);
/// grid kernels store a dense row-stochastic matrix over the quadrature grid.
class Kernel {
 public:
  using RowFn = std::function<SparseRow(std::size_t)>;

  Kernel(std::string label, RowFn rows, std::optional<std::size_t> support_radius,
         std::size_t boundary_rows, std::optional<IncrementLaw> limit_law = std::nullopt);

  static Kernel grid(std::string label, Grid1D grid, std::vector<double> dense_rows);

  SparseRow row(std::size_t i) const;

  const std::string& label() const { return label_; }
  StateSpace state_space() const { return space_; }
  bool is_discrete() const { return space_ == StateSpace::CountableDiscrete; }
  /// max |j - i| with P(i, j) > 0 for rows past the boundary block.
  std::optional<std::size_t> support_radius() const { return support_radius_; }
  std::size_t boundary_rows() const { return boundary_rows_; }
  /// Increment law the interior rows converge to, when the model has one.
  const std::optional<IncrementLaw>& limit_law() const { return limit_law_; }

  /// Real location of state i (the integer itself, or the grid point).
  double state_value(std::size_t i) const;
  /// Number of states for grid kernels; nullopt for countable ones.
  std::optional<std::size_t> finite_size() const;
  const Grid1D& grid_points() const;
  /// Row-major G x G matrix of a grid kernel.
  const std::vector<double>& dense() const;

 private:
  std::string label_;
  StateSpace space_ = StateSpace::CountableDiscrete;
  RowFn rows_;
  std::optional<std::size_t> support_radius_;
  std::size_t boundary_rows_ = 0;
  std::optional<IncrementLaw> limit_law_;
  std::shared_ptr<const Grid1D> grid_;
  std::shared_ptr<const std::vector<double>> dense_;
};

/// Row-compressed restriction of a kernel to rows and columns 0..M.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> cols;
  std::vector<double> vals;

  /// y = A x
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  /// y = x A (left action on measures)
  void left_multiply(const std::vector<double>& x, std::vector<double>& y) const;
  double row_sum(std::size_t i) const;
};

CsrMatrix truncate(const Kernel& kernel, std::size_t M, TruncationPolicy policy);

/// Applies P to functions while tracking which entries are exact restrictions
/// of the infinite-state result.
///
/// A function known on 0..E_{k-1} determines P f exactly on every row whose
/// support lies inside 0..E_{k-1}; the propagator stores those extents.
class ExactPropagator {
 public:
  /// Prepares `steps` applications with outputs needed on 0..out_hi.
  ExactPropagator(const Kernel& kernel, std::size_t out_hi, std::size_t steps);

  /// Highest index on which the input function must be supplied.
  std::size_t input_extent() const { return extents_.front(); }
  /// Exact extent after k applications.
  std::size_t extent(std::size_t k) const { return extents_.at(k); }
  std::size_t steps() const { return extents_.size() - 1; }

  /// f on 0..extent(k-1) -> P f on 0..extent(k).
  std::vector<double> apply(const std::vector<double>& f, std::size_t k) const;

 private:
  std::vector<std::size_t> extents_;
  CsrMatrix rows_;  // rows 0..extent(1) with untruncated columns
};

/// Random-walk style IFS X_n = F(v_n, X_{n-1}) on a subset of the real line.
struct IFSClosedForms {
  /// a -> E[L(v)^a]
  std::function<double(double)> lipschitz_moment;
  /// a -> limit of E[L(v_n:v_1)^a]^{1/(na)}
  std::function<double(double)> kappa_hat;
  /// b -> (integral of p(y)^b dpi(y))^{1/b} with p = 1 + d(., x0)
  std::function<double(double)> stationary_norm;
  /// F_v x - F_v y = L(v) (x - y) exactly, so coupled distances contract by L.
  bool linear_difference = false;
};

struct IFSModel {
  std::string label;
  std::function<double(double noise, double x)> step;
  std::function<double(double noise)> lipschitz_coeff;
  std::function<double(std::mt19937_64&)> sample_noise;
  std::function<double(double, double)> distance;
  double x0 = 0.0;
  IFSClosedForms closed;

  double p(double x) const { return 1.0 + distance(x, x0); }
};

struct LindleyModel {
  Kernel kernel;
  IFSModel ifs;
  IncrementLaw increments;
  double gamma;
};

struct GridModel {
  Kernel kernel;
  IFSModel ifs;
  double theta;
};

/// p_n, r_n, q_n as functions of n >= 1; rows are validated up to
/// `validation_horizon` eagerly and on every access.
using CoefficientFn = std::function<double(std::size_t)>;

Kernel make_birth_death(CoefficientFn p, CoefficientFn r, CoefficientFn q,
                        SparseRow boundary_row, std::size_t validation_horizon = 4096);
Kernel make_birth_death(double p, double r, double q, SparseRow boundary_row);

/// a(i) lists P(i, i + k) for k = -b..b; `boundary` supplies rows 0..boundary.size()-1.
Kernel make_bounded_increment_rw(int b, std::function<std::vector<double>(std::size_t)> a,
                                 std::vector<SparseRow> boundary,
                                 std::optional<IncrementLaw> limit_law = std::nullopt,
                                 std::size_t validation_horizon = 4096);
Kernel make_homogeneous_rw(const IncrementLaw& law, std::vector<SparseRow> boundary);

/// Row 0 jumps to n >= 1 with probability q_n; row n goes to 0 w.p. p, to n+1 otherwise.
/// Row 0 is cut where cumulative mass exceeds 1 - tail_tolerance.
Kernel make_unbounded_increment_rw(double p, CoefficientFn q_seq, double tail_tolerance = 1e-14,
                                   std::size_t max_terms = 10'000'000);

Kernel make_identity();
Kernel make_mm1(double beta, double mu, double h);
Kernel make_poisson_mh();

/// X_n = max(0, X_{n-1} + v_n); Lipschitz coefficients refer to d(i,j) = |gamma^i - gamma^j|.
LindleyModel make_lindley(const IncrementLaw& increments, double gamma);
/// Metropolis sampler of the geometric law (1-p) p^n, seen as a Lindley walk, gamma = p^{-1/2}.
LindleyModel make_geometric_mh(double p);

/// N(theta x, 1 - theta^2) transitions on a uniform grid of `points` nodes over [-L, L].
GridModel make_contracting_normals(double theta, double half_width = 8.0,
                                   std::size_t points = 401);

IFSModel make_gaussian_ar1(double theta, double noise_sd);
IFSModel make_multiplicative_uniform();

/// N-step kernel of a countable kernel (rows computed by sparse convolution).
Kernel kernel_power(const Kernel& kernel, std::size_t N);

}  // namespace vgeo
