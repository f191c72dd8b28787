#include "vgeo/spectral_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include <Eigen/Eigenvalues>

#include "vgeo/error.hpp"

namespace vgeo {

namespace {

bool by_modulus(const std::complex<double>& a, const std::complex<double>& b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

// Parlett-Reinsch balancing with powers of 2: returns D such that D^{-1} A D
// has comparable row and column norms.
Eigen::VectorXd balance(Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(A(j, i));
        r += std::abs(A(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        d(i) *= f;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
  return d;
}

}  // namespace

TruncatedOperator build_truncation(const Kernel& P, const WeightFn& V, std::size_t M,
                                   TruncationPolicy policy) {
  require(M >= 8, "truncation needs M >= 8");
  const CsrMatrix A = truncate(P, M, policy);
  std::vector<double> log_v(M + 1);
  for (std::size_t i = 0; i <= M; ++i) log_v[i] = V.log_eval(P.state_value(i));
  TruncatedOperator T{Eigen::MatrixXd::Zero(M + 1, M + 1), V, policy, M};
  for (std::size_t i = 0; i <= M; ++i)
    for (std::size_t k = A.offsets[i]; k < A.offsets[i + 1]; ++k) {
      const std::size_t j = A.cols[k];
      T.matrix(i, j) = A.vals[k] * std::exp(log_v[j] - log_v[i]);
    }
  return T;
}

Eigensystem full_eigensystem(const Eigen::MatrixXd& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "eigensystem needs a square matrix");
  require(A.rows() <= 3001, "dense eigensolver limited to 3001 states");
  Eigen::MatrixXd B = A;
  const Eigen::VectorXd d = balance(B);
  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  solver.setMaxIterations(30 * static_cast<Eigen::Index>(A.rows()));
  solver.compute(B, true);
  if (solver.info() != Eigen::Success) throw Error("QR iteration did not converge");

  const Eigen::Index n = A.rows();
  Eigen::MatrixXcd vec = solver.eigenvectors();
  for (Eigen::Index k = 0; k < n; ++k) {
    vec.col(k) = d.cast<std::complex<double>>().cwiseProduct(vec.col(k));
    vec.col(k) /= vec.col(k).norm();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
  const Eigen::VectorXcd vals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return by_modulus(vals(a), vals(b)); });

  Eigensystem out;
  out.vectors.resize(n, n);
  const Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values.push_back(vals(src));
    out.vectors.col(k) = vec.col(src);
    const double res = (Ac * vec.col(src) - vals(src) * vec.col(src)).norm();
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

std::vector<std::complex<double>> full_spectrum(const Eigen::MatrixXd& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "spectrum needs a square matrix");
  require(A.rows() <= 3001, "dense eigensolver limited to 3001 states");
  Eigen::MatrixXd B = A;
  balance(B);
  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  solver.setMaxIterations(30 * static_cast<Eigen::Index>(A.rows()));
  solver.compute(B, false);
  if (solver.info() != Eigen::Success) throw Error("QR iteration did not converge");
  std::vector<std::complex<double>> out(solver.eigenvalues().begin(),
                                        solver.eigenvalues().end());
  std::sort(out.begin(), out.end(), by_modulus);
  return out;
}

std::vector<std::complex<double>> full_spectrum(const TruncatedOperator& T) {
  return full_spectrum(T.matrix);
}

SpectrumReport rate_from_spectrum(std::vector<std::complex<double>> eigs, double r0, double tol) {
  require(r0 > 0.0 && r0 < 1.0, "r0 must lie in (0,1)");
  std::sort(eigs.begin(), eigs.end(), by_modulus);
  SpectrumReport rep;
  rep.r0 = r0;
  rep.tol = tol;
  rep.eigenvalues = eigs;
  std::size_t at_one = 0;
  for (const auto& l : eigs) {
    const double m = std::abs(l);
    if (std::abs(m - 1.0) < tol) {
      rep.unit_eigs.push_back(l);
      if (std::abs(l - 1.0) < tol) ++at_one;
    }
    if (m >= r0 && m < 1.0 - tol) rep.peripheral.push_back(l);
  }
  rep.rho_estimate = r0;
  for (const auto& l : rep.peripheral) rep.rho_estimate = std::max(rep.rho_estimate, std::abs(l));
  rep.missing_unit_eigenvalue = at_one == 0;
  rep.simple_one = at_one == 1 && rep.unit_eigs.size() == 1;
  rep.unit_circle_violation = !rep.simple_one;
  return rep;
}

EigenpairGrowth eigen_growth_check(const TruncatedOperator& T, std::complex<double> lambda,
                                   const Eigen::VectorXcd& g, double delta, std::size_t i_lo,
                                   std::size_t i_hi) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  const double mod = std::abs(lambda);
  require(mod >= delta, "|lambda| < delta: growth bound does not apply");
  require(mod <= 1.0 + 1e-9, "|lambda| > 1");
  require(static_cast<std::size_t>(g.size()) == T.M + 1, "eigenvector length mismatch");
  require(4 * i_hi <= 3 * T.M, "window must stay below 0.75 M");
  require(i_lo < i_hi, "empty growth window");

  EigenpairGrowth out;
  out.lambda = lambda;
  out.beta = std::min(1.0, std::log(std::min(mod, 1.0)) / std::log(delta));
  out.i_lo = i_lo;
  out.i_hi = i_hi;

  std::vector<double> log_v(T.M + 1);
  for (std::size_t i = 0; i <= T.M; ++i) log_v[i] = T.weight.log_eval(static_cast<double>(i));
  const double gmax = g.cwiseAbs().maxCoeff();
  // Entries within a thousand residuals of zero carry no digits.
  const double residual = (T.matrix.cast<std::complex<double>>() * g - lambda * g).cwiseAbs().maxCoeff();
  const double floor = std::max(1e-12 * gmax, 1e3 * residual);
  // log(|f(i)| / V(i)^beta) with f = V g
  auto log_ratio = [&](std::size_t i) {
    return std::log(std::abs(g(static_cast<Eigen::Index>(i)))) + (1.0 - out.beta) * log_v[i];
  };

  double log_c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= i_lo; ++i)
    if (std::abs(g(static_cast<Eigen::Index>(i))) > 0.0) log_c = std::max(log_c, log_ratio(i));
  require(std::isfinite(log_c), "eigenvector vanishes on the calibration rows");
  out.c = std::exp(log_c);

  out.effective_hi = i_lo;
  for (std::size_t i = i_lo + 1; i <= i_hi; ++i) {
    if (std::abs(g(static_cast<Eigen::Index>(i))) <= floor) break;
    out.effective_hi = i;
  }
  out.verdict = true;
  for (std::size_t i = i_lo + 1; i <= out.effective_hi; ++i) {
    const double lr = log_ratio(i);
    out.ratio_profile.push_back(std::exp(lr));
    if (lr > log_c + std::log(1.05)) out.verdict = false;
  }
  return out;
}

std::vector<TruncationRow> truncation_convergence(const Kernel& P, const WeightFn& V,
                                                  TruncationPolicy policy,
                                                  const std::vector<std::size_t>& M_list,
                                                  double r0, double tol, unsigned threads) {
  require(std::is_sorted(M_list.begin(), M_list.end()), "M_list must be increasing");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<TruncationRow> rows(M_list.size());
  auto work = [&](std::size_t k) {
    const auto eigs = full_spectrum(build_truncation(P, V, M_list[k], policy));
    const SpectrumReport rep = rate_from_spectrum(eigs, r0, tol);
    TruncationRow row{M_list[k], rep.rho_estimate, std::numeric_limits<double>::infinity(), 0.0,
                      0.0};
    for (const auto& l : eigs) {
      row.unit_gap = std::min(row.unit_gap, std::abs(l - 1.0));
      if (std::abs(l) < 1.0 - tol) row.max_subunit_modulus = std::max(row.max_subunit_modulus, std::abs(l));
    }
    rows[k] = row;
  };
  for (std::size_t start = 0; start < M_list.size(); start += threads) {
    std::vector<std::future<void>> jobs;
    for (std::size_t k = start; k < std::min(M_list.size(), start + threads); ++k)
      jobs.push_back(std::async(std::launch::async, work, k));
    for (auto& j : jobs) j.get();
  }
  for (std::size_t k = 1; k < rows.size(); ++k)
    rows[k].step_change = std::abs(rows[k].rho_estimate - rows[k - 1].rho_estimate);
  return rows;
}

}  // namespace vgeo
