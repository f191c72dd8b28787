#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vgeo/kernel_catalog.hpp"
#include "vgeo/weighted_spaces.hpp"

namespace vgeo {

/// Dense V-similarity transform T(i,j) = P(i,j) V(j) / V(i) on states 0..M.
struct TruncatedOperator {
  Eigen::MatrixXd matrix;
  WeightFn weight;
  TruncationPolicy policy;
  std::size_t M;
};

TruncatedOperator build_truncation(const Kernel& P, const WeightFn& V, std::size_t M,
                                   TruncationPolicy policy = TruncationPolicy::Substochastic);

/// Eigenvalues sorted by descending modulus (ties by real part, then imaginary part).
std::vector<std::complex<double>> full_spectrum(const TruncatedOperator& T);
std::vector<std::complex<double>> full_spectrum(const Eigen::MatrixXd& A);

struct Eigensystem {
  std::vector<std::complex<double>> values;
  Eigen::MatrixXcd vectors;  // column k belongs to values[k]
  double max_residual = 0.0;
};

Eigensystem full_eigensystem(const Eigen::MatrixXd& A);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  double r0 = 0.0;
  double tol = 1e-6;
  std::vector<std::complex<double>> peripheral;
  std::vector<std::complex<double>> unit_eigs;
  double rho_estimate = 0.0;
  bool simple_one = false;
  /// No eigenvalue within tol of 1: the truncation leaks too much mass.
  bool missing_unit_eigenvalue = false;
  /// Something other than a simple eigenvalue 1 sits on the unit circle.
  bool unit_circle_violation = false;
};

SpectrumReport rate_from_spectrum(std::vector<std::complex<double>> eigs, double r0,
                                  double tol = 1e-6);

struct EigenpairGrowth {
  std::complex<double> lambda;
  double beta = 0.0;
  double c = 0.0;
  std::vector<double> ratio_profile;  // |f(i)| / V(i)^beta on (i_lo, effective_hi]
  std::size_t i_lo = 0;
  std::size_t i_hi = 0;
  std::size_t effective_hi = 0;
  bool verdict = false;
};

/// g is an eigenvector of the transformed matrix; the eigenfunction of P is f = V g.
/// Rows where |g| has fallen to the solver's noise floor (1e-12 max|g| or a thousand
/// times the eigenpair residual) are dropped from the window.
EigenpairGrowth eigen_growth_check(const TruncatedOperator& T, std::complex<double> lambda,
                                   const Eigen::VectorXcd& g, double delta, std::size_t i_lo,
                                   std::size_t i_hi);

struct TruncationRow {
  std::size_t M;
  double rho_estimate;
  double unit_gap;             // min |lambda - 1|
  double max_subunit_modulus;  // largest |lambda| with |lambda| < 1 - tol
  double step_change;          // |rho(M_k) - rho(M_{k-1})|, 0 for the first row
};

std::vector<TruncationRow> truncation_convergence(const Kernel& P, const WeightFn& V,
                                                  TruncationPolicy policy,
                                                  const std::vector<std::size_t>& M_list,
                                                  double r0, double tol = 1e-6,
                                                  unsigned threads = 0);

}  // namespace vgeo
