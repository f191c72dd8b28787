#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vgeo/kernel_catalog.hpp"
#include "vgeo/weighted_spaces.hpp"

namespace vgeo {

/// (P^k V)(i) / V(i) for k = 1..N on the rows where the value is exact.
struct DriftRatios {
  WeightFn weight;
  std::vector<std::vector<double>> ratios;  // ratios[k-1][i]
  std::vector<std::size_t> extent;          // extent[k-1] = last exact row after k steps

  const std::vector<double>& at(std::size_t k) const { return ratios.at(k - 1); }
};

/// Requires M large enough that rows 0..M - N*radius only read V on 0..M.
DriftRatios drift_ratios(const Kernel& P, const WeightFn& V, std::size_t N, std::size_t M);

/// P^N V on 0..M - N*support_radius.
WeightedVector iterated_weight(const Kernel& P, const WeightFn& V, std::size_t N, std::size_t M);

struct DriftReport {
  std::size_t N_star = 1;
  std::map<std::size_t, double> ell;
  double L = 0.0;
  double delta_V_estimate = 0.0;
  bool wd_feasible = false;
  double d_constant = 0.0;
  std::size_t tail_start = 0;
  std::size_t M = 0;
};

/// tail_start = 0 means M / 2.
DriftReport ell_and_L(const Kernel& P, const WeightFn& V, std::size_t N_max, std::size_t M,
                      std::size_t tail_start = 0);

double phi(const IncrementLaw& increments, double gamma);

struct PhiMinimum {
  double gamma;
  double phi;
  bool feasible;
};

PhiMinimum minimize_phi(const IncrementLaw& increments, double gamma_max);

struct FeasibilityTest {
  int ell;
  int sign;
  std::vector<double> derivatives;  // phi^(j)(1), j = 1..ell
};

FeasibilityTest wd_feasibility_test(const IncrementLaw& increments);

struct MinorizationCertificate {
  std::vector<std::size_t> S;
  std::map<std::size_t, double> nu;
  double rho = 0.0;
  double M_drift = 0.0;
  double tau = 0.0;
  double bound = 0.0;
  double nu_mass = 0.0;
  double nu_V = 0.0;
};

double theorem21_bound(double rho, double M_drift, double nu_mass, double nu_V);
double theorem21_bound(const MinorizationCertificate& cert, double nu_mass, double nu_V);

/// rho_override replaces the fitted drift rate outside S.
MinorizationCertificate extract_minorization(const Kernel& P, const std::set<std::size_t>& S,
                                             const WeightFn& V, std::size_t M,
                                             std::optional<double> rho_override = std::nullopt);

}  // namespace vgeo
