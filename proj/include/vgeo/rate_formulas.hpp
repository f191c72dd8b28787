#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace vgeo {

enum class BirthDeathCase { A0Branch, CaseA, CaseB_Lambda, CaseB_Essential, SpecialAEquals1MinusQ };

std::string to_string(BirthDeathCase c);

/// Birth-death chain with P(n,n-1) = p, P(n,n) = r, P(n,n+1) = q for n >= 1
/// and boundary P(0,0) = a, P(0,1) = 1 - a; rate on B_V with V = gamma_hat^n.
struct BirthDeathRate {
  double p, q, r, a;
  double gamma_hat;
  double a0;
  std::optional<double> a1;
  BirthDeathCase case_label;
  std::optional<double> lambda_a;
  std::optional<double> z_a;
  double rho;
  double essential;  // r + 2 sqrt(pq)
};

BirthDeathRate birth_death_rate(double p, double q, double r, double a);

/// r = 0, q = 1 - p.
double birth_death_rate_r_zero(double p, double a);

struct MM1Rate {
  double rate;
  double gamma_hat;
};

MM1Rate mm1_rate(double beta, double mu, double h);

/// max(q gamma, p) for the walk that falls to 0 with probability p.
double unbounded_rw_rate_bound(double p, double gamma);

/// Closed-form rate with the constants needed to audit it.
struct RateCertificate {
  std::string model;
  nlohmann::json params;
  double rho = 0.0;
  std::map<std::string, double> constants;
  std::string paper_case;
  std::string model_hash;
};

/// Stable hash of (model, params); audits refuse data from a different model.
std::string model_hash(const std::string& model, const nlohmann::json& params);

RateCertificate certificate_for(const BirthDeathRate& rate);

}  // namespace vgeo
