#include "vgeo/rate_formulas.hpp"

#include <cmath>

#include "vgeo/error.hpp"
#include "vgeo/report_json.hpp"

namespace vgeo {

std::string to_string(BirthDeathCase c) {
  switch (c) {
    case BirthDeathCase::A0Branch:
      return "A0Branch";
    case BirthDeathCase::CaseA:
      return "CaseA";
    case BirthDeathCase::CaseB_Lambda:
      return "CaseB_Lambda";
    case BirthDeathCase::CaseB_Essential:
      return "CaseB_Essential";
    case BirthDeathCase::SpecialAEquals1MinusQ:
      return "SpecialAEquals1MinusQ";
  }
  return "unknown";
}

BirthDeathRate birth_death_rate(double p, double q, double r, double a) {
  require(q > 0.0, "birth-death rate needs q > 0");
  require(p > q, "birth-death rate needs p > q (gamma_hat = sqrt(p/q) > 1)");
  require(r >= 0.0, "birth-death rate needs r >= 0");
  require(std::abs(p + q + r - 1.0) <= 1e-12, "p + q + r must equal 1");
  require(a > 0.0 && a < 1.0, "boundary probability a must lie in (0,1)");

  BirthDeathRate out{};
  out.p = p;
  out.q = q;
  out.r = r;
  out.a = a;
  const double s = std::sqrt(p * q);
  out.gamma_hat = std::sqrt(p / q);
  out.a0 = 1.0 - q - s;
  out.essential = r + 2.0 * s;
  out.rho = out.essential;

  if (std::abs(a - (1.0 - q)) <= 1e-14) {
    out.case_label = BirthDeathCase::SpecialAEquals1MinusQ;
    return out;
  }
  if (a >= out.a0) {
    out.case_label = BirthDeathCase::A0Branch;
    return out;
  }
  const double edge = 1.0 - q + s;
  if (2.0 * p <= edge * edge) {
    out.case_label = BirthDeathCase::CaseA;
    return out;
  }
  out.a1 = p - s - std::sqrt(r * (r + 2.0 * s));
  if (a >= *out.a1) {
    out.case_label = BirthDeathCase::CaseB_Essential;
    return out;
  }
  out.case_label = BirthDeathCase::CaseB_Lambda;
  out.lambda_a = a + p * (1.0 - a) / (a - 1.0 + q);
  out.z_a = p / (a + q - 1.0);
  out.rho = std::abs(*out.lambda_a);
  require(out.rho > out.essential && out.rho < 1.0,
          "lambda(a) outside (r + 2 sqrt(pq), 1) on the eigenvalue branch");
  require(std::abs(*out.z_a) <= out.gamma_hat * (1.0 + 1e-12),
          "|z(a)| > gamma_hat on the eigenvalue branch");
  return out;
}

double birth_death_rate_r_zero(double p, double a) {
  require(p > 0.5 && p < 1.0, "r = 0 formula needs p in (1/2, 1)");
  require(a > 0.0 && a < 1.0, "boundary probability a must lie in (0,1)");
  require(a != p, "a = p makes the r = 0 formula singular");
  const double q = 1.0 - p;
  const double a0 = p - std::sqrt(p * q);
  if (a <= a0) return (p * q + (a - p) * (a - p)) / std::abs(a - p);
  return 2.0 * std::sqrt(p * q);
}

MM1Rate mm1_rate(double beta, double mu, double h) {
  require(beta > 0.0 && mu > 0.0, "M/M/1 rates must be positive");
  require(beta < mu, "M/M/1 needs beta < mu");
  require(h > 0.0, "uniformization step must be positive");
  require(h < 1.0 / (beta + mu), "uniformization step too large");
  const double d = std::sqrt(mu) - std::sqrt(beta);
  return {1.0 - h * d * d, std::sqrt(mu / beta)};
}

double unbounded_rw_rate_bound(double p, double gamma) {
  require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  const double q = 1.0 - p;
  require(gamma > 1.0 && gamma < 1.0 / q, "gamma must lie in (1, 1/q)");
  return std::max(q * gamma, p);
}

std::string model_hash(const std::string& model, const nlohmann::json& params) {
  return fnv1a_hex(model + "|" + dump_json(params, -1));
}

RateCertificate certificate_for(const BirthDeathRate& rate) {
  RateCertificate c;
  c.model = "birth_death";
  c.params = {{"p", rate.p}, {"q", rate.q}, {"r", rate.r}, {"a", rate.a}};
  c.rho = rate.rho;
  c.constants["gamma_hat"] = rate.gamma_hat;
  c.constants["a0"] = rate.a0;
  c.constants["essential"] = rate.essential;
  if (rate.a1) c.constants["a1"] = *rate.a1;
  if (rate.lambda_a) c.constants["lambda_a"] = *rate.lambda_a;
  if (rate.z_a) c.constants["z_a"] = *rate.z_a;
  switch (rate.case_label) {
    case BirthDeathCase::CaseB_Lambda:
      c.paper_case = "birth_death.lambda_branch";
      break;
    case BirthDeathCase::CaseB_Essential:
      c.paper_case = "birth_death.essential_below_a0";
      break;
    case BirthDeathCase::CaseA:
      c.paper_case = "birth_death.essential_case_a";
      break;
    case BirthDeathCase::A0Branch:
      c.paper_case = "birth_death.essential_above_a0";
      break;
    case BirthDeathCase::SpecialAEquals1MinusQ:
      c.paper_case = "birth_death.a_equals_1_minus_q";
      break;
  }
  c.model_hash = model_hash(c.model, c.params);
  return c;
}

}  // namespace vgeo
