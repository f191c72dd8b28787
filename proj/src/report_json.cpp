#include "vgeo/report_json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace vgeo {

namespace {

void write(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += pretty ? ": " : ":";
        write(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += pretty ? ", " : ",";
        first = false;
        write(v, indent, depth + 1, out);
      }
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += std::isnan(v) ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\"");
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

nlohmann::json complex_list(const std::vector<std::complex<double>>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& z : v) arr.push_back({z.real(), z.imag()});
  return arr;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  write(j, indent, 0, out);
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const DriftReport& r) {
  nlohmann::json ell = nlohmann::json::object();
  for (const auto& [N, v] : r.ell) ell[std::to_string(N)] = v;
  return {{"N_star", r.N_star},     {"ell", ell},
          {"L", r.L},               {"delta_V_estimate", r.delta_V_estimate},
          {"wd_feasible", r.wd_feasible}, {"d_constant", r.d_constant},
          {"tail_start", r.tail_start},   {"M", r.M}};
}

nlohmann::json to_json(const MinorizationCertificate& c) {
  nlohmann::json nu = nlohmann::json::object();
  for (const auto& [j, v] : c.nu) nu[std::to_string(j)] = v;
  return {{"S", c.S},       {"nu", nu},         {"rho", c.rho},         {"M_drift", c.M_drift},
          {"tau", c.tau},   {"bound", c.bound}, {"nu_mass", c.nu_mass}, {"nu_V", c.nu_V}};
}

nlohmann::json to_json(const SpectrumReport& r) {
  return {{"eigenvalues", complex_list(r.eigenvalues)},
          {"r0", r.r0},
          {"tol", r.tol},
          {"peripheral", complex_list(r.peripheral)},
          {"unit_eigs", complex_list(r.unit_eigs)},
          {"rho_estimate", r.rho_estimate},
          {"simple_one", r.simple_one},
          {"missing_unit_eigenvalue", r.missing_unit_eigenvalue},
          {"unit_circle_violation", r.unit_circle_violation}};
}

nlohmann::json to_json(const EigenpairGrowth& g) {
  return {{"lambda", {g.lambda.real(), g.lambda.imag()}},
          {"beta", g.beta},
          {"c", g.c},
          {"ratio_profile", g.ratio_profile},
          {"i_lo", g.i_lo},
          {"i_hi", g.i_hi},
          {"effective_hi", g.effective_hi},
          {"verdict", g.verdict}};
}

nlohmann::json to_json(const TruncationRow& r) {
  return {{"M", r.M},
          {"rho_estimate", r.rho_estimate},
          {"unit_gap", r.unit_gap},
          {"max_subunit_modulus", r.max_subunit_modulus},
          {"step_change", r.step_change}};
}

nlohmann::json to_json(const BirthDeathRate& r) {
  nlohmann::json j = {{"p", r.p},
                      {"q", r.q},
                      {"r", r.r},
                      {"a", r.a},
                      {"gamma_hat", r.gamma_hat},
                      {"a0", r.a0},
                      {"case_label", to_string(r.case_label)},
                      {"rho", r.rho},
                      {"essential", r.essential}};
  j["a1"] = r.a1 ? nlohmann::json(*r.a1) : nlohmann::json(nullptr);
  j["lambda_a"] = r.lambda_a ? nlohmann::json(*r.lambda_a) : nlohmann::json(nullptr);
  j["z_a"] = r.z_a ? nlohmann::json(*r.z_a) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const RateCertificate& c) {
  nlohmann::json constants = nlohmann::json::object();
  for (const auto& [k, v] : c.constants) constants[k] = v;
  return {{"model", c.model},         {"params", c.params},         {"rho", c.rho},
          {"constants", constants},   {"paper_case", c.paper_case}, {"model_hash", c.model_hash}};
}

nlohmann::json to_json(const ContractionEstimate& c) {
  nlohmann::json j = {{"a", c.a},
                      {"kappa1", c.kappa1},
                      {"kappa_hat", c.kappa_hat},
                      {"method", c.method == ContractionMethod::ClosedForm
                                     ? "ClosedForm"
                                     : "MonteCarloUpperBound"}};
  j["mc_stderr"] = c.mc_stderr ? nlohmann::json(*c.mc_stderr) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const LindleyCertificate& c) {
  return {{"gamma", c.gamma},
          {"kappa1", c.kappa1},
          {"c1", c.c1},
          {"c_rho", c.c_rho},
          {"tail_term", c.tail_term},
          {"stationary_residual", c.stationary_residual},
          {"nonnegative_drift", c.nonnegative_drift},
          {"pi_head", std::vector<double>(c.pi.begin(),
                                          c.pi.begin() + std::min<std::ptrdiff_t>(
                                                             21, static_cast<std::ptrdiff_t>(c.pi.size())))}};
}

nlohmann::json to_json(const XiBound& x) {
  return {{"a", x.a}, {"delta", x.delta}, {"r", x.r}, {"xi1", x.xi1}, {"xi", x.xi}};
}

nlohmann::json to_json(const ARConstants& c) {
  nlohmann::json j = {{"theta", c.theta},       {"a", c.a},
                      {"noise_sd", c.noise_sd}, {"M_noise", c.M_noise},
                      {"eps0", c.eps0},         {"r", c.r},
                      {"rho_internal", c.rho_internal}, {"xi1", c.xi1},
                      {"xi", c.xi},             {"pi_norm1", c.pi_norm1},
                      {"pi_norm_a", c.pi_norm_a}, {"c1_bound", c.c1_bound},
                      {"d0", c.d0},             {"tv_prefactor", c.tv_prefactor}};
  j["packaged_c"] = c.packaged_c ? nlohmann::json(*c.packaged_c) : nlohmann::json(nullptr);
  j["xi_direct"] = c.xi_direct ? nlohmann::json(*c.xi_direct) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const CouplingReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points)
    pts.push_back({{"n", p.n},
                   {"lhs", p.lhs},
                   {"lhs_stderr", p.lhs_stderr},
                   {"rhs", p.rhs},
                   {"ratio", p.ratio}});
  return {{"a", r.a},         {"kappa1", r.kappa1},       {"xi", r.xi}, {"exact", r.exact},
          {"points", pts},    {"max_ratio", r.max_ratio}, {"pass", r.pass}};
}

nlohmann::json to_json(const DecayCurve& c) {
  return {{"n_values", c.n_values},
          {"e_n", c.e_n},
          {"window", {c.i_lo, c.i_hi}},
          {"pi_f", c.pi_f},
          {"fitted_rho", c.fitted_rho},
          {"fit_r2", c.fit_r2},
          {"fit_range", {c.fit_from, c.fit_to}},
          {"underflow_truncated", c.underflow_truncated}};
}

nlohmann::json to_json(const BoundAudit& a) {
  return {{"certificate", to_json(a.certificate)},
          {"max_ratio", a.max_ratio},
          {"pass", a.pass},
          {"points", a.points},
          {"tolerance", a.tolerance},
          {"worst_case",
           {{"n", a.worst_case.n},
            {"lhs", a.worst_case.lhs},
            {"rhs", a.worst_case.rhs},
            {"label", a.worst_case.label}}}};
}

std::string decay_csv(const DecayCurve& c) {
  std::ostringstream out;
  out << "n,e_n\n";
  char buf[64];
  for (std::size_t k = 0; k < c.n_values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", c.n_values[k], c.e_n[k]);
    out << buf;
  }
  return out.str();
}

}  // namespace vgeo
