#include "vgeo/cli.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "vgeo/convergence_verifier.hpp"
#include "vgeo/drift_analyzer.hpp"
#include "vgeo/error.hpp"
#include "vgeo/ifs_lab.hpp"
#include "vgeo/rate_formulas.hpp"
#include "vgeo/report_json.hpp"
#include "vgeo/spectral_oracle.hpp"

namespace vgeo {

namespace {

using nlohmann::json;

double number(const json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_number())
    throw Error(std::string("missing numeric parameter \"") + key + "\"");
  return params.at(key).get<double>();
}

double number_or(const json& params, const char* key, double fallback) {
  return params.contains(key) ? number(params, key) : fallback;
}

IncrementLaw increments_from(const json& params) {
  if (!params.contains("increments") || !params.at("increments").is_object())
    throw Error("missing \"increments\" object (step -> probability)");
  IncrementLaw law;
  for (const auto& [k, v] : params.at("increments").items()) {
    std::size_t used = 0;
    const int step = std::stoi(k, &used);
    if (used != k.size()) throw Error("increment key \"" + k + "\" is not an integer");
    law[step] = v.get<double>();
  }
  validate_increment_law(law);
  return law;
}

// Rows below the reach of the walk pool their overshoot at 0.
Kernel reflected_walk(const IncrementLaw& law) {
  int b = 0;
  for (const auto& [k, a] : law) b = std::max(b, std::abs(k));
  require(b >= 1, "walk needs a nonzero increment");
  std::vector<SparseRow> boundary;
  for (int i = 0; i < b; ++i) {
    std::map<std::size_t, double> row;
    for (const auto& [k, a] : law)
      if (a > 0.0) row[static_cast<std::size_t>(std::max(0, i + k))] += a;
    SparseRow r;
    for (const auto& [j, v] : row) r.push_back({j, v});
    boundary.push_back(r);
  }
  return make_homogeneous_rw(law, boundary);
}

struct Options {
  std::string config_path;
  std::size_t M = 0;
  std::size_t N_max = 20;
  std::size_t n_max = 0;
  std::uint64_t seed = 1;
  std::string gamma = "auto";
  double gamma_max = 10.0;
  unsigned threads = 0;
  bool json_out = false;
  bool csv_out = false;
  std::optional<double> r0;
  std::size_t iterate = 1;
  std::vector<std::size_t> small_set;
  bool negative_control = false;
  std::size_t samples = 100'000;
  double a = 1.0;
  std::optional<double> delta;
};

json options_json(const Options& o) {
  json j = {{"M", o.M},         {"N_max", o.N_max},         {"n_max", o.n_max},
            {"seed", o.seed},   {"gamma", o.gamma},         {"gamma_max", o.gamma_max},
            {"iterate", o.iterate}, {"small_set", o.small_set}, {"negative_control", o.negative_control},
            {"samples", o.samples}, {"a", o.a}};
  j["r0"] = o.r0 ? json(*o.r0) : json(nullptr);
  j["delta"] = o.delta ? json(*o.delta) : json(nullptr);
  return j;
}

struct GammaChoice {
  double gamma = 1.0;
  bool feasible = true;
  std::string message;
  json detail = json::object();
};

GammaChoice choose_gamma(const ModelSpec& spec, const Options& opt) {
  GammaChoice g;
  if (opt.gamma != "auto") {
    g.gamma = std::stod(opt.gamma);
    require(g.gamma > 1.0, "--gamma must exceed 1");
    g.detail["source"] = "user";
    return g;
  }
  const auto& law = spec.kernel->limit_law();
  if (spec.name == "unbounded_rw") {
    const double q = 1.0 - number(spec.params, "p");
    g.gamma = 0.5 * (1.0 + 1.0 / q);
    g.detail["source"] = "midpoint of (1, 1/q)";
    return g;
  }
  if (!law) {
    g.gamma = 2.0;
    g.detail["source"] = "default";
    return g;
  }
  try {
    const FeasibilityTest t = wd_feasibility_test(*law);
    g.detail["feasibility"] = {{"ell", t.ell}, {"sign", t.sign}, {"derivatives", t.derivatives}};
    if (t.sign > 0) {
      g.feasible = false;
      std::ostringstream msg;
      if (t.ell == 1)
        msg << "phi'(1) > 0: no geometric weight works";
      else if (t.ell == 2)
        msg << "phi''(1) > 0: no geometric weight works";
      else
        msg << "phi^(" << t.ell << ")(1) > 0: no geometric weight works";
      g.message = msg.str();
      return g;
    }
  } catch (const Error& e) {
    g.feasible = false;
    g.message = std::string(e.what()) + "; no geometric weight works";
    return g;
  }
  const PhiMinimum m = minimize_phi(*law, opt.gamma_max);
  g.gamma = m.gamma;
  g.detail["source"] = "argmin of phi";
  g.detail["phi_min"] = m.phi;
  return g;
}

struct Outcome {
  int code = kOk;
  std::string paper_case;
  json result = json::object();
  std::string csv;
};

Outcome cmd_drift(const ModelSpec& spec, const Options& opt, std::ostream& err) {
  Outcome o;
  if (!spec.kernel || !spec.kernel->is_discrete()) {
    err << "drift needs a countable-state model\n";
    o.code = kUnsupported;
    return o;
  }
  const GammaChoice g = choose_gamma(spec, opt);
  o.result["gamma_choice"] = g.detail;
  if (!g.feasible) {
    err << g.message << "\n";
    o.result["message"] = g.message;
    o.result["wd_feasible"] = false;
    o.paper_case = "drift.wd_infeasible";
    o.code = kInfeasible;
    return o;
  }
  const Kernel P = opt.iterate > 1 ? kernel_power(*spec.kernel, opt.iterate) : *spec.kernel;
  const WeightFn V = WeightFn::geometric(g.gamma);
  const std::size_t M = opt.M ? opt.M : 400;
  const DriftReport rep = ell_and_L(P, V, opt.N_max, M);
  o.result["gamma"] = g.gamma;
  o.result["iterate"] = opt.iterate;
  o.result["drift"] = to_json(rep);
  if (!opt.small_set.empty()) {
    try {
      const std::set<std::size_t> S(opt.small_set.begin(), opt.small_set.end());
      o.result["minorization"] = to_json(extract_minorization(P, S, V, M / 2));
    } catch (const Error& e) {
      o.result["minorization_error"] = e.what();
    }
  }
  o.paper_case = rep.wd_feasible ? "drift.wd_feasible" : "drift.wd_infeasible";
  if (!rep.wd_feasible) {
    err << "L = " << rep.L << " >= 1: weak drift fails for gamma = " << g.gamma << "\n";
    o.code = kInfeasible;
  }
  return o;
}

Outcome cmd_spectrum(const ModelSpec& spec, const Options& opt, std::ostream&) {
  Outcome o;
  const std::size_t M = opt.M ? opt.M : 300;
  if (!spec.kernel) {
    o.code = kUnsupported;
    return o;
  }
  TruncatedOperator T = [&] {
    if (!spec.kernel->is_discrete()) {
      const std::size_t G = *spec.kernel->finite_size();
      return build_truncation(*spec.kernel, WeightFn::polynomial(opt.a), std::min(M, G - 1));
    }
    const GammaChoice g = choose_gamma(spec, opt);
    const WeightFn V = g.feasible ? WeightFn::geometric(g.gamma) : WeightFn::unit();
    o.result["gamma"] = g.feasible ? g.gamma : 1.0;
    return build_truncation(*spec.kernel, V, M);
  }();
  double r0 = 0.05;
  if (opt.r0) {
    r0 = *opt.r0;
  } else if (spec.kernel->is_discrete() && T.weight.kind() == WeightFn::Kind::Geometric) {
    const DriftReport d = ell_and_L(*spec.kernel, T.weight, 1, std::max<std::size_t>(M, 64));
    r0 = std::min(0.99, d.delta_V_estimate + 0.01);
  }
  const SpectrumReport rep = rate_from_spectrum(full_spectrum(T), r0);
  o.result["M"] = T.M;
  o.result["weight"] = T.weight.describe();
  o.result["spectrum"] = to_json(rep);
  o.paper_case = rep.peripheral.empty() ? "spectrum.empty_annulus" : "spectrum.peripheral_eigenvalue";
  return o;
}

Outcome cmd_rate(const ModelSpec& spec, const Options& opt, std::ostream& err) {
  Outcome o;
  const json& p = spec.params;
  RateCertificate cert;
  if (spec.name == "birth_death") {
    require(p.contains("a"), "birth_death rate needs boundary parameter \"a\"");
    const BirthDeathRate r =
        birth_death_rate(number(p, "p"), number(p, "q"), number(p, "r"), number(p, "a"));
    cert = certificate_for(r);
    o.result["birth_death"] = to_json(r);
    if (number(p, "r") == 0.0 && number(p, "a") != number(p, "p")) {
      const double rz = birth_death_rate_r_zero(number(p, "p"), number(p, "a"));
      o.result["r_zero_formula"] = rz;
      o.result["r_zero_agreement"] = std::abs(rz - r.rho);
    }
  } else if (spec.name == "mm1") {
    const MM1Rate r = mm1_rate(number(p, "beta"), number(p, "mu"), number(p, "h"));
    cert.model = spec.name;
    cert.params = p;
    cert.rho = r.rate;
    cert.constants["gamma_hat"] = r.gamma_hat;
    cert.paper_case = "mm1.uniformized";
  } else if (spec.name == "unbounded_rw") {
    const GammaChoice g = choose_gamma(spec, opt);
    cert.model = spec.name;
    cert.params = p;
    cert.rho = unbounded_rw_rate_bound(number(p, "p"), g.gamma);
    cert.constants["gamma"] = g.gamma;
    cert.paper_case = "unbounded_rw.rate_upper_bound";
  } else if (spec.name == "lindley" || spec.name == "geometric_mh") {
    const LindleyCertificate lc =
        lindley_certificate(*spec.increments, spec.gamma, opt.M ? opt.M : 300);
    if (lc.nonnegative_drift) err << "warning: increment mean is >= 0\n";
    cert = lindley_rate_certificate(lc, spec.name, p);
    o.result["lindley"] = to_json(lc);
  } else if (spec.name == "contracting_normals") {
    const double theta = number(p, "theta");
    const ARConstants c = contracting_normals_constants(theta, 1.0);
    cert.model = spec.name;
    cert.params = p;
    cert.rho = std::abs(theta);
    cert.constants = {{"prefactor", c.tv_prefactor}, {"c1", c.pi_norm1}, {"d0", c.d0}};
    cert.paper_case = "contracting_normals.tv_bound";
    o.result["ar_constants"] = to_json(c);
  } else {
    err << "no closed-form rate for model \"" << spec.name << "\"; use `vgeo spectrum`\n";
    o.code = kUnsupported;
    return o;
  }
  if (cert.model_hash.empty()) cert.model_hash = model_hash(cert.model, cert.params);
  o.result["certificate"] = to_json(cert);
  o.paper_case = cert.paper_case;
  return o;
}

Outcome cmd_ifs(const ModelSpec& spec, const Options& opt, std::ostream& err) {
  Outcome o;
  if (!spec.ifs) {
    err << "model \"" << spec.name << "\" has no iterated-function-system form\n";
    o.code = kUnsupported;
    return o;
  }
  o.result["contraction"] =
      to_json(contraction_estimate(*spec.ifs, opt.a, opt.samples, opt.seed, opt.threads));
  if (spec.increments) {
    o.result["lindley"] = to_json(lindley_certificate(*spec.increments, spec.gamma, opt.M ? opt.M : 300));
    o.paper_case = "lindley.lipschitz_bound";
  }
  if (spec.name == "geometric_mh") {
    const GeometricMHConstants c = geometric_mh_constants(number(spec.params, "p"));
    o.result["geometric_mh"] = {{"gamma", c.gamma}, {"kappa1", c.kappa1}, {"c_rho", c.c_rho}};
  }
  if (spec.name == "contracting_normals") {
    o.result["ar_constants"] =
        to_json(contracting_normals_constants(number(spec.params, "theta"), opt.a));
    o.paper_case = "contracting_normals.constants";
  }
  if (opt.delta)
    o.result["xi_bound"] =
        to_json(xi_bound(*spec.ifs, opt.a, *opt.delta, opt.samples, opt.seed, opt.threads));
  if (o.paper_case.empty()) o.paper_case = "ifs.contraction";
  return o;
}

json check(const std::string& name, double value, double target, double tolerance, bool pass) {
  return {{"name", name}, {"value", value}, {"target", target}, {"tolerance", tolerance},
          {"pass", pass}};
}

Outcome cmd_verify(const ModelSpec& spec, const Options& opt, std::ostream& err) {
  Outcome o;
  const json& p = spec.params;
  const double scale = opt.negative_control ? 0.5 : 1.0;
  json checks = json::array();
  bool pass = true;
  auto add = [&](json c) {
    pass = pass && c.at("pass").get<bool>();
    checks.push_back(std::move(c));
  };
  auto indicator0 = [](double x) { return x == 0.0 ? 1.0 : 0.0; };

  if (spec.name == "birth_death") {
    const BirthDeathRate r =
        birth_death_rate(number(p, "p"), number(p, "q"), number(p, "r"), number(p, "a"));
    const double rho = r.rho * scale;
    const WeightFn V = WeightFn::geometric(r.gamma_hat);
    const std::size_t M = opt.M ? opt.M : 600;
    const SpectrumReport s =
        rate_from_spectrum(full_spectrum(build_truncation(*spec.kernel, V, M)), r.essential + 0.01);
    const bool lambda_branch = r.case_label == BirthDeathCase::CaseB_Lambda;
    if (lambda_branch)
      add(check("spectral_rate", s.rho_estimate, rho, 2e-3, std::abs(s.rho_estimate - rho) <= 2e-3));
    else
      add(check("spectral_rate_not_above", s.rho_estimate, std::max(rho, s.r0), 2e-3,
                s.rho_estimate <= std::max(rho, s.r0) + 2e-3 && rho >= r.essential - 2e-3));
    const std::size_t n_max = opt.n_max ? opt.n_max : 200;
    const DecayCurve c = decay_curve(*spec.kernel, V, indicator0, n_max, 3 * n_max);
    const double tol = lambda_branch ? 0.02 : 0.03;
    add(check("fitted_decay_rate", c.fitted_rho, rho, tol, std::abs(c.fitted_rho - rho) <= tol));
    o.result["decay"] = to_json(c);
    o.csv = decay_csv(c);
    o.paper_case = certificate_for(r).paper_case;
  } else if (spec.name == "mm1") {
    const MM1Rate r = mm1_rate(number(p, "beta"), number(p, "mu"), number(p, "h"));
    const double rho = r.rate * scale;
    const WeightFn V = WeightFn::geometric(r.gamma_hat);
    const std::size_t M = opt.M ? opt.M : 300;
    const SpectrumReport s =
        rate_from_spectrum(full_spectrum(build_truncation(*spec.kernel, V, M)), 0.5);
    double top = 0.0;
    for (const auto& l : s.eigenvalues)
      if (std::abs(l) < 1.0 - s.tol) top = std::max(top, std::abs(l));
    add(check("subunit_spectrum_inside_rate", top, rho, 1e-6, top <= rho + 1e-6));
    const std::size_t n_max = opt.n_max ? opt.n_max : 250;
    const DecayCurve c = decay_curve(*spec.kernel, V, indicator0, n_max, 3 * n_max);
    add(check("fitted_decay_rate", c.fitted_rho, rho, 0.01, std::abs(c.fitted_rho - rho) <= 0.01));
    o.result["decay"] = to_json(c);
    o.csv = decay_csv(c);
    o.paper_case = "mm1.uniformized";
  } else if (spec.name == "unbounded_rw") {
    const GammaChoice g = choose_gamma(spec, opt);
    const double bound = unbounded_rw_rate_bound(number(p, "p"), g.gamma) * scale;
    const std::size_t n_max = opt.n_max ? opt.n_max : 60;
    const DecayCurve c = decay_curve(*spec.kernel, WeightFn::geometric(g.gamma), indicator0, n_max,
                                     std::max<std::size_t>(opt.M, 4 * n_max));
    add(check("fitted_decay_below_bound", c.fitted_rho, bound, 0.0, c.fitted_rho <= bound));
    o.result["decay"] = to_json(c);
    o.csv = decay_csv(c);
    o.paper_case = "unbounded_rw.rate_upper_bound";
  } else if (spec.name == "lindley" || spec.name == "geometric_mh") {
    const std::size_t M = opt.M ? opt.M : 300;
    const LindleyCertificate lc = lindley_certificate(*spec.increments, spec.gamma, M);
    RateCertificate cert = lindley_rate_certificate(lc, spec.name, p);
    const auto pts = lindley_audit_points(*spec.kernel, spec.gamma, lc.pi, cert.model_hash,
                                          opt.n_max ? opt.n_max : 60, 30, 20);
    cert.rho *= scale;
    const BoundAudit audit = audit_bound(pts, cert, 1e-9);
    add(check("lipschitz_bound_audit", audit.max_ratio, 1.0, 1e-9, audit.pass));
    o.result["audit"] = to_json(audit);
    o.paper_case = cert.paper_case;
  } else if (spec.name == "contracting_normals") {
    const double theta = number(p, "theta");
    const ARConstants k = contracting_normals_constants(theta, 1.0);
    RateCertificate cert;
    cert.model = spec.name;
    cert.params = p;
    cert.rho = std::abs(theta) * scale;
    cert.constants = {{"prefactor", k.tv_prefactor}};
    cert.paper_case = "contracting_normals.tv_bound";
    cert.model_hash = model_hash(cert.model, cert.params);
    const std::vector<double> starts{0.0, 1.0, 3.0};
    const std::size_t n_max = opt.n_max ? opt.n_max : 40;
    const StationaryResult st = stationary(*spec.kernel, 0);
    const auto pts = tv_audit_points(*spec.kernel, st.pi, cert.model_hash, starts, 2, n_max);
    const BoundAudit audit = audit_bound(pts, cert, 1e-9);
    add(check("tv_bound_audit", audit.max_ratio, 1.0, 1e-9, audit.pass));
    // Same nodes plus midpoints: the TV curve must not move by 1e-3.
    const double half_width = number_or(p, "half_width", 8.0);
    const auto points = static_cast<std::size_t>(number_or(p, "points", 401));
    const GridModel fine = make_contracting_normals(theta, half_width, 2 * points - 1);
    const auto coarse_tv = tv_curves(*spec.kernel, st.pi, starts, n_max);
    const auto fine_tv = tv_curves(fine.kernel, stationary(fine.kernel, 0).pi, starts, n_max);
    double shift = 0.0;
    for (std::size_t s = 0; s < starts.size(); ++s)
      for (std::size_t n = 2; n <= n_max; ++n)
        shift = std::max(shift, std::abs(coarse_tv[s][n] - fine_tv[s][n]));
    add(check("grid_doubling_shift", shift, 0.0, 1e-3, shift < 1e-3));
    o.result["audit"] = to_json(audit);
    o.paper_case = cert.paper_case;
  } else {
    err << "no verification recipe for model \"" << spec.name << "\"\n";
    o.code = kUnsupported;
    return o;
  }
  o.result["checks"] = checks;
  o.result["pass"] = pass;
  o.result["negative_control"] = opt.negative_control;
  if (!pass) {
    err << "audit failed\n";
    o.code = kAuditFailure;
  }
  return o;
}

void print_human(const json& env, std::ostream& out) {
  out << "vgeo " << env.at("command").get<std::string>() << "  model="
      << env.at("model").get<std::string>() << "  case=" << env.at("paper_case").get<std::string>()
      << "\n";
  std::function<void(const json&, const std::string&)> walk = [&](const json& j,
                                                                   const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it.value().is_object()) {
        walk(it.value(), key);
      } else if (!it.value().is_array() || it.value().size() <= 8) {
        out << "  " << key << " = " << dump_json(it.value(), -1) << "\n";
      }
    }
  };
  walk(env.at("result"), "");
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "model description (JSON)")->required();
  sub->add_option("--M", o.M, "truncation size / window");
  sub->add_option("--N-max", o.N_max, "largest drift iterate");
  sub->add_option("--n-max", o.n_max, "largest power in decay curves and audits");
  sub->add_option("--seed", o.seed, "Monte Carlo seed");
  sub->add_option("--gamma", o.gamma, "geometric weight parameter or 'auto'");
  sub->add_option("--gamma-max", o.gamma_max, "search bound for gamma");
  sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  sub->add_flag("--json", o.json_out, "print the JSON report");
  sub->add_flag("--csv", o.csv_out, "print decay curves as CSV");
  sub->add_option("--r0", o.r0, "annulus radius for eigenvalue selection");
  sub->add_option("--iterate", o.iterate, "analyse P^N instead of P");
  sub->add_option("--small-set", o.small_set, "states of the small set S");
  sub->add_flag("--negative-control", o.negative_control, "halve the certified rate");
  sub->add_option("--samples", o.samples, "Monte Carlo sample count");
  sub->add_option("--a", o.a, "moment order");
  sub->add_option("--delta", o.delta, "target drift ratio for the xi bound");
}

}  // namespace

ModelSpec model_from_json(const json& config) {
  if (!config.is_object() || !config.contains("model") || !config.at("model").is_string())
    throw Error("config must be an object with a string \"model\"");
  ModelSpec s;
  s.name = config.at("model").get<std::string>();
  s.params = config.value("params", json::object());
  const json& p = s.params;
  if (s.name == "birth_death") {
    const double a = number(p, "a");
    s.kernel = make_birth_death(number(p, "p"), number(p, "r"), number(p, "q"),
                                SparseRow{{0, a}, {1, 1.0 - a}});
  } else if (s.name == "bounded_rw") {
    s.kernel = reflected_walk(increments_from(p));
  } else if (s.name == "unbounded_rw") {
    const double ratio = number_or(p, "q_ratio", 0.5);
    require(ratio > 0.0 && ratio < 1.0, "q_ratio must lie in (0,1)");
    s.kernel = make_unbounded_increment_rw(number(p, "p"), [ratio](std::size_t n) {
      return (1.0 - ratio) * std::pow(ratio, static_cast<double>(n - 1));
    });
  } else if (s.name == "lindley") {
    LindleyModel m = make_lindley(increments_from(p), number(p, "gamma"));
    s.kernel = m.kernel;
    s.ifs = m.ifs;
    s.increments = m.increments;
    s.gamma = m.gamma;
  } else if (s.name == "geometric_mh") {
    LindleyModel m = make_geometric_mh(number(p, "p"));
    s.kernel = m.kernel;
    s.ifs = m.ifs;
    s.increments = m.increments;
    s.gamma = m.gamma;
  } else if (s.name == "contracting_normals") {
    GridModel m = make_contracting_normals(number(p, "theta"), number_or(p, "half_width", 8.0),
                                           static_cast<std::size_t>(number_or(p, "points", 401)));
    s.kernel = m.kernel;
    s.ifs = m.ifs;
  } else if (s.name == "mm1") {
    s.kernel = make_mm1(number(p, "beta"), number(p, "mu"), number(p, "h"));
  } else if (s.name == "poisson_mh") {
    s.kernel = make_poisson_mh();
  } else if (s.name == "identity") {
    s.kernel = make_identity();
  } else {
    throw Error("unknown model \"" + s.name + "\"");
  }
  return s;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted-space convergence rates of Markov chains"};
  app.require_subcommand(1);
  Options opt;
  std::string command;
  for (const char* name : {"drift", "spectrum", "rate", "ifs", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, opt);
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  json config;
  ModelSpec spec;
  try {
    std::ifstream in(opt.config_path);
    if (!in) throw Error("cannot open config " + opt.config_path);
    config = json::parse(in);
    spec = model_from_json(config);
  } catch (const std::exception& e) {
    err << "bad config: " << e.what() << "\n";
    return kUsage;
  }

  Outcome o;
  try {
    if (command == "drift") o = cmd_drift(spec, opt, err);
    if (command == "spectrum") o = cmd_spectrum(spec, opt, err);
    if (command == "rate") o = cmd_rate(spec, opt, err);
    if (command == "ifs") o = cmd_ifs(spec, opt, err);
    if (command == "verify") o = cmd_verify(spec, opt, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  const json canonical = {{"config", config}, {"options", options_json(opt)}, {"command", command}};
  const json env = {{"command", command},
                    {"model", spec.name},
                    {"params", spec.params},
                    {"config_hash", fnv1a_hex(dump_json(canonical, -1))},
                    {"seed", opt.seed},
                    {"version", kVersion},
                    {"paper_case", o.paper_case},
                    {"exit_code", o.code},
                    {"result", o.result}};
  if (opt.csv_out && !o.csv.empty())
    out << o.csv;
  else if (opt.json_out)
    out << dump_json(env) << "\n";
  else
    print_human(env, out);
  return o.code;
}

}  // namespace vgeo
