#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vgeo/cli.hpp"
#include "vgeo/error.hpp"

using namespace vgeo;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string write_config(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("vgeo_test_" + name + ".json");
  std::ofstream(path) << text;
  return path.string();
}

Run run(std::vector<std::string> args) {
  std::vector<const char*> argv{"vgeo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json result(const Run& r) { return nlohmann::json::parse(r.out).at("result"); }

}  // namespace

TEST_CASE("drift picks gamma hat for a birth-death chain") {
  const auto cfg = write_config("bd", R"({"model":"birth_death","params":{"p":0.5,"q":0.2,"r":0.3,"a":0.6}})");
  const Run r = run({"drift", "--config", cfg, "--json"});
  CHECK(r.code == kOk);
  const auto res = result(r);
  CHECK(res.at("gamma").get<double>() == doctest::Approx(std::sqrt(2.5)).epsilon(1e-8));
  CHECK(res.at("drift").at("L").get<double>() == doctest::Approx(0.932456).epsilon(1e-6));
}

TEST_CASE("drift reports infeasible walks") {
  const auto sym = write_config("sym", R"({"model":"bounded_rw","params":{"increments":{"-1":0.3,"0":0.4,"1":0.3}}})");
  const Run r = run({"drift", "--config", sym});
  CHECK(r.code == kInfeasible);
  CHECK(r.err.find("phi''(1) > 0: no geometric weight works") != std::string::npos);
  const auto id = write_config("id", R"({"model":"identity"})");
  CHECK(run({"drift", "--config", id}).code == kInfeasible);
}

TEST_CASE("rate certificates end to end") {
  const auto a = write_config("r1", R"({"model":"birth_death","params":{"p":0.75,"q":0.2,"r":0.05,"a":0.1}})");
  const auto b = write_config("r2", R"({"model":"birth_death","params":{"p":0.75,"q":0.2,"r":0.05,"a":0.3}})");
  const auto c = write_config("r3", R"({"model":"birth_death","params":{"p":0.6,"q":0.2,"r":0.2,"a":0.6}})");
  CHECK(result(run({"rate", "--config", a, "--json"})).at("certificate").at("rho").get<double>() ==
        doctest::Approx(0.864286).epsilon(1e-6));
  CHECK(result(run({"rate", "--config", b, "--json"})).at("certificate").at("rho").get<double>() ==
        doctest::Approx(0.824597).epsilon(1e-6));
  CHECK(result(run({"rate", "--config", c, "--json"})).at("certificate").at("rho").get<double>() ==
        doctest::Approx(0.892820).epsilon(1e-6));
  const auto poisson = write_config("pmh", R"({"model":"poisson_mh"})");
  const Run u = run({"rate", "--config", poisson});
  CHECK(u.code == kUnsupported);
  CHECK(u.err.find("vgeo spectrum") != std::string::npos);
}

TEST_CASE("verify and its negative control") {
  const auto mh = write_config("mh", R"({"model":"geometric_mh","params":{"p":0.25}})");
  CHECK(run({"verify", "--config", mh}).code == kOk);
  CHECK(run({"verify", "--config", mh, "--negative-control"}).code == kAuditFailure);
  const auto mm1 = write_config("mm1", R"({"model":"mm1","params":{"beta":1,"mu":4,"h":0.1}})");
  CHECK(run({"verify", "--config", mm1}).code == kOk);
  CHECK(run({"verify", "--config", mm1, "--negative-control"}).code == kAuditFailure);
}

TEST_CASE("usage errors") {
  const auto bad = write_config("bad", R"({"model":"nonexistent"})");
  CHECK(run({"drift", "--config", bad}).code == kUsage);
  CHECK(run({"drift", "--config", "/nonexistent/file.json"}).code == kUsage);
  CHECK(run({"frobnicate"}).code == kUsage);
  const auto broken = write_config("broken", "{not json");
  CHECK(run({"rate", "--config", broken}).code == kUsage);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  const auto cn = write_config("cn", R"({"model":"contracting_normals","params":{"theta":0.5}})");
  const Run a = run({"ifs", "--config", cn, "--json", "--a", "2", "--delta", "0.5", "--samples", "20000", "--threads", "1"});
  const Run b = run({"ifs", "--config", cn, "--json", "--a", "2", "--delta", "0.5", "--samples", "20000", "--threads", "4"});
  CHECK(a.code == kOk);
  CHECK(a.out == b.out);
  const auto env = nlohmann::json::parse(a.out);
  for (const char* key : {"config_hash", "seed", "version", "paper_case", "command", "model"})
    CHECK(env.contains(key));
}

TEST_CASE("model descriptions") {
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"params":{}})")), Error);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"model":"birth_death","params":{"p":0.5}})")), Error);
  const ModelSpec s = model_from_json(nlohmann::json::parse(R"({"model":"lindley","params":{"increments":{"-1":0.6,"1":0.4},"gamma":1.3}})"));
  CHECK(s.increments.has_value());
  CHECK(s.gamma == 1.3);
}
