#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "realmod/errors.hpp"
#include "realmod/report.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace realmod;
using ojson = nlohmann::ordered_json;

namespace {

RunConfig quick() {
  RunConfig cfg;
  cfg.samples = 20;
  return cfg;
}

const CheckRecord& only(const VerificationReport& rep) {
  REQUIRE(rep.checks.size() == 1);
  return rep.checks[0];
}

int run_tool(const std::string& args, std::string* out = nullptr) {
  const std::string path = "cli_test_output.txt";
  const std::string cmd = std::string(REAL_MODULI_EXE) + " " + args + " > " + path + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tol_fixed = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.samples = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.grid_n = 15;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("check registry") {
  const auto& names = check_names();
  CHECK(names.front() == "algebra");
  CHECK(names.back() == "betti");
  CHECK(std::find(names.begin(), names.end(), "fix-r-census") != names.end());
  CHECK_THROWS_AS(cmd_check("no-such", quick()), UnknownCheck);
}

TEST_CASE("single checks") {
  const CheckRecord pi1 = only(cmd_check("pi1-consistency", quick()));
  CHECK(pi1.status == CheckStatus::Pass);
  CHECK(pi1.evidence["max_distance"].get<double>() < 1e-8);

  const CheckRecord idx = only(cmd_check("indices", quick()));
  CHECK(idx.status == CheckStatus::Pass);
  const auto& fams = idx.evidence["families"];
  for (int k = 0; k < 3; ++k) {
    CHECK(fams[k]["index"].get<int>() == k);
    CHECK(fams[k]["nullity"].get<int>() == 1);
  }

  RunConfig absurd = quick();
  absurd.tol_eig = 10.0;
  CHECK(only(cmd_check("indices", absurd)).status == CheckStatus::Fail);

  RunConfig mid = quick();
  mid.puncture = Puncture::Middle;
  CHECK(only(cmd_check("pi1-consistency", mid)).status == CheckStatus::Skipped);
}

TEST_CASE("census command") {
  RunConfig cfg = quick();
  cfg.samples = 1;
  const VerificationReport rep = cmd_census(cfg);
  CHECK(rep.passed());
  CHECK(only(rep).evidence["starts"].get<int>() == 1);
  CHECK(only(rep).evidence["histogram"].size() == 20);
}

TEST_CASE("betti command") {
  const VerificationReport rep = cmd_betti(quick());
  CHECK(rep.passed());
  REQUIRE(rep.betti);
  CHECK(*rep.betti == BettiVector{1, 3, 3, 1});
  CHECK(rep.certificates.size() == 5);
  CHECK(to_text(rep).find("betti: 1 3 3 1") != std::string::npos);

  const ojson j = to_json(rep);
  CHECK(j["schema_version"] == 1);
  CHECK(j["betti"] == ojson::array({1, 3, 3, 1}));
  CHECK(j["verdict"] == "pass");
  const auto& certs = j["checks"][1]["evidence"]["certificates"];
  CHECK(certs.size() == 5);
  CHECK(certs[0]["target"] == "d1_00_to_10");
  CHECK(certs[0]["premises"].is_array());

  RunConfig skip = quick();
  skip.skip_rprime = true;
  const VerificationReport partial = cmd_betti(skip);
  CHECK_FALSE(partial.passed());
  CHECK_FALSE(partial.betti);
  CHECK(exit_code(partial) == 1);
}

TEST_CASE("verify-all for every puncture") {
  for (Puncture p : kAllPunctures) {
    RunConfig cfg = quick();
    cfg.puncture = p;
    const VerificationReport rep = cmd_verify_all(cfg);
    CHECK(rep.passed());
    CHECK(rep.checks.size() == check_names().size());
    REQUIRE(rep.betti);
    CHECK(*rep.betti == BettiVector{1, 3, 3, 1});
    const ojson j = to_json(rep);
    const auto& fams = j["checks"][5]["evidence"]["families"];
    CHECK(fams[1]["r_on_negative_bundle"] == "reverses");
    CHECK(fams[2]["r_on_negative_bundle"] == "preserves");
    if (p == Puncture::Right) CHECK(j["checks"][10]["evidence"]["transport"]["route"] == "handle_swap");
  }
}

TEST_CASE("JSON serialization") {
  ojson j = {{"a", 0.1}, {"b", std::numeric_limits<double>::infinity()}, {"c", 3}, {"d", 2.0}, {"wall_time_ms", 5.0},
             {"e", {{"wall_time_ms", 1.0}, {"f", "x"}}}};
  const std::string s = dump_json(j);
  CHECK(s.find("\"a\": 0.10000000000000001") != std::string::npos);
  CHECK(s.find("\"b\": null") != std::string::npos);
  CHECK(s.find("\"c\": 3") != std::string::npos);
  CHECK(s.find("\"d\": 2.0") != std::string::npos);
  CHECK(ojson::parse(s)["a"].get<double>() == 0.1);
  const ojson stripped = strip_timing(j);
  CHECK_FALSE(stripped.contains("wall_time_ms"));
  CHECK_FALSE(stripped["e"].contains("wall_time_ms"));
  CHECK(stripped["e"]["f"] == "x");
}

TEST_CASE("reports are reproducible") {
  RunConfig cfg = quick();
  cfg.threads = 1;
  const std::string a = dump_json(strip_timing(to_json(cmd_check("fix-r-census", cfg))));
  cfg.threads = 3;
  const std::string b = dump_json(strip_timing(to_json(cmd_check("fix-r-census", cfg))));
  CHECK(a == b);
  cfg.seed = 43;
  const std::string c = dump_json(strip_timing(to_json(cmd_check("fix-r-census", cfg))));
  CHECK(a != c);
}

TEST_CASE("command-line exit codes") {
  std::string out;
  CHECK(run_tool("check no-such", &out) == 2);
  CHECK(out.find("unknown check") != std::string::npos);
  CHECK(run_tool("check indices --tol-eig 10") == 1);
  CHECK(run_tool("census --samples 0") == 2);
  CHECK(run_tool("census --puncture top") == 2);
  CHECK(run_tool("verify-all --bogus") == 2);
  CHECK(run_tool("") == 2);
  CHECK(run_tool("betti --samples 5 --skip-rprime") == 1);
  CHECK(run_tool("betti --samples 5", &out) == 0);
  CHECK(out.find("betti: 1 3 3 1") != std::string::npos);
  CHECK(run_tool("check pi1-consistency --format json", &out) == 0);
  const ojson j = ojson::parse(out);
  CHECK(j["command"] == "check");
  CHECK(j["checks"][0]["name"] == "pi1-consistency");
}

TEST_CASE("seed from the environment") {
  std::string a, b, c;
  CHECK(run_tool("check dimensions --format json --seed 7", &a) == 0);
  CHECK(setenv("REAL_MODULI_SEED", "7", 1) == 0);
  CHECK(run_tool("check dimensions --format json", &b) == 0);
  CHECK(run_tool("check dimensions --format json --seed 8", &c) == 0);
  unsetenv("REAL_MODULI_SEED");
  CHECK(ojson::parse(a)["config"]["seed"] == 7);
  CHECK(ojson::parse(b)["config"]["seed"] == 7);
  CHECK(ojson::parse(c)["config"]["seed"] == 8);
}
