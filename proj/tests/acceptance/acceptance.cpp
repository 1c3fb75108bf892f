// Acceptance gate: one line per criterion, exit status 0 only if all pass.

#include "realmod/errors.hpp"
#include "realmod/report.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace realmod;
using ojson = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

RunConfig config_for(Puncture p) {
  RunConfig cfg;
  cfg.puncture = p;
  return cfg;
}

CheckRecord record(const VerificationReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  throw Error("missing check " + name);
}

// Runs `name` for every puncture; passes when all do.
Outcome per_puncture(const std::string& name, std::initializer_list<Puncture> punctures = {Puncture::Left, Puncture::Middle, Puncture::Right}) {
  Outcome o{true, ""};
  for (Puncture p : punctures) {
    const CheckRecord c = record(cmd_check(name, config_for(p)), name);
    const bool ok = c.status == CheckStatus::Pass;
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string(to_string(p)) + ": " + c.summary;
  }
  return o;
}

Outcome betti_criterion() {
  RunConfig cfg;
  cfg.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const VerificationReport rep = cmd_betti(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool all_vanish = rep.certificates.size() == 5;
  for (const auto& c : rep.certificates) all_vanish = all_vanish && c.vanishes;
  const bool exact = rep.betti && *rep.betti == BettiVector{1, 3, 3, 1};
  char buf[160];
  if (rep.betti) {
    std::snprintf(buf, sizeof buf, "betti %d %d %d %d, %zu certificates, %.1f s single-threaded", rep.betti->b0,
                  rep.betti->b1, rep.betti->b2, rep.betti->b3, rep.certificates.size(), secs);
  } else {
    std::snprintf(buf, sizeof buf, "no betti vector, %.1f s", secs);
  }
  return {exact && all_vanish && secs < 120.0 && rep.passed(), buf};
}

Outcome rprime_criterion() {
  RunConfig cfg;
  const CheckRecord c = record(cmd_check("rprime", cfg), "rprime");
  const auto& e = c.evidence;
  const bool ok = c.status == CheckStatus::Pass && e["grid_n"] == 64 && e["intersection_count"] == 1 &&
                  e["intersections"][0]["distance_to_1_m1_i_j"].get<double>() < 1e-8 &&
                  e["max_constraint_residual"].get<double>() < 1e-12;
  return {ok, c.summary};
}

Outcome determinism_criterion() {
  RunConfig cfg;
  const std::string a = dump_json(strip_timing(to_json(cmd_verify_all(cfg))));
  const std::string b = dump_json(strip_timing(to_json(cmd_verify_all(cfg))));
  cfg.threads = 1;
  const std::string c = dump_json(strip_timing(to_json(cmd_verify_all(cfg))));
  return {a == b && a == c, "verify-all twice plus once single-threaded: " + std::to_string(a.size()) + " bytes, " +
                                (a == b && a == c ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"betti vector", betti_criterion},
      {"dimensions", [] { return per_puncture("dimensions"); }},
      {"critical families", [] { return per_puncture("critical-families"); }},
      {"indices", [] { return per_puncture("indices"); }},
      {"r-action", [] { return per_puncture("r-action"); }},
      {"fix(r) census", [] { return per_puncture("fix-r-census", {Puncture::Left}); }},
      {"normal-bundle action", [] { return per_puncture("normal-bundle"); }},
      {"R' geometry", rprime_criterion},
      {"critical-value census", [] { return per_puncture("census"); }},
      {"pi1 word formulas", [] { return per_puncture("pi1-consistency", {Puncture::Left}); }},
      {"property suites", [] { return per_puncture("algebra"); }},
      {"determinism", determinism_criterion},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
