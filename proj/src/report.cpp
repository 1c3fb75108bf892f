#include "realmod/report.hpp"

#include "realmod/errors.hpp"
#include "realmod/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace realmod {

using ojson = nlohmann::ordered_json;

void RunConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a positive number");
  };
  positive(tol_constraint, "tol-constraint");
  positive(tol_fixed, "tol-fixed");
  positive(tol_grad, "tol-grad");
  positive(tol_eig, "tol-eig");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (grid_n < 16) throw ConfigError("grid-n must be >= 16");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

bool VerificationReport::passed() const {
  if (!error.empty()) return false;
  for (const auto& c : checks)
    if (c.status == CheckStatus::Fail) return false;
  return true;
}

int exit_code(const VerificationReport& rep) { return rep.passed() ? 0 : 1; }

namespace {

// Stream tags for derive_seed, one per randomized check.
constexpr std::uint64_t kAlgebraStream = 1001;
constexpr std::uint64_t kPi1Stream = 1002;
constexpr std::uint64_t kDimensionStream = 1003;
constexpr std::uint64_t kFixRStream = 1004;

constexpr int kPropertyInstances = 1000;
constexpr int kPointInstances = 100;

constexpr std::uint64_t kSwapStream = 1005;

struct Context {
  const RunConfig& cfg;
  std::map<Puncture, std::array<FamilyReport, 3>> families;
  std::optional<RPrimeReport> rprime;
  std::optional<E1Page> page;
  std::vector<DifferentialCertificate> certs;

  explicit Context(const RunConfig& c) : cfg(c) {}

  const std::array<FamilyReport, 3>& family_reports(Puncture p) {
    auto it = families.find(p);
    if (it == families.end()) {
      AnalysisOptions opts;
      opts.tol_eig = cfg.tol_eig;
      opts.hessian.tol_grad = cfg.tol_grad;
      it = families
               .emplace(p, std::array<FamilyReport, 3>{analyze_family(p, Family::S1p, opts),
                                                       analyze_family(p, Family::S2p, opts),
                                                       analyze_family(p, Family::S3p, opts)})
               .first;
    }
    return it->second;
  }
  const std::array<FamilyReport, 3>& family_reports() { return family_reports(cfg.puncture); }

  // The right puncture is certified on the left one and carried over by handle_swap.
  Puncture chart_puncture() const { return cfg.puncture == Puncture::Right ? Puncture::Left : cfg.puncture; }
  bool swapped() const { return chart_puncture() != cfg.puncture; }

  const RPrimeReport& rprime_report() {
    if (!rprime) rprime = verify_rprime(chart_puncture(), cfg.grid_n, cfg.threads);
    return *rprime;
  }
};

CheckStatus status_of(bool ok) { return ok ? CheckStatus::Pass : CheckStatus::Fail; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ojson fingerprint_json(const TraceFingerprint& fp) {
  ojson a = ojson::array();
  for (double t : fp.t) a.push_back(t);
  return a;
}

// ---------------------------------------------------------------------------
// Checks

void check_algebra(Context& ctx, CheckRecord& rec) {
  RandomSource rng(derive_seed(ctx.cfg.seed, kAlgebraStream));
  double assoc = 0, inverse = 0, norm = 0, exp_log = 0, log_exp = 0, conj = 0;
  double sigma_inv = 0, r_inv = 0, f_sigma = 0, f_r = 0;
  for (int k = 0; k < kPropertyInstances; ++k) {
    const UnitQuaternion a = haar_sample(rng), b = haar_sample(rng), c = haar_sample(rng);
    assoc = std::max(assoc, distance((a * b) * c, a * (b * c)));
    inverse = std::max(inverse, distance(a * a.inverse(), kOne));
    norm = std::max(norm, std::abs((a * b).norm() - 1.0));

    Eigen::Vector3d dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
    const Su2Vector v(dir.normalized() * rng.uniform(0.0, 3.0));
    exp_log = std::max(exp_log, (log_su2(exp_su2(v)) - v).norm());
    log_exp = std::max(log_exp, distance(exp_su2(log_su2(a)), a));

    const UnitQuaternion g = haar_sample(rng);
    const UnitQuaternion xs[] = {a, b};
    const UnitQuaternion ys[] = {g * a * g.inverse(), g * b * g.inverse()};
    const UnitQuaternion gh = solve_conjugator(xs, ys).g;
    conj = std::max(conj, std::min(distance(gh, g), distance(gh, -g)));

    const Quad q = random_point(rng);
    const Quad s = sigma_star(ctx.cfg.puncture, q);
    sigma_inv = std::max(sigma_inv, distance(sigma_star(ctx.cfg.puncture, s), q));
    r_inv = std::max(r_inv, distance(residual_r(residual_r(q)), q));
    f_sigma = std::max(f_sigma, std::abs(morse_function(s) - morse_function(q)));
    f_r = std::max(f_r, std::abs(morse_function(residual_r(q)) - morse_function(q)));
  }
  const bool ok = assoc < 1e-14 && inverse < 1e-14 && norm < 1e-14 && exp_log < 1e-12 && log_exp < 1e-12 &&
                  conj < 1e-10 && sigma_inv < 1e-14 && r_inv == 0.0 && f_sigma == 0.0 && f_r == 0.0;
  rec.status = status_of(ok);
  rec.summary = std::to_string(kPropertyInstances) + " instances, max exp/log error " + fmt(std::max(exp_log, log_exp)) +
                ", max conjugator error " + fmt(conj);
  rec.evidence = {{"instances", kPropertyInstances},
                  {"associativity", assoc},
                  {"inverse", inverse},
                  {"norm_multiplicativity", norm},
                  {"log_exp_roundtrip", exp_log},
                  {"exp_log_roundtrip", log_exp},
                  {"conjugator_recovery", conj},
                  {"sigma_star_involution", sigma_inv},
                  {"r_involution", r_inv},
                  {"f_sigma_invariance", f_sigma},
                  {"f_r_invariance", f_r}};
}

void check_pi1(Context& ctx, CheckRecord& rec) {
  if (ctx.cfg.puncture != Puncture::Left) {
    rec.status = CheckStatus::Skipped;
    rec.summary = "word formulas are stated for the left puncture";
    return;
  }
  RandomSource rng(derive_seed(ctx.cfg.seed, kPi1Stream));
  double worst = 0;
  for (int k = 0; k < kPointInstances; ++k) worst = std::max(worst, check_pi1_consistency(random_point(rng)));
  rec.status = status_of(worst < ctx.cfg.tol_fixed);
  rec.summary = std::to_string(kPointInstances) + " points, max class distance " + fmt(worst);
  rec.evidence = {{"points", kPointInstances}, {"max_distance", worst}};
}

void check_dimensions(Context& ctx, CheckRecord& rec) {
  RandomSource rng(derive_seed(ctx.cfg.seed, kDimensionStream));
  const Puncture p = ctx.cfg.puncture;
  int m_fail = 0, mp_fail = 0;
  double worst_residual = 0;
  std::map<int, int> m_dims, mp_dims;
  for (int k = 0; k < kPointInstances; ++k) {
    const Quad q = random_point(rng);
    worst_residual = std::max(worst_residual, constraint_residual(q).norm());
    try {
      const auto n = static_cast<int>(tangent_frame_M(q).size());
      ++m_dims[n];
      m_fail += n == 6 ? 0 : 1;
    } catch (const Error&) {
      ++m_fail;
    }
  }
  for (int k = 0; k < kPointInstances; ++k) {
    try {
      const auto n = static_cast<int>(tangent_frame_Mprime(p, random_fixed_point(p, rng)).size());
      ++mp_dims[n];
      mp_fail += n == 3 ? 0 : 1;
    } catch (const Error&) {
      ++mp_fail;
    }
  }
  const bool ok = m_fail == 0 && mp_fail == 0 && worst_residual < ctx.cfg.tol_constraint;
  rec.status = status_of(ok);
  rec.summary = "dim M = 6 at " + std::to_string(kPointInstances - m_fail) + "/" + std::to_string(kPointInstances) +
                ", dim M' = 3 at " + std::to_string(kPointInstances - mp_fail) + "/" + std::to_string(kPointInstances);
  rec.evidence = {{"points", kPointInstances},
                  {"m_rank_failures", m_fail},
                  {"mprime_rank_failures", mp_fail},
                  {"max_constraint_residual", worst_residual}};
}

void check_families(Context& ctx, CheckRecord& rec) {
  bool ok = true;
  ojson arr = ojson::array();
  for (const FamilyReport& f : ctx.family_reports()) {
    const bool fam_ok = f.max_constraint_residual < 1e-12 && f.max_fixed_residual < ctx.cfg.tol_fixed &&
                        f.max_grad_norm < 1e-8 && f.max_value_deviation < 1e-12;
    ok = ok && fam_ok;
    arr.push_back({{"family", to_string(f.family)},
                   {"samples", f.samples},
                   {"f_value", family_value(f.family)},
                   {"max_constraint_residual", f.max_constraint_residual},
                   {"max_fixed_residual", f.max_fixed_residual},
                   {"max_grad_norm", f.max_grad_norm},
                   {"max_value_deviation", f.max_value_deviation},
                   {"components", f.components.components},
                   {"dim", f.components.dim},
                   {"pass", fam_ok}});
  }
  rec.status = status_of(ok);
  rec.summary = "32 samples per circle on S1', S2' (both circles), S3'";
  rec.evidence = {{"families", arr}};
}

void check_indices(Context& ctx, CheckRecord& rec) {
  bool ok = true;
  ojson arr = ojson::array();
  std::string summary;
  for (const FamilyReport& f : ctx.family_reports()) {
    const int expected = static_cast<int>(f.family);
    int miss = 0;
    for (const auto& c : f.classifications) miss += (c[0] == expected && c[1] == 1) ? 0 : 1;
    const bool fam_ok = miss == 0 && f.min_null_alignment > 0.999;
    ok = ok && fam_ok;
    summary += (summary.empty() ? "" : ", ") + std::string(to_string(f.family)) + " (" + std::to_string(f.index) +
               "," + std::to_string(f.nullity) + ")";
    arr.push_back({{"family", to_string(f.family)},
                   {"index", f.index},
                   {"nullity", f.nullity},
                   {"expected_index", expected},
                   {"misclassified", miss},
                   {"min_null_alignment", f.min_null_alignment},
                   {"min_nonzero_eigenvalue", f.min_nonzero_gap},
                   {"max_abs_eigenvalue", f.max_abs_eigenvalue},
                   {"pass", fam_ok}});
  }
  rec.status = status_of(ok);
  rec.summary = summary;
  rec.evidence = {{"tol_eig", ctx.cfg.tol_eig}, {"families", arr}};
}

void check_r_action(Context& ctx, CheckRecord& rec) {
  const auto& fr = ctx.family_reports();
  const bool ok = fr[0].max_rotation_distance < 1e-7 && fr[2].max_rotation_distance < 1e-7 &&
                  fr[1].max_r_fixed_residual < ctx.cfg.tol_fixed;
  rec.status = status_of(ok);
  rec.summary = "S1' " + std::string(to_string(fr[0].r_action)) + ", S2' " + std::string(to_string(fr[1].r_action)) +
                ", S3' " + std::string(to_string(fr[2].r_action));
  ojson arr = ojson::array();
  for (const FamilyReport& f : fr) {
    arr.push_back({{"family", to_string(f.family)},
                   {"r_action", to_string(f.r_action)},
                   {"max_rotation_distance", f.max_rotation_distance},
                   {"max_r_fixed_residual", f.max_r_fixed_residual},
                   {"r_on_negative_bundle", to_string(f.r_on_negative_bundle)},
                   {"negative_bundle_sign", f.negative_bundle_sign},
                   {"negative_bundle_orientable", f.negative_bundle_orientable},
                   {"mprime_orientable", f.mprime_orientable}});
  }
  rec.evidence = {{"families", arr}};
}

void check_normal_bundle(Context& ctx, CheckRecord& rec) {
  const FamilyReport& s2 = ctx.family_reports()[1];
  rec.status = status_of(s2.max_normal_defect < 1e-4);
  rec.summary = "max ||dr + I|| on the S2' normal plane " + fmt(s2.max_normal_defect);
  rec.evidence = {{"samples", s2.samples},
                  {"max_normal_defect", s2.max_normal_defect},
                  {"max_orientation_error", s2.max_r_orientation_err},
                  {"components", s2.components.components}};
}

void check_fix_r(Context& ctx, CheckRecord& rec) {
  const Puncture p = ctx.cfg.puncture;
  const int n = ctx.cfg.samples;
  const std::uint64_t base = derive_seed(ctx.cfg.seed, kFixRStream);
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  parallel_for(n, ctx.cfg.threads, [&](int k) {
    RandomSource rng(derive_seed(base, static_cast<std::uint64_t>(k)));
    try {
      const Quad q = random_point(rng);
      dist[static_cast<std::size_t>(k)] = s2_torus_distance(search_fixed_point(Involution::R, p, q, rng).quad);
    } catch (const Error&) {
    }
  });
  int outliers = 0;
  double worst = 0;
  ojson bad = ojson::array();
  for (int k = 0; k < n; ++k) {
    const double d = dist[static_cast<std::size_t>(k)];
    worst = std::max(worst, d);
    if (!(d < 1e-5)) {
      ++outliers;
      if (bad.size() < 20) bad.push_back({{"task", k}, {"distance", d}});
    }
  }
  rec.status = status_of(outliers == 0);
  rec.summary = std::to_string(n - outliers) + "/" + std::to_string(n) + " searches on the S2 torus, max distance " +
                fmt(worst);
  rec.evidence = {{"searches", n}, {"outliers", outliers}, {"max_distance", worst}, {"outlier_tasks", bad}};
}

void check_census(Context& ctx, CheckRecord& rec) {
  CensusOptions opts;
  opts.flow.tol_grad = ctx.cfg.tol_grad;
  opts.threads = ctx.cfg.threads;
  const CensusReport c = critical_census(ctx.cfg.puncture, ctx.cfg.samples, ctx.cfg.seed, opts);
  rec.status = status_of(c.clean());
  rec.summary = std::to_string(2 * c.n) + " limits: S1' " + std::to_string(c.family_counts[0]) + ", S2' " +
                std::to_string(c.family_counts[1]) + ", S3' " + std::to_string(c.family_counts[2]) + ", unmatched " +
                std::to_string(c.unmatched) + ", max |f - critical value| " + fmt(c.max_value_deviation);
  ojson hist = ojson::array();
  for (int h : c.histogram) hist.push_back(h);
  ojson unmatched = ojson::array();
  int total_steps = 0;
  for (const CensusSample& s : c.samples) {
    total_steps += s.down.flow.steps + s.up.flow.steps;
    if (!s.started) {
      unmatched.push_back({{"task", s.task}, {"error", s.error}});
      continue;
    }
    for (const auto* lim : {&s.down, &s.up}) {
      if (lim->match.matched && lim->flow.converged) continue;
      unmatched.push_back({{"task", s.task},
                           {"direction", lim == &s.down ? "down" : "up"},
                           {"f_limit", lim->flow.f_limit},
                           {"converged", lim->flow.converged},
                           {"class_distance", lim->match.class_distance},
                           {"fingerprint", fingerprint_json(lim->fingerprint)}});
    }
  }
  rec.evidence = {{"starts", c.n},
                  {"failed_starts", c.failed_starts},
                  {"nonconverged", c.nonconverged},
                  {"unmatched", c.unmatched},
                  {"family_counts", {{"S1p", c.family_counts[0]}, {"S2p", c.family_counts[1]}, {"S3p", c.family_counts[2]}}},
                  {"max_value_deviation", c.max_value_deviation},
                  {"histogram", hist},
                  {"total_flow_steps", total_steps},
                  {"unmatched_limits", unmatched}};
}

void check_rprime(Context& ctx, CheckRecord& rec) {
  if (ctx.cfg.skip_rprime) {
    rec.status = CheckStatus::Skipped;
    rec.summary = "skipped on request";
    return;
  }
  const RPrimeReport& r = ctx.rprime_report();
  rec.status = status_of(r.valid());
  if (!r.supported) {
    rec.summary = "no sphere chart for the " + std::string(to_string(r.puncture)) + " puncture";
  } else {
    rec.summary = std::to_string(r.intersection_count()) + " intersection(s) with S1', transversality " +
                  fmt(r.transversality_min_sv);
  }
  if (ctx.swapped()) rec.summary += " (left chart, used through the handle swap)";
  ojson hits = ojson::array();
  for (const auto& h : r.intersections) {
    hits.push_back({{"theta", h.theta},
                    {"psi", h.psi},
                    {"s1_parameter", h.s1_parameter},
                    {"class_distance", h.class_distance},
                    {"distance_to_1_m1_i_j", h.reference_distance}});
  }
  rec.evidence = {{"chart_puncture", to_string(r.puncture)},
                  {"supported", r.supported},
                  {"grid_n", r.grid_n},
                  {"points", r.points},
                  {"max_constraint_residual", r.max_constraint_residual},
                  {"max_fixed_residual", r.max_fixed_residual},
                  {"intersection_count", r.intersection_count()},
                  {"intersections", hits},
                  {"transversality_min_sv", r.transversality_min_sv}};
}

void check_certificates(Context& ctx, CheckRecord& rec) {
  const auto& fr = ctx.family_reports(ctx.chart_puncture());
  ctx.page = build_e1({fr[0].summary(), fr[1].summary(), fr[2].summary()});
  ctx.certs = assess_d1(*ctx.page, gather_evidence(fr[0], fr[1], fr[2]));
  if (!ctx.cfg.skip_rprime) ctx.certs.push_back(assess_d2(*ctx.page, ctx.rprime_report()));

  ojson route = ojson::object();
  if (ctx.swapped()) {
    const HandleSwapReport swap = verify_handle_swap(kPointInstances, derive_seed(ctx.cfg.seed, kSwapStream));
    ctx.certs = transport_to_right(std::move(ctx.certs), swap);
    // The function tr(B1)/2 of the right puncture itself: d1 certifies, d2 has no sphere chart.
    const auto& own = ctx.family_reports();
    const E1Page own_page = build_e1({own[0].summary(), own[1].summary(), own[2].summary()});
    ojson direct = ojson::array();
    for (const auto& c : assess_d1(own_page, gather_evidence(own[0], own[1], own[2])))
      direct.push_back({{"target", to_string(c.target)}, {"vanishes", c.vanishes}});
    const DifferentialCertificate own_d2 = assess_d2(own_page, verify_rprime(ctx.cfg.puncture, ctx.cfg.grid_n));
    direct.push_back({{"target", to_string(own_d2.target)},
                      {"vanishes", own_d2.vanishes},
                      {"failed_premise", own_d2.first_failure() ? own_d2.first_failure()->name : ""}});
    route = {{"route", "handle_swap"},
             {"swap_samples", swap.samples},
             {"max_intertwining_defect", swap.max_intertwining_defect},
             {"max_constraint_defect", swap.max_constraint_defect},
             {"max_fixed_residual", swap.max_fixed_residual},
             {"direct_certificates", direct}};
  }

  bool ok = true;
  std::string failures;
  ojson certs = ojson::array();
  for (const auto& c : ctx.certs) {
    ok = ok && c.vanishes;
    if (const Premise* f = c.first_failure()) {
      failures += (failures.empty() ? "" : "; ") + std::string(to_string(c.target)) + ": " + f->name;
    }
    certs.push_back(to_json(c));
  }
  ojson ranks = ojson::array();
  for (const auto& col : ctx.page->ranks) ranks.push_back({col[0], col[1]});
  rec.status = status_of(ok);
  rec.summary = std::to_string(ctx.certs.size()) + " certificates" + (failures.empty() ? ", all vanish" : ", failed " + failures);
  if (ctx.swapped()) rec.summary += ", transported from the left puncture";
  rec.evidence = {{"e1_ranks", ranks},
                  {"total_rank", ctx.page->total_rank()},
                  {"s2_components", fr[1].components.components},
                  {"certificates", certs}};
  if (!route.empty()) rec.evidence["transport"] = route;
}

void check_betti(Context& ctx, CheckRecord& rec, VerificationReport& rep) {
  if (!ctx.page) {
    CheckRecord tmp;
    check_certificates(ctx, tmp);
  }
  const BettiVector b = betti(*ctx.page, ctx.certs);
  rep.betti = b;
  const bool torus = compare_torus(b);
  rec.status = status_of(torus);
  rec.summary = std::to_string(b.b0) + " " + std::to_string(b.b1) + " " + std::to_string(b.b2) + " " +
                std::to_string(b.b3) + (torus ? " (matches T^3)" : " (differs from T^3)");
  rec.evidence = {{"betti", {b.b0, b.b1, b.b2, b.b3}},
                  {"euler_characteristic", b.euler_characteristic()},
                  {"matches_torus", torus}};
}

using CheckFn = std::function<void(Context&, CheckRecord&, VerificationReport&)>;

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> r = {
      {"algebra", [](Context& c, CheckRecord& r, VerificationReport&) { check_algebra(c, r); }},
      {"pi1-consistency", [](Context& c, CheckRecord& r, VerificationReport&) { check_pi1(c, r); }},
      {"dimensions", [](Context& c, CheckRecord& r, VerificationReport&) { check_dimensions(c, r); }},
      {"critical-families", [](Context& c, CheckRecord& r, VerificationReport&) { check_families(c, r); }},
      {"indices", [](Context& c, CheckRecord& r, VerificationReport&) { check_indices(c, r); }},
      {"r-action", [](Context& c, CheckRecord& r, VerificationReport&) { check_r_action(c, r); }},
      {"normal-bundle", [](Context& c, CheckRecord& r, VerificationReport&) { check_normal_bundle(c, r); }},
      {"fix-r-census", [](Context& c, CheckRecord& r, VerificationReport&) { check_fix_r(c, r); }},
      {"census", [](Context& c, CheckRecord& r, VerificationReport&) { check_census(c, r); }},
      {"rprime", [](Context& c, CheckRecord& r, VerificationReport&) { check_rprime(c, r); }},
      {"certificates", [](Context& c, CheckRecord& r, VerificationReport&) { check_certificates(c, r); }},
      {"betti", check_betti},
  };
  return r;
}

void run(const std::string& name, Context& ctx, VerificationReport& rep) {
  for (const auto& [n, fn] : registry()) {
    if (n != name) continue;
    CheckRecord rec;
    rec.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(ctx, rec, rep);
    } catch (const Error& e) {
      rec.status = CheckStatus::Fail;
      rec.summary = e.what();
    }
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.checks.push_back(std::move(rec));
    return;
  }
  throw UnknownCheck("unknown check '" + name + "'");
}

VerificationReport start(const char* command, const RunConfig& cfg) {
  cfg.validate();
  VerificationReport rep;
  rep.command = command;
  rep.config = cfg;
  return rep;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& entry : registry()) n.push_back(entry.first);
    return n;
  }();
  return names;
}

VerificationReport cmd_verify_all(const RunConfig& cfg) {
  VerificationReport rep = start("verify-all", cfg);
  Context ctx(cfg);
  for (const auto& name : check_names()) run(name, ctx, rep);
  rep.certificates = ctx.certs;
  return rep;
}

VerificationReport cmd_census(const RunConfig& cfg) {
  VerificationReport rep = start("census", cfg);
  Context ctx(cfg);
  run("census", ctx, rep);
  return rep;
}

VerificationReport cmd_betti(const RunConfig& cfg) {
  VerificationReport rep = start("betti", cfg);
  Context ctx(cfg);
  run("rprime", ctx, rep);
  run("certificates", ctx, rep);
  run("betti", ctx, rep);
  rep.certificates = ctx.certs;
  return rep;
}

VerificationReport cmd_check(const std::string& name, const RunConfig& cfg) {
  bool known = false;
  for (const auto& n : check_names()) known = known || n == name;
  if (!known) throw UnknownCheck("unknown check '" + name + "'");
  VerificationReport rep = start("check", cfg);
  Context ctx(cfg);
  run(name, ctx, rep);
  rep.certificates = ctx.certs;
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

ojson to_json(const DifferentialCertificate& cert) {
  ojson premises = ojson::array();
  for (const auto& p : cert.premises) {
    premises.push_back({{"name", p.name}, {"verified", p.verified}, {"evidence", p.evidence}, {"detail", p.detail}});
  }
  ojson j = {{"target", to_string(cert.target)}, {"vanishes", cert.vanishes}};
  if (cert.twist_sign != 0) j["twist_sign"] = cert.twist_sign;
  j["premises"] = premises;
  return j;
}

namespace {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Skipped:
      return "skipped";
  }
  return "?";
}

ojson config_json(const RunConfig& c) {
  return {{"puncture", to_string(c.puncture)},
          {"seed", c.seed},
          {"samples", c.samples},
          {"tol_constraint", c.tol_constraint},
          {"tol_fixed", c.tol_fixed},
          {"tol_grad", c.tol_grad},
          {"tol_eig", c.tol_eig},
          {"grid_n", c.grid_n},
          {"skip_rprime", c.skip_rprime}};
}

void write_json(const ojson& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ojson(it.key()).dump() + ": ";
        write_json(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_json(v, out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s = buf;
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const ojson& j) {
  std::string out;
  write_json(j, out, 0);
  out += "\n";
  return out;
}

ojson strip_timing(ojson j) {
  if (j.is_object()) {
    j.erase("wall_time_ms");
    for (auto& [k, v] : j.items()) v = strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timing(v);
  }
  return j;
}

ojson to_json(const VerificationReport& rep) {
  ojson checks = ojson::array();
  double total = 0;
  for (const auto& c : rep.checks) {
    total += c.wall_time_ms;
    checks.push_back({{"name", c.name},
                      {"status", to_string(c.status)},
                      {"summary", c.summary},
                      {"evidence", c.evidence},
                      {"wall_time_ms", c.wall_time_ms}});
  }
  ojson j = {{"schema_version", kSchemaVersion},
             {"artifact_version", kArtifactVersion},
             {"command", rep.command},
             {"config", config_json(rep.config)},
             {"checks", checks}};
  if (rep.betti) {
    j["betti"] = {rep.betti->b0, rep.betti->b1, rep.betti->b2, rep.betti->b3};
  } else {
    j["betti"] = nullptr;
  }
  if (!rep.error.empty()) j["error"] = rep.error;
  j["verdict"] = rep.passed() ? "pass" : "fail";
  j["wall_time_ms"] = total;
  return j;
}

std::string to_text(const VerificationReport& rep) {
  std::ostringstream os;
  os << "real-moduli " << rep.command << " (puncture " << to_string(rep.config.puncture) << ", seed " << rep.config.seed
     << ", samples " << rep.config.samples << ")\n";
  for (const auto& c : rep.checks) {
    const char* tag = c.status == CheckStatus::Pass ? "PASS" : (c.status == CheckStatus::Fail ? "FAIL" : "SKIP");
    char time[32];
    std::snprintf(time, sizeof time, "%.0f ms", c.wall_time_ms);
    os << "[" << tag << "] " << c.name << ": " << c.summary << " (" << time << ")\n";
  }
  if (rep.command == "betti" || rep.command == "verify-all") {
    for (const auto& cert : rep.certificates) {
      os << "  " << to_string(cert.target) << ": " << (cert.vanishes ? "vanishes" : "not certified");
      if (const Premise* f = cert.first_failure()) os << " (premise " << f->name << ")";
      os << "\n";
    }
  }
  if (rep.betti) os << "betti: " << rep.betti->b0 << " " << rep.betti->b1 << " " << rep.betti->b2 << " " << rep.betti->b3 << "\n";
  if (!rep.error.empty()) os << "error: " << rep.error << "\n";
  os << "verdict: " << (rep.passed() ? "pass" : "fail") << "\n";
  return os.str();
}

}  // namespace realmod
