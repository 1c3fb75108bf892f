#include "realmod/errors.hpp"
#include "realmod/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace realmod;

namespace {

std::uint64_t parse_seed(const std::string& s) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw ConfigError("bad seed '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad seed '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of the real moduli space computation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string puncture = "left";
  std::string format = "text";
  std::string seed;
  std::string out;
  std::string check_name;

  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--puncture", puncture, "left, middle or right")
        ->check(CLI::IsMember({"left", "middle", "right"}));
    sub->add_option("--seed", seed, "base seed (default $REAL_MODULI_SEED or 42)");
    sub->add_option("--samples", cfg.samples, "random starts per census");
    sub->add_option("--grid-n", cfg.grid_n, "R' sweep resolution");
    sub->add_option("--tol-constraint", cfg.tol_constraint);
    sub->add_option("--tol-fixed", cfg.tol_fixed);
    sub->add_option("--tol-grad", cfg.tol_grad);
    sub->add_option("--tol-eig", cfg.tol_eig, "relative eigenvalue threshold");
    sub->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--out", out, "write the report here instead of stdout");
    sub->add_option("--threads", cfg.threads, "worker threads, 0 for all cores");
    sub->add_flag("--skip-rprime", cfg.skip_rprime, "leave d2 uncertified");
  };

  CLI::App* verify = app.add_subcommand("verify-all", "run every check");
  CLI::App* census = app.add_subcommand("census", "flow census of critical points");
  CLI::App* betti = app.add_subcommand("betti", "certify the spectral sequence and print Betti numbers");
  CLI::App* check = app.add_subcommand("check", "run one named check");
  check->add_option("name", check_name, "check name")->required();
  for (CLI::App* sub : {verify, census, betti, check}) add_flags(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.puncture = parse_puncture(puncture);
    cfg.format = format == "json" ? OutputFormat::Json : OutputFormat::Text;
    if (!out.empty()) cfg.output_path = out;
    if (!seed.empty()) {
      cfg.seed = parse_seed(seed);
    } else if (const char* env = std::getenv("REAL_MODULI_SEED"); env && *env) {
      cfg.seed = parse_seed(env);
    }

    VerificationReport rep;
    if (verify->parsed()) {
      rep = cmd_verify_all(cfg);
    } else if (census->parsed()) {
      rep = cmd_census(cfg);
    } else if (betti->parsed()) {
      rep = cmd_betti(cfg);
    } else {
      rep = cmd_check(check_name, cfg);
    }

    const std::string text = cfg.format == OutputFormat::Json ? dump_json(to_json(rep)) : to_text(rep);
    if (cfg.output_path) {
      std::ofstream f(*cfg.output_path, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + *cfg.output_path);
      f << text;
    } else {
      std::cout << text;
    }
    return exit_code(rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownCheck& e) {
    std::cerr << e.what() << "\nknown checks:";
    for (const auto& n : check_names()) std::cerr << " " << n;
    std::cerr << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
