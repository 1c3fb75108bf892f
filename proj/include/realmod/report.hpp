#pragma once

#include "realmod/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace realmod {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

enum class OutputFormat { Text, Json };

struct RunConfig {
  Puncture puncture = Puncture::Left;
  std::uint64_t seed = 42;
  int samples = 500;
  double tol_constraint = 1e-10;
  double tol_fixed = 1e-8;
  double tol_grad = 1e-7;
  double tol_eig = 1e-5;
  int grid_n = 64;
  std::optional<std::string> output_path;
  OutputFormat format = OutputFormat::Text;
  int threads = 0;
  bool skip_rprime = false;

  /// Throws ConfigError.
  void validate() const;
};

enum class CheckStatus { Pass, Fail, Skipped };

struct CheckRecord {
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string summary;
  nlohmann::ordered_json evidence = nlohmann::ordered_json::object();
  double wall_time_ms = 0.0;
};

struct VerificationReport {
  std::string command;
  RunConfig config;
  std::vector<CheckRecord> checks;
  std::optional<BettiVector> betti;
  std::vector<DifferentialCertificate> certificates;
  std::string error;  // set when the chain stopped on an exception

  bool passed() const;
};

/// Registered check names, in verify-all order.
const std::vector<std::string>& check_names();

VerificationReport cmd_verify_all(const RunConfig& cfg);
VerificationReport cmd_census(const RunConfig& cfg);
VerificationReport cmd_betti(const RunConfig& cfg);
/// Throws UnknownCheck.
VerificationReport cmd_check(const std::string& name, const RunConfig& cfg);

nlohmann::ordered_json to_json(const VerificationReport& rep);
nlohmann::ordered_json to_json(const DifferentialCertificate& cert);

/// Pretty JSON with doubles written as %.17g and non-finite values as null.
std::string dump_json(const nlohmann::ordered_json& j);

/// The JSON tree with every "wall_time_ms" member removed.
nlohmann::ordered_json strip_timing(nlohmann::ordered_json j);

std::string to_text(const VerificationReport& rep);

/// 0 when every check passed, 1 otherwise.
int exit_code(const VerificationReport& rep);

}  // namespace realmod
