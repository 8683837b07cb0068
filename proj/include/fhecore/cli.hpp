// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fhecore/costmodel.hpp"

namespace fhecore::cli {

/// Bad config file, unknown key, wrong type, or a value that fails domain
/// validation. Maps to exit status 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { ntt, baseconv, simulate, cost, selftest };

std::string to_string(Command c);
Command parse_command(const std::string& s);

/// Validated configuration for one invocation. `params` holds every key the
/// command accepts, with defaults applied; it is echoed into the report.
struct RunConfig {
  Command command = Command::selftest;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  nlohmann::ordered_json params;
  std::filesystem::path base_dir;  // relative workload paths resolve here
};

/// What the command line carries before validation.
struct Invocation {
  std::string command;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;  // key=value; value parsed as JSON when possible
};

/// Loads the optional JSON config, applies overrides and defaults, and
/// validates. Throws ConfigError.
RunConfig parse_config(const Invocation& inv);

/// Validates an already-parsed document (flat keys, `command` optional when
/// `command` is given).
RunConfig parse_config_json(const nlohmann::json& doc, const std::string& command,
                            const std::filesystem::path& base_dir = ".");

/// Reads a workload descriptor file. Throws ConfigError naming the path.
WorkloadDescriptor load_workload(const std::filesystem::path& path);
WorkloadDescriptor parse_workload(const nlohmann::json& doc);

/// Results in presentation order; each key is also the JSON key under
/// "results".
struct Report {
  std::vector<std::pair<std::string, nlohmann::ordered_json>> rows;
  bool ok = true;  // false when a self-check failed

  void add(std::string key, nlohmann::ordered_json value) {
    rows.emplace_back(std::move(key), std::move(value));
  }
  const nlohmann::ordered_json* find(const std::string& key) const;

  nlohmann::ordered_json to_json(const RunConfig& cfg) const;
  std::string to_text() const;
};

/// Runs the command and returns its report. Throws ConfigError for invalid
/// domain values discovered during execution.
Report execute(const RunConfig& cfg);

/// execute + print the table to `text` + write the JSON report to cfg.out.
/// Returns the process exit status: 0 ok, 1 validation error, 2 failed
/// self-check or internal assertion.
int run(const RunConfig& cfg, std::ostream& text, std::ostream& err);

/// Full command-line entry point.
int main_entry(int argc, char** argv, std::ostream& text, std::ostream& err);

}  // namespace fhecore::cli
