#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace levylab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioVersion = 1;

std::vector<std::string> scenario_kinds();

struct RunOptions {
  std::filesystem::path out_dir = "run";
  int workers = 0;
  std::optional<std::uint64_t> seed;
};

enum class Outcome { Pass, Fail, Inconclusive };

struct ExpectationResult {
  std::string metric;
  std::string basis;  // reference | derived | trivial
  std::optional<double> value;
  std::optional<double> tolerance;
  std::optional<double> min;
  std::optional<double> max;
  double measured = 0.0;
  Outcome outcome = Outcome::Fail;
};

struct Report {
  std::string kind;
  std::uint64_t seed = 0;
  std::map<std::string, double> measured;
  std::vector<ExpectationResult> expectations;
  std::vector<std::string> notes;
  std::vector<std::string> artifacts;

  bool all_pass() const;
  std::string to_json() const;
};

// A parsed and validated scenario document. Parsing reads every knob, so unknown
// keys, type errors and resource-bound violations surface before anything runs.
class Scenario {
 public:
  static Scenario from_file(const std::filesystem::path& path);
  static Scenario from_string(const std::string& text, const std::string& source = "<string>");

  const std::string& kind() const;
  std::uint64_t seed() const;
  // Normalized document with the effective seed; re-running it gives the same report.
  std::string echo(std::optional<std::uint64_t> seed_override = std::nullopt) const;

  // Writes config.echo, summary.json and the CSV artifacts into opts.out_dir.
  Report run(const RunOptions& opts) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

// CLI entry points; return the process exit status.
// run: 0 all expectations pass, 1 some expectation failed, 2 resource error,
// 3 invalid config, 4 other runtime error.
int cli_run(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
            std::ostream& err);
int cli_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cli_list_kinds(std::ostream& out);

}  // namespace levylab
