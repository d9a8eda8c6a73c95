#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace voltlab {

/// Invalid or malformed configuration. The CLI maps this to exit code 2;
/// nothing is written to the output directory when it is thrown.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::optional<int> grid;            // overrides the config's grid
  bool quiet = false;
};

struct AssertionRow {
  std::string name;    // what was checked, scenario-unique
  std::string anchor;  // identity slug the check instantiates
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ScenarioOutcome {
  std::string name;
  std::string kind;
  bool pass = true;
  std::vector<AssertionRow> assertions;
  std::string summary_text;            // contents of summary.json
  std::vector<std::string> artifacts;  // file names written to out_dir
};

/// Run one scenario. Validates and computes everything first, then writes
/// summary.json plus any artifacts into opt.out_dir -- a ConfigError never
/// leaves partial outputs behind. The summary is byte-deterministic for a
/// fixed (config, seed, grid).
ScenarioOutcome run_scenario_text(const std::string& config_json, const RunOptions& opt);
ScenarioOutcome run_scenario_file(const std::filesystem::path& config, const RunOptions& opt);

/// Render the markdown verification report for a list of (label, summary
/// JSON text) pairs, ending with the aggregate verdict (conjunction).
std::string render_report(const std::vector<std::pair<std::string, std::string>>& summaries);

}  // namespace voltlab
