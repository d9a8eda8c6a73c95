// Command-line driver: each subcommand runs one scenario kind against a JSON
// config and writes summary.json (plus kind-specific artifacts) into --out.
//
// Exit codes: 0 all assertions passed, 2 invalid/malformed config or usage,
// 3 the scenario ran but at least one assertion failed, 1 unexpected error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "voltlab/io.hpp"
#include "voltlab/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssert = 3;

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int grid = 0;
  bool grid_set = false;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args.out, "output directory");
  sub->add_option("--seed", args.seed, "master seed override")
      ->trigger_on_parse()
      ->each([&args](const std::string&) { args.seed_set = true; });
  sub->add_option("--grid", args.grid, "grid size override")
      ->trigger_on_parse()
      ->each([&args](const std::string&) { args.grid_set = true; });
  sub->add_flag("--quiet", args.quiet, "suppress per-assertion output");
}

int run_scenario_command(const std::string& expected_kind, const CommonArgs& args) {
  try {
    // Cheap pre-parse so a kind mismatch aborts before any computation.
    const std::string text = voltlab::io::read_text(args.config);
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw voltlab::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const std::string kind = cfg.value("kind", "");
    if (kind != expected_kind) {
      throw voltlab::ConfigError("config kind '" + kind + "' does not match subcommand '" +
                                 expected_kind + "'");
    }

    voltlab::RunOptions opt;
    opt.out_dir = args.out;
    if (args.seed_set) opt.seed = args.seed;
    if (args.grid_set) opt.grid = args.grid;
    opt.quiet = args.quiet;

    const voltlab::ScenarioOutcome outcome = voltlab::run_scenario_text(text, opt);
    if (!args.quiet) {
      for (const voltlab::AssertionRow& a : outcome.assertions) {
        std::printf("[%s] %s (%s): measured %.6g vs %.6g\n", a.pass ? "ok" : "FAIL",
                    a.name.c_str(), a.anchor.c_str(), a.measured, a.tolerance);
      }
      std::printf("%s: %s (%zu assertions, outputs in %s)\n", outcome.name.c_str(),
                  outcome.pass ? "PASS" : "FAIL", outcome.assertions.size(),
                  args.out.c_str());
    }
    return outcome.pass ? kExitPass : kExitAssert;
  } catch (const voltlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run_report(const std::vector<std::string>& inputs, const std::string& out,
               bool quiet) {
  try {
    if (inputs.empty()) {
      throw voltlab::ConfigError("report: need at least one summary.json (or directory)");
    }
    std::vector<std::pair<std::string, std::string>> summaries;
    for (const std::string& in : inputs) {
      std::filesystem::path p(in);
      if (std::filesystem::is_directory(p)) p /= "summary.json";
      if (!std::filesystem::exists(p)) {
        throw voltlab::ConfigError("report: no summary at " + p.string());
      }
      summaries.emplace_back(p.parent_path().filename().string(),
                             voltlab::io::read_text(p));
    }
    const std::string md = voltlab::render_report(summaries);

    nlohmann::json agg;
    agg["scenarios"] = nlohmann::json::array();
    bool all_pass = true;
    for (const auto& [label, text] : summaries) {
      nlohmann::json s = nlohmann::json::parse(text);
      const bool pass = s.value("pass", false);
      all_pass = all_pass && pass;
      agg["scenarios"].push_back(
          {{"label", label}, {"name", s.value("name", label)}, {"pass", pass}});
    }
    agg["pass"] = all_pass;

    std::filesystem::create_directories(out);
    voltlab::io::write_text(std::filesystem::path(out) / "report.md", md);
    voltlab::io::write_text(std::filesystem::path(out) / "summary.json",
                            agg.dump(2) + "\n");
    if (!quiet) {
      std::printf("report: %s (%zu scenarios, outputs in %s)\n",
                  all_pass ? "PASS" : "FAIL", summaries.size(), out.c_str());
    }
    return all_pass ? kExitPass : kExitAssert;
  } catch (const voltlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voltlab: numerical checks for cumulative-sum operator calculus"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"verify",    "orbit",     "certify",
                                          "kronecker", "commutant", "witness"};
  std::vector<CommonArgs> args(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], "run a '" + kinds[i] + "' scenario");
    add_common(sub, args[i]);
  }

  std::vector<std::string> report_inputs;
  std::string report_out = "out";
  bool report_quiet = false;
  CLI::App* rep = app.add_subcommand("report", "aggregate scenario summaries");
  rep->add_option("inputs", report_inputs, "summary.json files or scenario out dirs");
  rep->add_option("--out", report_out, "output directory");
  rep->add_flag("--quiet", report_quiet, "suppress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (app.get_subcommand(kinds[i])->parsed()) {
      return run_scenario_command(kinds[i], args[i]);
    }
  }
  if (rep->parsed()) return run_report(report_inputs, report_out, report_quiet);
  return kExitConfig;
}
