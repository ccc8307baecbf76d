// slsbench: config-driven benchmark runner for the line-search
// optimizers. Subcommands: run, scan, report.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sls/harness.hpp"

namespace {

void apply_cli_overrides(std::map<std::string, std::string>& kv,
                         const std::vector<std::string>& overrides,
                         const std::string& seed, const std::string& out_dir) {
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      throw sls::ConfigError("--override expects key=value, got '" + ov + "'");
    }
    kv[ov.substr(0, eq)] = ov.substr(eq + 1);
  }
  if (!seed.empty()) kv["run.seeds"] = seed;
  if (!out_dir.empty()) kv["run.out_dir"] = out_dir;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& seed, const std::string& out_dir) {
  auto kv = sls::parse_config_file(config_path);
  apply_cli_overrides(kv, overrides, seed, out_dir);
  const sls::HarnessConfig cfg = sls::resolve_config(kv);
  const sls::ExperimentResult result = sls::run_experiment(cfg);

  for (const sls::RunSummary& rs : result.runs) {
    std::printf("%-12s seed %-4llu %-8s final %-12s smoothed %-12s best %-12s (%.2fs)\n",
                rs.optimizer.c_str(), static_cast<unsigned long long>(rs.seed),
                rs.failed ? "FAILED" : (rs.nonfinite ? "NONFIN" : "ok"),
                sls::format_double(rs.final_loss).c_str(),
                sls::format_double(rs.final_smoothed).c_str(),
                sls::format_double(rs.best_metric).c_str(), rs.wall_time_s);
  }
  std::printf("summary: %s\n", result.summary_file.c_str());
  return result.ok ? 0 : 1;
}

int cmd_scan(const std::string& config_path, const std::vector<std::string>& overrides,
             const std::string& seed, const std::string& out_dir) {
  auto kv = sls::parse_config_file(config_path);
  apply_cli_overrides(kv, overrides, seed, out_dir);
  const sls::HarnessConfig cfg = sls::resolve_config(kv);
  const auto [res, path] = sls::scan_experiment(cfg);
  std::printf("scan: %zu points, argmax eta %s", res.points.size(),
              sls::format_double(res.points[res.argmax].eta).c_str());
  if (res.criterion_eta) {
    std::printf(", criterion eta %s", sls::format_double(*res.criterion_eta).c_str());
  }
  std::printf("\nwrote %s\n", path.c_str());
  return 0;
}

int cmd_report(const std::vector<std::string>& summaries) {
  std::fputs(sls::compare_report(summaries).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"line-search optimizer benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> summaries;

  CLI::App* run = app.add_subcommand("run", "run the (optimizer x seed) grid from a config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override run.seeds with a single seed");
  run->add_option("--out-dir", out_dir, "override the output directory");
  run->add_option("--override", overrides, "override a config key (key=value)");

  CLI::App* scan = app.add_subcommand("scan", "landscape slice scan from a config");
  scan->add_option("config", config_path, "config file")->required();
  scan->add_option("--seed", seed, "override run.seeds with a single seed");
  scan->add_option("--out-dir", out_dir, "override the output directory");
  scan->add_option("--override", overrides, "override a config key (key=value)");

  CLI::App* report = app.add_subcommand("report", "tabulate summary files");
  report->add_option("summaries", summaries, "summary.json files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides, seed, out_dir);
    if (scan->parsed()) return cmd_scan(config_path, overrides, seed, out_dir);
    if (report->parsed()) return cmd_report(summaries);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
