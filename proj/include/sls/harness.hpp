#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sls/core.hpp"
#include "sls/problems.hpp"
#include "sls/search.hpp"

namespace sls {

/// Flat key = value text with dotted section keys. '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Experiment description: problem, optimizer grid, run shape, search
/// settings. Every field has a default; unknown keys are rejected by
/// resolve_config with a diagnostic naming the key.
struct HarnessConfig {
  ProblemSpec problem;
  std::vector<std::string> optimizers = {"alsals"};
  std::vector<std::uint64_t> seeds = {1};
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  std::int64_t warmup_steps = 0;
  double warmup_peak = 0.0;  // 0: use the resolved eta_init
  std::string out_dir = "out";

  SearchConfig search;
  bool c_explicit = false;
  bool exhaust_explicit = false;

  std::size_t plasls_groups = 0;  // 0: whole-network steps
  PlaslsScheduler plasls_scheduler = PlaslsScheduler::round_robin;

  double fixed_eta_peak = 1e-3;
  double fixed_warm_frac = 0.1;

  double scan_grid_min = 1e-7;
  double scan_grid_max = 10.0;
  std::size_t scan_points = 60;
  std::string scan_direction = "sgd";
  std::int64_t scan_steps_before = 0;
  std::string scan_optimizer = "alsals";
};

/// Typed config from a parsed key/value map; throws ConfigError naming
/// any unknown key or unparsable value.
HarnessConfig resolve_config(const std::map<std::string, std::string>& kv);

/// Per-optimizer search settings: criterion from the kind, default c of
/// 0.6 for alsals and 0.1 otherwise unless explicitly set, exhaust skip
/// under the monotone guard, and growth forced off in salsa theorem
/// mode (monotone guard on).
SearchConfig resolve_search_config(const HarnessConfig& cfg, const std::string& kind);

/// Fully resolved flat map for one (optimizer, seed) run; echoed into
/// the trace header and hashed for provenance.
std::map<std::string, std::string> resolved_run_config(const HarnessConfig& cfg,
                                                       const std::string& kind,
                                                       std::uint64_t seed);

std::uint64_t fnv1a_hash(const std::string& text);
std::string format_double(double v);  // %.17g round-trip form

// --------------------------------------------------------------------------
// Trace files

/// Writes header (schema version, rng id, config hash, config echo),
/// column names, and one CSV row per record. Atomic: temp file + rename.
void write_trace_file(const std::string& path,
                      const std::map<std::string, std::string>& run_config,
                      const std::vector<TraceRecord>& records,
                      const std::string& run_status = "ok");

struct ParsedTrace {
  std::map<std::string, std::string> config;
  std::string rng_id;
  std::string config_hash;
  std::string run_status = "ok";
  std::vector<TraceRecord> records;
};

ParsedTrace parse_trace_file(const std::string& path);

/// Re-evaluates the recorded criterion for every non-skipped row: it
/// must hold at the recorded eta, fail at the previous trial's eta when
/// backtracking happened, and eta must equal eta0 * delta^n bit for bit.
/// Rows without a criterion (warmup, fixed, greedy) and exhausted-accept
/// rows are counted as exempt.
struct ReplayReport {
  std::size_t checked = 0;
  std::size_t exempt = 0;
  std::size_t failures = 0;
  std::string first_failure;
};
ReplayReport replay_trace(const ParsedTrace& trace);

/// Checks eta0_k == grow(eta_prev) across the whole trace, walking the
/// same eta_prev bookkeeping the optimizer used (accepted eta, halving
/// on skips, warmup handover).
struct GrowthReport {
  std::size_t checked = 0;
  std::size_t clamped = 0;
  std::size_t failures = 0;
  std::string first_failure;
};
GrowthReport verify_growth(const ParsedTrace& trace);

// --------------------------------------------------------------------------
// Running

struct RunSummary {
  std::string optimizer;
  std::uint64_t seed = 0;
  std::string trace_file;
  bool failed = false;
  std::string fail_reason;
  bool nonfinite = false;
  std::int64_t steps = 0;
  std::int64_t accepted = 0;
  std::int64_t skipped_steps = 0;
  double mean_backtracks = 0.0;
  int max_backtracks = 0;
  double final_loss = kTraceNaN;      // last epoch-end full-batch loss
  double final_smoothed = kTraceNaN;  // EMA(0.9) over per-step f_after
  double best_metric = kTraceNaN;     // max val accuracy, else min smoothed loss
  double wall_time_s = 0.0;           // console only, never serialized
};

/// Mirrors the aggregate block of a summary file.
struct SummaryRow {
  std::string problem;
  std::string optimizer;
  std::size_t seeds = 0;
  double mean_final_loss = kTraceNaN;
  double mean_final_smoothed = kTraceNaN;
  double mean_best_metric = kTraceNaN;
  double mean_backtracks = 0.0;
  int max_backtracks = 0;
  double wall_time_s = 0.0;  // console only
};

struct SingleRun {
  std::vector<TraceRecord> records;
  OptimizerState final_state;
  bool failed = false;
  std::string fail_reason;
};

/// One (optimizer kind, seed) run in memory. The batch stream, split,
/// warmup and epoch-end evaluations all live here.
SingleRun run_single(const HarnessConfig& cfg, const Objective& obj,
                     const std::string& kind, std::uint64_t seed);

/// Everything a summary needs, computed from a parsed trace alone.
RunSummary summarize_run(const ParsedTrace& trace);

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<SummaryRow> rows;
  std::string summary_file;
  bool ok = true;  // no failed runs, no NaN/Inf emissions
};

/// Runs the (optimizer x seed) grid, writes one trace per run plus a
/// summary json, both atomically. Summary numbers are computed by
/// re-parsing the written traces.
ExperimentResult run_experiment(const HarnessConfig& cfg);

// --------------------------------------------------------------------------
// Landscape scans

struct ScanPoint {
  double eta = 0.0;
  double loss = 0.0;
  double decrease = 0.0;
};

struct ScanResult {
  double f0 = 0.0;
  std::vector<ScanPoint> points;
  std::size_t argmax = 0;  // index of the largest finite decrease
  std::optional<double> criterion_eta;
};

std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Loss decrease f(w) - f(w + eta d) per grid point on a fixed batch.
/// Non-finite losses are recorded, not dropped. Never mutates state.
/// When a criterion config is supplied the accepted step size of one
/// line search from (w, state) is reported as criterion_eta.
ScanResult landscape_scan(const Objective& obj, const ParamVector& w,
                          std::span<const double> d, const Batch& batch,
                          std::span<const double> eta_grid,
                          const SearchConfig* criterion = nullptr,
                          const OptimizerState* state = nullptr);

/// Config-driven scan: optionally advances the configured optimizer a
/// few steps first, then scans along its next search direction and
/// writes a CSV. Returns the result and the output path.
std::pair<ScanResult, std::string> scan_experiment(const HarnessConfig& cfg);

// --------------------------------------------------------------------------
// Reports

/// Per-problem rows, per-optimizer columns of mean final losses, the
/// per-row minimum flagged with '*', plus a geometric-mean row across
/// problems (cells <= 0 are excluded and footnoted).
std::string compare_report(const std::vector<std::string>& summary_paths);

}  // namespace sls
