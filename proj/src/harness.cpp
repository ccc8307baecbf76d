#include "sls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sls {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double_value(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': cannot parse number from '" + s + "'");
  }
  return v;
}

std::int64_t parse_int_value(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': cannot parse integer from '" + s + "'");
  }
  return v;
}

std::size_t parse_size_value(const std::string& s, const std::string& key) {
  const std::int64_t v = parse_int_value(s, key);
  if (v < 0) throw ConfigError("config key '" + key + "': must be >= 0");
  return static_cast<std::size_t>(v);
}

bool parse_bool_value(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw ConfigError("config key '" + key + "': cannot parse boolean from '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur += ch;
    }
  }
  return out;
}

const std::set<std::string>& known_optimizers() {
  static const std::set<std::string> kinds = {"sls",   "adamsls",    "alsals",
                                              "salsa", "adam_fixed", "greedy"};
  return kinds;
}

bool is_line_search_kind(const std::string& kind) {
  return kind == "sls" || kind == "adamsls" || kind == "alsals" || kind == "salsa";
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

// CSV field escape: quote when a comma, quote or newline appears;
// embedded quotes are doubled.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_trace_double(const std::string& s) {
  if (s.empty()) return kTraceNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw EvalError("trace: cannot parse numeric field '" + s + "'", 0.0);
  return v;
}

constexpr const char* kTraceSchema = "slsbench-trace v1";
constexpr const char* kSummarySchema = "slsbench-summary v1";
constexpr const char* kTraceColumns =
    "step,batch_id,group,f0,f1,f_after,eta0,eta,n_backtracks,f_reject,grad_norm_sq,"
    "crit_term,dir_norm_sq,f_a,salsa_h_prev,salsa_s_prev,verdict,skipped,"
    "epoch_full_loss,val_metric,flags";
constexpr double kSmoothing = 0.9;  // report EMA factor

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + tmp);
    out << content;
    if (!out.good()) throw ConfigError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string config_map_text(const std::map<std::string, std::string>& kv) {
  std::string text;
  for (const auto& [k, v] : kv) {
    text += k;
    text += " = ";
    text += v;
    text += '\n';
  }
  return text;
}

double get_cfg_double(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("trace config missing key: " + key);
  return parse_double_value(it->second, key);
}

std::string get_cfg_str(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("trace config missing key: " + key);
  return it->second;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

HarnessConfig resolve_config(const std::map<std::string, std::string>& kv) {
  HarnessConfig cfg;
  if (const char* env = std::getenv("SLSBENCH_OUT_DIR")) cfg.out_dir = env;

  for (const auto& [key, value] : kv) {
    if (key == "problem.name") cfg.problem.name = value;
    else if (key == "problem.dim") cfg.problem.dim = parse_size_value(value, key);
    else if (key == "problem.n") cfg.problem.n_samples = parse_size_value(value, key);
    else if (key == "problem.seed") cfg.problem.seed = static_cast<std::uint64_t>(parse_int_value(value, key));
    else if (key == "problem.condition") cfg.problem.condition = parse_double_value(value, key);
    else if (key == "problem.reg") cfg.problem.reg = parse_double_value(value, key);
    else if (key == "problem.margin") cfg.problem.margin = parse_double_value(value, key);
    else if (key == "problem.rank") cfg.problem.rank = parse_size_value(value, key);
    else if (key == "problem.rows") cfg.problem.rows = parse_size_value(value, key);
    else if (key == "problem.cols") cfg.problem.cols = parse_size_value(value, key);
    else if (key == "problem.hidden") cfg.problem.hidden = parse_size_value(value, key);
    else if (key == "run.optimizers") cfg.optimizers = split_list(value);
    else if (key == "run.seeds") {
      cfg.seeds.clear();
      for (const std::string& s : split_list(value)) {
        cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int_value(s, key)));
      }
    } else if (key == "run.epochs") cfg.epochs = parse_size_value(value, key);
    else if (key == "run.batch_size") cfg.batch_size = parse_size_value(value, key);
    else if (key == "run.warmup_steps") cfg.warmup_steps = parse_int_value(value, key);
    else if (key == "run.warmup_peak") cfg.warmup_peak = parse_double_value(value, key);
    else if (key == "run.out_dir") cfg.out_dir = value;
    else if (key == "search.eta_init") cfg.search.eta_init = parse_double_value(value, key);
    else if (key == "search.delta") cfg.search.backtrack_factor = parse_double_value(value, key);
    else if (key == "search.growth_b") {
      cfg.search.growth_b = (trim(value) == "off") ? 0 : static_cast<int>(parse_int_value(value, key));
    } else if (key == "search.max_backtracks") cfg.search.max_backtracks = static_cast<int>(parse_int_value(value, key));
    else if (key == "search.eta_min") cfg.search.eta_min = parse_double_value(value, key);
    else if (key == "search.eta_max") cfg.search.eta_max = parse_double_value(value, key);
    else if (key == "search.c") {
      cfg.search.c = parse_double_value(value, key);
      cfg.c_explicit = true;
    } else if (key == "search.monotone_guard") cfg.search.monotone_guard = parse_bool_value(value, key);
    else if (key == "search.exhaust") {
      cfg.search.exhaust = exhaust_from_string(trim(value));
      cfg.exhaust_explicit = true;
    } else if (key == "adam.beta1") cfg.search.adam.beta1 = parse_double_value(value, key);
    else if (key == "adam.beta2") cfg.search.adam.beta2 = parse_double_value(value, key);
    else if (key == "adam.eps") cfg.search.adam.eps = parse_double_value(value, key);
    else if (key == "probe.eps") cfg.search.probe.eps_probe = parse_double_value(value, key);
    else if (key == "probe.lambda") cfg.search.probe.lambda_probe = parse_double_value(value, key);
    else if (key == "salsa.beta3") cfg.search.salsa_beta3 = parse_double_value(value, key);
    else if (key == "salsa.adam_direction") cfg.search.salsa_adam_direction = parse_bool_value(value, key);
    else if (key == "salsa.preconditioned") cfg.search.salsa_preconditioned = parse_bool_value(value, key);
    else if (key == "plasls.groups") cfg.plasls_groups = parse_size_value(value, key);
    else if (key == "plasls.scheduler") cfg.plasls_scheduler = scheduler_from_string(trim(value));
    else if (key == "plasls.lambda_w") cfg.search.plasls_lambda = parse_double_value(value, key);
    else if (key == "fixed.eta_peak") cfg.fixed_eta_peak = parse_double_value(value, key);
    else if (key == "fixed.warm_frac") cfg.fixed_warm_frac = parse_double_value(value, key);
    else if (key == "scan.grid_min") cfg.scan_grid_min = parse_double_value(value, key);
    else if (key == "scan.grid_max") cfg.scan_grid_max = parse_double_value(value, key);
    else if (key == "scan.points") cfg.scan_points = parse_size_value(value, key);
    else if (key == "scan.direction") cfg.scan_direction = trim(value);
    else if (key == "scan.steps_before") cfg.scan_steps_before = parse_int_value(value, key);
    else if (key == "scan.optimizer") cfg.scan_optimizer = trim(value);
    else throw ConfigError("unknown config key: " + key);
  }

  if (cfg.optimizers.empty()) throw ConfigError("run.optimizers: need at least one optimizer");
  for (const std::string& kind : cfg.optimizers) {
    if (!known_optimizers().count(kind)) throw ConfigError("unknown optimizer kind: " + kind);
  }
  if (cfg.seeds.empty()) throw ConfigError("run.seeds: need at least one seed");
  if (cfg.epochs < 1) throw ConfigError("run.epochs: must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("run.batch_size: must be >= 1");
  if (cfg.warmup_steps < 0) throw ConfigError("run.warmup_steps: must be >= 0");
  if (cfg.scan_direction != "sgd" && cfg.scan_direction != "adam") {
    throw ConfigError("scan.direction: expected sgd or adam");
  }
  if (cfg.scan_points < 2) throw ConfigError("scan.points: need at least 2");
  return cfg;
}

SearchConfig resolve_search_config(const HarnessConfig& cfg, const std::string& kind) {
  SearchConfig s = cfg.search;
  if (kind == "sls") s.criterion = CriterionKind::armijo;
  else if (kind == "adamsls") s.criterion = CriterionKind::preconditioned_armijo;
  else if (kind == "alsals") s.criterion = CriterionKind::alsals;
  else if (kind == "salsa") s.criterion = CriterionKind::salsa;
  else if (kind == "adam_fixed" || kind == "greedy") s.criterion = CriterionKind::armijo;
  else throw ConfigError("unknown optimizer kind: " + kind);

  if (!cfg.c_explicit) s.c = (kind == "alsals") ? 0.6 : 0.1;
  if (!cfg.exhaust_explicit) {
    s.exhaust = s.monotone_guard ? ExhaustPolicy::skip : ExhaustPolicy::accept_last;
  }
  // Theorem mode: the smoothed criterion's convergence argument needs a
  // non-increasing step size, so growth is switched off.
  if (kind == "salsa" && s.monotone_guard) s.growth_b = 0;
  s.validate();
  return s;
}

std::map<std::string, std::string> resolved_run_config(const HarnessConfig& cfg,
                                                       const std::string& kind,
                                                       std::uint64_t seed) {
  const SearchConfig s = resolve_search_config(cfg, kind);
  std::map<std::string, std::string> kv;
  kv["problem.name"] = cfg.problem.name;
  kv["problem.dim"] = std::to_string(cfg.problem.dim);
  kv["problem.n"] = std::to_string(cfg.problem.n_samples);
  kv["problem.seed"] = std::to_string(cfg.problem.seed);
  kv["problem.condition"] = format_double(cfg.problem.condition);
  kv["problem.reg"] = format_double(cfg.problem.reg);
  kv["problem.margin"] = format_double(cfg.problem.margin);
  kv["problem.rank"] = std::to_string(cfg.problem.rank);
  kv["problem.rows"] = std::to_string(cfg.problem.rows);
  kv["problem.cols"] = std::to_string(cfg.problem.cols);
  kv["problem.hidden"] = std::to_string(cfg.problem.hidden);
  kv["run.optimizer"] = kind;
  kv["run.seed"] = std::to_string(seed);
  kv["run.epochs"] = std::to_string(cfg.epochs);
  kv["run.batch_size"] = std::to_string(cfg.batch_size);
  kv["run.warmup_steps"] = std::to_string(cfg.warmup_steps);
  kv["run.warmup_peak"] = format_double(cfg.warmup_peak > 0.0 ? cfg.warmup_peak : s.eta_init);
  kv["search.eta_init"] = format_double(s.eta_init);
  kv["search.delta"] = format_double(s.backtrack_factor);
  kv["search.growth_b"] = std::to_string(s.growth_b);
  kv["search.max_backtracks"] = std::to_string(s.max_backtracks);
  kv["search.eta_min"] = format_double(s.eta_min);
  kv["search.eta_max"] = format_double(s.eta_max);
  kv["search.c"] = format_double(s.c);
  kv["search.criterion"] = to_string(s.criterion);
  kv["search.monotone_guard"] = bool_str(s.monotone_guard);
  kv["search.exhaust"] = to_string(s.exhaust);
  kv["adam.beta1"] = format_double(s.adam.beta1);
  kv["adam.beta2"] = format_double(s.adam.beta2);
  kv["adam.eps"] = format_double(s.adam.eps);
  kv["probe.eps"] = format_double(s.probe.eps_probe);
  kv["probe.lambda"] = format_double(s.probe.lambda_probe);
  kv["salsa.beta3"] = format_double(s.salsa_beta3);
  kv["salsa.adam_direction"] = bool_str(s.salsa_adam_direction);
  kv["salsa.preconditioned"] = bool_str(s.salsa_preconditioned);
  kv["plasls.groups"] = std::to_string(cfg.plasls_groups);
  kv["plasls.scheduler"] = to_string(cfg.plasls_scheduler);
  kv["plasls.lambda_w"] = format_double(s.plasls_lambda);
  kv["fixed.eta_peak"] = format_double(cfg.fixed_eta_peak);
  kv["fixed.warm_frac"] = format_double(cfg.fixed_warm_frac);
  return kv;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Trace files

void write_trace_file(const std::string& path,
                      const std::map<std::string, std::string>& run_config,
                      const std::vector<TraceRecord>& records,
                      const std::string& run_status) {
  std::string text;
  text += std::string("# ") + kTraceSchema + "\n";
  text += std::string("# rng ") + SeededRng::kAlgorithmId + "\n";
  char hashbuf[24];
  std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(config_map_text(run_config))));
  text += std::string("# config_hash ") + hashbuf + "\n";
  for (const auto& [k, v] : run_config) {
    text += "# cfg " + k + " = " + v + "\n";
  }
  text += std::string("# run_status ") + run_status + "\n";
  text += std::string(kTraceColumns) + "\n";

  for (const TraceRecord& r : records) {
    std::string row;
    row += std::to_string(r.step) + ",";
    row += std::to_string(r.batch_id) + ",";
    row += std::to_string(r.group) + ",";
    row += format_double(r.f0) + ",";
    row += format_double(r.f1) + ",";
    row += format_double(r.f_after) + ",";
    row += format_double(r.eta0) + ",";
    row += format_double(r.eta) + ",";
    row += std::to_string(r.n_backtracks) + ",";
    row += (r.n_backtracks > 0 || r.skipped) ? format_double(r.f_reject) : std::string();
    row += ",";
    row += format_double(r.grad_norm_sq) + ",";
    row += format_double(r.crit_term) + ",";
    row += format_double(r.dir_norm_sq) + ",";
    row += std::isnan(r.f_a) ? std::string() : format_double(r.f_a);
    row += ",";
    row += std::isnan(r.salsa_h_prev) ? std::string() : format_double(r.salsa_h_prev);
    row += ",";
    row += std::isnan(r.salsa_s_prev) ? std::string() : format_double(r.salsa_s_prev);
    row += ",";
    row += r.verdict ? "1," : "0,";
    row += r.skipped ? "1," : "0,";
    row += std::isnan(r.epoch_full_loss) ? std::string() : format_double(r.epoch_full_loss);
    row += ",";
    row += std::isnan(r.val_metric) ? std::string() : format_double(r.val_metric);
    row += ",";
    row += csv_escape(r.flags);
    text += row + "\n";
  }
  atomic_write(path, text);
}

ParsedTrace parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  ParsedTrace trace;
  std::string line;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      if (body.rfind("rng ", 0) == 0) trace.rng_id = body.substr(4);
      else if (body.rfind("config_hash ", 0) == 0) trace.config_hash = body.substr(12);
      else if (body.rfind("run_status ", 0) == 0) trace.run_status = body.substr(11);
      else if (body.rfind("cfg ", 0) == 0) {
        const std::string kvline = body.substr(4);
        const std::size_t eq = kvline.find('=');
        if (eq != std::string::npos) {
          trace.config[trim(kvline.substr(0, eq))] = trim(kvline.substr(eq + 1));
        }
      }
      continue;
    }
    if (!saw_columns) {
      if (line != kTraceColumns) {
        throw ConfigError("trace file has unexpected column header: " + path);
      }
      saw_columns = true;
      continue;
    }
    const std::vector<std::string> f = csv_split(line);
    if (f.size() != 21) throw ConfigError("trace row with wrong field count in " + path);
    TraceRecord r;
    r.step = parse_int_value(f[0], "step");
    r.batch_id = parse_int_value(f[1], "batch_id");
    r.group = static_cast<int>(parse_int_value(f[2], "group"));
    r.f0 = parse_trace_double(f[3]);
    r.f1 = parse_trace_double(f[4]);
    r.f_after = parse_trace_double(f[5]);
    r.eta0 = parse_trace_double(f[6]);
    r.eta = parse_trace_double(f[7]);
    r.n_backtracks = static_cast<int>(parse_int_value(f[8], "n_backtracks"));
    r.f_reject = parse_trace_double(f[9]);
    r.grad_norm_sq = parse_trace_double(f[10]);
    r.crit_term = parse_trace_double(f[11]);
    r.dir_norm_sq = parse_trace_double(f[12]);
    r.f_a = parse_trace_double(f[13]);
    r.salsa_h_prev = parse_trace_double(f[14]);
    r.salsa_s_prev = parse_trace_double(f[15]);
    r.verdict = f[16] == "1";
    r.skipped = f[17] == "1";
    r.epoch_full_loss = parse_trace_double(f[18]);
    r.val_metric = parse_trace_double(f[19]);
    r.flags = f[20];
    trace.records.push_back(std::move(r));
  }
  if (!saw_columns) throw ConfigError("trace file has no column header: " + path);
  return trace;
}

ReplayReport replay_trace(const ParsedTrace& trace) {
  ReplayReport rep;
  const std::string kind = get_cfg_str(trace.config, "run.optimizer");
  if (!is_line_search_kind(kind)) {
    rep.exempt = trace.records.size();
    return rep;
  }
  const CriterionKind crit = criterion_from_string(get_cfg_str(trace.config, "search.criterion"));
  const double c = get_cfg_double(trace.config, "search.c");
  const double delta = get_cfg_double(trace.config, "search.delta");
  const double beta3 = get_cfg_double(trace.config, "salsa.beta3");
  const bool guard = get_cfg_str(trace.config, "search.monotone_guard") == "true";

  auto criterion_holds = [&](const TraceRecord& r, double f1, double eta) {
    bool ok = false;
    switch (crit) {
      case CriterionKind::armijo:
      case CriterionKind::preconditioned_armijo:
        ok = armijo_satisfied(r.f0, f1, eta, r.crit_term, c);
        break;
      case CriterionKind::alsals:
        ok = alsals_satisfied(r.f0, f1, eta, r.f_a, c);
        break;
      case CriterionKind::salsa: {
        const SalsaState prev{r.salsa_h_prev, r.salsa_s_prev, beta3, 0};
        ok = salsa_satisfied(prev, r.f0 - f1, r.crit_term, eta, c);
        break;
      }
    }
    return ok && (!guard || r.f0 - f1 >= 0.0);
  };

  auto fail = [&](const TraceRecord& r, const std::string& why) {
    ++rep.failures;
    if (rep.first_failure.empty()) {
      rep.first_failure = "step " + std::to_string(r.step) + ": " + why;
    }
  };

  for (const TraceRecord& r : trace.records) {
    if (r.skipped || r.has_flag("warmup") || r.has_flag("fixed") || r.has_flag("greedy") ||
        r.has_flag("exhausted")) {
      ++rep.exempt;
      continue;
    }
    ++rep.checked;
    const double eta_expect =
        r.n_backtracks == 0 ? r.eta0
                            : r.eta0 * std::pow(delta, static_cast<double>(r.n_backtracks));
    if (eta_expect != r.eta) {
      fail(r, "eta != eta0 * delta^n");
      continue;
    }
    if (!criterion_holds(r, r.f1, r.eta)) {
      fail(r, "criterion does not re-evaluate true at the accepted trial");
      continue;
    }
    if (r.n_backtracks > 0) {
      const double eta_prev_trial =
          r.eta0 * std::pow(delta, static_cast<double>(r.n_backtracks - 1));
      // A non-finite rejected loss was a criterion failure by definition.
      if (std::isfinite(r.f_reject) && criterion_holds(r, r.f_reject, eta_prev_trial)) {
        fail(r, "criterion re-evaluates true at the last rejected trial");
      }
    }
  }
  return rep;
}

GrowthReport verify_growth(const ParsedTrace& trace) {
  GrowthReport rep;
  const std::string kind = get_cfg_str(trace.config, "run.optimizer");
  if (!is_line_search_kind(kind)) return rep;
  const int growth_b = static_cast<int>(parse_int_value(
      get_cfg_str(trace.config, "search.growth_b"), "search.growth_b"));
  const double eta_min = get_cfg_double(trace.config, "search.eta_min");
  const double eta_max = get_cfg_double(trace.config, "search.eta_max");
  const double eta_init = get_cfg_double(trace.config, "search.eta_init");
  const double factor = growth_b > 0 ? std::exp2(1.0 / static_cast<double>(growth_b)) : 1.0;
  const std::size_t n_groups =
      std::max<std::size_t>(1, parse_size_value(get_cfg_str(trace.config, "plasls.groups"),
                                                "plasls.groups"));

  std::vector<double> eta_prev(n_groups, eta_init);
  auto fail = [&](const TraceRecord& r, const std::string& why) {
    ++rep.failures;
    if (rep.first_failure.empty()) {
      rep.first_failure = "step " + std::to_string(r.step) + ": " + why;
    }
  };

  for (const TraceRecord& r : trace.records) {
    const std::size_t gi = static_cast<std::size_t>(r.group) < n_groups
                               ? static_cast<std::size_t>(r.group)
                               : 0;
    if (r.has_flag("warmup")) {
      // Warmup hands its ramp value to every group.
      const double handover = std::clamp(r.eta, eta_min, eta_max);
      std::fill(eta_prev.begin(), eta_prev.end(), handover);
      continue;
    }
    if (r.has_flag("fa_fail")) {
      eta_prev[gi] = std::max(eta_prev[gi] * 0.5, eta_min);
      continue;
    }
    ++rep.checked;
    double expect = growth_b > 0 ? eta_prev[gi] * factor : eta_prev[gi];
    const bool clamp_max = expect > eta_max;
    const bool clamp_min = expect < eta_min;
    expect = std::clamp(expect, eta_min, eta_max);
    if (clamp_max || clamp_min) {
      ++rep.clamped;
      if (!(r.has_flag("clamp_max") || r.has_flag("clamp_min"))) {
        fail(r, "clamped growth not flagged in trace");
      }
    }
    if (expect != r.eta0) {
      fail(r, "eta0 != grown previous step size");
    }
    if (r.skipped) {
      eta_prev[gi] = std::max(eta_prev[gi] * 0.5, eta_min);
    } else {
      eta_prev[gi] = std::clamp(r.eta, eta_min, eta_max);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;  // empty when no split
};

SplitIndices make_split(const HarnessConfig& cfg, const Objective& obj) {
  SplitIndices split;
  const std::size_t n = obj.sample_count();
  const bool classification = cfg.problem.name == "logistic" || cfg.problem.name == "mlp";
  if (!classification || n < 5) {
    split.train.resize(n);
    for (std::size_t i = 0; i < n; ++i) split.train[i] = i;
    return split;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SeededRng rng(cfg.problem.seed ^ 0x53504C4954ULL);  // "SPLIT"
  rng.shuffle(order);
  const std::size_t n_val = n / 5;
  split.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  return split;
}

// Warmup: fixed ramp step, no search, no criterion. Directions follow
// the optimizer kind so the handover is seamless.
StepResult warmup_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                       const SearchConfig& cfg, const std::string& kind, double eta) {
  const double f0 = obj.loss(state.w, batch);
  if (!std::isfinite(f0)) throw EvalError("warmup: non-finite loss", f0);
  const std::vector<double> g = obj.gradient(state.w, batch);
  const bool adam_dir = kind == "adamsls" || kind == "alsals" || kind == "adam_fixed" ||
                        (kind == "salsa" && cfg.salsa_adam_direction);

  OptimizerState next = state;
  next.step = state.step + 1;
  std::vector<double> d;
  if (adam_dir) {
    next.adam = adam_update_state(state.adam, g, cfg.adam);
    d = adam_direction(next.adam, cfg.adam);
  } else {
    d = sgd_direction(g);
  }
  next.w = axpy(state.w, eta, d);
  const double handover = std::clamp(eta, cfg.eta_min, cfg.eta_max);
  next.eta_prev = handover;
  std::fill(next.group_etas.begin(), next.group_etas.end(), handover);

  TraceRecord rec;
  rec.step = state.step;
  rec.batch_id = batch.id;
  rec.f0 = f0;
  rec.grad_norm_sq = norm_sq(g);
  rec.dir_norm_sq = norm_sq(d);
  rec.eta0 = eta;
  rec.eta = eta;
  rec.f_after = obj.loss(next.w, batch);
  rec.f1 = rec.f_after;
  rec.verdict = true;
  rec.add_flag("warmup");
  return {std::move(next), std::move(rec)};
}

StepResult greedy_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                       const SearchConfig& cfg, std::span<const double> grid) {
  const double f0 = obj.loss(state.w, batch);
  if (!std::isfinite(f0)) throw EvalError("greedy: non-finite loss", f0);
  const std::vector<double> g = obj.gradient(state.w, batch);
  const std::vector<double> d = sgd_direction(g);

  const ScanResult scan = landscape_scan(obj, state.w, d, batch, grid);
  const ScanPoint& best = scan.points[scan.argmax];

  OptimizerState next = state;
  next.step = state.step + 1;

  TraceRecord rec;
  rec.step = state.step;
  rec.batch_id = batch.id;
  rec.f0 = f0;
  rec.grad_norm_sq = norm_sq(g);
  rec.crit_term = norm_sq(g);
  rec.dir_norm_sq = norm_sq(d);
  rec.add_flag("greedy");

  if (!std::isfinite(best.decrease) || best.decrease <= 0.0) {
    rec.skipped = true;
    rec.f1 = f0;
    rec.f_after = f0;
    return {std::move(next), std::move(rec)};
  }
  next.w = axpy(state.w, best.eta, d);
  next.eta_prev = std::clamp(best.eta, cfg.eta_min, cfg.eta_max);
  rec.eta0 = best.eta;
  rec.eta = best.eta;
  rec.f1 = best.loss;
  rec.f_after = best.loss;
  rec.verdict = true;
  return {std::move(next), std::move(rec)};
}

Batch remap_batch(const Batch& b, const std::vector<std::size_t>& train_idx) {
  Batch out;
  out.id = b.id;
  out.indices.reserve(b.indices.size());
  for (std::size_t pos : b.indices) out.indices.push_back(train_idx[pos]);
  return out;
}

}  // namespace

SingleRun run_single(const HarnessConfig& cfg, const Objective& obj,
                     const std::string& kind, std::uint64_t seed) {
  const SearchConfig scfg = resolve_search_config(cfg, kind);
  const SplitIndices split = make_split(cfg, obj);
  const std::size_t n_train = split.train.size();
  const std::size_t bs = std::min(cfg.batch_size, n_train);
  const std::size_t steps_per_epoch = (n_train + bs - 1) / bs;
  const std::int64_t total_steps =
      static_cast<std::int64_t>(cfg.epochs) * static_cast<std::int64_t>(steps_per_epoch);
  if (cfg.warmup_steps >= total_steps && cfg.warmup_steps > 0) {
    throw ConfigError("run.warmup_steps: must be below the total step count");
  }
  const double warmup_peak = cfg.warmup_peak > 0.0 ? cfg.warmup_peak : scfg.eta_init;

  std::optional<GroupPartition> partition;
  std::size_t n_groups = 1;
  if (cfg.plasls_groups >= 1 && is_line_search_kind(kind)) {
    partition = partition_params(obj.dim(),
                                 PartitionScheme::even(std::min(cfg.plasls_groups, obj.dim())));
    n_groups = partition->group_count();
  }

  SingleRun run;
  run.final_state = init_optimizer_state(obj, scfg, n_groups);
  OptimizerState& state = run.final_state;

  SeededRng batch_rng(seed);
  SeededRng sched_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const std::vector<double> grid = log_grid(cfg.scan_grid_min, cfg.scan_grid_max, cfg.scan_points);
  const Batch train_eval{split.train, -1};
  const Batch val_eval{split.val, -2};

  std::int64_t next_batch_id = 0;
  try {
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<Batch> batches = sample_epoch(n_train, bs, batch_rng, next_batch_id);
      next_batch_id += static_cast<std::int64_t>(batches.size());
      for (std::size_t bi = 0; bi < batches.size(); ++bi) {
        const Batch batch =
            split.val.empty() ? std::move(batches[bi]) : remap_batch(batches[bi], split.train);
        StepResult r;
        if (state.step < cfg.warmup_steps) {
          const double eta = warmup_peak * (static_cast<double>(state.step + 1) /
                                            static_cast<double>(cfg.warmup_steps));
          r = warmup_step(state, obj, batch, scfg, kind, eta);
        } else if (kind == "adam_fixed") {
          const double eta =
              cosine_schedule(state.step, total_steps, cfg.fixed_eta_peak, cfg.fixed_warm_frac);
          r = fixed_adam_step(state, obj, batch, scfg, eta);
        } else if (kind == "greedy") {
          r = greedy_step(state, obj, batch, scfg, grid);
        } else if (partition) {
          r = plasls_step(state, obj, batch, scfg, *partition, cfg.plasls_scheduler, sched_rng);
        } else {
          r = line_search_step(state, obj, batch, scfg);
        }
        if (cfg.warmup_steps > 0 && state.step == cfg.warmup_steps) {
          r.trace.add_flag("handover");
        }
        state = std::move(r.state);
        if (bi + 1 == batches.size()) {
          r.trace.epoch_full_loss = obj.loss(state.w, train_eval);
          if (!split.val.empty()) {
            r.trace.val_metric = obj.accuracy(state.w, val_eval);
          }
        }
        run.records.push_back(std::move(r.trace));
      }
    }
  } catch (const EvalError& e) {
    run.failed = true;
    run.fail_reason = e.what();
  }
  return run;
}

RunSummary summarize_run(const ParsedTrace& trace) {
  RunSummary s;
  s.optimizer = get_cfg_str(trace.config, "run.optimizer");
  s.seed = static_cast<std::uint64_t>(
      parse_int_value(get_cfg_str(trace.config, "run.seed"), "run.seed"));
  s.failed = trace.run_status != "ok";
  if (s.failed) s.fail_reason = trace.run_status;
  s.steps = static_cast<std::int64_t>(trace.records.size());

  double ema = kTraceNaN;
  double min_ema = kTraceNaN;
  double best_acc = kTraceNaN;
  double total_backtracks = 0.0;
  for (const TraceRecord& r : trace.records) {
    if (r.skipped) {
      ++s.skipped_steps;
    } else {
      ++s.accepted;
    }
    total_backtracks += r.n_backtracks;
    s.max_backtracks = std::max(s.max_backtracks, r.n_backtracks);

    ema = std::isnan(ema) ? r.f_after : kSmoothing * ema + (1.0 - kSmoothing) * r.f_after;
    if (std::isnan(min_ema) || ema < min_ema) min_ema = ema;
    if (!std::isnan(r.val_metric) && (std::isnan(best_acc) || r.val_metric > best_acc)) {
      best_acc = r.val_metric;
    }
    if (!std::isnan(r.epoch_full_loss)) s.final_loss = r.epoch_full_loss;

    const bool core_finite =
        std::isfinite(r.f0) && std::isfinite(r.f_after) &&
        (r.skipped || (std::isfinite(r.f1) && std::isfinite(r.eta0) && std::isfinite(r.eta) &&
                       std::isfinite(r.grad_norm_sq) && std::isfinite(r.crit_term) &&
                       std::isfinite(r.dir_norm_sq)));
    if (!core_finite) s.nonfinite = true;
    if (!std::isnan(r.f_a) && !std::isfinite(r.f_a)) s.nonfinite = true;
  }
  if (s.steps > 0) s.mean_backtracks = total_backtracks / static_cast<double>(s.steps);
  s.final_smoothed = ema;
  s.best_metric = std::isnan(best_acc) ? min_ema : best_acc;
  return s;
}

ExperimentResult run_experiment(const HarnessConfig& cfg) {
  const std::shared_ptr<const Objective> obj = make_objective(cfg.problem);
  std::filesystem::create_directories(cfg.out_dir);

  ExperimentResult result;
  for (const std::string& kind : cfg.optimizers) {
    for (std::uint64_t seed : cfg.seeds) {
      const auto t0 = std::chrono::steady_clock::now();
      const SingleRun run = run_single(cfg, *obj, kind, seed);
      const auto t1 = std::chrono::steady_clock::now();

      const std::string file = cfg.problem.name + "_" + kind + "_s" + std::to_string(seed) +
                               ".trace.csv";
      const std::string path = (std::filesystem::path(cfg.out_dir) / file).string();
      write_trace_file(path, resolved_run_config(cfg, kind, seed), run.records,
                       run.failed ? "failed " + run.fail_reason : "ok");

      RunSummary rs = summarize_run(parse_trace_file(path));
      rs.trace_file = file;
      rs.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
      if (rs.failed || rs.nonfinite) result.ok = false;
      result.runs.push_back(std::move(rs));
    }
  }

  for (const std::string& kind : cfg.optimizers) {
    SummaryRow row;
    row.problem = cfg.problem.name;
    row.optimizer = kind;
    double sum_final = 0.0, sum_smoothed = 0.0, sum_best = 0.0, sum_bt = 0.0, sum_wall = 0.0;
    for (const RunSummary& rs : result.runs) {
      if (rs.optimizer != kind) continue;
      sum_wall += rs.wall_time_s;
      if (rs.failed) continue;
      ++row.seeds;
      sum_final += rs.final_loss;
      sum_smoothed += rs.final_smoothed;
      sum_best += rs.best_metric;
      sum_bt += rs.mean_backtracks;
      row.max_backtracks = std::max(row.max_backtracks, rs.max_backtracks);
    }
    if (row.seeds > 0) {
      const double n = static_cast<double>(row.seeds);
      row.mean_final_loss = sum_final / n;
      row.mean_final_smoothed = sum_smoothed / n;
      row.mean_best_metric = sum_best / n;
      row.mean_backtracks = sum_bt / n;
    }
    row.wall_time_s = sum_wall;
    result.rows.push_back(std::move(row));
  }

  // Summary file. Wall times stay off the file so re-runs are
  // byte-identical; they are reported on the console instead.
  json j;
  j["schema"] = kSummarySchema;
  j["problem"] = cfg.problem.name;
  json jc;
  const auto base = resolved_run_config(cfg, cfg.optimizers.front(), cfg.seeds.front());
  for (const auto& [k, v] : base) jc[k] = v;
  {
    std::string opts;
    for (const std::string& k : cfg.optimizers) opts += (opts.empty() ? "" : ",") + k;
    jc["run.optimizer"] = opts;
    std::string seeds;
    for (std::uint64_t s : cfg.seeds) {
      seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
    }
    jc["run.seed"] = seeds;
  }
  j["config"] = jc;
  char hashbuf[24];
  std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(jc.dump())));
  j["config_hash"] = hashbuf;

  json jruns = json::array();
  for (const RunSummary& rs : result.runs) {
    json r;
    r["optimizer"] = rs.optimizer;
    r["seed"] = rs.seed;
    r["trace"] = rs.trace_file;
    r["failed"] = rs.failed;
    r["fail_reason"] = rs.fail_reason;
    r["nonfinite"] = rs.nonfinite;
    r["steps"] = rs.steps;
    r["accepted"] = rs.accepted;
    r["skipped"] = rs.skipped_steps;
    r["mean_backtracks"] = rs.mean_backtracks;
    r["max_backtracks"] = rs.max_backtracks;
    r["final_loss"] = rs.final_loss;
    r["final_smoothed"] = rs.final_smoothed;
    r["best_metric"] = rs.best_metric;
    jruns.push_back(std::move(r));
  }
  j["runs"] = std::move(jruns);

  json jrows = json::array();
  for (const SummaryRow& row : result.rows) {
    json r;
    r["optimizer"] = row.optimizer;
    r["seeds"] = row.seeds;
    r["mean_final_loss"] = row.mean_final_loss;
    r["mean_final_smoothed"] = row.mean_final_smoothed;
    r["mean_best_metric"] = row.mean_best_metric;
    r["mean_backtracks"] = row.mean_backtracks;
    r["max_backtracks"] = row.max_backtracks;
    jrows.push_back(std::move(r));
  }
  j["aggregates"] = std::move(jrows);

  const std::string spath = (std::filesystem::path(cfg.out_dir) / "summary.json").string();
  atomic_write(spath, j.dump(2) + "\n");
  result.summary_file = spath;
  return result;
}

// ---------------------------------------------------------------------------
// Landscape scans

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("log_grid: need 0 < lo < hi");
  if (n < 2) throw ConfigError("log_grid: need at least 2 points");
  std::vector<double> grid(n);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
    grid[i] = std::exp(llo + frac * (lhi - llo));
  }
  return grid;
}

ScanResult landscape_scan(const Objective& obj, const ParamVector& w,
                          std::span<const double> d, const Batch& batch,
                          std::span<const double> eta_grid,
                          const SearchConfig* criterion, const OptimizerState* state) {
  if (eta_grid.empty()) throw ContractError("landscape_scan: empty grid");
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    if (!(eta_grid[i] > 0.0)) throw ContractError("landscape_scan: grid must be positive");
    if (i > 0 && !(eta_grid[i] > eta_grid[i - 1])) {
      throw ContractError("landscape_scan: grid must be sorted ascending");
    }
  }
  ScanResult res;
  res.f0 = obj.loss(w, batch);
  res.points.reserve(eta_grid.size());
  bool have_best = false;
  double best = 0.0;
  for (double eta : eta_grid) {
    ScanPoint p;
    p.eta = eta;
    p.loss = obj.loss(axpy(w, eta, d), batch);
    p.decrease = res.f0 - p.loss;
    if (std::isfinite(p.decrease) && (!have_best || p.decrease > best)) {
      best = p.decrease;
      res.argmax = res.points.size();
      have_best = true;
    }
    res.points.push_back(p);
  }
  if (criterion) {
    OptimizerState st = state ? *state : init_optimizer_state(obj, *criterion);
    st.w = w;
    const StepResult r = line_search_step(st, obj, batch, *criterion);
    if (!r.trace.skipped) res.criterion_eta = r.trace.eta;
  }
  return res;
}

std::pair<ScanResult, std::string> scan_experiment(const HarnessConfig& cfg) {
  if (!is_line_search_kind(cfg.scan_optimizer)) {
    throw ConfigError("scan.optimizer: expected a line-search optimizer kind");
  }
  const std::shared_ptr<const Objective> obj = make_objective(cfg.problem);
  const SearchConfig scfg = resolve_search_config(cfg, cfg.scan_optimizer);
  OptimizerState state = init_optimizer_state(*obj, scfg);

  SeededRng batch_rng(cfg.seeds.front());
  const std::size_t n = obj->sample_count();
  const std::size_t bs = std::min(cfg.batch_size, n);
  std::int64_t next_batch_id = 0;
  std::vector<Batch> batches = sample_epoch(n, bs, batch_rng, next_batch_id);
  std::size_t bi = 0;
  for (std::int64_t s = 0; s < cfg.scan_steps_before; ++s) {
    if (bi == batches.size()) {
      next_batch_id += static_cast<std::int64_t>(batches.size());
      batches = sample_epoch(n, bs, batch_rng, next_batch_id);
      bi = 0;
    }
    state = line_search_step(state, *obj, batches[bi++], scfg).state;
  }
  if (bi == batches.size()) {
    next_batch_id += static_cast<std::int64_t>(batches.size());
    batches = sample_epoch(n, bs, batch_rng, next_batch_id);
    bi = 0;
  }
  const Batch& batch = batches[bi];

  const std::vector<double> g = obj->gradient(state.w, batch);
  std::vector<double> d;
  if (cfg.scan_direction == "adam") {
    const AdamState upd = adam_update_state(state.adam, g, scfg.adam);
    d = adam_direction(upd, scfg.adam);
  } else {
    d = sgd_direction(g);
  }
  const std::vector<double> grid = log_grid(cfg.scan_grid_min, cfg.scan_grid_max, cfg.scan_points);
  const ScanResult res = landscape_scan(*obj, state.w, d, batch, grid, &scfg, &state);

  std::filesystem::create_directories(cfg.out_dir);
  std::string text;
  text += std::string("# slsbench-scan v1\n");
  text += "# problem " + cfg.problem.name + "\n";
  text += "# optimizer " + cfg.scan_optimizer + "\n";
  text += "# direction " + cfg.scan_direction + "\n";
  text += "# steps_before " + std::to_string(cfg.scan_steps_before) + "\n";
  text += "# f0 " + format_double(res.f0) + "\n";
  text += "# argmax_eta " + format_double(res.points[res.argmax].eta) + "\n";
  text += "# criterion_eta ";
  text += res.criterion_eta ? format_double(*res.criterion_eta) : "none";
  text += "\n";
  text += "eta,loss,decrease\n";
  for (const ScanPoint& p : res.points) {
    text += format_double(p.eta) + "," + format_double(p.loss) + "," +
            format_double(p.decrease) + "\n";
  }
  const std::string path =
      (std::filesystem::path(cfg.out_dir) / (cfg.problem.name + "_scan.csv")).string();
  atomic_write(path, text);
  return {res, path};
}

// ---------------------------------------------------------------------------
// Reports

std::string compare_report(const std::vector<std::string>& summary_paths) {
  if (summary_paths.empty()) throw ConfigError("compare_report: no summary files");

  std::map<std::string, std::map<std::string, double>> cells;  // problem -> optimizer -> loss
  std::set<std::string> optimizers;
  for (const std::string& path : summary_paths) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open summary file: " + path);
    json j = json::parse(in);
    const std::string problem = j.at("problem").get<std::string>();
    for (const json& row : j.at("aggregates")) {
      const std::string opt = row.at("optimizer").get<std::string>();
      const json& v = row.at("mean_final_loss");
      const double loss = v.is_null() ? kTraceNaN : v.get<double>();
      cells[problem][opt] = loss;
      optimizers.insert(opt);
    }
  }

  auto fmt_cell = [](double v, bool flagged) {
    if (std::isnan(v)) return std::string("-");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g%s", v, flagged ? "*" : "");
    return std::string(buf);
  };

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"problem"};
  for (const std::string& opt : optimizers) header.push_back(opt);
  table.push_back(header);

  std::map<std::string, std::pair<double, std::size_t>> geo;  // optimizer -> (sum logs, count)
  std::size_t geo_excluded = 0;
  for (const auto& [problem, row] : cells) {
    // Independent argmin over the row for the flag.
    double best = kTraceNaN;
    std::string best_opt;
    for (const auto& [opt, loss] : row) {
      if (std::isfinite(loss) && (std::isnan(best) || loss < best)) {
        best = loss;
        best_opt = opt;
      }
    }
    std::vector<std::string> line = {problem};
    for (const std::string& opt : optimizers) {
      const auto it = row.find(opt);
      const double v = it == row.end() ? kTraceNaN : it->second;
      line.push_back(fmt_cell(v, opt == best_opt && std::isfinite(v)));
      if (std::isfinite(v)) {
        if (v > 0.0) {
          geo[opt].first += std::log(v);
          geo[opt].second += 1;
        } else {
          ++geo_excluded;
        }
      }
    }
    table.push_back(std::move(line));
  }
  std::vector<std::string> geoline = {"log-avg"};
  for (const std::string& opt : optimizers) {
    const auto it = geo.find(opt);
    if (it == geo.end() || it->second.second == 0) {
      geoline.push_back("-");
    } else {
      geoline.push_back(
          fmt_cell(std::exp(it->second.first / static_cast<double>(it->second.second)), false));
    }
  }
  table.push_back(std::move(geoline));

  std::vector<std::size_t> width(table[0].size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out;
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out += line[i];
      if (i + 1 < line.size()) out += std::string(width[i] - line[i].size() + 2, ' ');
    }
    out += '\n';
  }
  if (geo_excluded > 0) {
    out += "note: " + std::to_string(geo_excluded) +
           " non-positive cell(s) excluded from the logarithmic average\n";
  }
  return out;
}

}  // namespace sls
