// Acceptance suite: runs every property the library promises at desk
// scale and prints one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sls/harness.hpp"

using namespace sls;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("[%s] %2d. %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++g_failures;
}

void run_criterion(int id, const std::string& name, const std::function<bool(std::string&)>& fn) {
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(id, name, pass, detail);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double vector_mismatch(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

ParamVector random_point(SeededRng& rng, std::size_t d, double scale = 1.0) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.normal() * scale;
  return ParamVector(std::move(v));
}

ProblemSpec quad50_spec() {
  ProblemSpec spec;
  spec.name = "quadratic";
  spec.dim = 50;
  spec.condition = 100.0;
  spec.seed = 3;
  return spec;
}

struct AcceptanceRuns {
  std::string dir;
  std::vector<std::string> trace_paths;  // every line-search trace produced
  HarnessConfig sls_cfg;                 // criterion 2 config (determinism check)
  double alsals_logistic = 0.0, best_fixed_logistic = 0.0;
  double alsals_mlp = 0.0, best_fixed_mlp = 0.0;
  bool seven_ok = false;
  std::string seven_detail;
  bool eight_ok = false;
  std::string eight_detail;
};

HarnessConfig base_config(const std::string& text, const std::string& out_dir) {
  HarnessConfig cfg = resolve_config(parse_config_text(text));
  cfg.out_dir = out_dir;
  return cfg;
}

void collect_traces(AcceptanceRuns& runs, const HarnessConfig& cfg,
                    const ExperimentResult& res) {
  for (const RunSummary& rs : res.runs) {
    const std::string kind = rs.optimizer;
    if (kind == "adam_fixed" || kind == "greedy") continue;
    runs.trace_paths.push_back((fs::path(cfg.out_dir) / rs.trace_file).string());
  }
}

// Trains everything the later criteria inspect: the full-batch SLS and
// SaLSa runs on the 50-dim quadratic, the ALSALS-vs-cosine-Adam grids on
// logistic and mlp, and the rosenbrock robustness run.
AcceptanceRuns execute_runs() {
  AcceptanceRuns runs;
  runs.dir = (fs::temp_directory_path() / "slsbench_acceptance").string();
  fs::remove_all(runs.dir);
  fs::create_directories(runs.dir);

  // criterion 2: full-batch SLS on the 50-dim quadratic
  runs.sls_cfg = base_config(
      "problem.name = quadratic\nproblem.dim = 50\nproblem.condition = 100\n"
      "problem.seed = 3\nrun.optimizers = sls\nrun.epochs = 2000\nrun.batch_size = 1\n",
      runs.dir + "/sls_quad");
  collect_traces(runs, runs.sls_cfg, run_experiment(runs.sls_cfg));

  // criterion 3: SaLSa theorem mode on the same quadratic
  const HarnessConfig salsa_cfg = base_config(
      "problem.name = quadratic\nproblem.dim = 50\nproblem.condition = 100\n"
      "problem.seed = 3\nrun.optimizers = salsa\nrun.epochs = 5000\nrun.batch_size = 1\n"
      "search.monotone_guard = true\n",
      runs.dir + "/salsa_quad");
  collect_traces(runs, salsa_cfg, run_experiment(salsa_cfg));

  // criterion 7: ALSALS vs the tuned cosine-Adam grid
  const double grid[4] = {1e-4, 1e-3, 1e-2, 1e-1};
  auto competitive = [&](const std::string& problem_text, const std::string& tag,
                         double& alsals_out, double& best_fixed_out, bool& nonfinite_any) {
    HarnessConfig acfg =
        base_config(problem_text + "run.optimizers = alsals\n", runs.dir + "/" + tag + "_alsals");
    const ExperimentResult ares = run_experiment(acfg);
    collect_traces(runs, acfg, ares);
    nonfinite_any = nonfinite_any || !ares.ok;
    alsals_out = ares.rows.at(0).mean_final_smoothed;

    best_fixed_out = std::numeric_limits<double>::infinity();
    for (int gi = 0; gi < 4; ++gi) {
      HarnessConfig fcfg = base_config(problem_text + "run.optimizers = adam_fixed\n",
                                       runs.dir + "/" + tag + "_fixed" + std::to_string(gi));
      fcfg.fixed_eta_peak = grid[gi];
      const ExperimentResult fres = run_experiment(fcfg);
      nonfinite_any = nonfinite_any || !fres.ok;
      best_fixed_out = std::min(best_fixed_out, fres.rows.at(0).mean_final_smoothed);
    }
  };
  bool nonfinite = false;
  competitive(
      "problem.name = logistic\nproblem.dim = 20\nproblem.n = 1000\nproblem.seed = 3\n"
      "run.epochs = 5\nrun.batch_size = 32\n",
      "logistic", runs.alsals_logistic, runs.best_fixed_logistic, nonfinite);
  competitive(
      "problem.name = mlp\nproblem.hidden = 8\nproblem.n = 400\nproblem.seed = 3\n"
      "run.epochs = 5\nrun.batch_size = 32\n",
      "mlp", runs.alsals_mlp, runs.best_fixed_mlp, nonfinite);
  runs.seven_ok = !nonfinite && runs.alsals_logistic <= 1.1 * runs.best_fixed_logistic &&
                  runs.alsals_mlp <= 1.1 * runs.best_fixed_mlp;
  {
    std::ostringstream os;
    os << "logistic alsals " << runs.alsals_logistic << " vs best fixed "
       << runs.best_fixed_logistic << "; mlp alsals " << runs.alsals_mlp << " vs best fixed "
       << runs.best_fixed_mlp << (nonfinite ? "; NONFINITE RUN" : "");
    runs.seven_detail = os.str();
  }

  // criterion 8: rosenbrock robustness
  const HarnessConfig rcfg = base_config(
      "problem.name = rosenbrock\nrun.optimizers = alsals\nrun.epochs = 10000\n"
      "run.batch_size = 1\n",
      runs.dir + "/rosenbrock");
  const ExperimentResult rres = run_experiment(rcfg);
  collect_traces(runs, rcfg, rres);
  {
    const ParsedTrace t = parse_trace_file(runs.trace_paths.back());
    double best = std::numeric_limits<double>::infinity();
    std::size_t steps_to_target = 0;
    bool nonfin = false;
    for (const TraceRecord& r : t.records) {
      best = std::min(best, r.f_after);
      if (best >= 1e-3) ++steps_to_target;
      if (!std::isfinite(r.f0) || !std::isfinite(r.f_after)) nonfin = true;
    }
    const RunSummary rs = summarize_run(t);
    runs.eight_ok = best < 1e-3 && steps_to_target <= 10000 && !nonfin && !rs.nonfinite;
    std::ostringstream os;
    os << "best f " << best << " after " << steps_to_target << " steps";
    runs.eight_detail = os.str();
  }
  return runs;
}

}  // namespace

int main() {
  const AcceptanceRuns runs = execute_runs();

  run_criterion(1, "gradient oracle: analytic gradients match central differences",
                [&](std::string& detail) {
    struct Case {
      std::shared_ptr<const Objective> obj;
      double tol;
      double scale;
    };
    std::vector<Case> cases;
    cases.push_back({make_objective(quad50_spec()), 1e-6, 1.0});
    cases.push_back({rosenbrock_objective(), 1e-5, 1.0});
    {
      ProblemSpec s;
      s.name = "logistic";
      s.dim = 20;
      s.n_samples = 200;
      s.seed = 5;
      s.reg = 1e-4;
      cases.push_back({make_objective(s), 1e-6, 0.5});
    }
    {
      ProblemSpec s;
      s.name = "matmf";
      cases.push_back({make_objective(s), 1e-5, 1.0});
    }
    {
      ProblemSpec s;
      s.name = "mlp";
      s.n_samples = 120;
      cases.push_back({make_objective(s), 1e-5, 0.5});
    }
    double worst = 0.0;
    SeededRng rng(17);
    for (const Case& c : cases) {
      const Batch b = c.obj->full_batch();
      for (int rep = 0; rep < 20; ++rep) {
        const ParamVector w = random_point(rng, c.obj->dim(), c.scale);
        const double mis =
            vector_mismatch(c.obj->gradient(w, b), finite_diff_gradient(*c.obj, w, b, 1e-5));
        worst = std::max(worst, mis / c.tol);
        if (mis >= c.tol) {
          detail = "mismatch " + format_double(mis) + " over tolerance " + format_double(c.tol);
          return false;
        }
      }
    }
    detail = "worst mismatch at " + format_double(worst) + " of tolerance";
    return true;
  });

  run_criterion(2, "full-batch SLS converges monotonically on the 50-dim quadratic",
                [&](std::string& detail) {
    const auto q = quadratic_objective(quad50_spec());
    const Batch b = q->full_batch();
    SearchConfig cfg;
    cfg.criterion = CriterionKind::armijo;
    cfg.c = 0.1;
    OptimizerState st = init_optimizer_state(*q, cfg);
    double prev = q->loss(st.w, b);
    std::size_t steps = 0;
    bool reached = false;
    for (; steps < 2000; ++steps) {
      const StepResult r = sls_step(st, *q, b, cfg);
      if (r.trace.skipped) {
        detail = "skipped step at k = " + std::to_string(steps);
        return false;
      }
      st = r.state;
      const double cur = q->loss(st.w, b);
      if (cur > prev) {
        detail = "loss increased at k = " + std::to_string(steps);
        return false;
      }
      prev = cur;
      double ginf = 0.0;
      for (double gi : q->gradient(st.w, b)) ginf = std::max(ginf, std::abs(gi));
      if (ginf < 1e-6) {
        reached = true;
        break;
      }
    }
    detail = "grad inf-norm < 1e-6 after " + std::to_string(steps + 1) + " steps";
    return reached;
  });

  run_criterion(3, "SaLSa theorem mode: monotone step sizes, nonnegative decreases, converges",
                [&](std::string& detail) {
    const auto q = quadratic_objective(quad50_spec());
    const Batch b = q->full_batch();
    const double fstar = q->min_value();
    SearchConfig cfg;
    cfg.criterion = CriterionKind::salsa;
    cfg.c = 0.1;
    cfg.salsa_beta3 = 0.9;
    cfg.monotone_guard = true;
    cfg.growth_b = 0;
    cfg.exhaust = ExhaustPolicy::skip;
    OptimizerState st = init_optimizer_state(*q, cfg);
    double last_eta = cfg.eta_init;
    std::size_t steps = 0;
    bool reached = false;
    for (; steps < 5000 && !reached; ++steps) {
      const StepResult r = salsa_step(st, *q, b, cfg);
      if (!r.trace.skipped) {
        if (r.trace.eta > last_eta) {
          detail = "step size grew at k = " + std::to_string(steps);
          return false;
        }
        if (r.trace.f0 - r.trace.f1 < 0.0) {
          detail = "negative accepted decrease at k = " + std::to_string(steps);
          return false;
        }
        last_eta = r.trace.eta;
      }
      st = r.state;
      reached = q->loss(st.w, b) - fstar < 1e-8;
    }
    detail = "f - f* < 1e-8 after " + std::to_string(steps) + " steps";
    return reached;
  });

  run_criterion(4, "f_a approximates the squared gradient norm on quadratics",
                [&](std::string& detail) {
    const auto q1 = quadratic_objective(quad50_spec());
    ProblemSpec ident;
    ident.dim = 10;
    ident.condition = 1.0;
    ident.seed = 21;
    const auto q2 = quadratic_objective(ident);
    const ProbeConfig probe{};  // eps = lambda = 5e-8
    SeededRng rng(29);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const Objective& obj = (rep % 2 == 0) ? static_cast<const Objective&>(*q1)
                                            : static_cast<const Objective&>(*q2);
      const Batch b = obj.full_batch();
      const ParamVector w = random_point(rng, obj.dim());
      const auto g = obj.gradient(w, b);
      const double gns = norm_sq(g);
      const double fa = gradient_magnitude_approx(obj, w, sgd_direction(g), b, probe);
      worst = std::max(worst, std::abs(fa - gns) / gns);
    }
    detail = "worst relative error " + format_double(worst);
    return worst < 1e-3;
  });

  run_criterion(5, "criterion replay holds for every non-skipped trace record",
                [&](std::string& detail) {
    std::size_t checked = 0;
    for (const std::string& path : runs.trace_paths) {
      const ReplayReport rep = replay_trace(parse_trace_file(path));
      if (rep.failures > 0) {
        detail = path + ": " + rep.first_failure;
        return false;
      }
      checked += rep.checked;
    }
    detail = std::to_string(checked) + " records re-verified across " +
             std::to_string(runs.trace_paths.size()) + " traces";
    return checked > 0;
  });

  run_criterion(6, "growth rule: eta0 equals the grown previous step size, clamps flagged",
                [&](std::string& detail) {
    std::size_t checked = 0, clamped = 0;
    for (const std::string& path : runs.trace_paths) {
      const GrowthReport rep = verify_growth(parse_trace_file(path));
      if (rep.failures > 0) {
        detail = path + ": " + rep.first_failure;
        return false;
      }
      checked += rep.checked;
      clamped += rep.clamped;
    }
    detail = std::to_string(checked) + " growth steps verified, " + std::to_string(clamped) +
             " clamps flagged";
    return checked > 0;
  });

  run_criterion(7, "ALSALS within 1.1x of the best cosine-Adam grid point",
                [&](std::string& detail) {
    detail = runs.seven_detail;
    return runs.seven_ok;
  });

  run_criterion(8, "rosenbrock: ALSALS reaches f < 1e-3 with finite traces",
                [&](std::string& detail) {
    detail = runs.eight_detail;
    return runs.eight_ok;
  });

  run_criterion(9, "landscape scan: argmax within one cell of eta* = 1; zero direction flat",
                [&](std::string& detail) {
    ProblemSpec ident;
    ident.dim = 8;
    ident.condition = 1.0;
    ident.seed = 8;
    const auto q = quadratic_objective(ident);
    const Batch b = q->full_batch();
    const ParamVector w = q->initial_point();
    const auto grid = log_grid(1e-7, 10.0, 60);
    const ScanResult res = landscape_scan(*q, w, sgd_direction(q->gradient(w, b)), b, grid);
    if (res.argmax == 0 || res.argmax + 1 >= grid.size()) {
      detail = "argmax at the grid edge";
      return false;
    }
    if (!(grid[res.argmax - 1] <= 1.0 && grid[res.argmax + 1] >= 1.0)) {
      detail = "argmax eta " + format_double(grid[res.argmax]) + " not within one cell of 1";
      return false;
    }
    const std::vector<double> d0(8, 0.0);
    const ScanResult zero = landscape_scan(*q, w, d0, b, grid);
    for (const ScanPoint& p : zero.points) {
      if (p.decrease != 0.0) {
        detail = "zero-direction scan has a nonzero decrease";
        return false;
      }
    }
    detail = "argmax eta " + format_double(grid[res.argmax]);
    return true;
  });

  run_criterion(10, "first-check SaLSa equals Armijo on 10,000 randomized inputs",
                [&](std::string& detail) {
    SeededRng rng(31);
    const SalsaState zero{0.0, 0.0, 0.9, 0};
    for (int rep = 0; rep < 10000; ++rep) {
      const double f0 = rng.normal();
      const double f1 = f0 - rng.normal() * 0.3;
      const double gns = rng.uniform() * 3.0;
      const double eta = rng.uniform() * 2.0;
      const double c = 0.05 + 0.9 * rng.uniform();
      if (salsa_satisfied(zero, f0 - f1, gns, eta, c) != armijo_satisfied(f0, f1, eta, gns, c)) {
        detail = "disagreement at rep " + std::to_string(rep);
        return false;
      }
    }
    detail = "10000 agreements";
    return true;
  });

  run_criterion(11, "determinism: re-running a config yields byte-identical outputs",
                [&](std::string& detail) {
    std::map<std::string, std::string> before;
    for (const auto& e : fs::recursive_directory_iterator(runs.sls_cfg.out_dir)) {
      if (e.is_regular_file()) before[e.path().string()] = slurp(e.path().string());
    }
    run_experiment(runs.sls_cfg);
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(runs.sls_cfg.out_dir)) {
      if (!e.is_regular_file()) continue;
      ++compared;
      const auto it = before.find(e.path().string());
      if (it == before.end() || slurp(e.path().string()) != it->second) {
        detail = "file changed: " + e.path().string();
        return false;
      }
    }
    detail = std::to_string(compared) + " files byte-identical";
    return compared > 0;
  });

  run_criterion(12, "PLASLS: single-group equivalence and magnitude schedule values",
                [&](std::string& detail) {
    ProblemSpec spec;
    spec.name = "mlp";
    spec.hidden = 8;
    spec.n_samples = 400;
    spec.seed = 3;
    HarnessConfig cfg = resolve_config({});
    cfg.problem = spec;
    cfg.epochs = 20;  // 320 train samples / 32 -> 10 steps per epoch, 200 total
    cfg.batch_size = 32;
    const auto obj = make_objective(spec);

    HarnessConfig pl = cfg;
    pl.plasls_groups = 1;
    const SingleRun underlying = run_single(cfg, *obj, "alsals", 1);
    const SingleRun grouped = run_single(pl, *obj, "alsals", 1);
    if (underlying.records.size() != 200 || grouped.records.size() != 200) {
      detail = "unexpected step count";
      return false;
    }
    for (std::size_t i = 0; i < 200; ++i) {
      const TraceRecord& a = underlying.records[i];
      const TraceRecord& b = grouped.records[i];
      const bool same = a.f0 == b.f0 && a.f1 == b.f1 && a.f_after == b.f_after &&
                        a.eta0 == b.eta0 && a.eta == b.eta &&
                        a.n_backtracks == b.n_backtracks && a.crit_term == b.crit_term &&
                        a.grad_norm_sq == b.grad_norm_sq && a.dir_norm_sq == b.dir_norm_sq &&
                        a.skipped == b.skipped && a.group == b.group &&
                        (a.f_a == b.f_a || (std::isnan(a.f_a) && std::isnan(b.f_a)));
      if (!same) {
        detail = "trace divergence at step " + std::to_string(i);
        return false;
      }
    }

    // magnitude schedule hand-computed examples
    {
      const std::vector<std::int64_t> t00{0, 0};
      const auto p1 = magnitude_schedule(std::vector<double>{1.0, 3.0}, t00, 0.0);
      if (!(p1[0] == 0.25 && p1[1] == 0.75)) {
        detail = "magnitude_schedule (1,3) mismatch";
        return false;
      }
      const auto p2 = magnitude_schedule(std::vector<double>{1.0, 1.0}, t00, 0.7);
      if (!(p2[0] == 0.5 && p2[1] == 0.5)) {
        detail = "magnitude_schedule symmetry mismatch";
        return false;
      }
      const std::vector<std::int64_t> t05{0, 5};
      const auto p3 = magnitude_schedule(std::vector<double>{1.0, 1.0}, t05, 0.01);
      if (!(p3[1] > p3[0])) {
        detail = "magnitude_schedule staleness ordering mismatch";
        return false;
      }
      SeededRng rng(41);
      for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> dl(4);
        std::vector<std::int64_t> ts(4);
        for (auto& x : dl) x = rng.uniform();
        for (auto& x : ts) x = static_cast<std::int64_t>(rng.uniform_index(8));
        const auto p = magnitude_schedule(dl, ts, 0.01);
        double sum = 0.0;
        for (double x : p) sum += x;
        if (std::abs(sum - 1.0) > 1e-12) {
          detail = "magnitude_schedule normalization off by " + format_double(sum - 1.0);
          return false;
        }
      }
    }
    detail = "200 trace rows identical; schedule values match";
    return true;
  });

  std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "OK" : "FAILED", g_failures);
  return g_failures;
}
