#include "sls/search.hpp"

#include <algorithm>
#include <cmath>

namespace sls {

namespace {

// Planning shared by the whole-network steps and plasls_step. A null
// group means the whole vector; a group restricts the search direction
// and the criterion scalar to that slice while the applied direction
// stays full width.
struct StepPlan {
  double f0 = 0.0;
  double grad_norm_sq = 0.0;
  std::vector<double> d_search;
  std::vector<double> d_apply;  // full width
  double crit_term = 0.0;
  double f_a = kTraceNaN;
  AdamState adam_next;
  SalsaState salsa_prev;
  CriterionCheck check;
  bool failed = false;
  std::string fail_flag;
};

std::vector<double> mask_to_group(std::vector<double> d, const std::vector<std::size_t>* group) {
  if (!group) return d;
  std::vector<double> out(d.size(), 0.0);
  for (std::size_t i : *group) out[i] = d[i];
  return out;
}

double group_sum_sq(const std::vector<double>& g, const std::vector<std::size_t>* group) {
  if (!group) return norm_sq(g);
  double sum = 0.0;
  for (std::size_t i : *group) sum += g[i] * g[i];
  return sum;
}

double group_precond_sum(const std::vector<double>& g, const std::vector<double>& pre,
                         const std::vector<std::size_t>* group) {
  if (!group) return preconditioned_norm_sq(g, pre);
  double sum = 0.0;
  for (std::size_t i : *group) sum += g[i] * g[i] / pre[i];
  return sum;
}

StepPlan make_plan(const OptimizerState& st, const Objective& obj, const Batch& batch,
                   const SearchConfig& cfg, const std::vector<std::size_t>* group) {
  StepPlan plan;
  plan.f0 = obj.loss(st.w, batch);
  if (!std::isfinite(plan.f0)) {
    throw EvalError("step: non-finite loss at the current point", plan.f0);
  }
  const std::vector<double> grad = obj.gradient(st.w, batch);
  for (double gi : grad) {
    if (!std::isfinite(gi)) throw EvalError("step: non-finite gradient entry", gi);
  }
  plan.grad_norm_sq = norm_sq(grad);
  plan.adam_next = st.adam;
  plan.salsa_prev = st.salsa;

  const bool needs_adam =
      cfg.criterion == CriterionKind::preconditioned_armijo ||
      cfg.criterion == CriterionKind::alsals ||
      (cfg.criterion == CriterionKind::salsa &&
       (cfg.salsa_adam_direction || cfg.salsa_preconditioned));
  std::vector<double> precond;
  if (needs_adam) {
    plan.adam_next = adam_update_state(st.adam, grad, cfg.adam);
    precond = preconditioner(plan.adam_next, cfg.adam);
  }

  const bool guard = cfg.monotone_guard;
  const double c = cfg.c;
  const double f0 = plan.f0;

  switch (cfg.criterion) {
    case CriterionKind::armijo: {
      plan.d_apply = sgd_direction(grad);
      plan.d_search = mask_to_group(plan.d_apply, group);
      plan.crit_term = group_sum_sq(grad, group);
      const double term = plan.crit_term;
      plan.check = [f0, term, c, guard](double f1, double eta) {
        return armijo_satisfied(f0, f1, eta, term, c) && (!guard || f0 - f1 >= 0.0);
      };
      break;
    }
    case CriterionKind::preconditioned_armijo: {
      plan.d_apply = adam_direction(plan.adam_next, cfg.adam);
      plan.d_search = mask_to_group(adam_probe_direction(plan.adam_next, grad, cfg.adam), group);
      plan.crit_term = group_precond_sum(grad, precond, group);
      const double term = plan.crit_term;
      plan.check = [f0, term, c, guard](double f1, double eta) {
        return armijo_satisfied(f0, f1, eta, term, c) && (!guard || f0 - f1 >= 0.0);
      };
      break;
    }
    case CriterionKind::alsals: {
      plan.d_apply = adam_direction(plan.adam_next, cfg.adam);
      plan.d_search = mask_to_group(plan.d_apply, group);
      try {
        plan.f_a = gradient_magnitude_approx(obj, st.w, plan.d_search, batch, cfg.probe);
      } catch (const EvalError&) {
        plan.failed = true;
        plan.fail_flag = "fa_fail";
        return plan;
      }
      plan.crit_term = plan.f_a;
      const double f_a = plan.f_a;
      plan.check = [f0, f_a, c, guard](double f1, double eta) {
        return alsals_satisfied(f0, f1, eta, f_a, c) && (!guard || f0 - f1 >= 0.0);
      };
      break;
    }
    case CriterionKind::salsa: {
      plan.d_apply = cfg.salsa_adam_direction ? adam_direction(plan.adam_next, cfg.adam)
                                              : sgd_direction(grad);
      plan.d_search = mask_to_group(plan.d_apply, group);
      plan.crit_term = cfg.salsa_preconditioned ? group_precond_sum(grad, precond, group)
                                                : group_sum_sq(grad, group);
      const double term = plan.crit_term;
      const SalsaState prev = plan.salsa_prev;
      plan.check = [f0, term, c, guard, prev](double f1, double eta) {
        return salsa_satisfied(prev, f0 - f1, term, eta, c) && (!guard || f0 - f1 >= 0.0);
      };
      break;
    }
  }
  return plan;
}

void fill_common(TraceRecord& rec, const OptimizerState& st, const Batch& batch,
                 const StepPlan& plan, const SearchConfig& cfg, int group_index) {
  rec.step = st.step;
  rec.batch_id = batch.id;
  rec.group = group_index;
  rec.f0 = plan.f0;
  rec.grad_norm_sq = plan.grad_norm_sq;
  rec.crit_term = plan.crit_term;
  rec.dir_norm_sq = plan.failed ? kTraceNaN : norm_sq(plan.d_apply);
  rec.f_a = plan.f_a;
  if (cfg.criterion == CriterionKind::salsa) {
    rec.salsa_h_prev = st.salsa.h;
    rec.salsa_s_prev = st.salsa.s;
  }
}

void fill_backtrack(TraceRecord& rec, const BacktrackResult& bt) {
  rec.f1 = bt.f1;
  rec.eta = bt.eta;
  rec.n_backtracks = bt.n_backtracks;
  rec.f_reject = bt.f_reject;
  rec.skipped = bt.skipped;
  rec.verdict = !bt.skipped && !bt.exhausted_accept;
  if (bt.exhausted_accept) rec.add_flag("exhausted");
  if (bt.all_nonfinite) rec.add_flag("nonfinite_trials");
}

StepResult run_line_search_step(const OptimizerState& st, const Objective& obj,
                                const Batch& batch, const SearchConfig& cfg) {
  cfg.validate();
  StepPlan plan = make_plan(st, obj, batch, cfg, nullptr);

  TraceRecord rec;
  fill_common(rec, st, batch, plan, cfg, 0);

  OptimizerState next = st;
  next.adam = plan.adam_next;
  next.step = st.step + 1;

  if (plan.failed) {
    rec.skipped = true;
    rec.f1 = plan.f0;
    rec.f_after = plan.f0;
    rec.add_flag(plan.fail_flag);
    next.eta_prev = std::max(st.eta_prev * 0.5, cfg.eta_min);
    return {std::move(next), std::move(rec)};
  }

  bool clamped_max = false;
  bool clamped_min = false;
  const double eta0 = grow_step(st.eta_prev, cfg, &clamped_max, &clamped_min);
  rec.eta0 = eta0;
  if (clamped_max) rec.add_flag("clamp_max");
  if (clamped_min) rec.add_flag("clamp_min");

  const BacktrackResult bt = backtrack(obj, st.w, plan.d_search, batch, plan.f0, eta0,
                                       plan.check, cfg);
  fill_backtrack(rec, bt);

  if (bt.skipped) {
    rec.f_after = plan.f0;
    next.eta_prev = std::max(st.eta_prev * 0.5, cfg.eta_min);
  } else {
    next.w = axpy(st.w, bt.eta, plan.d_apply);
    next.eta_prev = std::clamp(bt.eta, cfg.eta_min, cfg.eta_max);
    if (cfg.criterion == CriterionKind::preconditioned_armijo) {
      // The search walked the probe direction; the update did not.
      rec.f_after = obj.loss(next.w, batch);
    } else {
      rec.f_after = bt.f1;
    }
    if (cfg.criterion == CriterionKind::salsa) {
      next.salsa = salsa_update(st.salsa, plan.f0 - bt.f1, plan.crit_term);
    }
  }
  return {std::move(next), std::move(rec)};
}

}  // namespace

std::string to_string(ExhaustPolicy p) {
  return p == ExhaustPolicy::skip ? "skip" : "accept_last";
}

ExhaustPolicy exhaust_from_string(const std::string& name) {
  if (name == "skip") return ExhaustPolicy::skip;
  if (name == "accept_last") return ExhaustPolicy::accept_last;
  throw ConfigError("unknown exhaust policy: " + name);
}

std::string to_string(PlaslsScheduler s) {
  return s == PlaslsScheduler::round_robin ? "round_robin" : "magnitude";
}

PlaslsScheduler scheduler_from_string(const std::string& name) {
  if (name == "round_robin") return PlaslsScheduler::round_robin;
  if (name == "magnitude") return PlaslsScheduler::magnitude;
  throw ConfigError("unknown plasls scheduler: " + name);
}

void SearchConfig::validate() const {
  if (!(eta_min > 0.0 && eta_max > 0.0 && eta_min <= eta_max)) {
    throw ConfigError("SearchConfig: need 0 < eta_min <= eta_max");
  }
  if (!(eta_init >= eta_min && eta_init <= eta_max)) {
    throw ConfigError("SearchConfig: need eta_min <= eta_init <= eta_max");
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("SearchConfig: backtrack factor must be in (0,1)");
  }
  if (max_backtracks < 1) throw ConfigError("SearchConfig: max_backtracks must be >= 1");
  if (growth_b < 0) throw ConfigError("SearchConfig: growth_b must be >= 0 (0 = off)");
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("SearchConfig: need 0 < c < 1");
  if (!(salsa_beta3 >= 0.0 && salsa_beta3 < 1.0)) {
    throw ConfigError("SearchConfig: need 0 <= salsa_beta3 < 1");
  }
  if (!(plasls_lambda >= 0.0)) throw ConfigError("SearchConfig: plasls_lambda must be >= 0");
  adam.validate();
  probe.validate();
}

OptimizerState init_optimizer_state(const Objective& obj, const SearchConfig& cfg,
                                    std::size_t n_groups) {
  cfg.validate();
  if (n_groups < 1) throw ConfigError("init_optimizer_state: need at least one group");
  OptimizerState st;
  st.w = obj.initial_point();
  st.adam = AdamState::zeros(obj.dim());
  st.salsa = SalsaState{0.0, 0.0, cfg.salsa_beta3, 0};
  st.eta_prev = cfg.eta_init;
  st.step = 0;
  st.group_cursor = 0;
  st.group_etas.assign(n_groups, cfg.eta_init);
  st.group_delta_l.assign(n_groups, 0.0);
  st.group_since.assign(n_groups, 0);
  return st;
}

void TraceRecord::add_flag(const std::string& flag) {
  if (!flags.empty()) flags += '|';
  flags += flag;
}

bool TraceRecord::has_flag(const std::string& flag) const {
  std::size_t pos = 0;
  while (pos <= flags.size()) {
    const std::size_t end = flags.find('|', pos);
    const std::size_t len = (end == std::string::npos ? flags.size() : end) - pos;
    if (flags.compare(pos, len, flag) == 0) return true;
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return false;
}

double grow_step(double eta_prev, const SearchConfig& cfg, bool* clamped_max,
                 bool* clamped_min) {
  if (!(eta_prev > 0.0)) throw ContractError("grow_step: eta_prev must be > 0");
  if (cfg.growth_b == 0) return eta_prev;
  const double factor = std::exp2(1.0 / static_cast<double>(cfg.growth_b));
  double eta0 = eta_prev * factor;
  if (eta0 > cfg.eta_max) {
    eta0 = cfg.eta_max;
    if (clamped_max) *clamped_max = true;
  }
  if (eta0 < cfg.eta_min) {
    eta0 = cfg.eta_min;
    if (clamped_min) *clamped_min = true;
  }
  return eta0;
}

BacktrackResult backtrack(const Objective& obj, const ParamVector& w,
                          std::span<const double> d, const Batch& batch, double f0,
                          double eta0, const CriterionCheck& check,
                          const SearchConfig& cfg) {
  if (!(eta0 >= cfg.eta_min && eta0 <= cfg.eta_max)) {
    throw ContractError("backtrack: eta0 out of bounds");
  }
  BacktrackResult res;
  double prev_f = kTraceNaN;
  double last_eta = eta0;
  bool any_finite = false;
  for (int j = 0; j < cfg.max_backtracks; ++j) {
    const double eta_j =
        j == 0 ? eta0 : eta0 * std::pow(cfg.backtrack_factor, static_cast<double>(j));
    const double f1 = obj.loss(axpy(w, eta_j, d), batch);
    const bool finite = std::isfinite(f1);
    any_finite = any_finite || finite;
    if (finite && check(f1, eta_j)) {
      res.eta = eta_j;
      res.f1 = f1;
      res.n_backtracks = j;
      res.f_reject = prev_f;
      return res;
    }
    prev_f = f1;
    last_eta = eta_j;
  }
  if (cfg.exhaust == ExhaustPolicy::accept_last && std::isfinite(prev_f) && prev_f <= f0) {
    res.eta = last_eta;
    res.f1 = prev_f;
    res.n_backtracks = cfg.max_backtracks - 1;
    res.exhausted_accept = true;
    return res;
  }
  res.eta = 0.0;
  res.f1 = f0;
  res.n_backtracks = cfg.max_backtracks;
  res.skipped = true;
  res.all_nonfinite = !any_finite;
  res.f_reject = prev_f;
  return res;
}

StepResult sls_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                    const SearchConfig& cfg) {
  if (cfg.criterion != CriterionKind::armijo) {
    throw ConfigError("sls_step: criterion must be armijo");
  }
  return run_line_search_step(state, obj, batch, cfg);
}

StepResult adam_sls_step(const OptimizerState& state, const Objective& obj,
                         const Batch& batch, const SearchConfig& cfg) {
  if (cfg.criterion != CriterionKind::preconditioned_armijo) {
    throw ConfigError("adam_sls_step: criterion must be preconditioned_armijo");
  }
  return run_line_search_step(state, obj, batch, cfg);
}

StepResult alsals_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                       const SearchConfig& cfg) {
  if (cfg.criterion != CriterionKind::alsals) {
    throw ConfigError("alsals_step: criterion must be alsals");
  }
  return run_line_search_step(state, obj, batch, cfg);
}

StepResult salsa_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                      const SearchConfig& cfg) {
  if (cfg.criterion != CriterionKind::salsa) {
    throw ConfigError("salsa_step: criterion must be salsa");
  }
  return run_line_search_step(state, obj, batch, cfg);
}

StepResult line_search_step(const OptimizerState& state, const Objective& obj,
                            const Batch& batch, const SearchConfig& cfg) {
  return run_line_search_step(state, obj, batch, cfg);
}

StepResult plasls_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                       const SearchConfig& cfg, const GroupPartition& partition,
                       PlaslsScheduler scheduler, SeededRng& rng) {
  cfg.validate();
  const std::size_t n_groups = partition.group_count();
  if (partition.dim() != obj.dim()) {
    throw ContractError("plasls_step: partition does not match objective dimension");
  }
  if (state.group_etas.size() != n_groups || state.group_delta_l.size() != n_groups ||
      state.group_since.size() != n_groups) {
    throw ContractError("plasls_step: per-group state not initialized for this partition");
  }

  std::size_t searched = 0;
  bool dl_clamped = false;
  if (scheduler == PlaslsScheduler::round_robin) {
    searched = state.group_cursor % n_groups;
  } else {
    const std::vector<double> probs =
        magnitude_schedule(state.group_delta_l, state.group_since, cfg.plasls_lambda,
                           &dl_clamped);
    const double u = rng.uniform();
    double acc = 0.0;
    searched = n_groups - 1;
    for (std::size_t i = 0; i < n_groups; ++i) {
      acc += probs[i];
      if (u < acc) {
        searched = i;
        break;
      }
    }
  }

  const std::vector<std::size_t>& group = partition.group(searched);
  StepPlan plan = make_plan(state, obj, batch, cfg, &group);

  TraceRecord rec;
  fill_common(rec, state, batch, plan, cfg, static_cast<int>(searched));
  if (dl_clamped) rec.add_flag("dl_clamped");

  OptimizerState next = state;
  next.adam = plan.adam_next;
  next.step = state.step + 1;
  next.group_cursor = (state.group_cursor + 1) % n_groups;
  for (std::size_t j = 0; j < n_groups; ++j) {
    next.group_since[j] = (j == searched) ? 0 : state.group_since[j] + 1;
  }

  if (plan.failed) {
    rec.skipped = true;
    rec.f1 = plan.f0;
    rec.f_after = plan.f0;
    rec.add_flag(plan.fail_flag);
    next.group_etas[searched] = std::max(state.group_etas[searched] * 0.5, cfg.eta_min);
    return {std::move(next), std::move(rec)};
  }

  bool clamped_max = false;
  bool clamped_min = false;
  const double eta0 = grow_step(state.group_etas[searched], cfg, &clamped_max, &clamped_min);
  rec.eta0 = eta0;
  if (clamped_max) rec.add_flag("clamp_max");
  if (clamped_min) rec.add_flag("clamp_min");

  const BacktrackResult bt = backtrack(obj, state.w, plan.d_search, batch, plan.f0, eta0,
                                       plan.check, cfg);
  fill_backtrack(rec, bt);

  if (bt.skipped) {
    // A skipped search drops the whole step; no group moves.
    rec.f_after = plan.f0;
    next.group_etas[searched] = std::max(state.group_etas[searched] * 0.5, cfg.eta_min);
  } else {
    // All groups move together, the searched one with its fresh eta,
    // the rest with their cached ones.
    std::vector<double> w_new = state.w.values();
    for (std::size_t j = 0; j < n_groups; ++j) {
      const double eta_j = (j == searched) ? bt.eta : state.group_etas[j];
      for (std::size_t i : partition.group(j)) w_new[i] += eta_j * plan.d_apply[i];
    }
    next.w = ParamVector(std::move(w_new));
    rec.f_after = obj.loss(next.w, batch);

    next.group_etas[searched] = std::clamp(bt.eta, cfg.eta_min, cfg.eta_max);
    double measured = plan.f0 - bt.f1;
    if (measured < 0.0) {
      measured = 0.0;
      rec.add_flag("dl_clamped");
    }
    // New measurement weighted by omega = 0.9.
    next.group_delta_l[searched] = 0.9 * measured + 0.1 * state.group_delta_l[searched];
    if (cfg.criterion == CriterionKind::salsa) {
      next.salsa = salsa_update(state.salsa, plan.f0 - bt.f1, plan.crit_term);
    }
  }
  return {std::move(next), std::move(rec)};
}

StepResult fixed_adam_step(const OptimizerState& state, const Objective& obj,
                           const Batch& batch, const SearchConfig& cfg, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ContractError("fixed_adam_step: eta must be finite and >= 0");
  }
  const double f0 = obj.loss(state.w, batch);
  if (!std::isfinite(f0)) throw EvalError("fixed step: non-finite loss", f0);
  const std::vector<double> g = obj.gradient(state.w, batch);
  for (double gi : g) {
    if (!std::isfinite(gi)) throw EvalError("fixed step: non-finite gradient entry", gi);
  }

  OptimizerState next = state;
  next.adam = adam_update_state(state.adam, g, cfg.adam);
  next.step = state.step + 1;
  const std::vector<double> d = adam_direction(next.adam, cfg.adam);
  next.w = axpy(state.w, eta, d);

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
  rec.add_flag("fixed");
  return {std::move(next), std::move(rec)};
}

double cosine_schedule(std::int64_t step, std::int64_t total_steps, double eta_peak,
                       double warm_frac) {
  if (step < 0 || step > total_steps) throw ContractError("cosine_schedule: step out of range");
  if (!(warm_frac > 0.0 && warm_frac < 1.0)) {
    throw ConfigError("cosine_schedule: need 0 < warm_frac < 1");
  }
  const double warm_end = warm_frac * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  if (s <= warm_end) {
    return warm_end > 0.0 ? eta_peak * (s / warm_end) : eta_peak;
  }
  const double frac = (s - warm_end) / (static_cast<double>(total_steps) - warm_end);
  return eta_peak * 0.5 * (1.0 + std::cos(3.141592653589793238462643383279502884 * frac));
}

std::vector<double> magnitude_schedule(std::span<const double> delta_l,
                                       std::span<const std::int64_t> since_searched,
                                       double lambda_w, bool* clamped) {
  if (delta_l.size() != since_searched.size() || delta_l.empty()) {
    throw ContractError("magnitude_schedule: mismatched or empty inputs");
  }
  if (!(lambda_w >= 0.0)) throw ConfigError("magnitude_schedule: lambda_w must be >= 0");
  const std::size_t n = delta_l.size();
  std::vector<double> dl(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dl[i] = delta_l[i];
    if (dl[i] < 0.0) {
      dl[i] = 0.0;
      if (clamped) *clamped = true;
    }
    total += dl[i];
  }
  std::vector<double> p(n);
  double psum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = total > 0.0 ? dl[i] / total : 1.0 / static_cast<double>(n);
    p[i] = lambda_w * std::exp2(static_cast<double>(since_searched[i])) + share;
    psum += p[i];
  }
  for (double& x : p) x /= psum;
  return p;
}

}  // namespace sls
