#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sls/core.hpp"
#include "sls/criteria.hpp"
#include "sls/directions.hpp"

namespace sls {

enum class ExhaustPolicy { skip, accept_last };
enum class PlaslsScheduler { round_robin, magnitude };

std::string to_string(ExhaustPolicy p);
ExhaustPolicy exhaust_from_string(const std::string& name);
std::string to_string(PlaslsScheduler s);
PlaslsScheduler scheduler_from_string(const std::string& name);

struct SearchConfig {
  double eta_init = 0.1;
  double backtrack_factor = 0.5;  // delta
  int growth_b = 500;             // 0 disables between-step growth
  int max_backtracks = 30;
  double eta_min = 1e-12;
  double eta_max = 10.0;
  double c = 0.1;
  CriterionKind criterion = CriterionKind::armijo;
  bool monotone_guard = false;
  ExhaustPolicy exhaust = ExhaustPolicy::accept_last;
  AdamConfig adam;
  ProbeConfig probe;
  double salsa_beta3 = 0.9;
  bool salsa_adam_direction = false;
  bool salsa_preconditioned = false;
  double plasls_lambda = 0.01;

  void validate() const;
};

/// Everything an optimizer run threads from step to step.
struct OptimizerState {
  ParamVector w;
  AdamState adam;
  SalsaState salsa;
  double eta_prev = 0.1;
  std::int64_t step = 0;
  // Per-group bookkeeping (size 1 unless running PLASLS).
  std::size_t group_cursor = 0;
  std::vector<double> group_etas;
  std::vector<double> group_delta_l;
  std::vector<std::int64_t> group_since;
};

OptimizerState init_optimizer_state(const Objective& obj, const SearchConfig& cfg,
                                    std::size_t n_groups = 1);

constexpr double kTraceNaN = std::numeric_limits<double>::quiet_NaN();

/// One per-step log row. Optional fields (f_reject, f_a, salsa_*,
/// epoch_full_loss, val_metric) are NaN when not applicable and are
/// serialized as empty columns.
struct TraceRecord {
  std::int64_t step = 0;
  std::int64_t batch_id = 0;
  int group = 0;
  double f0 = 0.0;
  double f1 = 0.0;
  double f_after = 0.0;
  double eta0 = 0.0;
  double eta = 0.0;
  int n_backtracks = 0;
  double f_reject = kTraceNaN;       // loss at the last rejected trial
  double grad_norm_sq = 0.0;
  double crit_term = 0.0;            // scalar the criterion multiplied by c*eta
  double dir_norm_sq = 0.0;
  double f_a = kTraceNaN;
  double salsa_h_prev = kTraceNaN;
  double salsa_s_prev = kTraceNaN;
  bool verdict = false;
  bool skipped = false;
  double epoch_full_loss = kTraceNaN;
  double val_metric = kTraceNaN;
  std::string flags;

  void add_flag(const std::string& flag);
  bool has_flag(const std::string& flag) const;
};

struct StepResult {
  OptimizerState state;
  TraceRecord trace;
};

/// eta_prev * 2^(1/b) clamped to [eta_min, eta_max]; identity when
/// growth is off. Clamp events are reported through the out-flags.
double grow_step(double eta_prev, const SearchConfig& cfg, bool* clamped_max = nullptr,
                 bool* clamped_min = nullptr);

using CriterionCheck = std::function<bool(double f1, double eta)>;

struct BacktrackResult {
  double eta = 0.0;
  double f1 = 0.0;
  int n_backtracks = 0;
  bool skipped = false;
  bool exhausted_accept = false;  // accept_last engaged after exhaustion
  bool all_nonfinite = false;
  double f_reject = kTraceNaN;
};

/// Geometric backtracking: trials eta0 * delta^j, j = 0, 1, ...; the
/// first trial passing `check` wins. Non-finite trial losses count as
/// failures. Trial j uses eta0 * pow(delta, j) exactly, so eta can be
/// reproduced from (eta0, n_backtracks) bit for bit.
BacktrackResult backtrack(const Objective& obj, const ParamVector& w,
                          std::span<const double> d, const Batch& batch, double f0,
                          double eta0, const CriterionCheck& check,
                          const SearchConfig& cfg);

/// Plain SLS: SGD direction with the Armijo test on ||g||^2.
StepResult sls_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                    const SearchConfig& cfg);

/// Adam + SLS: the search walks the zero-momentum probe direction under
/// the preconditioned Armijo test; the accepted step size is applied to
/// the full-momentum Adam direction.
StepResult adam_sls_step(const OptimizerState& state, const Objective& obj,
                         const Batch& batch, const SearchConfig& cfg);

/// ALSALS: search and update both walk the full-momentum Adam direction;
/// acceptance uses the gradient magnitude approximation f_a with the
/// piecewise constant c_h.
StepResult alsals_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                       const SearchConfig& cfg);

/// SaLSa: EMA-smoothed acceptance; the EMA state commits only when a
/// step is accepted. Direction is -g unless salsa_adam_direction is set.
StepResult salsa_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                      const SearchConfig& cfg);

/// Dispatch on cfg.criterion.
StepResult line_search_step(const OptimizerState& state, const Objective& obj,
                            const Batch& batch, const SearchConfig& cfg);

/// Per-group line search: the scheduler picks one group whose step size
/// is searched along its direction slice; every group then moves
/// simultaneously, the searched one with its fresh eta, the rest with
/// their cached ones.
StepResult plasls_step(const OptimizerState& state, const Objective& obj, const Batch& batch,
                       const SearchConfig& cfg, const GroupPartition& partition,
                       PlaslsScheduler scheduler, SeededRng& rng);

/// Fixed-step Adam baseline: no search, eta supplied by the caller
/// (normally from cosine_schedule).
StepResult fixed_adam_step(const OptimizerState& state, const Objective& obj,
                           const Batch& batch, const SearchConfig& cfg, double eta);

/// Linear ramp 0 -> eta_peak over the first warm_frac * total steps,
/// then half-cosine decay to 0 at total_steps.
double cosine_schedule(std::int64_t step, std::int64_t total_steps, double eta_peak,
                       double warm_frac);

/// Scheduling probabilities lambda_w * 2^T_k + dl_k / sum(dl),
/// normalized to sum 1. Negative dl entries are clamped to zero (flagged
/// through *clamped); an all-zero dl falls back to a uniform share.
std::vector<double> magnitude_schedule(std::span<const double> delta_l,
                                       std::span<const std::int64_t> since_searched,
                                       double lambda_w, bool* clamped = nullptr);

}  // namespace sls
