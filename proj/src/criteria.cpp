#include "sls/criteria.hpp"

#include <cmath>

namespace sls {

namespace {

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw EvalError(std::string("criterion input not finite: ") + name, x);
  }
}

}  // namespace

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::armijo: return "armijo";
    case CriterionKind::preconditioned_armijo: return "preconditioned_armijo";
    case CriterionKind::alsals: return "alsals";
    case CriterionKind::salsa: return "salsa";
  }
  return "unknown";
}

CriterionKind criterion_from_string(const std::string& name) {
  if (name == "armijo") return CriterionKind::armijo;
  if (name == "preconditioned_armijo") return CriterionKind::preconditioned_armijo;
  if (name == "alsals") return CriterionKind::alsals;
  if (name == "salsa") return CriterionKind::salsa;
  throw ConfigError("unknown criterion kind: " + name);
}

void CriterionConfig::validate() const {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("CriterionConfig: need 0 < c < 1");
}

void ProbeConfig::validate() const {
  if (!(eps_probe > 0.0)) throw ConfigError("ProbeConfig: need eps_probe > 0");
  if (!(lambda_probe > 0.0)) throw ConfigError("ProbeConfig: need lambda_probe > 0");
}

bool armijo_satisfied(double f0, double f1, double eta, double grad_norm_sq, double c) {
  require_finite(f0, "f0");
  require_finite(f1, "f1");
  require_finite(eta, "eta");
  require_finite(grad_norm_sq, "grad_norm_sq");
  if (eta < 0.0) throw ContractError("armijo_satisfied: eta must be >= 0");
  if (grad_norm_sq < 0.0) throw ContractError("armijo_satisfied: grad_norm_sq must be >= 0");
  return f1 <= f0 - c * eta * grad_norm_sq;
}

double preconditioned_norm_sq(std::span<const double> g, std::span<const double> precond) {
  if (g.size() != precond.size()) {
    throw ContractError("preconditioned_norm_sq: dimension mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(precond[i] > 0.0)) {
      throw ContractError("preconditioned_norm_sq: preconditioner entries must be > 0");
    }
    sum += g[i] * g[i] / precond[i];
  }
  return sum;
}

bool preconditioned_armijo_satisfied(double f0, double f1, double eta,
                                     std::span<const double> g,
                                     std::span<const double> precond, double c) {
  return armijo_satisfied(f0, f1, eta, preconditioned_norm_sq(g, precond), c);
}

double gradient_magnitude_approx(const Objective& obj, const ParamVector& w,
                                 std::span<const double> d, const Batch& batch,
                                 const ProbeConfig& probe) {
  probe.validate();
  const double f0 = obj.loss(w, batch);
  require_finite(f0, "loss(w)");
  const double f_probe = obj.loss(axpy(w, probe.lambda_probe, d), batch);
  if (!std::isfinite(f_probe)) {
    throw EvalError("gradient_magnitude_approx: non-finite loss at probe point", f_probe);
  }
  return (f0 - f_probe) / probe.eps_probe;
}

double effective_c(double f_a, double c) {
  return f_a > 0.0 ? c : 1.0 / c;
}

bool alsals_satisfied(double f0, double f1, double eta, double f_a, double c) {
  require_finite(f0, "f0");
  require_finite(f1, "f1");
  require_finite(eta, "eta");
  require_finite(f_a, "f_a");
  if (eta < 0.0) throw ContractError("alsals_satisfied: eta must be >= 0");
  return f0 - f1 >= effective_c(f_a, c) * eta * f_a;
}

SalsaState salsa_update(const SalsaState& state, double loss_decrease, double grad_norm_sq) {
  if (grad_norm_sq < 0.0) throw ContractError("salsa_update: grad_norm_sq must be >= 0");
  SalsaState next = state;
  next.h = state.beta3 * state.h + (1.0 - state.beta3) * loss_decrease;
  next.s = state.beta3 * state.s + (1.0 - state.beta3) * grad_norm_sq;
  next.k = state.k + 1;
  return next;
}

bool salsa_satisfied(const SalsaState& state_prev, double candidate_decrease,
                     double grad_norm_sq, double eta, double c) {
  require_finite(candidate_decrease, "candidate_decrease");
  require_finite(grad_norm_sq, "grad_norm_sq");
  require_finite(eta, "eta");
  if (eta < 0.0) throw ContractError("salsa_satisfied: eta must be >= 0");
  if (state_prev.h == 0.0 && state_prev.s == 0.0) {
    // (1-b3) cancels exactly; first check degenerates to plain Armijo.
    return candidate_decrease >= c * eta * grad_norm_sq;
  }
  const double b3 = state_prev.beta3;
  const double lhs = b3 * state_prev.h + (1.0 - b3) * candidate_decrease;
  const double rhs = c * eta * (b3 * state_prev.s + (1.0 - b3) * grad_norm_sq);
  return lhs >= rhs;
}

}  // namespace sls
