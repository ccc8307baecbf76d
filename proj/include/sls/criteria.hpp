#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "sls/core.hpp"

namespace sls {

enum class CriterionKind { armijo, preconditioned_armijo, alsals, salsa };

std::string to_string(CriterionKind kind);
CriterionKind criterion_from_string(const std::string& name);

struct CriterionConfig {
  double c = 0.1;
  CriterionKind kind = CriterionKind::armijo;

  void validate() const;
};

/// Probe constants for the gradient magnitude approximation. The loss is
/// re-evaluated at w + lambda_probe * d and the difference divided by
/// eps_probe; with lambda_probe = eps_probe the ratio approximates the
/// squared gradient norm when d = -g.
struct ProbeConfig {
  double eps_probe = 5e-8;
  double lambda_probe = 5e-8;

  void validate() const;
};

/// EMA pair for the smoothed criterion: h tracks loss decreases, s
/// tracks squared gradient norms. Committed only when a step is
/// accepted; candidate checks use the would-be values.
struct SalsaState {
  double h = 0.0;
  double s = 0.0;
  double beta3 = 0.9;
  std::int64_t k = 0;
};

/// f1 <= f0 - c * eta * ||g||^2 (inclusive).
bool armijo_satisfied(double f0, double f1, double eta, double grad_norm_sq, double c);

/// Sum of g_i^2 / precond_i, the preconditioned squared norm.
double preconditioned_norm_sq(std::span<const double> g, std::span<const double> precond);

/// f1 <= f0 - c * eta * sum_i g_i^2 / precond_i.
bool preconditioned_armijo_satisfied(double f0, double f1, double eta,
                                     std::span<const double> g,
                                     std::span<const double> precond, double c);

/// f_a = (loss(w) - loss(w + lambda * d)) / eps on the given batch.
/// Negative values are meaningful: they signal an ascending direction.
double gradient_magnitude_approx(const Objective& obj, const ParamVector& w,
                                 std::span<const double> d, const Batch& batch,
                                 const ProbeConfig& probe);

/// c when f_a > 0, 1/c when f_a <= 0.
double effective_c(double f_a, double c);

/// f0 - f1 >= effective_c(f_a, c) * eta * f_a.
bool alsals_satisfied(double f0, double f1, double eta, double f_a, double c);

/// h' = b3*h + (1-b3)*decrease, s' = b3*s + (1-b3)*grad_norm_sq, k' = k+1.
SalsaState salsa_update(const SalsaState& state, double loss_decrease, double grad_norm_sq);

/// b3*h + (1-b3)*decrease >= c * eta * (b3*s + (1-b3)*grad_norm_sq).
/// At the exact zero state (h = s = 0) the (1-b3) factors cancel and the
/// check is evaluated in the reduced form decrease >= c*eta*grad_norm_sq,
/// which makes the first check equal plain Armijo.
bool salsa_satisfied(const SalsaState& state_prev, double candidate_decrease,
                     double grad_norm_sq, double eta, double c);

}  // namespace sls
