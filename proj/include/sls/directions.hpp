#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sls/core.hpp"

namespace sls {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// First/second moment estimates plus the step counter. A value type:
/// updates return a fresh state, the input is untouched.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  static AdamState zeros(std::size_t dim) {
    return AdamState{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), 0};
  }
};

/// -g
std::vector<double> sgd_direction(std::span<const double> g);

/// m' = b1*m + (1-b1)*g, v' = b2*v + (1-b2)*g^2, t' = t+1.
AdamState adam_update_state(const AdamState& state, std::span<const double> g,
                            const AdamConfig& cfg);

/// -m_hat / (sqrt(v_hat) + eps) with bias-corrected m_hat = m/(1-b1^t),
/// v_hat = v/(1-b2^t). Requires t >= 1 (state already updated this step).
std::vector<double> adam_direction(const AdamState& state_after_update,
                                   const AdamConfig& cfg);

/// sqrt(v_hat) + eps elementwise; every entry >= eps.
std::vector<double> preconditioner(const AdamState& state_after_update,
                                   const AdamConfig& cfg);

/// Zero-momentum probe direction -g_i / (sqrt(v_hat_i) + eps). This is
/// the beta1 = 0 shadow of adam_direction: it shares v and t with the
/// updated state and takes m_probe = g, so no extra history is kept.
std::vector<double> adam_probe_direction(const AdamState& state_after_update,
                                         std::span<const double> g,
                                         const AdamConfig& cfg);

}  // namespace sls
