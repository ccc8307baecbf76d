#include "sls/directions.hpp"

#include <cmath>

namespace sls {

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("AdamConfig: need 0 <= beta1 < 1");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("AdamConfig: need 0 <= beta2 < 1");
  if (!(eps > 0.0)) throw ConfigError("AdamConfig: need eps > 0");
}

std::vector<double> sgd_direction(std::span<const double> g) {
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = -g[i];
  return d;
}

AdamState adam_update_state(const AdamState& state, std::span<const double> g,
                            const AdamConfig& cfg) {
  if (state.m.size() != g.size() || state.v.size() != g.size()) {
    throw ContractError("adam_update_state: dimension mismatch");
  }
  AdamState next;
  next.m.resize(g.size());
  next.v.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    next.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
    next.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * (g[i] * g[i]);
  }
  next.t = state.t + 1;
  return next;
}

std::vector<double> adam_direction(const AdamState& state, const AdamConfig& cfg) {
  if (state.t < 1) throw ContractError("adam_direction: state not yet updated (t = 0)");
  const double m_corr = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const std::vector<double> pre = preconditioner(state, cfg);
  std::vector<double> d(state.m.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = -(state.m[i] / m_corr) / pre[i];
  }
  return d;
}

std::vector<double> preconditioner(const AdamState& state, const AdamConfig& cfg) {
  if (state.t < 1) throw ContractError("preconditioner: state not yet updated (t = 0)");
  const double v_corr = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  std::vector<double> pre(state.v.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    pre[i] = std::sqrt(state.v[i] / v_corr) + cfg.eps;
  }
  return pre;
}

std::vector<double> adam_probe_direction(const AdamState& state, std::span<const double> g,
                                         const AdamConfig& cfg) {
  if (state.m.size() != g.size()) throw ContractError("adam_probe_direction: dimension mismatch");
  // m_probe = g and 1 - 0^t = 1, so no bias correction term appears.
  const std::vector<double> pre = preconditioner(state, cfg);
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = -g[i] / pre[i];
  }
  return d;
}

}  // namespace sls
