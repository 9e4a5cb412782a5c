#include "bcall/plasticity.hpp"

#include <cmath>

#include "bcall/error.hpp"

namespace bcall {

void BCaLLParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(name, "must be > 0");
  };
  positive(tau_i_s, "tau_i_ms");
  positive(tau_j_s, "tau_j_ms");
  positive(tau_s_s, "tau_s_ms");
  positive(tau_w_s, "tau_w_s");
  auto amplitude = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError(name, "must be in (0, 1]");
  };
  amplitude(a_i, "a_i");
  amplitude(a_j, "a_j");
  amplitude(a_s, "a_s");
  positive(x_max_i, "x_max_i");
  positive(x_max_j, "x_max_j");
  positive(x_max_s, "x_max_s");
  if (!(theta_l < theta_u)) throw ConfigError("theta_l", "must be < theta_u");
  if (!(theta_w > 0.0 && theta_w < 1.0)) throw ConfigError("theta_w", "must be in (0, 1)");
  if (!(theta_i >= 0.0)) throw ConfigError("theta_i", "must be >= 0");
  if (!(theta_j >= 0.0)) throw ConfigError("theta_j", "must be >= 0");
  if (!(c1_d <= 0.0)) throw ConfigError("c1_d", "must be <= 0");
  if (!(c2_d <= 0.0)) throw ConfigError("c2_d", "must be <= 0");
  if (!(c_p >= 0.0)) throw ConfigError("c_p", "must be >= 0");
  if (!(alpha >= 0.0)) throw ConfigError("alpha", "must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("beta", "must be >= 0");
  if (!(w_pot_mv >= 0.0)) throw ConfigError("w_pot_mv", "must be >= 0");
  if (!(w_dep_mv >= 0.0)) throw ConfigError("w_dep_mv", "must be >= 0");
}

SynapseState decay(SynapseState s, const BCaLLParams& p, double dt) {
  if (dt == 0.0) return s;
  s.x_i *= std::exp(-dt / p.tau_i_s);
  s.x_j *= std::exp(-dt / p.tau_j_s);
  s.x_s *= std::exp(-dt / p.tau_s_s);
  return s;
}

SynapseState on_pre_spike(SynapseState s, const BCaLLParams& p) {
  s.w_hid = clamp_weight(s.w_hid + pre_spike_increment(s.x_j, s.x_s, p));
  s.x_i = trace_jump(s.x_i, p.a_i, p.x_max_i);
  return s;
}

SynapseState on_post_spike(SynapseState s, const BCaLLParams& p) {
  s.w_hid = clamp_weight(s.w_hid + post_spike_increment(s.x_i, s.x_s, p));
  s.x_j = trace_jump(s.x_j, p.a_j, p.x_max_j);
  s.x_s = trace_jump(s.x_s, p.a_s, p.x_max_s);
  return s;
}

SynapseState on_paired_spikes(SynapseState s, const BCaLLParams& p) {
  const double dw = pre_spike_increment(s.x_j, s.x_s, p) + post_spike_increment(s.x_i, s.x_s, p);
  s.w_hid = clamp_weight(s.w_hid + dw);
  s.x_i = trace_jump(s.x_i, p.a_i, p.x_max_i);
  s.x_j = trace_jump(s.x_j, p.a_j, p.x_max_j);
  s.x_s = trace_jump(s.x_s, p.a_s, p.x_max_s);
  return s;
}

SynapseState bistability_drift(SynapseState s, const BCaLLParams& p, double dt) {
  s.w_hid = bistability_drift(s.w_hid, p, dt);
  return s;
}

}  // namespace bcall
