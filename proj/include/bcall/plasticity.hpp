#pragma once

#include <algorithm>

namespace bcall {

/// Hyperparameters of the calcium-trace rule. Time constants in seconds,
/// weight levels in mV, everything else dimensionless. alpha and beta default
/// to 1 (a full-range drift over tau_w).
struct BCaLLParams {
  double tau_i_s = 0.030;
  double tau_j_s = 0.030;
  double tau_s_s = 0.800;
  double tau_w_s = 40.0;

  double a_i = 0.4;
  double a_j = 0.5;
  double a_s = 0.075;

  double x_max_i = 1.0;
  double x_max_j = 1.0;
  double x_max_s = 1.0;

  double theta_i = 0.05;
  double theta_j = 0.05;
  double theta_u = 0.55;
  double theta_l = 0.05;
  double theta_w = 0.5;

  double c1_d = -0.026;
  double c2_d = -0.008;
  double c_p = 0.18;

  double alpha = 1.0;
  double beta = 1.0;

  double w_pot_mv = 1.0;
  double w_dep_mv = 0.0;

  void validate() const;

  /// Same rule with the stop-learning window covering every reachable x_s.
  BCaLLParams with_gate_open() const {
    BCaLLParams p = *this;
    p.theta_l = 0.0;
    p.theta_u = p.x_max_s;
    return p;
  }

  BCaLLParams without_bistability() const {
    BCaLLParams p = *this;
    p.alpha = 0.0;
    p.beta = 0.0;
    return p;
  }
};

/// Dynamic state seen by one synapse. The traces live on the neurons (x_i on
/// the presynaptic side, x_j and x_s on the postsynaptic side); this struct
/// bundles the values one synapse reads for single-synapse use.
struct SynapseState {
  double x_i = 0.0;
  double x_j = 0.0;
  double x_s = 0.0;
  double w_hid = 0.5;
};

inline double clamp_weight(double w) { return std::clamp(w, 0.0, 1.0); }

/// Soft-bounded jump x + a (x_max - x).
inline double trace_jump(double x, double a, double x_max) { return x + a * (x_max - x); }

/// Learning window: open iff theta_l <= x_s <= theta_u.
inline bool stop_gate(double x_s, const BCaLLParams& p) {
  return x_s >= p.theta_l && x_s <= p.theta_u;
}

/// Weight increment triggered by a presynaptic spike, given the postsynaptic
/// traces read before any same-step jump.
inline double pre_spike_increment(double x_j, double x_s, const BCaLLParams& p) {
  if (!stop_gate(x_s, p)) return 0.0;
  return x_j > p.theta_j ? p.c1_d : 0.0;
}

/// Weight increment triggered by a postsynaptic spike, given the presynaptic
/// trace and the stop-learning trace read before any same-step jump.
inline double post_spike_increment(double x_i, double x_s, const BCaLLParams& p) {
  if (!stop_gate(x_s, p) || !(x_i > 0.0)) return 0.0;
  return x_i * p.c_p + (x_i < p.theta_i ? p.c2_d : 0.0);
}

/// Slope of the bistable drift for the current side of theta_w, per second.
inline double drift_rate(double w_hid, const BCaLLParams& p) {
  return (w_hid >= p.theta_w ? p.alpha : -p.beta) / p.tau_w_s;
}

/// Drift over an interval. The drift always points away from theta_w, so the
/// side is fixed for the whole interval and the closed form is exact.
inline double bistability_drift(double w_hid, const BCaLLParams& p, double elapsed_s) {
  return clamp_weight(w_hid + drift_rate(w_hid, p) * elapsed_s);
}

inline double effective_weight(double w_hid, const BCaLLParams& p) {
  return w_hid >= p.theta_w ? p.w_pot_mv : p.w_dep_mv;
}

SynapseState decay(SynapseState s, const BCaLLParams& p, double dt);
SynapseState on_pre_spike(SynapseState s, const BCaLLParams& p);
SynapseState on_post_spike(SynapseState s, const BCaLLParams& p);
/// Pre and post spike in the same step: both increments read the traces
/// from before either jump and the sum is clamped once.
SynapseState on_paired_spikes(SynapseState s, const BCaLLParams& p);
SynapseState bistability_drift(SynapseState s, const BCaLLParams& p, double dt);
inline double effective_weight(const SynapseState& s, const BCaLLParams& p) {
  return effective_weight(s.w_hid, p);
}

}  // namespace bcall
