#include "bcall/neuron.hpp"

#include <stdexcept>

#include "bcall/error.hpp"

namespace bcall {

void NeuronParams::validate() const {
  if (!(tau_mem_s > 0.0)) throw ConfigError("tau_mem_ms", "must be > 0");
  if (!(tau_epsp_s > 0.0)) throw ConfigError("tau_epsp_ms", "must be > 0");
  if (!(tau_ipsp_s > 0.0)) throw ConfigError("tau_ipsp_ms", "must be > 0");
  if (v_incr_mv != 0.0 && !(tau_thr_s > 0.0))
    throw ConfigError("tau_thr_ms", "must be > 0 when V_incr != 0");
  if (!(v_thr_mv > v_reset_mv)) throw ConfigError("v_thr_mv", "must exceed V_rse");
}

void receive_spike(NeuronState& state, double weight_mv, Polarity polarity) {
  if (!(weight_mv >= 0.0)) throw std::invalid_argument("synaptic weight must be >= 0");
  if (polarity == Polarity::excitatory)
    state.exc_mv += weight_mv;
  else
    state.inh_mv += weight_mv;
}

bool integrate(NeuronState& s, const NeuronParams& p, const StepFactors& f, double t) {
  const double drive = s.exc_mv - s.inh_mv + oscillation_mv(s.osc_amp_mv, s.osc_freq_hz, s.osc_phase, t);
  s.v_mv = p.v_rest_mv + (s.v_mv - p.v_rest_mv) * f.mem + drive * (1.0 - f.mem);
  s.exc_mv *= f.epsp;
  s.inh_mv *= f.ipsp;
  s.theta_mv = p.v_thr_mv + (s.theta_mv - p.v_thr_mv) * f.thr;
  if (s.v_mv >= s.theta_mv) {
    s.v_mv = p.v_reset_mv;
    s.theta_mv += p.v_incr_mv;
    return true;
  }
  return false;
}

bool integrate(NeuronState& state, const NeuronParams& params, double dt, double t) {
  return integrate(state, params, StepFactors(params, dt), t);
}

}  // namespace bcall
