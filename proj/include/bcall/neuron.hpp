#pragma once

#include <cmath>
#include <numbers>

namespace bcall {

enum class Polarity { excitatory, inhibitory };

/// Oscillation amplitude used when a network does not set one. Small enough
/// that the drive alone never reaches threshold from rest.
inline constexpr double kDefaultOscAmpMv = 4.5;

/// Leaky integrate-and-fire parameters. Voltages in mV, time constants in s.
struct NeuronParams {
  double v_rest_mv = -65.0;
  double v_reset_mv = -65.0;
  double v_thr_mv = -58.0;
  double v_incr_mv = 5.0;
  double tau_thr_s = 0.020;
  double tau_mem_s = 0.020;
  double tau_epsp_s = 0.0035;
  double tau_ipsp_s = 0.0055;

  /// Excitatory column of the neuron parameter table.
  static NeuronParams excitatory() { return {}; }

  /// Inhibitory column; no threshold adaptation.
  static NeuronParams inhibitory() {
    NeuronParams p;
    p.v_rest_mv = -60.0;
    p.v_reset_mv = -60.0;
    p.v_thr_mv = -40.0;
    p.v_incr_mv = 0.0;
    p.tau_thr_s = 0.020;
    p.tau_mem_s = 0.010;
    return p;
  }

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

struct NeuronState {
  double v_mv = 0.0;
  double theta_mv = 0.0;  // adaptive threshold
  double exc_mv = 0.0;    // excitatory PSP accumulator
  double inh_mv = 0.0;    // inhibitory PSP accumulator
  double osc_phase = 0.0;
  double osc_amp_mv = 0.0;
  double osc_freq_hz = 0.0;

  static NeuronState at_rest(const NeuronParams& p) {
    NeuronState s;
    s.v_mv = p.v_rest_mv;
    s.theta_mv = p.v_thr_mv;
    return s;
  }
};

/// Per-step decay factors exp(-dt/tau) shared by the scalar and population
/// integrators so both follow the same arithmetic.
struct StepFactors {
  double mem;
  double epsp;
  double ipsp;
  double thr;

  StepFactors(const NeuronParams& p, double dt)
      : mem(std::exp(-dt / p.tau_mem_s)),
        epsp(std::exp(-dt / p.tau_epsp_s)),
        ipsp(std::exp(-dt / p.tau_ipsp_s)),
        thr(p.tau_thr_s > 0.0 ? std::exp(-dt / p.tau_thr_s) : 0.0) {}
};

inline double oscillation_mv(double amp_mv, double freq_hz, double phase, double t) {
  if (amp_mv == 0.0) return 0.0;
  return amp_mv * std::sin(2.0 * std::numbers::pi * freq_hz * t + phase);
}

/// Adds a presynaptic spike of `weight_mv` to the matching accumulator.
/// Negative weights are rejected with std::invalid_argument.
void receive_spike(NeuronState& state, double weight_mv, Polarity polarity);

/// Advances one step of length dt starting at time t using exponential Euler:
/// the membrane relaxes toward V_r + E - I + osc(t) with tau_mem, E and I decay
/// with their PSP constants and the threshold relaxes toward V_thr. Returns
/// true when the neuron fired; the state is then already reset.
bool integrate(NeuronState& state, const NeuronParams& params, const StepFactors& f, double t);
bool integrate(NeuronState& state, const NeuronParams& params, double dt, double t);

}  // namespace bcall
