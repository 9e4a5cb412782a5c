#pragma once

#include <cstdint>
#include <vector>

#include "bcall/engine.hpp"
#include "bcall/neuron.hpp"
#include "bcall/plasticity.hpp"
#include "bcall/spikegen.hpp"

namespace bcall {

/// Which populations receive the virtual inhibitory Poisson drive.
enum class InhibitoryDrive { all, excitatory, inhibitory, none };

struct RsnnConfig {
  std::size_t n_exc = 256;
  std::size_t n_inh = 64;
  double w_ee_mv = 3.0;
  double w_ei_mv = 3.0;
  double w_ie_mv = 2.0;
  double w_ii_mv = 2.0;
  double w_exc_mv = 1.0;
  double w_inh_mv = 10.0;
  double f_exc_hz = 1000.0;
  double f_inh_hz = 200.0;
  double p_ee = 0.5;
  double p_ei = 0.25;
  double p_ie = 0.25;
  double p_ii = 0.5;
  double f_osc_hz = 3.0;
  double osc_amp_mv = kDefaultOscAmpMv;
  PhaseMode phase_mode = PhaseMode::random;
  std::size_t n_stim = 64;
  double background_exc_hz = 0.0;  // virtual excitatory rate of non-stimulated excitatory cells
  InhibitoryDrive inhibitory_drive = InhibitoryDrive::inhibitory;
  double w_hid_init = 0.0;
  double duration_s = 1.0;
  double dt = 1e-4;
  std::int64_t whid_stride = 10;  // steps between W_hid samples
  std::uint64_t seed = 1;
  BCaLLParams plasticity;
  NeuronParams exc_neuron = NeuronParams::excitatory();
  NeuronParams inh_neuron = NeuronParams::inhibitory();

  void validate() const;
  /// Population parameters with threshold adaptation removed.
  NeuronParams excitatory_params() const;
  NeuronParams inhibitory_params() const;
};

struct RsnnNetwork {
  Network net;
  GroupRef exc;
  GroupRef inh;
  std::size_t plastic = 0;
  ByteMatrix ee_mask;
  std::vector<double> phases;
  std::size_t ee_synapses = 0;
  std::vector<std::pair<std::size_t, std::size_t>> subset_synapses;
};

/// Random wiring (no self-connections), e->e plastic with w_hid = w_hid_init,
/// oscillation drive on the excitatory population, one excitatory and one
/// inhibitory virtual driver per neuron.
RsnnNetwork build_rsnn(const RsnnConfig& config);

struct AttractorRunResult {
  std::vector<SpikeTrain> stim_trains;  // stimulated subset, index order
  std::vector<double> stim_rates_hz;
  std::vector<double> exc_rates_hz;
  std::vector<double> inh_rates_hz;
  std::vector<double> whid_times;
  std::vector<double> whid_mean;  // mean w_hid over the subset's e->e synapses
  double sync = 0.0;              // SPIKE-synchronization of the non-silent subset trains
  double phase_locking = 0.0;     // resultant length of subset spike times on the zero-phase oscillation cycle
  std::size_t silent_units = 0;
  std::uint64_t seed = 0;
};

AttractorRunResult run_attractor_protocol(const RsnnConfig& config);

const char* to_string(PhaseMode m);
const char* to_string(InhibitoryDrive d);

}  // namespace bcall
