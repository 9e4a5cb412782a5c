#include "bcall/rsnn.hpp"

#include <cmath>

#include "bcall/analysis.hpp"
#include "bcall/error.hpp"
#include "bcall/rng.hpp"

namespace bcall {

void RsnnConfig::validate() const {
  if (n_exc < 1) throw ConfigError("n_exc", "must be >= 1");
  if (n_stim > n_exc) throw ConfigError("n_stim", "must not exceed n_exc");
  for (auto [v, name] : {std::pair{p_ee, "p_ee"}, {p_ei, "p_ei"}, {p_ie, "p_ie"}, {p_ii, "p_ii"}})
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(name, "must be in [0, 1]");
  for (auto [v, name] : {std::pair{w_ee_mv, "w_ee_mv"}, {w_ei_mv, "w_ei_mv"}, {w_ie_mv, "w_ie_mv"},
                         {w_ii_mv, "w_ii_mv"}, {w_exc_mv, "w_exc_mv"}, {w_inh_mv, "w_inh_mv"},
                         {f_exc_hz, "f_exc_hz"}, {f_inh_hz, "f_inh_hz"}, {f_osc_hz, "f_osc_hz"},
                         {osc_amp_mv, "osc_amp_mv"}, {background_exc_hz, "background_exc_hz"}})
    if (!(v >= 0.0)) throw ConfigError(name, "must be >= 0");
  if (!(w_hid_init >= 0.0 && w_hid_init <= 1.0)) throw ConfigError("w_hid_init", "must be in [0, 1]");
  if (!(dt > 0.0)) throw ConfigError("dt_ms", "must be > 0");
  if (whid_stride < 1) throw ConfigError("whid_stride", "must be >= 1");
  for (double r : {f_exc_hz, f_inh_hz, background_exc_hz})
    if (r * dt > 1.0) throw ConfigError("dt_ms", "rate * dt must not exceed 1");
  SimConfig{dt, duration_s, seed}.validate();
  plasticity.validate();
}

NeuronParams RsnnConfig::excitatory_params() const {
  auto p = exc_neuron;
  p.v_incr_mv = 0.0;
  return p;
}

NeuronParams RsnnConfig::inhibitory_params() const {
  auto p = inh_neuron;
  p.v_incr_mv = 0.0;
  return p;
}

namespace {

std::vector<Connection> random_wiring(std::size_t n_pre, std::size_t n_post, double p, double w,
                                      bool same_population, Rng& rng) {
  std::vector<Connection> out;
  for (std::size_t i = 0; i < n_pre; ++i)
    for (std::size_t j = 0; j < n_post; ++j) {
      if (same_population && i == j) continue;
      if (rng.bernoulli(p))
        out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
    }
  return out;
}

}  // namespace

RsnnNetwork build_rsnn(const RsnnConfig& config) {
  config.validate();
  RsnnNetwork r;
  r.phases = phase_assignment(config.n_exc, config.phase_mode, derive_seed(config.seed, 200));
  r.exc = r.net.add_neurons("exc", config.n_exc, config.excitatory_params(),
                            Oscillation{config.osc_amp_mv, config.f_osc_hz, r.phases});
  r.inh = r.net.add_neurons("inh", config.n_inh, config.inhibitory_params());

  std::vector<double> exc_drive(config.n_exc, config.background_exc_hz);
  for (std::size_t u = 0; u < config.n_stim; ++u) exc_drive[u] = config.f_exc_hz;
  const auto v_exc = r.net.add_poisson("virtual_exc", exc_drive);
  r.net.connect_one_to_one(v_exc, r.exc, config.w_exc_mv, Polarity::excitatory);
  const bool drive_e = config.inhibitory_drive == InhibitoryDrive::all ||
                       config.inhibitory_drive == InhibitoryDrive::excitatory;
  const bool drive_i = config.inhibitory_drive == InhibitoryDrive::all ||
                       config.inhibitory_drive == InhibitoryDrive::inhibitory;
  if (drive_e) {
    const auto v = r.net.add_poisson("virtual_inh_exc", std::vector<double>(config.n_exc, config.f_inh_hz));
    r.net.connect_one_to_one(v, r.exc, config.w_inh_mv, Polarity::inhibitory);
  }
  if (drive_i && config.n_inh > 0) {
    const auto v = r.net.add_poisson("virtual_inh_inh", std::vector<double>(config.n_inh, config.f_inh_hz));
    r.net.connect_one_to_one(v, r.inh, config.w_inh_mv, Polarity::inhibitory);
  }

  Rng wiring(derive_seed(config.seed, 201));
  r.ee_mask.setZero(static_cast<Eigen::Index>(config.n_exc), static_cast<Eigen::Index>(config.n_exc));
  for (std::size_t i = 0; i < config.n_exc; ++i)
    for (std::size_t j = 0; j < config.n_exc; ++j) {
      if (i == j || !wiring.bernoulli(config.p_ee)) continue;
      r.ee_mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1;
      ++r.ee_synapses;
      if (i < config.n_stim && j < config.n_stim) r.subset_synapses.emplace_back(i, j);
    }
  if (config.n_inh > 0) {
    r.net.connect(r.exc, r.inh, Polarity::excitatory,
                  random_wiring(config.n_exc, config.n_inh, config.p_ei, config.w_ei_mv, false, wiring));
    r.net.connect(r.inh, r.exc, Polarity::inhibitory,
                  random_wiring(config.n_inh, config.n_exc, config.p_ie, config.w_ie_mv, false, wiring));
    r.net.connect(r.inh, r.inh, Polarity::inhibitory,
                  random_wiring(config.n_inh, config.n_inh, config.p_ii, config.w_ii_mv, true, wiring));
  }

  PlasticProjectionSpec spec;
  spec.name = "ee";
  spec.source = r.exc;
  spec.target = r.exc;
  spec.params = config.plasticity.with_gate_open();
  spec.params.w_pot_mv = config.w_ee_mv;
  spec.params.w_dep_mv = 0.0;
  spec.w_hid = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(config.n_exc),
                                         static_cast<Eigen::Index>(config.n_exc), config.w_hid_init);
  spec.mask = r.ee_mask;
  r.plastic = r.net.connect_plastic(std::move(spec));
  return r;
}

AttractorRunResult run_attractor_protocol(const RsnnConfig& config) {
  auto r = build_rsnn(config);
  RecorderSpec whid{"whid_mean", Variable::w_hid_mean, r.plastic, {}, r.subset_synapses,
                    config.whid_stride};
  if (r.subset_synapses.empty()) whid.synapses = {};
  r.net.record(whid);
  r.net.record_spikes({"exc", r.exc, {}});
  r.net.record_spikes({"inh", r.inh, {}});
  const auto res = run(r.net, SimConfig{config.dt, config.duration_s, config.seed});

  AttractorRunResult out;
  out.seed = config.seed;
  const auto& exc = res.spike_record("exc");
  const auto& inh = res.spike_record("inh");
  for (std::size_t u = 0; u < exc.trains.size(); ++u) {
    const double rate = static_cast<double>(exc.trains[u].size()) / config.duration_s;
    out.exc_rates_hz.push_back(rate);
    if (u < config.n_stim) {
      out.stim_trains.push_back(exc.trains[u]);
      out.stim_rates_hz.push_back(rate);
    }
  }
  for (const auto& t : inh.trains)
    out.inh_rates_hz.push_back(static_cast<double>(t.size()) / config.duration_s);
  const auto& tr = res.trace("whid_mean");
  out.whid_times = tr.times;
  out.whid_mean = tr.values;

  std::vector<SpikeTrain> active;
  for (const auto& t : out.stim_trains) {
    if (t.empty())
      ++out.silent_units;
    else
      active.push_back(t);
  }
  out.sync = active.size() >= 2 ? spike_synchronization(active) : 0.0;
  out.phase_locking = phase_locking(active, config.f_osc_hz);
  return out;
}

const char* to_string(PhaseMode m) { return m == PhaseMode::random ? "random" : "correlated"; }

const char* to_string(InhibitoryDrive d) {
  switch (d) {
    case InhibitoryDrive::all: return "all";
    case InhibitoryDrive::excitatory: return "excitatory";
    case InhibitoryDrive::inhibitory: return "inhibitory";
    case InhibitoryDrive::none: return "none";
  }
  return "all";
}

}  // namespace bcall
