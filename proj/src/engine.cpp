#include "bcall/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bcall/error.hpp"
#include "bcall/io.hpp"

namespace bcall {

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt", "must be > 0");
  if (!(duration >= 0.0)) throw ConfigError("duration", "must be >= 0");
  const double n = duration / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw ConfigError("duration", "must be an integer multiple of dt");
}

std::int64_t SimConfig::steps() const { return std::llround(duration / dt); }

// ---------------------------------------------------------------------------
// Network

GroupRef Network::add_neurons(std::string name, std::size_t size, const NeuronParams& params,
                              Oscillation osc) {
  params.validate();
  if (!osc.phases.empty() && osc.phases.size() != size)
    throw std::invalid_argument("oscillation phases must match group size");
  neurons_.push_back({std::move(name), size, params, std::move(osc)});
  return {GroupKind::neurons, neurons_.size() - 1};
}

GroupRef Network::add_poisson(std::string name, std::vector<double> rates_hz) {
  for (double r : rates_hz)
    if (!(r >= 0.0)) throw std::invalid_argument("Poisson rate must be >= 0");
  poisson_.push_back({std::move(name), std::move(rates_hz)});
  return {GroupKind::poisson, poisson_.size() - 1};
}

GroupRef Network::add_replay(std::string name, std::vector<SpikeTrain> trains) {
  replay_.push_back({std::move(name), std::move(trains)});
  return {GroupKind::replay, replay_.size() - 1};
}

std::size_t Network::size_of(GroupRef g) const {
  switch (g.kind) {
    case GroupKind::neurons: return neurons_.at(g.index).size;
    case GroupKind::poisson: return poisson_.at(g.index).rates_hz.size();
    case GroupKind::replay: return replay_.at(g.index).trains.size();
  }
  return 0;
}

void Network::connect(GroupRef source, GroupRef target, Polarity polarity,
                      std::vector<Connection> connections) {
  if (target.kind != GroupKind::neurons)
    throw std::invalid_argument("fixed projections must target a neuron group");
  const auto n_pre = size_of(source);
  const auto n_post = size_of(target);
  for (const auto& c : connections) {
    if (c.pre >= n_pre || c.post >= n_post)
      throw std::invalid_argument("connection index out of range");
    if (!(c.weight_mv >= 0.0)) throw std::invalid_argument("fixed weight must be >= 0");
  }
  fixed_.push_back({source, target.index, polarity, std::move(connections)});
}

void Network::connect_one_to_one(GroupRef source, GroupRef target, double weight_mv,
                                 Polarity polarity) {
  const auto n = size_of(source);
  if (n != size_of(target)) throw std::invalid_argument("one-to-one needs equal sizes");
  std::vector<Connection> conns(n);
  for (std::size_t u = 0; u < n; ++u)
    conns[u] = {static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(u), weight_mv};
  connect(source, target, polarity, std::move(conns));
}

std::size_t Network::connect_plastic(PlasticProjectionSpec spec) {
  spec.params.validate();
  if (spec.source.kind == GroupKind::poisson || spec.target.kind == GroupKind::poisson)
    throw std::invalid_argument("plastic projections connect neuron or replay groups");
  const auto n_pre = static_cast<Eigen::Index>(size_of(spec.source));
  const auto n_post = static_cast<Eigen::Index>(size_of(spec.target));
  if (spec.w_hid.rows() != n_pre || spec.w_hid.cols() != n_post)
    throw std::invalid_argument("w_hid shape must be source x target");
  if (spec.mask.size() != 0 && (spec.mask.rows() != n_pre || spec.mask.cols() != n_post))
    throw std::invalid_argument("mask shape must be source x target");
  if ((spec.w_hid.array() < 0.0).any() || (spec.w_hid.array() > 1.0).any())
    throw std::invalid_argument("w_hid must lie in [0, 1]");
  plastic_.push_back(std::move(spec));
  return plastic_.size() - 1;
}

void Network::record(RecorderSpec spec) {
  if (spec.stride < 1) throw std::invalid_argument("recorder stride must be >= 1");
  recorders_.push_back(std::move(spec));
}

void Network::record_spikes(SpikeRecorderSpec spec) { spike_recorders_.push_back(std::move(spec)); }

// ---------------------------------------------------------------------------
// Runtime state

struct Simulator::NeuronRuntime {
  const NeuronGroupSpec* spec = nullptr;
  StepFactors f{NeuronParams{}, 1.0};
  Eigen::ArrayXd v, theta, exc, inh, phase;
  std::vector<std::uint32_t> fired;
  std::vector<std::uint32_t> pending;
  std::vector<std::int64_t> counts;
};

struct Simulator::PoissonRuntime {
  std::vector<double> rates;
  std::vector<Rng> rngs;
  std::vector<std::int64_t> next;
  std::vector<std::uint32_t> fired;
};

struct Simulator::ReplayRuntime {
  std::vector<std::vector<std::int64_t>> steps;
  std::vector<std::size_t> cursor;
  std::vector<std::uint32_t> fired;
};

struct Simulator::FixedRuntime {
  GroupRef source;
  std::size_t target = 0;
  Polarity polarity = Polarity::excitatory;
  std::vector<std::size_t> offsets;  // CSR over source units
  std::vector<std::uint32_t> posts;
  std::vector<double> weights;
};

struct Simulator::PlasticRuntime {
  PlasticProjectionSpec spec;
  std::vector<std::vector<std::uint32_t>> rows;  // empty when all-to-all
  std::vector<std::vector<std::uint32_t>> cols;
  Eigen::ArrayXd x_pre, x_post, x_stop;
  double f_pre = 1.0, f_post = 1.0, f_stop = 1.0;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> stamp;
  std::vector<std::uint8_t> pre_flag, post_flag;
  GateStats gate;
  std::vector<GateStats> gate_by_post;
  bool dense = true;
  bool drifts = false;

  template <typename Fn>
  void for_targets(std::size_t i, Fn&& fn) const {
    if (dense) {
      for (Eigen::Index j = 0; j < spec.w_hid.cols(); ++j) fn(static_cast<std::size_t>(j));
    } else {
      for (auto j : rows[i]) fn(static_cast<std::size_t>(j));
    }
  }
  template <typename Fn>
  void for_sources(std::size_t j, Fn&& fn) const {
    if (dense) {
      for (Eigen::Index i = 0; i < spec.w_hid.rows(); ++i) fn(static_cast<std::size_t>(i));
    } else {
      for (auto i : cols[j]) fn(static_cast<std::size_t>(i));
    }
  }
};

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

namespace {

std::string unit_label(std::size_t u) { return std::to_string(u); }

std::vector<std::size_t> all_units(std::size_t n) {
  std::vector<std::size_t> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = k;
  return u;
}

}  // namespace

Simulator::Simulator(Network network, SimConfig config)
    : network_(std::move(network)), config_(config) {
  config_.validate();
  const double dt = config_.dt;

  for (const auto& g : network_.neuron_groups()) {
    NeuronRuntime rt;
    rt.spec = &g;
    rt.f = StepFactors(g.params, dt);
    const auto n = static_cast<Eigen::Index>(g.size);
    rt.v = Eigen::ArrayXd::Constant(n, g.params.v_rest_mv);
    rt.theta = Eigen::ArrayXd::Constant(n, g.params.v_thr_mv);
    rt.exc = Eigen::ArrayXd::Zero(n);
    rt.inh = Eigen::ArrayXd::Zero(n);
    rt.phase = Eigen::ArrayXd::Zero(n);
    for (std::size_t u = 0; u < g.osc.phases.size(); ++u) rt.phase[static_cast<Eigen::Index>(u)] = g.osc.phases[u];
    rt.counts.assign(g.size, 0);
    neurons_.push_back(std::move(rt));
  }

  for (std::size_t gi = 0; gi < network_.poisson_groups().size(); ++gi) {
    const auto& g = network_.poisson_groups()[gi];
    PoissonRuntime rt;
    rt.rates.assign(g.rates_hz.size(), 0.0);
    rt.next.assign(g.rates_hz.size(), std::numeric_limits<std::int64_t>::max());
    for (std::size_t u = 0; u < g.rates_hz.size(); ++u)
      rt.rngs.emplace_back(derive_seed(config_.seed, gi + 1, u));
    poisson_.push_back(std::move(rt));
    for (std::size_t u = 0; u < g.rates_hz.size(); ++u) set_rate(gi, u, g.rates_hz[u]);
  }

  for (const auto& g : network_.replay_groups()) {
    ReplayRuntime rt;
    for (const auto& train : g.trains) {
      std::vector<std::int64_t> steps;
      steps.reserve(train.times.size());
      for (double t : train.times) {
        const auto k = std::llround(t / dt);
        if (k < 0) continue;
        if (steps.empty() || k > steps.back()) steps.push_back(k);
      }
      rt.steps.push_back(std::move(steps));
    }
    rt.cursor.assign(g.trains.size(), 0);
    replay_.push_back(std::move(rt));
  }

  for (const auto& p : network_.fixed_projections()) {
    FixedRuntime rt;
    rt.source = p.source;
    rt.target = p.target;
    rt.polarity = p.polarity;
    const auto n_pre = network_.size_of(p.source);
    rt.offsets.assign(n_pre + 1, 0);
    for (const auto& c : p.connections) ++rt.offsets[c.pre + 1];
    for (std::size_t u = 0; u < n_pre; ++u) rt.offsets[u + 1] += rt.offsets[u];
    rt.posts.resize(p.connections.size());
    rt.weights.resize(p.connections.size());
    auto fill = rt.offsets;
    for (const auto& c : p.connections) {
      rt.posts[fill[c.pre]] = c.post;
      rt.weights[fill[c.pre]] = c.weight_mv;
      ++fill[c.pre];
    }
    fixed_.push_back(std::move(rt));
  }

  for (const auto& p : network_.plastic_projections()) {
    PlasticRuntime rt;
    rt.spec = p;
    const auto n_pre = p.w_hid.rows();
    const auto n_post = p.w_hid.cols();
    rt.dense = p.mask.size() == 0;
    if (!rt.dense) {
      rt.rows.resize(static_cast<std::size_t>(n_pre));
      rt.cols.resize(static_cast<std::size_t>(n_post));
      for (Eigen::Index j = 0; j < n_post; ++j)
        for (Eigen::Index i = 0; i < n_pre; ++i)
          if (p.mask(i, j)) {
            rt.rows[static_cast<std::size_t>(i)].push_back(static_cast<std::uint32_t>(j));
            rt.cols[static_cast<std::size_t>(j)].push_back(static_cast<std::uint32_t>(i));
          }
    }
    rt.x_pre = Eigen::ArrayXd::Zero(n_pre);
    rt.x_post = Eigen::ArrayXd::Zero(n_post);
    rt.x_stop = Eigen::ArrayXd::Zero(n_post);
    rt.f_pre = std::exp(-dt / p.params.tau_i_s);
    rt.f_post = std::exp(-dt / p.params.tau_j_s);
    rt.f_stop = std::exp(-dt / p.params.tau_s_s);
    rt.stamp.setZero(n_pre, n_post);
    rt.pre_flag.assign(static_cast<std::size_t>(n_pre), 0);
    rt.post_flag.assign(static_cast<std::size_t>(n_post), 0);
    rt.gate_by_post.assign(static_cast<std::size_t>(n_post), GateStats{});
    rt.drifts = p.params.alpha != 0.0 || p.params.beta != 0.0;
    plastic_.push_back(std::move(rt));
  }

  for (const auto& r : network_.recorders()) {
    SampledTrace tr;
    tr.name = r.name;
    switch (r.variable) {
      case Variable::membrane:
      case Variable::threshold:
      case Variable::exc_psp:
      case Variable::inh_psp: {
        const auto n = network_.neuron_groups().at(r.target).size;
        for (auto u : r.units.empty() ? all_units(n) : r.units) {
          if (u >= n) throw std::invalid_argument("recorder unit out of range");
          tr.columns.push_back(unit_label(u));
        }
        break;
      }
      case Variable::pre_trace:
      case Variable::post_trace:
      case Variable::stop_trace: {
        const auto& pr = plastic_.at(r.target);
        const auto n = static_cast<std::size_t>(r.variable == Variable::pre_trace ? pr.x_pre.size()
                                                                                  : pr.x_post.size());
        for (auto u : r.units.empty() ? all_units(n) : r.units) {
          if (u >= n) throw std::invalid_argument("recorder unit out of range");
          tr.columns.push_back(unit_label(u));
        }
        break;
      }
      case Variable::w_hid: {
        const auto& pr = plastic_.at(r.target);
        if (r.synapses.empty()) throw std::invalid_argument("w_hid recorder needs synapses");
        for (auto [i, j] : r.synapses) {
          if (i >= static_cast<std::size_t>(pr.spec.w_hid.rows()) ||
              j >= static_cast<std::size_t>(pr.spec.w_hid.cols()))
            throw std::invalid_argument("recorder synapse out of range");
          tr.columns.push_back(unit_label(i) + "->" + unit_label(j));
        }
        break;
      }
      case Variable::w_hid_mean:
        plastic_.at(r.target);
        tr.columns.push_back("mean");
        break;
    }
    traces_.push_back(std::move(tr));
  }

  for (const auto& s : network_.spike_recorders()) {
    SpikeRecord rec;
    rec.name = s.name;
    const auto n = network_.size_of(s.group);
    rec.units = s.units.empty() ? all_units(n) : s.units;
    std::vector<std::int64_t> slot(n, -1);
    for (std::size_t k = 0; k < rec.units.size(); ++k) {
      if (rec.units[k] >= n) throw std::invalid_argument("spike recorder unit out of range");
      slot[rec.units[k]] = static_cast<std::int64_t>(k);
    }
    rec.trains.assign(rec.units.size(), SpikeTrain{{}, config_.duration, config_.dt});
    spike_records_.push_back(std::move(rec));
    spike_record_slots_.push_back(std::move(slot));
  }
}

void Simulator::set_rate(std::size_t poisson_group, std::size_t unit, double rate_hz) {
  auto& g = poisson_.at(poisson_group);
  if (!(rate_hz >= 0.0)) throw std::invalid_argument("Poisson rate must be >= 0");
  const double p = rate_hz * config_.dt;
  if (p > 1.0) throw std::invalid_argument("rate * dt > 1 is not representable on this grid");
  if (g.rates.at(unit) == rate_hz && g.next[unit] >= step_) return;
  g.rates[unit] = rate_hz;
  if (p == 0.0) {
    g.next[unit] = std::numeric_limits<std::int64_t>::max();
    return;
  }
  const auto skip = g.rngs[unit].geometric(p);
  g.next[unit] = skip > std::numeric_limits<std::int64_t>::max() - step_
                     ? std::numeric_limits<std::int64_t>::max()
                     : step_ + skip;
}

void Simulator::set_rates(std::size_t poisson_group, const std::vector<double>& rates_hz) {
  if (rates_hz.size() != poisson_.at(poisson_group).rates.size())
    throw std::invalid_argument("rate vector size mismatch");
  for (std::size_t u = 0; u < rates_hz.size(); ++u) set_rate(poisson_group, u, rates_hz[u]);
}

void Simulator::set_all_rates(std::size_t poisson_group, double rate_hz) {
  for (std::size_t u = 0; u < poisson_.at(poisson_group).rates.size(); ++u)
    set_rate(poisson_group, u, rate_hz);
}

void Simulator::set_learning(std::size_t projection, bool on) {
  auto& pr = plastic_.at(projection);
  if (pr.spec.learning == on) return;
  if (on)
    pr.stamp.setConstant(step_);
  else
    materialize_all(pr, step_);
  pr.spec.learning = on;
}

void Simulator::set_weight_levels(std::size_t projection, double w_pot_mv, double w_dep_mv) {
  if (!(w_pot_mv >= 0.0) || !(w_dep_mv >= 0.0)) throw std::invalid_argument("weight levels must be >= 0");
  auto& pr = plastic_.at(projection);
  pr.spec.params.w_pot_mv = w_pot_mv;
  pr.spec.params.w_dep_mv = w_dep_mv;
}

const std::vector<std::int64_t>& Simulator::spike_counts(std::size_t neuron_group) const {
  return neurons_.at(neuron_group).counts;
}

void Simulator::reset_spike_counts(std::size_t neuron_group) {
  auto& c = neurons_.at(neuron_group).counts;
  std::fill(c.begin(), c.end(), 0);
}

const Eigen::MatrixXd& Simulator::w_hid(std::size_t projection) {
  auto& pr = plastic_.at(projection);
  materialize_all(pr, step_);
  return pr.spec.w_hid;
}

GateStats Simulator::gate_stats(std::size_t projection) const { return plastic_.at(projection).gate; }

const std::vector<GateStats>& Simulator::gate_stats_by_target(std::size_t projection) const {
  return plastic_.at(projection).gate_by_post;
}

const Eigen::ArrayXd& Simulator::membrane(std::size_t neuron_group) const {
  return neurons_.at(neuron_group).v;
}

const std::vector<std::uint32_t>& Simulator::fired_now(GroupRef g) const {
  switch (g.kind) {
    case GroupKind::neurons: return neurons_[g.index].fired;
    case GroupKind::poisson: return poisson_[g.index].fired;
    case GroupKind::replay: return replay_[g.index].fired;
  }
  return neurons_[g.index].fired;
}

void Simulator::materialize(PlasticRuntime& pr, std::size_t i, std::size_t j, std::int64_t upto) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  if (!pr.drifts || !pr.spec.learning) {
    pr.stamp(ii, jj) = upto;
    return;
  }
  const auto n = upto - pr.stamp(ii, jj);
  if (n > 0) {
    double& w = pr.spec.w_hid(ii, jj);
    w = bistability_drift(w, pr.spec.params, static_cast<double>(n) * config_.dt);
  }
  pr.stamp(ii, jj) = upto;
}

void Simulator::materialize_all(PlasticRuntime& pr, std::int64_t upto) {
  for (std::size_t i = 0; i < static_cast<std::size_t>(pr.spec.w_hid.rows()); ++i)
    pr.for_targets(i, [&](std::size_t j) { materialize(pr, i, j, upto); });
}

void Simulator::deliver(GroupRef source, const std::vector<std::uint32_t>& fired) {
  if (fired.empty()) return;
  for (auto& fp : fixed_) {
    if (!(fp.source == source)) continue;
    auto& tgt = neurons_[fp.target];
    auto& acc = fp.polarity == Polarity::excitatory ? tgt.exc : tgt.inh;
    for (auto u : fired)
      for (std::size_t c = fp.offsets[u]; c < fp.offsets[u + 1]; ++c) acc[fp.posts[c]] += fp.weights[c];
  }
  for (auto& pr : plastic_) {
    if (!(pr.spec.source == source) || pr.spec.target.kind != GroupKind::neurons) continue;
    auto& tgt = neurons_[pr.spec.target.index];
    const auto& p = pr.spec.params;
    for (auto u : fired) {
      pr.for_targets(u, [&](std::size_t j) {
        const double w = effective_weight(pr.spec.w_hid(u, static_cast<Eigen::Index>(j)), p);
        if (w > 0.0) tgt.exc[static_cast<Eigen::Index>(j)] += w;
      });
    }
  }
}

void Simulator::integrate_neurons(double t) {
  for (std::size_t gi = 0; gi < neurons_.size(); ++gi) {
    auto& g = neurons_[gi];
    const auto& p = g.spec->params;
    const auto& osc = g.spec->osc;
    const double keep = g.f.mem;
    if (osc.amp_mv != 0.0) {
      Eigen::ArrayXd drive = g.exc - g.inh;
      for (Eigen::Index u = 0; u < drive.size(); ++u)
        drive[u] += oscillation_mv(osc.amp_mv, osc.freq_hz, g.phase[u], t);
      g.v = p.v_rest_mv + (g.v - p.v_rest_mv) * keep + drive * (1.0 - keep);
    } else {
      g.v = p.v_rest_mv + (g.v - p.v_rest_mv) * keep + (g.exc - g.inh) * (1.0 - keep);
    }
    g.exc *= g.f.epsp;
    g.inh *= g.f.ipsp;
    g.theta = p.v_thr_mv + (g.theta - p.v_thr_mv) * g.f.thr;

    if (!g.v.allFinite()) {
      Eigen::Index bad = 0;
      while (bad < g.v.size() && std::isfinite(g.v[bad])) ++bad;
      std::ostringstream msg;
      msg << "non-finite membrane potential in group '" << g.spec->name << "' unit " << bad
          << " at step " << step_;
      throw SimulationError(msg.str());
    }

    g.fired.clear();
    for (Eigen::Index u = 0; u < g.v.size(); ++u) {
      if (g.v[u] >= g.theta[u]) {
        g.v[u] = p.v_reset_mv;
        g.theta[u] += p.v_incr_mv;
        g.fired.push_back(static_cast<std::uint32_t>(u));
        ++g.counts[static_cast<std::size_t>(u)];
      }
    }
  }
}

void Simulator::apply_plasticity(PlasticRuntime& pr) {
  const auto& pre = fired_now(pr.spec.source);
  const auto& post = fired_now(pr.spec.target);
  if (pre.empty() && post.empty()) return;
  const auto& p = pr.spec.params;
  auto& w = pr.spec.w_hid;

  if (pr.spec.learning) {
    for (auto i : pre) pr.pre_flag[i] = 1;
    for (auto j : post) pr.post_flag[j] = 1;

    auto update = [&](std::size_t i, std::size_t j, double dw) {
      if (dw == 0.0) return;
      materialize(pr, i, j, step_);
      double& wij = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      wij = clamp_weight(wij + dw);
    };
    auto count_gate = [&](std::size_t j) {
      if (stop_gate(pr.x_stop[static_cast<Eigen::Index>(j)], p)) {
        ++pr.gate.open;
        ++pr.gate_by_post[j].open;
      } else {
        ++pr.gate.closed;
        ++pr.gate_by_post[j].closed;
      }
    };

    for (auto i : pre) {
      const double xi = pr.x_pre[i];
      pr.for_targets(i, [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        double dw = pre_spike_increment(pr.x_post[jj], pr.x_stop[jj], p);
        if (pr.post_flag[j]) {
          dw += post_spike_increment(xi, pr.x_stop[jj], p);
          count_gate(j);
        }
        update(i, j, dw);
      });
    }
    for (auto j : post) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double xs = pr.x_stop[jj];
      pr.for_sources(j, [&](std::size_t i) {
        if (pr.pre_flag[i]) return;
        count_gate(j);
        update(i, j, post_spike_increment(pr.x_pre[static_cast<Eigen::Index>(i)], xs, p));
      });
    }

    for (auto i : pre) pr.pre_flag[i] = 0;
    for (auto j : post) pr.post_flag[j] = 0;
  }

  for (auto i : pre) pr.x_pre[i] = trace_jump(pr.x_pre[i], p.a_i, p.x_max_i);
  for (auto j : post) {
    pr.x_post[j] = trace_jump(pr.x_post[j], p.a_j, p.x_max_j);
    pr.x_stop[j] = trace_jump(pr.x_stop[j], p.a_s, p.x_max_s);
  }
}

void Simulator::record() {
  const double t = time();
  const auto& recs = network_.recorders();
  for (std::size_t r = 0; r < recs.size(); ++r) {
    const auto& spec = recs[r];
    if (step_ % spec.stride != 0) continue;
    auto& tr = traces_[r];
    tr.times.push_back(t);
    auto push_units = [&](const Eigen::ArrayXd& a) {
      if (spec.units.empty()) {
        for (Eigen::Index u = 0; u < a.size(); ++u) tr.values.push_back(a[u]);
      } else {
        for (auto u : spec.units) tr.values.push_back(a[static_cast<Eigen::Index>(u)]);
      }
    };
    switch (spec.variable) {
      case Variable::membrane: push_units(neurons_[spec.target].v); break;
      case Variable::threshold: push_units(neurons_[spec.target].theta); break;
      case Variable::exc_psp: push_units(neurons_[spec.target].exc); break;
      case Variable::inh_psp: push_units(neurons_[spec.target].inh); break;
      case Variable::pre_trace: push_units(plastic_[spec.target].x_pre); break;
      case Variable::post_trace: push_units(plastic_[spec.target].x_post); break;
      case Variable::stop_trace: push_units(plastic_[spec.target].x_stop); break;
      case Variable::w_hid: {
        auto& pr = plastic_[spec.target];
        for (auto [i, j] : spec.synapses) {
          materialize(pr, i, j, step_ + 1);
          tr.values.push_back(pr.spec.w_hid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        break;
      }
      case Variable::w_hid_mean: {
        auto& pr = plastic_[spec.target];
        double sum = 0.0;
        std::size_t n = 0;
        if (spec.synapses.empty()) {
          for (std::size_t i = 0; i < static_cast<std::size_t>(pr.spec.w_hid.rows()); ++i)
            pr.for_targets(i, [&](std::size_t j) {
              materialize(pr, i, j, step_ + 1);
              sum += pr.spec.w_hid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
              ++n;
            });
        } else {
          for (auto [i, j] : spec.synapses) {
            materialize(pr, i, j, step_ + 1);
            sum += pr.spec.w_hid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            ++n;
          }
        }
        tr.values.push_back(n ? sum / static_cast<double>(n) : 0.0);
        break;
      }
    }
  }

  const auto& srecs = network_.spike_recorders();
  for (std::size_t r = 0; r < srecs.size(); ++r) {
    const auto& fired = fired_now(srecs[r].group);
    for (auto u : fired) {
      const auto slot = spike_record_slots_[r][u];
      if (slot >= 0) spike_records_[r].trains[static_cast<std::size_t>(slot)].times.push_back(t);
    }
  }
}

void Simulator::step() {
  // (1) external injection, then last step's network spikes
  for (std::size_t gi = 0; gi < poisson_.size(); ++gi) {
    auto& g = poisson_[gi];
    g.fired.clear();
    for (std::size_t u = 0; u < g.next.size(); ++u) {
      if (g.next[u] != step_) continue;
      g.fired.push_back(static_cast<std::uint32_t>(u));
      const double p = g.rates[u] * config_.dt;
      const auto skip = g.rngs[u].geometric(p);
      g.next[u] = skip >= std::numeric_limits<std::int64_t>::max() - step_ - 1
                      ? std::numeric_limits<std::int64_t>::max()
                      : step_ + 1 + skip;
    }
    deliver({GroupKind::poisson, gi}, g.fired);
  }
  for (std::size_t gi = 0; gi < replay_.size(); ++gi) {
    auto& g = replay_[gi];
    g.fired.clear();
    for (std::size_t u = 0; u < g.steps.size(); ++u) {
      auto& c = g.cursor[u];
      if (c < g.steps[u].size() && g.steps[u][c] == step_) {
        g.fired.push_back(static_cast<std::uint32_t>(u));
        ++c;
      }
    }
    deliver({GroupKind::replay, gi}, g.fired);
  }
  for (std::size_t gi = 0; gi < neurons_.size(); ++gi) deliver({GroupKind::neurons, gi}, neurons_[gi].pending);

  // (2) + (3)
  integrate_neurons(time());

  // (4)
  for (auto& pr : plastic_) apply_plasticity(pr);

  // (5) drift is lazy; traces decay here
  for (auto& pr : plastic_) {
    pr.x_pre *= pr.f_pre;
    pr.x_post *= pr.f_post;
    pr.x_stop *= pr.f_stop;
  }

  // (6)
  record();

  for (auto& g : neurons_) g.pending.swap(g.fired);
  ++step_;
}

void Simulator::advance(std::int64_t steps) {
  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t k = 0; k < steps; ++k) step();
  wall_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void Simulator::run_to_end() { advance(config_.steps() - step_); }

RunResult Simulator::result() const {
  RunResult r;
  r.spikes = spike_records_;
  r.traces = traces_;
  r.wall_seconds = wall_seconds_;
  r.seed = config_.seed;
  r.config = config_;
  return r;
}

const SampledTrace& RunResult::trace(const std::string& name) const {
  for (const auto& t : traces)
    if (t.name == name) return t;
  throw std::out_of_range("no trace named " + name);
}

const SpikeRecord& RunResult::spike_record(const std::string& name) const {
  for (const auto& s : spikes)
    if (s.name == name) return s;
  throw std::out_of_range("no spike record named " + name);
}

RunResult run(const Network& network, const SimConfig& config) {
  Simulator sim(network, config);
  sim.run_to_end();
  return sim.result();
}

std::string trace_csv(const SampledTrace& trace) {
  std::ostringstream out;
  out << 't';
  for (const auto& c : trace.columns) out << ',' << c;
  out << '\n';
  for (std::size_t row = 0; row < trace.times.size(); ++row) {
    out << format_number(trace.times[row]);
    for (std::size_t c = 0; c < trace.width(); ++c) out << ',' << format_number(trace.at(row, c));
    out << '\n';
  }
  return out.str();
}

void write_run_result(const std::filesystem::path& dir, const RunResult& result,
                      const nlohmann::json& extra) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& tr : result.traces) {
    const auto name = tr.name + ".csv";
    write_text_file(dir / name, trace_csv(tr));
    files.push_back(name);
  }
  for (const auto& rec : result.spikes) {
    std::ostringstream out;
    out << "unit_id,t\n";
    for (std::size_t k = 0; k < rec.units.size(); ++k)
      for (double t : rec.trains[k].times) out << rec.units[k] << ',' << format_number(t) << '\n';
    const auto name = "spikes_" + rec.name + ".csv";
    write_text_file(dir / name, out.str());
    files.push_back(name);
  }
  nlohmann::json manifest = extra;
  manifest["files"] = files;
  manifest["seed"] = result.seed;
  manifest["engine"] = {{"dt_s", result.config.dt}, {"duration_s", result.config.duration},
                        {"seed", result.config.seed}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace bcall
