#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "bcall/neuron.hpp"
#include "bcall/plasticity.hpp"
#include "bcall/rng.hpp"
#include "bcall/spikegen.hpp"

namespace bcall {

struct SimConfig {
  double dt = 1e-4;
  double duration = 0.0;
  std::uint64_t seed = 0;

  /// dt > 0, duration >= 0 and an integer number of steps (to 1e-9).
  void validate() const;
  std::int64_t steps() const;
};

enum class GroupKind { neurons, poisson, replay };

struct GroupRef {
  GroupKind kind = GroupKind::neurons;
  std::size_t index = 0;
  bool operator==(const GroupRef&) const = default;
};

struct Oscillation {
  double amp_mv = 0.0;
  double freq_hz = 0.0;
  std::vector<double> phases;  // one per neuron; empty means all zero
};

struct NeuronGroupSpec {
  std::string name;
  std::size_t size = 0;
  NeuronParams params;
  Oscillation osc;
};

/// Stateless Poisson generators ("virtual" units).
struct PoissonGroupSpec {
  std::string name;
  std::vector<double> rates_hz;
};

/// Units that emit a prescribed spike train and have no membrane.
struct ReplayGroupSpec {
  std::string name;
  std::vector<SpikeTrain> trains;
};

struct Connection {
  std::uint32_t pre = 0;
  std::uint32_t post = 0;
  double weight_mv = 0.0;
};

struct FixedProjectionSpec {
  GroupRef source;
  std::size_t target = 0;  // neuron group
  Polarity polarity = Polarity::excitatory;
  std::vector<Connection> connections;
};

using ByteMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Learning synapses between two groups. Rows index source units, columns
/// target units. A replay target receives no current but still drives the
/// postsynaptic side of the rule.
struct PlasticProjectionSpec {
  std::string name;
  GroupRef source;
  GroupRef target;
  BCaLLParams params;
  Eigen::MatrixXd w_hid;
  ByteMatrix mask;  // empty: all-to-all
  bool learning = true;
};

enum class Variable {
  membrane,
  threshold,
  exc_psp,
  inh_psp,
  pre_trace,
  post_trace,
  stop_trace,
  w_hid,
  w_hid_mean,
};

struct RecorderSpec {
  std::string name;
  Variable variable = Variable::membrane;
  std::size_t target = 0;  // neuron group, or plastic projection for traces and weights
  std::vector<std::size_t> units;
  std::vector<std::pair<std::size_t, std::size_t>> synapses;  // w_hid*: empty = every synapse
  std::int64_t stride = 1;
};

struct SpikeRecorderSpec {
  std::string name;
  GroupRef group;
  std::vector<std::size_t> units;  // empty = all
};

/// Description of a network: populations, generators, projections and the
/// recorders attached to them. Plain data; a Simulator owns the dynamics.
class Network {
 public:
  GroupRef add_neurons(std::string name, std::size_t size, const NeuronParams& params,
                       Oscillation osc = {});
  GroupRef add_poisson(std::string name, std::vector<double> rates_hz);
  GroupRef add_replay(std::string name, std::vector<SpikeTrain> trains);

  void connect(GroupRef source, GroupRef target, Polarity polarity,
               std::vector<Connection> connections);
  void connect_one_to_one(GroupRef source, GroupRef target, double weight_mv, Polarity polarity);
  std::size_t connect_plastic(PlasticProjectionSpec spec);

  void record(RecorderSpec spec);
  void record_spikes(SpikeRecorderSpec spec);

  std::size_t size_of(GroupRef g) const;

  const std::vector<NeuronGroupSpec>& neuron_groups() const { return neurons_; }
  const std::vector<PoissonGroupSpec>& poisson_groups() const { return poisson_; }
  const std::vector<ReplayGroupSpec>& replay_groups() const { return replay_; }
  const std::vector<FixedProjectionSpec>& fixed_projections() const { return fixed_; }
  const std::vector<PlasticProjectionSpec>& plastic_projections() const { return plastic_; }
  std::vector<PlasticProjectionSpec>& plastic_projections() { return plastic_; }
  const std::vector<RecorderSpec>& recorders() const { return recorders_; }
  const std::vector<SpikeRecorderSpec>& spike_recorders() const { return spike_recorders_; }

 private:
  std::vector<NeuronGroupSpec> neurons_;
  std::vector<PoissonGroupSpec> poisson_;
  std::vector<ReplayGroupSpec> replay_;
  std::vector<FixedProjectionSpec> fixed_;
  std::vector<PlasticProjectionSpec> plastic_;
  std::vector<RecorderSpec> recorders_;
  std::vector<SpikeRecorderSpec> spike_recorders_;
};

/// Time-ordered samples of one recorded variable, row-major.
struct SampledTrace {
  std::string name;
  std::vector<std::string> columns;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t width() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * width() + col]; }
};

struct SpikeRecord {
  std::string name;
  std::vector<std::size_t> units;
  std::vector<SpikeTrain> trains;
};

struct RunResult {
  std::vector<SpikeRecord> spikes;
  std::vector<SampledTrace> traces;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  SimConfig config;

  const SampledTrace& trace(const std::string& name) const;
  const SpikeRecord& spike_record(const std::string& name) const;
};

struct GateStats {
  std::int64_t open = 0;
  std::int64_t closed = 0;
};

/// Fixed-step simulator. Every step runs, in order: external spike injection
/// and delivery of last step's spikes (one-step transmission delay), membrane
/// integration, threshold check, plasticity for this step's spikes, trace
/// decay and bistable drift, then recording.
///
/// Bistable drift is applied lazily per synapse: the drift moves a weight
/// away from theta_w, so it never changes the effective weight and can be
/// evaluated in closed form whenever the synapse is read.
class Simulator {
 public:
  Simulator(Network network, SimConfig config);

  void step();
  void advance(std::int64_t steps);
  /// Steps until `config.duration` is reached.
  void run_to_end();

  std::int64_t step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * config_.dt; }
  const SimConfig& config() const { return config_; }
  const Network& network() const { return network_; }

  void set_rate(std::size_t poisson_group, std::size_t unit, double rate_hz);
  void set_rates(std::size_t poisson_group, const std::vector<double>& rates_hz);
  void set_all_rates(std::size_t poisson_group, double rate_hz);

  void set_learning(std::size_t projection, bool on);
  void set_weight_levels(std::size_t projection, double w_pot_mv, double w_dep_mv);

  const std::vector<std::int64_t>& spike_counts(std::size_t neuron_group) const;
  void reset_spike_counts(std::size_t neuron_group);

  /// Hidden weights with all pending drift applied.
  const Eigen::MatrixXd& w_hid(std::size_t projection);
  GateStats gate_stats(std::size_t projection) const;
  /// Gate decisions split by target unit.
  const std::vector<GateStats>& gate_stats_by_target(std::size_t projection) const;
  const Eigen::ArrayXd& membrane(std::size_t neuron_group) const;

  RunResult result() const;

 private:
  struct NeuronRuntime;
  struct PoissonRuntime;
  struct ReplayRuntime;
  struct FixedRuntime;
  struct PlasticRuntime;

  void deliver(GroupRef source, const std::vector<std::uint32_t>& fired);
  void integrate_neurons(double t);
  void apply_plasticity(PlasticRuntime& pr);
  void materialize(PlasticRuntime& pr, std::size_t i, std::size_t j, std::int64_t upto);
  void materialize_all(PlasticRuntime& pr, std::int64_t upto);
  void record();
  const std::vector<std::uint32_t>& fired_now(GroupRef g) const;

  Network network_;
  SimConfig config_;
  std::int64_t step_ = 0;
  std::vector<NeuronRuntime> neurons_;
  std::vector<PoissonRuntime> poisson_;
  std::vector<ReplayRuntime> replay_;
  std::vector<FixedRuntime> fixed_;
  std::vector<PlasticRuntime> plastic_;
  std::vector<SampledTrace> traces_;
  std::vector<SpikeRecord> spike_records_;
  std::vector<std::vector<std::int64_t>> spike_record_slots_;
  double wall_seconds_ = 0.0;

 public:
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;
};

/// Builds a simulator, runs it for config.duration and returns the records.
RunResult run(const Network& network, const SimConfig& config);

/// One CSV per sampled variable (`t,<unit ids>`), one `spikes_<name>.csv`
/// (`unit_id,t`) per spike recorder, plus manifest.json listing the files, the
/// seed, the engine config and `extra`.
void write_run_result(const std::filesystem::path& dir, const RunResult& result,
                      const nlohmann::json& extra = nlohmann::json::object());

std::string trace_csv(const SampledTrace& trace);

}  // namespace bcall
