#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcall/engine.hpp"
#include "bcall/plasticity.hpp"

namespace bcall {

/// One swept curve: x values with the mean and spread of the weight change.
struct CurveResult {
  std::string x_label;
  std::vector<double> x;
  std::vector<double> mean_dw;
  std::vector<double> std_dw;
  std::size_t repetitions = 1;

  std::size_t size() const { return x.size(); }
  /// `x_label,mean_dw,std_dw,repetitions`
  std::string csv() const;
};

/// Weight change of a single pre/post pair per entry of `dt_ms` (post minus
/// pre time). The gate is forced open and bistability is off.
CurveResult stdp_curve(const std::vector<double>& dt_ms, const BCaLLParams& params,
                       double sim_dt = 1e-4);

/// Total weight change after `n_pairs` pairs at each pairing frequency. Pair
/// onsets are 1/f apart; within a pair the post spike follows the pre spike by
/// delta_t_ms (negative: precedes). Throws when a pairing period is shorter
/// than |delta_t|. The caller decides gate and bistability through `params`.
CurveResult srdp_curve(const std::vector<double>& freqs_hz, std::size_t n_pairs, double delta_t_ms,
                       const BCaLLParams& params, double w_init = 0.5, double sim_dt = 1e-4);

enum class HeatmapShift { none, positive, negative };

struct HeatmapConfig {
  std::vector<double> pre_rates_hz{5, 10, 20, 30, 40, 50};
  std::vector<double> post_rates_hz{5, 10, 20, 30, 40, 50};
  HeatmapShift shift = HeatmapShift::none;
  double gamma = 0.75;
  std::size_t seeds = 20;
  double duration_s = 2.0;
  double w_init = 0.5;
  double sim_dt = 1e-4;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct HeatmapResult {
  std::vector<double> pre_rates_hz;
  std::vector<double> post_rates_hz;
  std::vector<std::vector<double>> mean_dw;  // [pre][post]
  std::vector<std::vector<double>> std_dw;

  std::size_t potentiation_cells() const;
  /// `pre_hz,post_hz,mean_dw,std_dw`
  std::string csv() const;
};

/// Pre and post trains for one heat-map cell. With a shift the slower train is
/// a correlated copy of the faster one, shifted so that post follows pre
/// (positive) or precedes it (negative); equal rates derive post from pre.
std::pair<SpikeTrain, SpikeTrain> heatmap_trains(double pre_hz, double post_hz, HeatmapShift shift,
                                                 double gamma, double duration, double dt,
                                                 std::uint64_t seed);

/// Mean weight change per (pre, post) rate cell over `seeds` runs. Bistability
/// is switched off here; the gate follows `params`.
HeatmapResult rate_heatmap(const HeatmapConfig& config, const BCaLLParams& params);

struct TraceSweepResult {
  std::vector<double> a_values;
  std::vector<double> rates_hz;
  std::vector<std::vector<double>> mean_trace;  // [a][rate]
  std::vector<std::vector<double>> net_dw;      // [a][rate]
  std::vector<double> zero_crossing_hz;         // NaN when no sign change
  std::vector<double> transition_width_hz;

  std::string csv() const;
};

/// Regular trains of `n_spikes` at each rate. Every spike reads the trace
/// value just before its own jump and contributes x * c_p + c1_d. The
/// transition interval of a jump amplitude is the range of rates whose net
/// change per spike lies within `band` of zero.
TraceSweepResult trace_mean_sweep(const std::vector<double>& a_values,
                                  const std::vector<double>& rates_hz, std::size_t n_spikes,
                                  const BCaLLParams& params, double band);

/// Default band used for the transition interval: half of |c1_d| per spike.
double default_transition_band(const BCaLLParams& params);

/// Two Poisson-driven units joined by one plastic synapse; records x_i, x_j,
/// x_s and w_hid at every step plus both spike trains.
RunResult pair_trace_dump(double pre_hz, double post_hz, double duration_s, const BCaLLParams& params,
                          std::uint64_t seed, double w_init = 0.5, double sim_dt = 1e-4);

/// Same recording set for two scripted trains.
RunResult pair_replay(const SpikeTrain& pre, const SpikeTrain& post, const BCaLLParams& params,
                      double w_init, double sim_dt);

}  // namespace bcall
