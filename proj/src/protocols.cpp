#include "bcall/protocols.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bcall/analysis.hpp"
#include "bcall/io.hpp"
#include "bcall/parallel.hpp"
#include "bcall/rng.hpp"
#include "bcall/spikegen.hpp"

namespace bcall {

namespace {

SpikeTrain scripted(std::vector<double> times, double duration, double dt) {
  for (auto& t : times) t = static_cast<double>(std::llround(t / dt)) * dt;
  return {std::move(times), duration, dt};
}

double end_time(const SpikeTrain& a, const SpikeTrain& b) {
  double t = 0.0;
  if (!a.empty()) t = std::max(t, a.times.back());
  if (!b.empty()) t = std::max(t, b.times.back());
  return t;
}

struct PairNet {
  Network net;
  std::size_t proj = 0;
};

PairNet pair_network(const SpikeTrain& pre, const SpikeTrain& post, const BCaLLParams& params,
                     double w_init) {
  PairNet pn;
  const auto a = pn.net.add_replay("pre", {pre});
  const auto b = pn.net.add_replay("post", {post});
  PlasticProjectionSpec spec;
  spec.name = "pair";
  spec.source = a;
  spec.target = b;
  spec.params = params;
  spec.w_hid = Eigen::MatrixXd::Constant(1, 1, w_init);
  pn.proj = pn.net.connect_plastic(std::move(spec));
  return pn;
}

// Weight change of one replayed pre/post pair of trains.
double replay_dw(const SpikeTrain& pre, const SpikeTrain& post, const BCaLLParams& params,
                 double w_init, double dt) {
  auto pn = pair_network(pre, post, params, w_init);
  const double t_end = end_time(pre, post);
  SimConfig cfg{dt, static_cast<double>(std::llround(t_end / dt) + 1) * dt, 0};
  Simulator sim(std::move(pn.net), cfg);
  sim.run_to_end();
  return sim.w_hid(pn.proj)(0, 0) - w_init;
}

}  // namespace

std::string CurveResult::csv() const {
  std::ostringstream out;
  out << x_label << ",mean_dw,std_dw,repetitions\n";
  for (std::size_t k = 0; k < x.size(); ++k)
    out << format_number(x[k]) << ',' << format_number(mean_dw[k]) << ',' << format_number(std_dw[k])
        << ',' << repetitions << '\n';
  return out.str();
}

CurveResult stdp_curve(const std::vector<double>& dt_ms, const BCaLLParams& params, double sim_dt) {
  const auto p = params.with_gate_open().without_bistability();
  CurveResult r;
  r.x_label = "dt_ms";
  for (double d : dt_ms) {
    const double lag = d * 1e-3;
    const double t_pre = 0.01 + std::max(0.0, -lag);
    const double t_post = t_pre + lag;
    const double dur = std::max(t_pre, t_post) + sim_dt;
    const auto pre = scripted({t_pre}, dur, sim_dt);
    const auto post = scripted({t_post}, dur, sim_dt);
    r.x.push_back(d);
    r.mean_dw.push_back(replay_dw(pre, post, p, 0.5, sim_dt));
    r.std_dw.push_back(0.0);
  }
  return r;
}

CurveResult srdp_curve(const std::vector<double>& freqs_hz, std::size_t n_pairs, double delta_t_ms,
                       const BCaLLParams& params, double w_init, double sim_dt) {
  const double lag = delta_t_ms * 1e-3;
  CurveResult r;
  r.x_label = "freq_hz";
  for (double f : freqs_hz) {
    if (!(f > 0.0)) throw std::invalid_argument("pairing frequency must be > 0");
    if (1.0 / f < std::abs(lag))
      throw std::invalid_argument("pairing period is shorter than |delta_t|");
    std::vector<double> pre_t, post_t;
    const double onset = 0.01 + std::max(0.0, -lag);
    for (std::size_t k = 0; k < n_pairs; ++k) {
      const double t = onset + static_cast<double>(k) / f;
      pre_t.push_back(t);
      post_t.push_back(t + lag);
    }
    const double dur = std::max(pre_t.back(), post_t.back()) + sim_dt;
    const auto pre = scripted(pre_t, dur, sim_dt);
    const auto post = scripted(post_t, dur, sim_dt);
    r.x.push_back(f);
    r.mean_dw.push_back(replay_dw(pre, post, params, w_init, sim_dt));
    r.std_dw.push_back(0.0);
  }
  return r;
}

std::pair<SpikeTrain, SpikeTrain> heatmap_trains(double pre_hz, double post_hz, HeatmapShift shift,
                                                 double gamma, double duration, double dt,
                                                 std::uint64_t seed) {
  if (shift == HeatmapShift::none)
    return {poisson_train(pre_hz, duration, dt, derive_seed(seed, 1)),
            poisson_train(post_hz, duration, dt, derive_seed(seed, 2))};
  const bool post_from_pre = pre_hz >= post_hz;
  const double f_s = post_from_pre ? pre_hz : post_hz;
  const double f_g = post_from_pre ? post_hz : pre_hz;
  auto source = poisson_train(f_s, duration, dt, derive_seed(seed, 1));
  if (f_g <= 0.0) {
    SpikeTrain empty{{}, duration, dt};
    return post_from_pre ? std::pair{source, empty} : std::pair{empty, source};
  }
  // positive: post follows pre, so a derived post lags and a derived pre leads
  const bool lag = (shift == HeatmapShift::positive) == post_from_pre;
  CorrelationSpec cs{gamma, f_g, f_s, lag ? ShiftBias::lag : ShiftBias::lead};
  auto derived = correlated_train(source, cs, derive_seed(seed, 3));
  if (post_from_pre) return {std::move(source), std::move(derived)};
  return {std::move(derived), std::move(source)};
}

std::size_t HeatmapResult::potentiation_cells() const {
  std::size_t n = 0;
  for (const auto& row : mean_dw)
    for (double v : row) n += v > 0.0;
  return n;
}

std::string HeatmapResult::csv() const {
  std::ostringstream out;
  out << "pre_hz,post_hz,mean_dw,std_dw\n";
  for (std::size_t i = 0; i < pre_rates_hz.size(); ++i)
    for (std::size_t j = 0; j < post_rates_hz.size(); ++j)
      out << format_number(pre_rates_hz[i]) << ',' << format_number(post_rates_hz[j]) << ','
          << format_number(mean_dw[i][j]) << ',' << format_number(std_dw[i][j]) << '\n';
  return out.str();
}

HeatmapResult rate_heatmap(const HeatmapConfig& config, const BCaLLParams& params) {
  if (config.seeds < 1) throw std::invalid_argument("heatmap needs >= 1 seed");
  const auto p = params.without_bistability();
  const auto ni = config.pre_rates_hz.size();
  const auto nj = config.post_rates_hz.size();
  std::vector<double> dw(ni * nj * config.seeds);
  parallel_for(ni * nj, config.jobs, [&](std::size_t cell) {
    const auto i = cell / nj;
    const auto j = cell % nj;
    for (std::size_t s = 0; s < config.seeds; ++s) {
      const auto seed = derive_seed(config.seed, cell, s);
      auto [pre, post] = heatmap_trains(config.pre_rates_hz[i], config.post_rates_hz[j], config.shift,
                                        config.gamma, config.duration_s, config.sim_dt, seed);
      auto pn = pair_network(pre, post, p, config.w_init);
      Simulator sim(std::move(pn.net), SimConfig{config.sim_dt, config.duration_s, seed});
      sim.run_to_end();
      dw[cell * config.seeds + s] = sim.w_hid(pn.proj)(0, 0) - config.w_init;
    }
  });
  HeatmapResult r;
  r.pre_rates_hz = config.pre_rates_hz;
  r.post_rates_hz = config.post_rates_hz;
  r.mean_dw.assign(ni, std::vector<double>(nj));
  r.std_dw.assign(ni, std::vector<double>(nj));
  for (std::size_t cell = 0; cell < ni * nj; ++cell) {
    std::span<const double> v(dw.data() + cell * config.seeds, config.seeds);
    r.mean_dw[cell / nj][cell % nj] = mean(v);
    r.std_dw[cell / nj][cell % nj] = stddev(v);
  }
  return r;
}

double default_transition_band(const BCaLLParams& params) { return 0.5 * std::abs(params.c1_d); }

TraceSweepResult trace_mean_sweep(const std::vector<double>& a_values,
                                  const std::vector<double>& rates_hz, std::size_t n_spikes,
                                  const BCaLLParams& params, double band) {
  if (n_spikes < 1) throw std::invalid_argument("trace sweep needs >= 1 spike");
  TraceSweepResult r;
  r.a_values = a_values;
  r.rates_hz = rates_hz;
  for (double a : a_values) {
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("jump amplitude must be in (0, 1]");
    std::vector<double> traces, nets;
    for (double rate : rates_hz) {
      if (!(rate > 0.0)) throw std::invalid_argument("sweep rates must be > 0");
      const double keep = std::exp(-1.0 / (rate * params.tau_i_s));
      double x = 0.0, sum_x = 0.0, dw = 0.0;
      for (std::size_t k = 0; k < n_spikes; ++k) {
        if (k > 0) x *= keep;
        sum_x += x;
        dw += x * params.c_p + params.c1_d;
        x = trace_jump(x, a, params.x_max_i);
      }
      traces.push_back(sum_x / static_cast<double>(n_spikes));
      nets.push_back(dw);
    }
    double crossing = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 1; k < nets.size(); ++k) {
      if (nets[k - 1] <= 0.0 && nets[k] > 0.0) {
        const double f = -nets[k - 1] / (nets[k] - nets[k - 1]);
        crossing = rates_hz[k - 1] + f * (rates_hz[k] - rates_hz[k - 1]);
        break;
      }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < nets.size(); ++k) {
      if (std::abs(nets[k] / static_cast<double>(n_spikes)) < band) {
        lo = std::min(lo, rates_hz[k]);
        hi = std::max(hi, rates_hz[k]);
      }
    }
    r.mean_trace.push_back(std::move(traces));
    r.net_dw.push_back(std::move(nets));
    r.zero_crossing_hz.push_back(crossing);
    r.transition_width_hz.push_back(hi >= lo ? hi - lo : 0.0);
  }
  return r;
}

std::string TraceSweepResult::csv() const {
  std::ostringstream out;
  out << "a,rate_hz,mean_trace,net_dw\n";
  for (std::size_t i = 0; i < a_values.size(); ++i)
    for (std::size_t k = 0; k < rates_hz.size(); ++k)
      out << format_number(a_values[i]) << ',' << format_number(rates_hz[k]) << ','
          << format_number(mean_trace[i][k]) << ',' << format_number(net_dw[i][k]) << '\n';
  return out.str();
}

RunResult pair_replay(const SpikeTrain& pre, const SpikeTrain& post, const BCaLLParams& params,
                      double w_init, double sim_dt) {
  auto pn = pair_network(pre, post, params, w_init);
  pn.net.record({"x_i", Variable::pre_trace, pn.proj, {}, {}, 1});
  pn.net.record({"x_j", Variable::post_trace, pn.proj, {}, {}, 1});
  pn.net.record({"x_s", Variable::stop_trace, pn.proj, {}, {}, 1});
  pn.net.record({"w_hid", Variable::w_hid, pn.proj, {}, {{0, 0}}, 1});
  pn.net.record_spikes({"pre", {GroupKind::replay, 0}, {}});
  pn.net.record_spikes({"post", {GroupKind::replay, 1}, {}});
  const double dur = std::max({pre.duration, post.duration, end_time(pre, post)});
  SimConfig cfg{sim_dt, static_cast<double>(std::llround(dur / sim_dt)) * sim_dt, 0};
  return run(pn.net, cfg);
}

RunResult pair_trace_dump(double pre_hz, double post_hz, double duration_s, const BCaLLParams& params,
                          std::uint64_t seed, double w_init, double sim_dt) {
  const auto pre = poisson_train(pre_hz, duration_s, sim_dt, derive_seed(seed, 1));
  const auto post = poisson_train(post_hz, duration_s, sim_dt, derive_seed(seed, 2));
  auto r = pair_replay(pre, post, params, w_init, sim_dt);
  r.seed = seed;
  return r;
}

}  // namespace bcall
