#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "bcall/protocols.hpp"

using namespace bcall;

namespace {

// single pair, gate open, no drift: post reads the decayed pre trace and pre
// reads the decayed post trace
double pair_oracle(double dt_ms, const BCaLLParams& p) {
  const double lag = std::abs(dt_ms) * 1e-3;
  if (dt_ms > 0) {
    const double xi = p.a_i * p.x_max_i * std::exp(-lag / p.tau_i_s);
    return xi * p.c_p + (xi < p.theta_i ? p.c2_d : 0.0);
  }
  if (dt_ms < 0) {
    const double xj = p.a_j * p.x_max_j * std::exp(-lag / p.tau_j_s);
    return xj > p.theta_j ? p.c1_d : 0.0;
  }
  return 0.0;
}

}  // namespace

TEST(Stdp, MatchesClosedFormOnEveryLag) {
  const BCaLLParams p;
  std::vector<double> lags;
  for (int d = -60; d <= 60; ++d) lags.push_back(d);
  const auto c = stdp_curve(lags, p);
  ASSERT_EQ(c.size(), lags.size());
  for (std::size_t k = 0; k < lags.size(); ++k) EXPECT_NEAR(c.mean_dw[k], pair_oracle(lags[k], p), 1e-9) << lags[k];
}

TEST(Stdp, ShapeAndReferencePoints) {
  const BCaLLParams p;
  const auto c = stdp_curve({-10, 0, 10, 90}, p);
  EXPECT_NEAR(c.mean_dw[0], -0.026, 1e-12);
  EXPECT_DOUBLE_EQ(c.mean_dw[1], 0.0);
  EXPECT_NEAR(c.mean_dw[2], 0.051590, 1e-6);
  EXPECT_NEAR(c.mean_dw[3], -0.004416, 1e-6);
  EXPECT_EQ(c.csv().substr(0, c.csv().find('\n')), "dt_ms,mean_dw,std_dw,repetitions");
}

TEST(Srdp, LowFrequencyIsTenSinglePairs) {
  const auto p = BCaLLParams{}.with_gate_open().without_bistability();
  const auto c = srdp_curve({0.5}, 10, 10.0, p, 0.4);
  EXPECT_NEAR(c.mean_dw[0], 10 * pair_oracle(10.0, p), 1e-6);
  // every post spike after the first still sees a vanishing but positive pre
  // trace and pays the weak-trace penalty
  const auto d = srdp_curve({0.5}, 10, -10.0, p, 0.8);
  EXPECT_NEAR(d.mean_dw[0], 10 * pair_oracle(-10.0, p) + 9 * p.c2_d, 1e-9);
}

TEST(Srdp, RejectsPeriodShorterThanLag) {
  const BCaLLParams p;
  EXPECT_THROW(srdp_curve({200.0}, 10, 10.0, p), std::invalid_argument);
  EXPECT_THROW(srdp_curve({0.0}, 10, 10.0, p), std::invalid_argument);
}

TEST(TraceSweep, LowAndHighRateLimits) {
  const BCaLLParams p;
  std::vector<double> rates{0.5, 5000.0};
  const auto r = trace_mean_sweep({1.0}, rates, 20, p, default_transition_band(p));
  EXPECT_NEAR(r.net_dw[0][0], 20 * p.c1_d, 1e-12);
  EXPECT_NEAR(r.net_dw[0][1], 19 * std::exp(-1.0 / (5000.0 * p.tau_i_s)) * p.c_p + 20 * p.c1_d, 1e-12);
  EXPECT_NEAR(r.mean_trace[0][1], 19.0 / 20.0 * std::exp(-1.0 / (5000.0 * p.tau_i_s)), 1e-12);
  EXPECT_DOUBLE_EQ(default_transition_band(p), 0.013);
}

TEST(TraceSweep, SmallerJumpsShiftAndWidenTheTransition) {
  const BCaLLParams p;
  std::vector<double> rates;
  for (double f = 1.0; f <= 100.0; f += 0.5) rates.push_back(f);
  const auto r = trace_mean_sweep({0.1, 0.4, 1.0}, rates, 20, p, default_transition_band(p));
  EXPECT_GT(r.zero_crossing_hz[0], r.zero_crossing_hz[1]);
  EXPECT_GT(r.zero_crossing_hz[1], r.zero_crossing_hz[2]);
  EXPECT_GT(r.transition_width_hz[0], r.transition_width_hz[1]);
  EXPECT_GT(r.transition_width_hz[1], r.transition_width_hz[2]);
  EXPECT_THROW(trace_mean_sweep({1.5}, rates, 20, p, 0.01), std::invalid_argument);
}

TEST(Heatmap, ShiftedTrainsKeepRatesAndOrder) {
  const auto [pre, post] = heatmap_trains(40.0, 10.0, HeatmapShift::positive, 0.75, 20.0, 1e-4, 4);
  EXPECT_NEAR(pre.size() / 20.0, 40.0, 6.0);
  EXPECT_NEAR(post.size() / 20.0, 10.0, 3.0);
  // post is a delayed copy: each post spike has a pre spike shortly before it
  for (double t : post.times) {
    double best = 1e9;
    for (double x : pre.times)
      if (x <= t + 1e-12) best = std::min(best, t - x);
    EXPECT_LE(best, 0.75 / 40.0 + 1e-9);
  }
}

TEST(Heatmap, TinyGridIsDeterministic) {
  HeatmapConfig cfg;
  cfg.pre_rates_hz = {10, 30};
  cfg.post_rates_hz = {20};
  cfg.seeds = 2;
  cfg.duration_s = 0.5;
  const BCaLLParams p;
  const auto a = rate_heatmap(cfg, p);
  const auto b = rate_heatmap(cfg, p);
  ASSERT_EQ(a.mean_dw.size(), 2u);
  ASSERT_EQ(a.mean_dw[0].size(), 1u);
  EXPECT_EQ(a.csv(), b.csv());
}

TEST(PairTraceDump, RecordsEveryStep) {
  const auto r = pair_trace_dump(15.0, 20.0, 0.5, BCaLLParams{}, 3);
  EXPECT_EQ(r.trace("x_i").times.size(), 5000u);
  EXPECT_EQ(r.trace("w_hid").width(), 1u);
  for (double v : r.trace("x_s").values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
