#include <gtest/gtest.h>

#include <algorithm>

#include "bcall/analysis.hpp"
#include "bcall/plasticity.hpp"
#include "bcall/rng.hpp"
#include "bcall/spikegen.hpp"
#include "oracles.hpp"

using namespace bcall;

namespace {

constexpr int kCases = 1000;

BCaLLParams random_params(Rng& rng) {
  BCaLLParams p;
  p.a_i = rng.uniform(0.01, 1.0);
  p.a_j = rng.uniform(0.01, 1.0);
  p.a_s = rng.uniform(0.01, 1.0);
  p.x_max_i = rng.uniform(0.1, 2.0);
  p.x_max_j = rng.uniform(0.1, 2.0);
  p.x_max_s = rng.uniform(0.1, 2.0);
  p.c1_d = -rng.uniform(0.0, 0.5);
  p.c2_d = -rng.uniform(0.0, 0.5);
  p.c_p = rng.uniform(0.0, 1.0);
  p.theta_l = rng.uniform(0.0, 0.5) * p.x_max_s;
  p.theta_u = rng.uniform(0.5, 1.0) * p.x_max_s;
  p.tau_w_s = rng.uniform(0.01, 50.0);
  return p;
}

std::vector<SpikeTrain> random_trains(Rng& rng) {
  const auto n = static_cast<std::size_t>(2 + rng.uniform() * 4);
  const double dur = 1.0;
  std::vector<SpikeTrain> out;
  for (std::size_t u = 0; u < n; ++u) {
    SpikeTrain t{{}, dur, 1e-3};
    const auto k = static_cast<std::size_t>(1 + rng.uniform() * 20);
    std::vector<long> steps;
    while (steps.size() < k) {
      const long s = static_cast<long>(rng.uniform() * 1000);
      if (std::find(steps.begin(), steps.end(), s) == steps.end()) steps.push_back(s);
    }
    std::sort(steps.begin(), steps.end());
    for (long s : steps) t.times.push_back(s * 1e-3);
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(Property, TracesStayWithinBounds) {
  Rng rng(101);
  for (int c = 0; c < kCases; ++c) {
    const auto p = random_params(rng);
    SynapseState s;
    for (int k = 0; k < 50; ++k) {
      const double u = rng.uniform();
      if (u < 0.3) s = on_pre_spike(s, p);
      else if (u < 0.6) s = on_post_spike(s, p);
      else if (u < 0.7) s = on_paired_spikes(s, p);
      else s = decay(s, p, rng.uniform(0.0, 0.1));
      ASSERT_GE(s.x_i, 0.0);
      ASSERT_LE(s.x_i, p.x_max_i + 1e-12);
      ASSERT_GE(s.x_j, 0.0);
      ASSERT_LE(s.x_j, p.x_max_j + 1e-12);
      ASSERT_GE(s.x_s, 0.0);
      ASSERT_LE(s.x_s, p.x_max_s + 1e-12);
    }
  }
}

TEST(Property, HiddenWeightStaysInUnitInterval) {
  Rng rng(102);
  for (int c = 0; c < kCases; ++c) {
    const auto p = random_params(rng);
    SynapseState s;
    s.w_hid = rng.uniform();
    for (int k = 0; k < 50; ++k) {
      const double u = rng.uniform();
      if (u < 0.3) s = on_pre_spike(s, p);
      else if (u < 0.6) s = on_post_spike(s, p);
      else if (u < 0.7) s = on_paired_spikes(s, p);
      else s = bistability_drift(decay(s, p, 0.01), p, rng.uniform(0.0, 10.0));
      ASSERT_GE(s.w_hid, 0.0);
      ASSERT_LE(s.w_hid, 1.0);
      const double we = effective_weight(s, p);
      ASSERT_TRUE(we == p.w_pot_mv || we == p.w_dep_mv);
    }
  }
}

TEST(Property, DriftNeverCrossesThreshold) {
  Rng rng(103);
  for (int c = 0; c < kCases; ++c) {
    const auto p = random_params(rng);
    const double w = rng.uniform();
    const double v = bistability_drift(w, p, rng.uniform(0.0, 100.0));
    ASSERT_EQ(w >= p.theta_w, v >= p.theta_w);
    ASSERT_EQ(effective_weight(w, p), effective_weight(v, p));
  }
}

TEST(Property, HammingIsAMetric) {
  Rng rng(104);
  for (int c = 0; c < kCases; ++c) {
    const auto n = static_cast<std::size_t>(1 + rng.uniform() * 100);
    BinaryVector a(n), b(n), d(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = rng.bernoulli(0.5);
      b[k] = rng.bernoulli(0.3);
      d[k] = rng.bernoulli(0.7);
    }
    ASSERT_EQ(hamming(a, a), 0u);
    ASSERT_EQ(hamming(a, b), hamming(b, a));
    ASSERT_LE(hamming(a, d), hamming(a, b) + hamming(b, d));
    ASSERT_LE(hamming(a, b), n);
  }
}

TEST(Property, GeneratedTrainsAreValid) {
  Rng rng(105);
  for (int c = 0; c < kCases; ++c) {
    const double dt = rng.uniform() < 0.5 ? 1e-4 : 1e-3;
    const double rate = rng.uniform(0.0, 200.0);
    const double dur = rng.uniform(0.05, 2.0);
    const auto s = poisson_train(rate, dur, dt, rng.next());
    ASSERT_NO_THROW(s.validate());
    if (s.empty()) continue;
    const double keep = rng.uniform(0.05, 1.0);
    CorrelationSpec spec{rng.uniform(0.0, 1.0), keep * std::max(rate, 1.0), std::max(rate, 1.0),
                         static_cast<ShiftBias>(static_cast<int>(rng.uniform() * 3))};
    const auto g = correlated_train(s, spec, rng.next());
    ASSERT_LE(g.size(), s.size());
    for (std::size_t k = 1; k < g.size(); ++k) ASSERT_GE(g.times[k] - g.times[k - 1], dt);
    for (double t : g.times) {
      ASSERT_GE(t, 0.0);
      ASSERT_LE(t, dur);
    }
  }
}

TEST(Property, SpikeSyncMatchesBruteForce) {
  Rng rng(106);
  for (int c = 0; c < kCases; ++c) {
    const auto t = random_trains(rng);
    const double fast = spike_synchronization(t);
    ASSERT_NEAR(fast, oracle::spike_sync(t), 1e-12) << "case " << c;
    ASSERT_GE(fast, 0.0);
    ASSERT_LE(fast, 1.0);
  }
}

TEST(Property, SpikeSyncIgnoresTrainOrder) {
  Rng rng(107);
  for (int c = 0; c < kCases; ++c) {
    auto t = random_trains(rng);
    const double a = spike_synchronization(t);
    std::reverse(t.begin(), t.end());
    ASSERT_NEAR(a, spike_synchronization(t), 1e-12);
  }
}
