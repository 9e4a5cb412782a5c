#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "bcall/error.hpp"
#include "bcall/neuron.hpp"

using namespace bcall;

TEST(ReceiveSpike, AccumulatesLinearly) {
  auto s = NeuronState::at_rest(NeuronParams::excitatory());
  receive_spike(s, 1.0, Polarity::excitatory);
  EXPECT_DOUBLE_EQ(s.exc_mv, 1.0);
  receive_spike(s, 1.0, Polarity::excitatory);
  EXPECT_DOUBLE_EQ(s.exc_mv, 2.0);
  receive_spike(s, 30.0, Polarity::inhibitory);
  EXPECT_DOUBLE_EQ(s.inh_mv, 30.0);
  EXPECT_DOUBLE_EQ(s.v_mv, -65.0);
}

TEST(ReceiveSpike, RejectsNegativeWeight) {
  auto s = NeuronState::at_rest(NeuronParams::excitatory());
  EXPECT_THROW(receive_spike(s, -1.0, Polarity::excitatory), std::invalid_argument);
}

TEST(Integrate, RestIsAFixedPoint) {
  const auto p = NeuronParams::excitatory();
  auto s = NeuronState::at_rest(p);
  for (int k = 0; k < 10000; ++k) ASSERT_FALSE(integrate(s, p, 1e-4, k * 1e-4));
  EXPECT_DOUBLE_EQ(s.v_mv, -65.0);
}

TEST(Integrate, StrongInputSpikesWithinTwoMilliseconds) {
  const auto p = NeuronParams::excitatory();
  auto s = NeuronState::at_rest(p);
  receive_spike(s, 100.0, Polarity::excitatory);
  bool fired = false;
  for (int k = 0; k < 20 && !fired; ++k) fired = integrate(s, p, 1e-4, k * 1e-4);
  EXPECT_TRUE(fired);
  EXPECT_DOUBLE_EQ(s.theta_mv, -53.0);
  EXPECT_DOUBLE_EQ(s.v_mv, -65.0);
}

TEST(Integrate, ThresholdRelaxesWithItsTimeConstant) {
  const auto p = NeuronParams::excitatory();
  auto s = NeuronState::at_rest(p);
  s.theta_mv = -53.0;
  for (int k = 0; k < 200; ++k) integrate(s, p, 1e-4, k * 1e-4);
  EXPECT_NEAR(s.theta_mv, -58.0 + 5.0 * std::exp(-1.0), 1e-9);
}

TEST(Integrate, PspMatchesAnalyticKernel) {
  // tau_m u' = -u + E0 exp(-t/tau_e)
  auto p = NeuronParams::excitatory();
  p.v_incr_mv = 0.0;
  const double dt = 1e-6, e0 = 2.0;
  auto s = NeuronState::at_rest(p);
  receive_spike(s, e0, Polarity::excitatory);
  const double tm = p.tau_mem_s, te = p.tau_epsp_s;
  for (int k = 1; k <= 20000; ++k) {
    integrate(s, p, dt, (k - 1) * dt);
    if (k % 2000 == 0) {
      const double t = k * dt;
      const double u = e0 * te * (std::exp(-t / te) - std::exp(-t / tm)) / (te - tm);
      EXPECT_NEAR(s.v_mv - p.v_rest_mv, u, 2e-3 * e0) << "t=" << t;
    }
  }
}

TEST(Integrate, SubthresholdResponsesAddLinearly) {
  auto p = NeuronParams::excitatory();
  auto run = [&](double a, double b) {
    auto s = NeuronState::at_rest(p);
    std::vector<double> v;
    for (int k = 0; k < 400; ++k) {
      if (k == 0 && a > 0) receive_spike(s, a, Polarity::excitatory);
      if (k == 50 && b > 0) receive_spike(s, b, Polarity::inhibitory);
      integrate(s, p, 1e-4, k * 1e-4);
      v.push_back(s.v_mv - p.v_rest_mv);
    }
    return v;
  };
  const auto both = run(3.0, 2.0), first = run(3.0, 0.0), second = run(0.0, 2.0);
  for (std::size_t k = 0; k < both.size(); ++k)
    EXPECT_NEAR(both[k], first[k] + second[k], 1e-9 * (1.0 + std::abs(both[k])));
}

TEST(Integrate, DefaultOscillationStaysSubthreshold) {
  auto p = NeuronParams::excitatory();
  p.v_incr_mv = 0.0;
  auto s = NeuronState::at_rest(p);
  s.osc_amp_mv = kDefaultOscAmpMv;
  s.osc_freq_hz = 3.0;
  s.osc_phase = 0.7;
  double vmax = -100.0;
  for (int k = 0; k < 100000; ++k) {
    ASSERT_FALSE(integrate(s, p, 1e-4, k * 1e-4));
    vmax = std::max(vmax, s.v_mv);
  }
  EXPECT_GT(vmax, p.v_rest_mv + 1.0);
}

TEST(NeuronParamsCheck, ValidationNamesTheField) {
  auto p = NeuronParams::excitatory();
  p.tau_mem_s = 0.0;
  try {
    p.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "tau_mem_ms");
  }
  p = NeuronParams::excitatory();
  p.v_thr_mv = -70.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(NeuronParams::inhibitory().validate());
}
