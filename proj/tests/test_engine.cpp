#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bcall/engine.hpp"
#include "bcall/error.hpp"
#include "bcall/protocols.hpp"
#include "oracles.hpp"

using namespace bcall;

namespace {

std::vector<long> grid_steps(const SpikeTrain& t) {
  std::vector<long> s;
  for (double x : t.times) s.push_back(std::lround(x / t.dt));
  return s;
}

void expect_matches_oracle(const SpikeTrain& pre, const SpikeTrain& post, const BCaLLParams& p, double w0,
                           bool drift) {
  const auto r = pair_replay(pre, post, p, w0, 1e-4);
  const auto& xi = r.trace("x_i");
  const auto& xj = r.trace("x_j");
  const auto& xs = r.trace("x_s");
  const auto& w = r.trace("w_hid");
  const auto ref = oracle::pair_rule(grid_steps(pre), grid_steps(post), static_cast<long>(xi.times.size()), p, w0,
                                     1e-4, drift);
  ASSERT_EQ(ref.size(), w.times.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    ASSERT_NEAR(xi.at(k, 0), ref[k].x_i, 1e-9) << "step " << k;
    ASSERT_NEAR(xj.at(k, 0), ref[k].x_j, 1e-9) << "step " << k;
    ASSERT_NEAR(xs.at(k, 0), ref[k].x_s, 1e-9) << "step " << k;
    ASSERT_NEAR(w.at(k, 0), ref[k].w, 1e-9) << "step " << k;
  }
}

}  // namespace

TEST(SimConfig, Validation) {
  EXPECT_THROW((SimConfig{0.0, 1.0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((SimConfig{1e-4, -1.0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((SimConfig{1e-4, 0.00015, 0}.validate()), std::invalid_argument);
  EXPECT_EQ((SimConfig{1e-4, 1.0, 0}.steps()), 10000);
}

TEST(Engine, EmptyNetworkRuns) {
  Network net;
  const auto r = run(net, {1e-4, 0.01, 1});
  EXPECT_TRUE(r.traces.empty());
  EXPECT_TRUE(r.spikes.empty());
}

TEST(Engine, OneStepTransmissionDelay) {
  Network net;
  SpikeTrain src{{0.001}, 0.005, 1e-4};
  const auto in = net.add_replay("in", {src});
  const auto n = net.add_neurons("n", 1, NeuronParams::excitatory());
  net.connect_one_to_one(in, n, 5.0, Polarity::excitatory);
  net.record({"e", Variable::exc_psp, 0, {}, {}, 1});
  const auto r = run(net, {1e-4, 0.005, 1});
  const auto& e = r.trace("e");
  // the spike at step 10 lands in the EPSP variable during step 10 and has
  // moved the membrane by step 11
  EXPECT_DOUBLE_EQ(e.at(9, 0), 0.0);
  EXPECT_NEAR(e.at(10, 0), 5.0 * std::exp(-1e-4 / 0.0035), 1e-12);
}

TEST(Engine, NeuronToNeuronSpikeArrivesNextStep) {
  Network net;
  const auto in = net.add_replay("in", {SpikeTrain{{0.0}, 0.01, 1e-4}});
  const auto a = net.add_neurons("a", 1, NeuronParams::excitatory());
  const auto b = net.add_neurons("b", 1, NeuronParams::excitatory());
  net.connect_one_to_one(in, a, 200.0, Polarity::excitatory);
  net.connect_one_to_one(a, b, 1.0, Polarity::excitatory);
  net.record_spikes({"a", a, {}});
  net.record({"e", Variable::exc_psp, 1, {}, {}, 1});
  const auto r = run(net, {1e-4, 0.01, 1});
  ASSERT_FALSE(r.spike_record("a").trains[0].empty());
  const auto k = static_cast<std::size_t>(std::lround(r.spike_record("a").trains[0].times[0] / 1e-4));
  EXPECT_DOUBLE_EQ(r.trace("e").at(k, 0), 0.0);
  EXPECT_GT(r.trace("e").at(k + 1, 0), 0.0);
}

TEST(Engine, PairReplayMatchesScalarRuleWithOpenGate) {
  const auto p = BCaLLParams{}.with_gate_open().without_bistability();
  const auto pre = poisson_train(25.0, 2.0, 1e-4, 5);
  const auto post = poisson_train(30.0, 2.0, 1e-4, 6);
  expect_matches_oracle(pre, post, p, 0.5, false);
}

TEST(Engine, PairReplayMatchesScalarRuleWithGateAndDrift) {
  BCaLLParams p;
  p.tau_w_s = 0.5;
  const auto pre = poisson_train(40.0, 3.0, 1e-4, 7);
  const auto post = poisson_train(20.0, 3.0, 1e-4, 8);
  expect_matches_oracle(pre, post, p, 0.55, true);
}

TEST(Engine, PairReplayMatchesScalarRuleWithCoincidentSpikes) {
  const BCaLLParams p;
  SpikeTrain pre{{0.01, 0.02, 0.03, 0.05, 0.08}, 0.1, 1e-4};
  SpikeTrain post{{0.015, 0.02, 0.03, 0.06, 0.08}, 0.1, 1e-4};
  expect_matches_oracle(pre, post, p, 0.3, true);
}

TEST(Engine, PoissonGeneratorRate) {
  Network net;
  const auto g = net.add_poisson("g", std::vector<double>(50, 20.0));
  net.record_spikes({"g", g, {}});
  const auto r = run(net, {1e-4, 10.0, 3});
  double total = 0.0;
  for (const auto& t : r.spike_record("g").trains) total += t.size();
  EXPECT_NEAR(total / 50.0, 200.0, 4 * std::sqrt(200.0 / 50.0));
}

TEST(Engine, SameSeedSameResult) {
  auto build = [] {
    Network net;
    const auto g = net.add_poisson("g", std::vector<double>(20, 40.0));
    const auto in = net.add_neurons("in", 20, NeuronParams::excitatory());
    const auto n = net.add_neurons("n", 5, NeuronParams::excitatory());
    net.connect_one_to_one(g, in, 100.0, Polarity::excitatory);
    PlasticProjectionSpec spec;
    spec.source = in;
    spec.target = n;
    spec.params.w_pot_mv = 6.0;
    spec.w_hid = Eigen::MatrixXd::Constant(20, 5, 0.6);
    net.connect_plastic(spec);
    net.record({"w", Variable::w_hid_mean, 0, {}, {}, 100});
    net.record_spikes({"n", n, {}});
    return net;
  };
  const auto a = run(build(), {1e-4, 1.0, 9});
  const auto b = run(build(), {1e-4, 1.0, 9});
  const auto c = run(build(), {1e-4, 1.0, 10});
  EXPECT_EQ(a.trace("w").values, b.trace("w").values);
  EXPECT_EQ(a.spike_record("n").trains[0].times, b.spike_record("n").trains[0].times);
  EXPECT_NE(a.trace("w").values, c.trace("w").values);
}

TEST(Engine, NonFiniteStateRaises) {
  Network net;
  const auto in = net.add_replay("in", {SpikeTrain{{0.001}, 0.01, 1e-4}});
  const auto n = net.add_neurons("n", 1, NeuronParams::excitatory());
  net.connect(in, n, Polarity::excitatory, {{0, 0, std::numeric_limits<double>::infinity()}});
  EXPECT_THROW(run(net, {1e-4, 0.01, 1}), SimulationError);
}

TEST(Engine, RecorderStride) {
  Network net;
  net.add_neurons("n", 2, NeuronParams::excitatory());
  net.record({"v", Variable::membrane, 0, {1}, {}, 10});
  const auto r = run(net, {1e-4, 0.01, 1});
  const auto& v = r.trace("v");
  EXPECT_EQ(v.times.size(), 10u);
  EXPECT_EQ(v.width(), 1u);
  EXPECT_NEAR(v.times[1], 1e-3, 1e-12);
  EXPECT_THROW(r.trace("missing"), std::out_of_range);
}

TEST(Engine, LearningOffFreezesWeights) {
  Network net;
  const auto pre = net.add_replay("pre", {poisson_train(50, 1, 1e-4, 1)});
  const auto post = net.add_replay("post", {poisson_train(50, 1, 1e-4, 2)});
  PlasticProjectionSpec spec;
  spec.source = pre;
  spec.target = post;
  spec.w_hid = Eigen::MatrixXd::Constant(1, 1, 0.7);
  spec.learning = false;
  net.connect_plastic(spec);
  Simulator sim(net, {1e-4, 1.0, 1});
  sim.run_to_end();
  EXPECT_DOUBLE_EQ(sim.w_hid(0)(0, 0), 0.7);
}
