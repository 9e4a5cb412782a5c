#include <gtest/gtest.h>

#include <set>

#include "bcall/rsnn.hpp"

using namespace bcall;

TEST(Rsnn, WiringHasNoSelfConnectionsAndExpectedDensity) {
  RsnnConfig cfg;
  const auto r = build_rsnn(cfg);
  ASSERT_EQ(r.ee_mask.rows(), 256);
  for (Eigen::Index k = 0; k < 256; ++k) EXPECT_EQ(r.ee_mask(k, k), 0);
  const double density = static_cast<double>(r.ee_synapses) / (256.0 * 255.0);
  EXPECT_NEAR(density, 0.5, 0.02);
  for (const auto& f : r.net.fixed_projections())
    if (f.source == GroupRef{GroupKind::neurons, f.target})
      for (const auto& c : f.connections) EXPECT_NE(c.pre, c.post);
}

TEST(Rsnn, SubsetSynapsesStayInsideTheStimulatedUnits) {
  RsnnConfig cfg;
  const auto r = build_rsnn(cfg);
  EXPECT_FALSE(r.subset_synapses.empty());
  for (auto [i, j] : r.subset_synapses) {
    EXPECT_LT(i, cfg.n_stim);
    EXPECT_LT(j, cfg.n_stim);
    EXPECT_NE(i, j);
    EXPECT_EQ(r.ee_mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 1);
  }
}

TEST(Rsnn, PhasesFollowTheMode) {
  RsnnConfig cfg;
  cfg.phase_mode = PhaseMode::correlated;
  for (double ph : build_rsnn(cfg).phases) EXPECT_LE(std::abs(ph), 0.1);
}

TEST(Rsnn, ShortRunIsReproducible) {
  RsnnConfig cfg;
  cfg.duration_s = 0.3;
  const auto a = run_attractor_protocol(cfg);
  const auto b = run_attractor_protocol(cfg);
  EXPECT_EQ(a.whid_mean, b.whid_mean);
  EXPECT_EQ(a.stim_rates_hz, b.stim_rates_hz);
  EXPECT_EQ(a.stim_trains.size(), cfg.n_stim);
  EXPECT_EQ(a.exc_rates_hz.size(), cfg.n_exc);
  for (double w : a.whid_mean) {
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
}

TEST(Rsnn, Validation) {
  RsnnConfig cfg;
  cfg.n_stim = 300;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = RsnnConfig{};
  cfg.p_ee = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
