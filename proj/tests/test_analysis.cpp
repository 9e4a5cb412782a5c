#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bcall/analysis.hpp"
#include "oracles.hpp"

using namespace bcall;

TEST(Hamming, Examples) {
  BinaryVector a(784, 1), b(784, 1), c(784, 0);
  EXPECT_EQ(hamming(a, b), 0u);
  EXPECT_EQ(hamming(a, c), 784u);
  EXPECT_EQ(hamming(BinaryVector{1, 1, 0, 0}, BinaryVector{1, 0, 1, 0}), 2u);
  EXPECT_THROW(hamming(BinaryVector{1, 0}, BinaryVector{1}), std::invalid_argument);
}

TEST(CodingLevel, FractionOfOnes) {
  EXPECT_DOUBLE_EQ(coding_level(BinaryVector{1, 0, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(coding_level(BinaryVector(784, 0)), 0.0);
}

TEST(Noise, Examples) {
  BinaryVector proto(20, 0), m(20, 0);
  for (int k = 0; k < 10; ++k) proto[k] = 1;
  for (int k = 0; k < 6; ++k) m[k] = 1;
  EXPECT_DOUBLE_EQ(noise_percentage(m, proto), 0.0);
  for (int k = 10; k < 14; ++k) m[k] = 1;
  EXPECT_DOUBLE_EQ(noise_percentage(m, proto), 40.0);
  EXPECT_THROW(noise_percentage(BinaryVector(20, 0), proto), std::invalid_argument);
}

TEST(Sync, IdenticalTrainsAreFullySynchronous) {
  SpikeTrain a{{0.1, 0.3, 0.35, 0.8}, 1.0, 1e-4};
  std::vector<SpikeTrain> t{a, a, a};
  EXPECT_DOUBLE_EQ(spike_synchronization(t), 1.0);
}

TEST(Sync, DistantSingleSpikesAreNotCoincident) {
  std::vector<SpikeTrain> t{{{0.05}, 10.0, 1e-4}, {{9.95}, 10.0, 1e-4}};
  EXPECT_DOUBLE_EQ(spike_synchronization(t), 0.0);
  EXPECT_DOUBLE_EQ(oracle::spike_sync(t), 0.0);
}

TEST(Sync, SmallThreeTrainCaseMatchesBruteForce) {
  std::vector<SpikeTrain> t{{{0.10, 0.40, 0.70}, 1.0, 1e-4},
                            {{0.12, 0.45, 0.90}, 1.0, 1e-4},
                            {{0.20, 0.41}, 1.0, 1e-4}};
  EXPECT_DOUBLE_EQ(spike_synchronization(t), oracle::spike_sync(t));
}

TEST(Sync, RejectsEmptyTrainsAndSingletons) {
  std::vector<SpikeTrain> one{{{0.1}, 1.0, 1e-4}};
  EXPECT_THROW(spike_synchronization(one), std::invalid_argument);
  std::vector<SpikeTrain> empty{{{0.1}, 1.0, 1e-4}, {{}, 1.0, 1e-4}};
  EXPECT_THROW(spike_synchronization(empty), std::invalid_argument);
}

TEST(PoolVariability, IdenticalPoolsHaveZeroSpread) {
  BinaryVector m{1, 0, 1, 1};
  std::vector<Pools> nets{Pools{{m, m, m}, {m, m}}};
  const auto v = pool_variability(nets);
  EXPECT_DOUBLE_EQ(v.mean, 0.0);
  EXPECT_DOUBLE_EQ(v.std, 0.0);
}

TEST(PoolVariability, TwoLevelAverage) {
  // net A: class 0 HDs {2}, class 1 HDs {1, 3, 2}; net B: class 0 {4}, class 1 {0}
  const BinaryVector z{0, 0, 0, 0}, a2{1, 1, 0, 0}, b1{1, 0, 0, 0}, c3{0, 1, 1, 1}, f4{1, 1, 1, 1};
  Pools net_a{{z, a2}, {b1, z, c3}};
  Pools net_b{{z, f4}, {z, z}};
  // net A class 1: HD(b1,z)=1, HD(b1,c3)=4, HD(z,c3)=3
  const double ma = (2.0 + (1.0 + 4.0 + 3.0) / 3.0) / 2.0;
  const double va = (0.0 + ((1 - 8.0 / 3) * (1 - 8.0 / 3) + (4 - 8.0 / 3) * (4 - 8.0 / 3) + (3 - 8.0 / 3) * (3 - 8.0 / 3)) / 3.0) / 2.0;
  const double mb = (4.0 + 0.0) / 2.0;
  std::vector<Pools> nets{net_a, net_b};
  const auto v = pool_variability(nets);
  EXPECT_NEAR(v.mean, (ma + mb) / 2.0, 1e-12);
  EXPECT_NEAR(v.variance, (va + 0.0) / 2.0, 1e-12);
  std::vector<Pools> single{Pools{{z}, {z}}};
  EXPECT_THROW(pool_variability(single), std::invalid_argument);
}

TEST(Histogram, NormalizedAndClamped) {
  const std::vector<double> one{7.0};
  const auto h = rate_histogram(one, 4);
  EXPECT_DOUBLE_EQ(h[1], 1.0);
  const std::vector<double> v{-3.0, 2.0, 12.0, 100.0};
  const auto g = rate_histogram(v, 3);
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  double sum = 0.0;
  for (double x : g) sum += x;
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(Histogram, UniformRatesGiveFlatHistogram) {
  std::vector<double> v;
  for (int k = 0; k < 10000; ++k) v.push_back((k + 0.5) * 50.0 / 10000);
  for (double x : rate_histogram(v, 10)) EXPECT_NEAR(x, 0.1, 1e-9);
}

TEST(Ks, IdenticalAndShiftedSamples) {
  std::vector<double> a, b, c;
  for (int k = 0; k < 200; ++k) {
    a.push_back(k * 0.01);
    b.push_back(k * 0.01 + 0.001);
    c.push_back(k * 0.01 + 1.0);
  }
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.9);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
  EXPECT_NEAR(ks_two_sample(a, c).statistic, 0.5, 0.01);
}

TEST(PhaseLocking, LockedAndUniformSpikes) {
  SpikeTrain locked{{}, 10.0, 1e-4}, spread{{}, 10.0, 1e-4};
  for (int k = 0; k < 30; ++k) locked.times.push_back(k / 3.0 + 0.01);
  for (int k = 0; k < 300; ++k) spread.times.push_back(k / 30.0 + 0.001);
  std::vector<SpikeTrain> l{locked}, s{spread};
  EXPECT_NEAR(phase_locking(l, 3.0), 1.0, 1e-9);
  EXPECT_LT(phase_locking(s, 3.0), 0.05);
}

TEST(Stats, MeanAndSampleStd) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_NEAR(stddev(v), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(stddev(std::vector<double>{1.0}), 0.0);
}
