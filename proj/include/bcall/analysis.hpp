#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bcall/spikegen.hpp"

namespace bcall {

using BinaryVector = std::vector<std::uint8_t>;

/// Number of differing positions. Throws std::invalid_argument on a length
/// mismatch.
std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Fraction of ones.
double coding_level(std::span<const std::uint8_t> v);

/// Multivariate SPIKE-synchronization in [0, 1]. Each spike is compared with
/// the nearest spike of every other train; it counts as coincident when the
/// time difference is at most tau = min of the four surrounding inter-spike
/// intervals halved. ISIs missing at a train edge are replaced by the distance
/// to the recording boundary [0, duration], where duration is the largest
/// SpikeTrain::duration of the inputs. The score averages the coincidence
/// indicators over every (spike, other train) pair. Throws on fewer than two
/// trains or an empty train.
double spike_synchronization(std::span<const SpikeTrain> trains);

/// Percentage of ones in `matrix` that fall on zeros of `prototype`. Throws
/// on a length mismatch or an all-zero matrix.
double noise_percentage(std::span<const std::uint8_t> matrix, std::span<const std::uint8_t> prototype);

/// Per network: pools[class][member] binary matrices. Within each pool all
/// unordered member pairs contribute a Hamming distance; the pool mean and
/// variance are averaged over classes, then averaged again over networks.
struct PoolVariability {
  double mean = 0.0;
  double std = 0.0;       // mean over networks of the class-averaged std
  double variance = 0.0;  // mean over networks of the class-averaged variance
};
using Pools = std::vector<std::vector<BinaryVector>>;
PoolVariability pool_variability(std::span<const Pools> networks);

/// Probability-normalized histogram of `values` with bins of `width` starting
/// at `lo`; values outside [lo, lo + bins*width) are clamped into the edge bins.
std::vector<double> rate_histogram(std::span<const double> values, std::size_t bins,
                                   double width = 5.0, double lo = 0.0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution (Stephens' small-sample correction of the effective n).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Mean resultant length of spike phases at frequency `freq_hz`.
double phase_locking(std::span<const SpikeTrain> trains, double freq_hz,
                     std::span<const double> phase_offsets = {});

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> v);

}  // namespace bcall
