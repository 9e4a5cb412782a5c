#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace bcall {

/// Sorted spike times of one unit, in seconds.
struct SpikeTrain {
  std::vector<double> times;
  double duration = 0.0;
  double dt = 1e-4;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }

  /// Strictly increasing, inside [0, duration], gaps of at least dt.
  /// Throws std::invalid_argument otherwise.
  void validate() const;
};

/// Direction of the shifts applied to a correlated copy. `symmetric` is the
/// plain algorithm; `lag` and `lead` fold the shift onto one side so the copy
/// consistently follows or precedes its source.
enum class ShiftBias { symmetric, lag, lead };

struct CorrelationSpec {
  double gamma = 0.0;   // shift bound as a fraction of the source period
  double f_g_hz = 0.0;  // target rate
  double f_s_hz = 0.0;  // source rate
  ShiftBias bias = ShiftBias::symmetric;

  void validate() const;
  double keep_probability() const { return f_g_hz / f_s_hz; }
  double max_shift_s() const { return gamma / f_s_hz; }
};

/// Per-step Bernoulli process with p = rate * dt, sampled by geometric skips.
SpikeTrain poisson_train(double rate_hz, double duration, double dt, std::uint64_t seed);

/// Spikes every 1/rate seconds starting at `onset`, at most `count` of them,
/// snapped to the dt grid.
SpikeTrain regular_train(double rate_hz, std::size_t count, double onset, double dt);

/// Derived train: every source spike is shifted by L ~ U(-gamma/f_s, gamma/f_s)
/// (one-sided for lag/lead), kept with probability f_g/f_s, and after sorting
/// any spike closer than dt to the previously kept one is removed. Shifted
/// spikes outside [0, duration] are dropped.
SpikeTrain correlated_train(const SpikeTrain& source, const CorrelationSpec& spec,
                            std::uint64_t seed);

enum class PhaseMode { random, correlated };

/// Oscillation phases: U(-pi, pi) for `random`, U(-0.1, 0.1) for `correlated`.
std::vector<double> phase_assignment(std::size_t n, PhaseMode mode, std::uint64_t seed);

/// CSV with header `unit_id,t`, one row per spike.
void write_trains_csv(std::ostream& out, std::span<const SpikeTrain> trains);
std::vector<SpikeTrain> read_trains_csv(std::istream& in, double duration, double dt);

}  // namespace bcall
