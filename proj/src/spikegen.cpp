#include "bcall/spikegen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bcall/error.hpp"
#include "bcall/io.hpp"
#include "bcall/rng.hpp"

namespace bcall {

void SpikeTrain::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("spike train dt must be > 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || times[k] > duration)
      throw std::invalid_argument("spike time outside [0, duration]");
    // relative slack for times built as step * dt
    if (k > 0 && times[k] - times[k - 1] < dt * (1.0 - 1e-9))
      throw std::invalid_argument("spike gap below dt");
  }
}

void CorrelationSpec::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("gamma", "must be >= 0");
  if (!(f_g_hz > 0.0)) throw ConfigError("f_g", "must be > 0");
  if (!(f_s_hz >= f_g_hz)) throw ConfigError("f_g", "must not exceed f_s");
}

SpikeTrain poisson_train(double rate_hz, double duration, double dt, std::uint64_t seed) {
  if (!(rate_hz >= 0.0)) throw std::invalid_argument("rate must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double p = rate_hz * dt;
  if (p > 1.0) throw std::invalid_argument("rate * dt > 1 is not representable on this grid");
  SpikeTrain train{{}, duration, dt};
  if (p == 0.0) return train;
  const auto steps = static_cast<std::int64_t>(std::llround(duration / dt));
  Rng rng(seed);
  for (std::int64_t k = rng.geometric(p); k < steps; k += 1 + rng.geometric(p))
    train.times.push_back(static_cast<double>(k) * dt);
  return train;
}

SpikeTrain regular_train(double rate_hz, std::size_t count, double onset, double dt) {
  if (!(rate_hz > 0.0)) throw std::invalid_argument("rate must be > 0");
  SpikeTrain train{{}, 0.0, dt};
  std::int64_t last = -1;
  for (std::size_t k = 0; k < count; ++k) {
    const auto step = std::llround((onset + static_cast<double>(k) / rate_hz) / dt);
    if (step <= last) throw std::invalid_argument("regular train period below dt");
    train.times.push_back(static_cast<double>(step) * dt);
    last = step;
  }
  train.duration = train.times.empty() ? 0.0 : train.times.back() + dt;
  return train;
}

SpikeTrain correlated_train(const SpikeTrain& source, const CorrelationSpec& spec,
                            std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const double bound = spec.max_shift_s();
  const double keep = spec.keep_probability();
  std::vector<double> shifted;
  shifted.reserve(source.times.size());
  for (double s : source.times) {
    double shift = rng.uniform(-bound, bound);
    if (spec.bias == ShiftBias::lag) shift = std::abs(shift);
    if (spec.bias == ShiftBias::lead) shift = -std::abs(shift);
    // both draws are consumed for every source spike so the kept subset does
    // not change the shifts of later spikes
    const bool kept = rng.uniform() < keep;
    const double t = s + shift;
    if (kept && t >= 0.0 && t <= source.duration) shifted.push_back(t);
  }
  std::sort(shifted.begin(), shifted.end());
  SpikeTrain out{{}, source.duration, source.dt};
  for (double t : shifted) {
    if (!out.times.empty() && t - out.times.back() < source.dt) continue;
    out.times.push_back(t);
  }
  return out;
}

std::vector<double> phase_assignment(std::size_t n, PhaseMode mode, std::uint64_t seed) {
  const double half = mode == PhaseMode::random ? std::numbers::pi : 0.1;
  Rng rng(seed);
  std::vector<double> phases(n);
  for (auto& ph : phases) ph = rng.uniform(-half, half);
  return phases;
}

void write_trains_csv(std::ostream& out, std::span<const SpikeTrain> trains) {
  out << "unit_id,t\n";
  for (std::size_t u = 0; u < trains.size(); ++u)
    for (double t : trains[u].times) out << u << ',' << format_number(t) << '\n';
}

std::vector<SpikeTrain> read_trains_csv(std::istream& in, double duration, double dt) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("unit_id,t", 0) != 0)
    throw ParseError("expected header unit_id,t", 0);
  std::vector<SpikeTrain> trains;
  std::uint64_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    const std::uint64_t row_offset = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("malformed spike row", row_offset);
    std::size_t unit = 0;
    double t = 0.0;
    try {
      unit = std::stoul(line.substr(0, comma));
      t = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed spike row", row_offset);
    }
    if (unit >= trains.size()) trains.resize(unit + 1, SpikeTrain{{}, duration, dt});
    trains[unit].times.push_back(t);
  }
  for (auto& tr : trains) std::sort(tr.times.begin(), tr.times.end());
  return trains;
}

}  // namespace bcall
