#include "bcall/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace bcall {

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d += (a[k] != 0) != (b[k] != 0);
  return d;
}

double coding_level(std::span<const std::uint8_t> v) {
  if (v.empty()) return 0.0;
  const auto ones = std::count_if(v.begin(), v.end(), [](auto x) { return x != 0; });
  return static_cast<double>(ones) / static_cast<double>(v.size());
}

namespace {

// Half the smaller of the two ISIs adjacent to spike k.
double window(const std::vector<double>& t, std::size_t k, double duration) {
  const auto n = t.size();
  auto isi = [&](std::ptrdiff_t a) {
    // interval between spike a and a+1, with boundary substitutes
    if (a < 0) return t[0];
    if (static_cast<std::size_t>(a) + 1 >= n) return duration - t[n - 1];
    return t[static_cast<std::size_t>(a) + 1] - t[static_cast<std::size_t>(a)];
  };
  const auto kk = static_cast<std::ptrdiff_t>(k);
  return 0.5 * std::min(isi(kk - 1), isi(kk));
}

}  // namespace

double spike_synchronization(std::span<const SpikeTrain> trains) {
  if (trains.size() < 2) throw std::invalid_argument("spike_synchronization needs >= 2 trains");
  double duration = 0.0;
  for (const auto& tr : trains) {
    if (tr.empty()) throw std::invalid_argument("spike_synchronization: empty train");
    duration = std::max({duration, tr.duration, tr.times.back()});
  }
  double hits = 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < trains.size(); ++a) {
    const auto& ta = trains[a].times;
    for (std::size_t b = 0; b < trains.size(); ++b) {
      if (a == b) continue;
      const auto& tb = trains[b].times;
      for (std::size_t k = 0; k < ta.size(); ++k) {
        const double t = ta[k];
        auto it = std::lower_bound(tb.begin(), tb.end(), t);
        std::size_t m;
        if (it == tb.end()) {
          m = tb.size() - 1;
        } else if (it == tb.begin()) {
          m = 0;
        } else {
          const auto hi = static_cast<std::size_t>(it - tb.begin());
          m = (t - tb[hi - 1] <= tb[hi] - t) ? hi - 1 : hi;
        }
        const double tau = std::min(window(ta, k, duration), window(tb, m, duration));
        total += 1.0;
        if (std::abs(tb[m] - t) <= tau) hits += 1.0;
      }
    }
  }
  return hits / total;
}

double noise_percentage(std::span<const std::uint8_t> matrix, std::span<const std::uint8_t> prototype) {
  if (matrix.size() != prototype.size()) throw std::invalid_argument("noise_percentage: length mismatch");
  std::size_t ones = 0;
  std::size_t outside = 0;
  for (std::size_t p = 0; p < matrix.size(); ++p) {
    if (!matrix[p]) continue;
    ++ones;
    if (!prototype[p]) ++outside;
  }
  if (ones == 0) throw std::invalid_argument("noise_percentage: matrix has no ones");
  return 100.0 * static_cast<double>(outside) / static_cast<double>(ones);
}

PoolVariability pool_variability(std::span<const Pools> networks) {
  if (networks.empty()) throw std::invalid_argument("pool_variability: no networks");
  PoolVariability out;
  for (const auto& pools : networks) {
    if (pools.empty()) throw std::invalid_argument("pool_variability: no pools");
    double m_sum = 0.0, v_sum = 0.0, s_sum = 0.0;
    for (const auto& pool : pools) {
      if (pool.size() < 2) throw std::invalid_argument("pool_variability: N_class must be >= 2");
      std::vector<double> hd;
      for (std::size_t a = 0; a < pool.size(); ++a)
        for (std::size_t b = a + 1; b < pool.size(); ++b)
          hd.push_back(static_cast<double>(hamming(pool[a], pool[b])));
      const double m = mean(hd);
      double var = 0.0;
      for (double h : hd) var += (h - m) * (h - m);
      var /= static_cast<double>(hd.size());
      m_sum += m;
      v_sum += var;
      s_sum += std::sqrt(var);
    }
    const auto nc = static_cast<double>(pools.size());
    out.mean += m_sum / nc;
    out.variance += v_sum / nc;
    out.std += s_sum / nc;
  }
  const auto nn = static_cast<double>(networks.size());
  out.mean /= nn;
  out.variance /= nn;
  out.std /= nn;
  return out;
}

std::vector<double> rate_histogram(std::span<const double> values, std::size_t bins, double width,
                                   double lo) {
  if (bins < 1) throw std::invalid_argument("rate_histogram: bins must be >= 1");
  if (!(width > 0.0)) throw std::invalid_argument("rate_histogram: width must be > 0");
  std::vector<double> h(bins, 0.0);
  if (values.empty()) return h;
  for (double v : values) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    h[static_cast<std::size_t>(b)] += 1.0;
  }
  for (auto& x : h) x /= static_cast<double>(values.size());
  return h;
}

namespace {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = x.size(), m = y.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    const double v = std::min(x[i], y[j]);
    while (i < n && x[i] <= v) ++i;
    while (j < m && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = static_cast<double>(n) * m / static_cast<double>(n + m);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

double phase_locking(std::span<const SpikeTrain> trains, double freq_hz,
                     std::span<const double> phase_offsets) {
  double c = 0.0, s = 0.0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < trains.size(); ++u) {
    const double off = u < phase_offsets.size() ? phase_offsets[u] : 0.0;
    for (double t : trains[u].times) {
      const double ph = 2.0 * std::numbers::pi * freq_hz * t + off;
      c += std::cos(ph);
      s += std::sin(ph);
      ++n;
    }
  }
  if (n == 0) return 0.0;
  return std::hypot(c, s) / static_cast<double>(n);
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace bcall
