#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bcall/spikegen.hpp"

// Straightforward reference implementations used as independent oracles.
namespace oracle {

// SPIKE-synchronization by exhaustive nearest-neighbour search.
inline double spike_sync(const std::vector<bcall::SpikeTrain>& trains) {
  double dur = 0.0;
  for (const auto& t : trains) dur = std::max({dur, t.duration, t.times.back()});
  auto half_isi = [&](const std::vector<double>& v, std::size_t k) {
    const double before = k == 0 ? v[k] : v[k] - v[k - 1];
    const double after = k + 1 == v.size() ? dur - v[k] : v[k + 1] - v[k];
    return 0.5 * std::min(before, after);
  };
  double hits = 0.0, total = 0.0;
  for (std::size_t a = 0; a < trains.size(); ++a) {
    for (std::size_t b = 0; b < trains.size(); ++b) {
      if (a == b) continue;
      const auto& ta = trains[a].times;
      const auto& tb = trains[b].times;
      for (std::size_t k = 0; k < ta.size(); ++k) {
        std::size_t best = 0;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < tb.size(); ++m) {
          const double e = std::abs(tb[m] - ta[k]);
          if (e < d) {
            d = e;
            best = m;
          }
        }
        total += 1.0;
        if (d <= std::min(half_isi(ta, k), half_isi(tb, best))) hits += 1.0;
      }
    }
  }
  return hits / total;
}

struct PairSample {
  double x_i, x_j, x_s, w;
};

// Single-synapse rule stepped on the grid: plasticity on the pre-jump traces,
// trace jumps, exponential decay, then one step of linear drift away from
// theta_w, with every branch written out by hand.
template <class P>
std::vector<PairSample> pair_rule(const std::vector<long>& pre_steps, const std::vector<long>& post_steps,
                                  long n_steps, const P& p, double w0, double dt, bool drift) {
  std::vector<PairSample> out;
  double xi = 0.0, xj = 0.0, xs = 0.0, w = w0;
  std::size_t a = 0, b = 0;
  for (long k = 0; k < n_steps; ++k) {
    const bool pre = a < pre_steps.size() && pre_steps[a] == k;
    const bool post = b < post_steps.size() && post_steps[b] == k;
    if (pre) ++a;
    if (post) ++b;
    const bool open = xs >= p.theta_l && xs <= p.theta_u;
    double dw = 0.0;
    if (pre && open && xj > p.theta_j) dw += p.c1_d;
    if (post && open && xi > 0.0) {
      dw += xi * p.c_p;
      if (xi < p.theta_i) dw += p.c2_d;
    }
    w = std::min(1.0, std::max(0.0, w + dw));
    if (pre) xi += p.a_i * (p.x_max_i - xi);
    if (post) {
      xj += p.a_j * (p.x_max_j - xj);
      xs += p.a_s * (p.x_max_s - xs);
    }
    xi *= std::exp(-dt / p.tau_i_s);
    xj *= std::exp(-dt / p.tau_j_s);
    xs *= std::exp(-dt / p.tau_s_s);
    if (drift) {
      const double rate = w >= p.theta_w ? p.alpha / p.tau_w_s : -p.beta / p.tau_w_s;
      w = std::min(1.0, std::max(0.0, w + rate * dt));
    }
    out.push_back({xi, xj, xs, w});
  }
  return out;
}

}  // namespace oracle
