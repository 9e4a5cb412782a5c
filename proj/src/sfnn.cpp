#include "bcall/sfnn.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "bcall/error.hpp"
#include "bcall/rng.hpp"

namespace bcall {

void SfnnConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0)) throw ConfigError(field, "must be > 0");
  };
  auto non_negative = [](double v, const char* field) {
    if (!(v >= 0.0)) throw ConfigError(field, "must be >= 0");
  };
  non_negative(f_a_hz, "f_a_hz");
  non_negative(f_s_hz, "f_s_hz");
  non_negative(f_t_hz, "f_t_hz");
  non_negative(f_i_hz, "f_i_hz");
  non_negative(w_v_mv, "w_v_mv");
  non_negative(w_t_mv, "w_t_mv");
  non_negative(w_i_mv, "w_i_mv");
  non_negative(w_max_train_mv, "w_max_train_mv");
  non_negative(w_max_test_mv, "w_max_test_mv");
  positive(t_inp_s, "t_inp_s");
  non_negative(gap_s, "gap_s");
  non_negative(fixed_inhibition_scale, "fixed_inhibition_scale");
  positive(dt, "dt_ms");
  if (n_class < 1) throw ConfigError("n_class", "must be >= 1");
  if (classes.empty()) throw ConfigError("classes", "must list at least one class");
  for (std::size_t a = 0; a < classes.size(); ++a) {
    if (classes[a] < 0 || classes[a] > 9) throw ConfigError("classes", "entries must be in [0, 9]");
    for (std::size_t b = a + 1; b < classes.size(); ++b)
      if (classes[a] == classes[b]) throw ConfigError("classes", "entries must be distinct");
  }
  if (binarize_threshold < 0 || binarize_threshold > 255)
    throw ConfigError("binarize_threshold", "must be in [0, 255]");
  for (double r : {f_a_hz, f_s_hz, f_t_hz, f_i_hz})
    if (r * dt > 1.0) throw ConfigError("dt_ms", "rate * dt must not exceed 1");
  plasticity.validate();
  neuron.validate();
}

BCaLLParams SfnnConfig::effective_plasticity() const {
  return stop_learning ? plasticity : plasticity.with_gate_open();
}

double inhibition_rate(const BinarySample& sample, const SfnnConfig& config) {
  if (config.inhibition == InhibitionMode::fixed) return config.fixed_inhibition_scale * config.f_i_hz;
  return config.f_i_hz * sample.coding_level;
}

SfnnNetwork build_sfnn(const SfnnConfig& config, const Eigen::MatrixXd* w_hid) {
  config.validate();
  SfnnNetwork s;
  const auto n_out = config.n_outputs();
  s.pixels = s.net.add_poisson("pixels", std::vector<double>(kPixels, 0.0));
  s.inputs = s.net.add_neurons("inputs", kPixels, config.neuron);
  s.outputs = s.net.add_neurons("outputs", n_out, config.neuron);
  s.teachers = s.net.add_poisson("teachers", std::vector<double>(n_out, 0.0));
  s.inhibitors = s.net.add_poisson("inhibitors", std::vector<double>(n_out, 0.0));
  s.net.connect_one_to_one(s.pixels, s.inputs, config.w_v_mv, Polarity::excitatory);
  s.net.connect_one_to_one(s.teachers, s.outputs, config.w_t_mv, Polarity::excitatory);
  s.net.connect_one_to_one(s.inhibitors, s.outputs, config.w_i_mv, Polarity::inhibitory);

  PlasticProjectionSpec spec;
  spec.name = "input_output";
  spec.source = s.inputs;
  spec.target = s.outputs;
  spec.params = config.effective_plasticity();
  spec.params.w_pot_mv = config.w_max_train_mv;
  spec.params.w_dep_mv = 0.0;
  if (w_hid) {
    if (w_hid->rows() != static_cast<Eigen::Index>(kPixels) ||
        w_hid->cols() != static_cast<Eigen::Index>(n_out))
      throw std::invalid_argument("w_hid shape does not match the network");
    spec.w_hid = *w_hid;
  } else {
    Rng rng(derive_seed(config.seed, 100));
    spec.w_hid.resize(static_cast<Eigen::Index>(kPixels), static_cast<Eigen::Index>(n_out));
    for (Eigen::Index j = 0; j < spec.w_hid.cols(); ++j)
      for (Eigen::Index i = 0; i < spec.w_hid.rows(); ++i) spec.w_hid(i, j) = rng.uniform();
  }
  s.plastic = s.net.connect_plastic(std::move(spec));
  return s;
}

namespace {

std::size_t class_index(const SfnnConfig& config, int label) {
  const auto it = std::find(config.classes.begin(), config.classes.end(), label);
  if (it == config.classes.end())
    throw std::invalid_argument("sample label " + std::to_string(label) + " is not a configured class");
  return static_cast<std::size_t>(it - config.classes.begin());
}

std::vector<double> pixel_rates(const BinarySample& s, const SfnnConfig& config) {
  std::vector<double> r(kPixels);
  for (std::size_t p = 0; p < kPixels; ++p) r[p] = s.pixels[p] ? config.f_a_hz : config.f_s_hz;
  return r;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  Rng rng(seed);
  for (std::size_t k = n; k > 1; --k) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(k));
    std::swap(order[k - 1], order[std::min(j, k - 1)]);
  }
  return order;
}

std::int64_t steps_for(double seconds, double dt) { return std::llround(seconds / dt); }

GateStats operator-(GateStats a, GateStats b) { return {a.open - b.open, a.closed - b.closed}; }

}  // namespace

TrainResult train(const std::vector<BinarySample>& samples, const SfnnConfig& config) {
  auto s = build_sfnn(config);
  const auto n_out = config.n_outputs();
  const auto pres_steps = steps_for(config.t_inp_s, config.dt);
  const auto gap_steps =
      config.presentation == PresentationMode::gapped ? steps_for(config.gap_s, config.dt) : 0;
  const double total = static_cast<double>(samples.size()) *
                       static_cast<double>(pres_steps + gap_steps) * config.dt;
  const auto outputs = s.outputs.index;
  const auto plastic = s.plastic;
  const auto pixels = s.pixels.index;
  const auto teachers = s.teachers.index;
  const auto inhibitors = s.inhibitors.index;
  Simulator sim(std::move(s.net), SimConfig{config.dt, total, config.seed});

  TrainResult r;
  const auto start = std::chrono::steady_clock::now();
  for (auto k : shuffled_order(samples.size(), derive_seed(config.seed, 101))) {
    const auto& sample = samples[k];
    const auto c = class_index(config, sample.label);
    sim.set_rates(pixels, pixel_rates(sample, config));
    for (std::size_t o = 0; o < n_out; ++o)
      sim.set_rate(teachers, o, o / config.n_class == c ? config.f_t_hz : 0.0);
    sim.set_all_rates(inhibitors, inhibition_rate(sample, config));
    sim.reset_spike_counts(outputs);
    const auto gate_before = sim.gate_stats(plastic);
    const auto by_target_before = sim.gate_stats_by_target(plastic);
    sim.advance(pres_steps);

    Presentation p;
    p.label = sample.label;
    p.gate = sim.gate_stats(plastic) - gate_before;
    const auto& by_target = sim.gate_stats_by_target(plastic);
    const auto& counts = sim.spike_counts(outputs);
    std::vector<double> pool(config.classes.size(), 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      pool[o / config.n_class] += static_cast<double>(counts[o]);
      if (o / config.n_class == c) {
        const auto d = by_target[o] - by_target_before[o];
        p.target_gate.open += d.open;
        p.target_gate.closed += d.closed;
      }
    }
    for (auto& v : pool) v /= static_cast<double>(config.n_class) * config.t_inp_s;
    p.target_rate_hz = pool[c];
    p.best_other_rate_hz = 0.0;
    for (std::size_t q = 0; q < pool.size(); ++q)
      if (q != c) p.best_other_rate_hz = std::max(p.best_other_rate_hz, pool[q]);
    r.presentations.push_back(p);

    if (gap_steps > 0) {
      sim.set_all_rates(pixels, 0.0);
      sim.set_all_rates(teachers, 0.0);
      sim.set_all_rates(inhibitors, config.fixed_inhibition_scale * config.f_i_hz);
      sim.advance(gap_steps);
    }
  }
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.simulated_s = total;
  r.w_hid = sim.w_hid(plastic);
  return r;
}

std::vector<std::vector<double>> infer(const Eigen::MatrixXd& w_hid,
                                       const std::vector<BinarySample>& samples,
                                       const SfnnConfig& config) {
  auto test_config = config;
  test_config.seed = derive_seed(config.seed, 102);
  auto s = build_sfnn(test_config, &w_hid);
  s.net.plastic_projections()[s.plastic].learning = false;
  s.net.plastic_projections()[s.plastic].params.w_pot_mv = config.w_max_test_mv;
  const auto pres_steps = steps_for(config.t_inp_s, config.dt);
  const auto outputs = s.outputs.index;
  const auto pixels = s.pixels.index;
  const auto inhibitors = s.inhibitors.index;
  Simulator sim(std::move(s.net),
                SimConfig{config.dt, static_cast<double>(samples.size() * pres_steps) * config.dt,
                          test_config.seed});
  std::vector<std::vector<double>> rates;
  rates.reserve(samples.size());
  for (const auto& sample : samples) {
    sim.set_rates(pixels, pixel_rates(sample, config));
    sim.set_all_rates(inhibitors, inhibition_rate(sample, config));
    sim.reset_spike_counts(outputs);
    sim.advance(pres_steps);
    const auto& counts = sim.spike_counts(outputs);
    std::vector<double> row(counts.size());
    for (std::size_t o = 0; o < counts.size(); ++o)
      row[o] = static_cast<double>(counts[o]) / config.t_inp_s;
    rates.push_back(std::move(row));
  }
  return rates;
}

std::size_t classify(const std::vector<double>& rates, std::size_t n_class, Readout method) {
  if (n_class < 1 || rates.empty() || rates.size() % n_class != 0)
    throw std::invalid_argument("classify: rates must hold whole pools");
  const auto n_pools = rates.size() / n_class;
  if (method == Readout::max_rate) {
    std::size_t best = 0;
    for (std::size_t o = 1; o < rates.size(); ++o)
      if (rates[o] > rates[best]) best = o;
    return best / n_class;
  }
  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t c = 0; c < n_pools; ++c) {
    double m = 0.0;
    for (std::size_t k = 0; k < n_class; ++k) m += rates[c * n_class + k];
    m /= static_cast<double>(n_class);
    if (m > best_mean) {
      best_mean = m;
      best = c;
    }
  }
  return best;
}

double classification_rate(const std::vector<std::vector<double>>& rates,
                           const std::vector<BinarySample>& samples, const SfnnConfig& config,
                           Readout method) {
  if (rates.size() != samples.size()) throw std::invalid_argument("one rate vector per sample expected");
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < samples.size(); ++k)
    correct += classify(rates[k], config.n_class, method) == class_index(config, samples[k].label);
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

std::vector<BinarySample> select_samples(const Dataset& data, const std::vector<int>& classes,
                                         std::size_t per_class, int threshold) {
  std::vector<BinarySample> out;
  std::vector<std::size_t> taken(10, 0);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const int label = data.labels[k];
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) continue;
    auto& n = taken[static_cast<std::size_t>(label)];
    if (per_class != 0 && n >= per_class) continue;
    ++n;
    out.push_back(binarize(data.images[k], label, threshold));
  }
  if (per_class != 0)
    for (int c : classes)
      if (taken[static_cast<std::size_t>(c)] < per_class)
        throw std::runtime_error("dataset holds only " + std::to_string(taken[static_cast<std::size_t>(c)]) +
                                 " samples of class " + std::to_string(c));
  return out;
}

std::vector<BinarySample> subsample(const Dataset& data, std::size_t count, int threshold) {
  if (count > data.size())
    throw std::runtime_error("dataset holds only " + std::to_string(data.size()) + " samples");
  const auto n = count == 0 ? data.size() : count;
  std::vector<BinarySample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(binarize(data.images[k], data.labels[k], threshold));
  return out;
}

BinaryVector binary_matrix(const Eigen::MatrixXd& w_hid, std::size_t output, double theta_w) {
  BinaryVector v(static_cast<std::size_t>(w_hid.rows()));
  for (Eigen::Index i = 0; i < w_hid.rows(); ++i)
    v[static_cast<std::size_t>(i)] = w_hid(i, static_cast<Eigen::Index>(output)) >= theta_w ? 1 : 0;
  return v;
}

namespace {

std::vector<double> activity(const std::vector<BinarySample>& samples, int label) {
  std::vector<double> f(kPixels, 0.0);
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.label != label) continue;
    ++n;
    for (std::size_t p = 0; p < kPixels; ++p) f[p] += s.pixels[p];
  }
  if (n == 0) throw std::invalid_argument("no samples of class " + std::to_string(label));
  for (auto& v : f) v /= static_cast<double>(n);
  return f;
}

}  // namespace

BinaryVector class_prototype(const std::vector<BinarySample>& samples, int label) {
  const auto f = activity(samples, label);
  BinaryVector v(kPixels);
  for (std::size_t p = 0; p < kPixels; ++p) v[p] = f[p] >= 0.5 ? 1 : 0;
  return v;
}

BinaryVector overlap_pixels(const std::vector<BinarySample>& samples, int class_a, int class_b,
                            double min_fraction) {
  if (!(min_fraction > 0.0 && min_fraction <= 1.0))
    throw std::invalid_argument("overlap fraction must be in (0, 1]");
  const auto fa = activity(samples, class_a);
  const auto fb = activity(samples, class_b);
  BinaryVector v(kPixels);
  for (std::size_t p = 0; p < kPixels; ++p) v[p] = fa[p] >= min_fraction && fb[p] >= min_fraction ? 1 : 0;
  return v;
}

double depressed_overlap_fraction(const Eigen::MatrixXd& w_hid, const BinaryVector& overlap,
                                  double theta_w) {
  std::size_t total = 0, depressed = 0;
  for (Eigen::Index o = 0; o < w_hid.cols(); ++o)
    for (std::size_t p = 0; p < overlap.size(); ++p) {
      if (!overlap[p]) continue;
      ++total;
      depressed += w_hid(static_cast<Eigen::Index>(p), o) < theta_w;
    }
  if (total == 0) throw std::invalid_argument("no overlap pixels");
  return static_cast<double>(depressed) / static_cast<double>(total);
}

double mean_pool_hamming(const Eigen::MatrixXd& w_hid, const std::vector<BinarySample>& samples,
                         const SfnnConfig& config, std::size_t class_index) {
  const int label = config.classes.at(class_index);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < config.n_class; ++k) {
    const auto m = binary_matrix(w_hid, class_index * config.n_class + k, config.plasticity.theta_w);
    for (const auto& s : samples) {
      if (s.label != label) continue;
      sum += static_cast<double>(hamming(m, s.pixels));
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("no samples of class " + std::to_string(label));
  return sum / static_cast<double>(n);
}

Pools network_pools(const Eigen::MatrixXd& w_hid, const SfnnConfig& config) {
  Pools pools(config.classes.size());
  for (std::size_t c = 0; c < config.classes.size(); ++c)
    for (std::size_t k = 0; k < config.n_class; ++k)
      pools[c].push_back(binary_matrix(w_hid, c * config.n_class + k, config.plasticity.theta_w));
  return pools;
}

const char* to_string(InhibitionMode m) { return m == InhibitionMode::fixed ? "fixed" : "coding_level"; }
const char* to_string(PresentationMode m) {
  return m == PresentationMode::continuous ? "continuous" : "gapped";
}
const char* to_string(Readout r) { return r == Readout::max_rate ? "MR" : "AR"; }

}  // namespace bcall
