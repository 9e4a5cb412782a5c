#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bcall/analysis.hpp"
#include "bcall/config.hpp"
#include "bcall/error.hpp"
#include "bcall/io.hpp"
#include "bcall/mnist.hpp"
#include "bcall/parallel.hpp"
#include "bcall/protocols.hpp"
#include "bcall/rsnn.hpp"
#include "bcall/sfnn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bcall;

namespace {

// Subcommand options that are not model hyperparameters.
enum class OptKind { number, integer, text, number_list };

struct OptSpec {
  std::string key;
  OptKind kind;
  json fallback;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<OptSpec> opts;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"pair",
       "two Poisson units joined by one plastic synapse; dumps traces and w_hid",
       {{"pre_rate_hz", OptKind::number, 15.0, "presynaptic rate"},
        {"post_rate_hz", OptKind::number, 20.0, "postsynaptic rate"},
        {"duration_s", OptKind::number, 1.0, "simulated time"},
        {"w_init", OptKind::number, 0.5, "initial w_hid"}}},
      {"stdp",
       "single-pair weight change against the pair time difference",
       {{"dt_min_ms", OptKind::number, -60.0, "first time difference (post minus pre)"},
        {"dt_max_ms", OptKind::number, 60.0, "last time difference"},
        {"step_ms", OptKind::number, 1.0, "time difference step"}}},
      {"srdp",
       "weight change after a fixed number of pairs against pairing frequency",
       {{"freqs_hz", OptKind::number_list, json::array({1, 5, 10, 20, 40, 50, 60}), "pairing frequencies"},
        {"pairs", OptKind::integer, 10, "pairs per frequency"},
        {"delta_t_ms", OptKind::number, 10.0, "pair time difference; both signs are run"},
        {"w_init", OptKind::number, 0.4, "initial w_hid"}}},
      {"tracesweep",
       "mean presynaptic trace and net weight change per spike against rate",
       {{"a_values", OptKind::number_list, json::array({0.1, 0.4, 1.0}), "trace jump amplitudes"},
        {"rate_min_hz", OptKind::number, 1.0, "lowest rate"},
        {"rate_max_hz", OptKind::number, 100.0, "highest rate"},
        {"rate_step_hz", OptKind::number, 0.5, "rate step"},
        {"spikes", OptKind::integer, 20, "spikes per regular train"},
        {"band", OptKind::number, 0.0, "transition band per spike (0: half of |c1_d|)"}}},
      {"heatmap",
       "mean weight change over a grid of pre and post rates",
       {{"shift", OptKind::text, "none", "none | positive | negative"},
        {"rates_hz", OptKind::number_list, json::array({5, 10, 20, 30, 40, 50}), "grid rates (pre and post)"},
        {"seeds", OptKind::integer, 20, "runs per cell"},
        {"duration_s", OptKind::number, 2.0, "simulated time per run"},
        {"gamma", OptKind::number, 0.75, "spike copy probability of correlated trains"},
        {"w_init", OptKind::number, 0.5, "initial w_hid"}}},
      {"sfnn-train",
       "trains feedforward classifiers on binarized MNIST",
       {{"per_class", OptKind::integer, 100, "training samples per class (first in file order)"},
        {"train_count", OptKind::integer, 0, "when > 0: first N samples of the listed classes instead"},
        {"seeds", OptKind::integer, 1, "independent networks (seed, seed+1, ...)"}}},
      {"sfnn-eval",
       "output rates and classification rate of trained classifiers",
       {{"model", OptKind::text, "", "output directory of sfnn-train"},
        {"test_per_class", OptKind::integer, 100, "test samples per class (first in file order)"},
        {"test_count", OptKind::integer, 0, "when > 0: first N test samples of the listed classes instead"}}},
      {"rsnn",
       "recurrent attractor protocol with subthreshold oscillations",
       {{"phase_mode", OptKind::text, "random", "random | correlated"},
        {"seeds", OptKind::integer, 10, "independent networks (seed, seed+1, ...)"}}},
      {"analyze",
       "metrics on stored outputs",
       {{"metric", OptKind::text, "sync", "sync | ks | hamming | pools | noise"},
        {"input", OptKind::text, "", "first input file (sync: spike CSV; ks, hamming: CSV)"},
        {"input2", OptKind::text, "", "second input file (ks, hamming)"},
        {"duration_s", OptKind::number, 0.0, "recording length for sync (0: last spike)"},
        {"model", OptKind::text, "", "sfnn-train output directory (pools, noise)"}}},
  };
  return list;
}

std::string dashed(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

json parse_opt(const OptSpec& spec, const std::string& text) {
  switch (spec.kind) {
    case OptKind::number: return to_double(spec.key, text);
    case OptKind::integer: return to_int(spec.key, text);
    case OptKind::text: return text;
    case OptKind::number_list: {
      json list = json::array();
      for (const auto& item : split(text, ',')) list.push_back(to_double(spec.key, item));
      return list;
    }
  }
  return text;
}

std::string show(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x.dump();
    return s;
  }
  return v.dump();
}

// Everything a subcommand needs after option resolution.
struct Context {
  std::string command;
  Settings settings;
  json opts;
  fs::path out;
  std::size_t jobs = 1;
  fs::path data_dir;
  std::vector<std::string> outputs;
  json seeds = json::array();

  void write(const std::string& name, std::string_view content) {
    write_text_file(out / name, content);
    outputs.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  double num(const std::string& k) const { return opts.at(k).get<double>(); }
  std::int64_t integer(const std::string& k) const { return opts.at(k).get<std::int64_t>(); }
  std::string text(const std::string& k) const { return opts.at(k).get<std::string>(); }
  std::vector<double> numbers(const std::string& k) const { return opts.at(k).get<std::vector<double>>(); }

  std::size_t count(const std::string& k) const {
    const auto v = integer(k);
    if (v < 0) throw ConfigError(k, "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::vector<std::uint64_t> seed_list(const std::string& k) {
    const auto n = count(k);
    if (n < 1) throw ConfigError(k, "must be >= 1");
    std::vector<std::uint64_t> list;
    for (std::size_t i = 0; i < n; ++i) list.push_back(settings.seed + i);
    seeds = list;
    return list;
  }
};

std::string spikes_csv(const SpikeRecord& rec) {
  std::ostringstream out;
  out << "unit_id,t\n";
  for (std::size_t k = 0; k < rec.units.size(); ++k)
    for (double t : rec.trains[k].times) out << rec.units[k] << ',' << format_number(t) << '\n';
  return out.str();
}

std::string fmt(double v) { return format_number(v); }

// ---- pair, stdp, srdp, tracesweep, heatmap ----

void cmd_pair(Context& ctx) {
  const auto res = pair_trace_dump(ctx.num("pre_rate_hz"), ctx.num("post_rate_hz"), ctx.num("duration_s"),
                                   ctx.settings.plasticity, ctx.settings.seed, ctx.num("w_init"),
                                   ctx.settings.dt);
  ctx.seeds = json::array({ctx.settings.seed});
  std::ostringstream out;
  out << 't';
  for (const auto& tr : res.traces) out << ',' << tr.name;
  out << '\n';
  const auto& first = res.traces.front();
  for (std::size_t row = 0; row < first.times.size(); ++row) {
    out << fmt(first.times[row]);
    for (const auto& tr : res.traces) out << ',' << fmt(tr.at(row, 0));
    out << '\n';
  }
  ctx.write("curve.csv", out.str());
  for (const auto& rec : res.spikes) ctx.write("spikes_" + rec.name + ".csv", spikes_csv(rec));
}

std::vector<double> grid(double lo, double hi, double step, const char* key) {
  if (!(step > 0.0)) throw ConfigError(key, "must be > 0");
  if (hi < lo) throw ConfigError(key, "range is empty");
  std::vector<double> v;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) v.push_back(lo + static_cast<double>(k) * step);
  return v;
}

void cmd_stdp(Context& ctx) {
  const auto dts = grid(ctx.num("dt_min_ms"), ctx.num("dt_max_ms"), ctx.num("step_ms"), "step_ms");
  const auto curve = stdp_curve(dts, ctx.settings.plasticity, ctx.settings.dt);
  ctx.write("curve.csv", curve.csv());
}

void cmd_srdp(Context& ctx) {
  const auto params = ctx.settings.plasticity.with_gate_open().without_bistability();
  const auto freqs = ctx.numbers("freqs_hz");
  const auto pairs = ctx.count("pairs");
  const double dt_ms = std::abs(ctx.num("delta_t_ms"));
  const auto plus = srdp_curve(freqs, pairs, dt_ms, params, ctx.num("w_init"), ctx.settings.dt);
  const auto minus = srdp_curve(freqs, pairs, -dt_ms, params, ctx.num("w_init"), ctx.settings.dt);
  std::ostringstream out;
  out << "freq_hz,dw_plus,dw_minus\n";
  for (std::size_t k = 0; k < freqs.size(); ++k)
    out << fmt(freqs[k]) << ',' << fmt(plus.mean_dw[k]) << ',' << fmt(minus.mean_dw[k]) << '\n';
  ctx.write("curve.csv", out.str());
}

void cmd_tracesweep(Context& ctx) {
  const auto rates = grid(ctx.num("rate_min_hz"), ctx.num("rate_max_hz"), ctx.num("rate_step_hz"),
                          "rate_step_hz");
  double band = ctx.num("band");
  if (band <= 0.0) band = default_transition_band(ctx.settings.plasticity);
  const auto r = trace_mean_sweep(ctx.numbers("a_values"), rates, ctx.count("spikes"),
                                  ctx.settings.plasticity, band);
  ctx.write("curve.csv", r.csv());
  json s = json::array();
  for (std::size_t k = 0; k < r.a_values.size(); ++k) {
    const double z = r.zero_crossing_hz[k];
    s.push_back({{"a", r.a_values[k]},
                 {"zero_crossing_hz", std::isnan(z) ? json(nullptr) : json(z)},
                 {"transition_width_hz", r.transition_width_hz[k]}});
  }
  ctx.write_json("summary.json", {{"band", band}, {"curves", s}});
}

HeatmapShift parse_shift(const std::string& s) {
  if (s == "none") return HeatmapShift::none;
  if (s == "positive") return HeatmapShift::positive;
  if (s == "negative") return HeatmapShift::negative;
  throw ConfigError("shift", "expected none, positive or negative");
}

void cmd_heatmap(Context& ctx) {
  HeatmapConfig hc;
  hc.pre_rates_hz = hc.post_rates_hz = ctx.numbers("rates_hz");
  hc.shift = parse_shift(ctx.text("shift"));
  hc.seeds = ctx.count("seeds");
  hc.duration_s = ctx.num("duration_s");
  hc.gamma = ctx.num("gamma");
  hc.w_init = ctx.num("w_init");
  hc.sim_dt = ctx.settings.dt;
  hc.seed = ctx.settings.seed;
  hc.jobs = ctx.jobs;
  ctx.seeds = json::array({ctx.settings.seed});
  const auto r = rate_heatmap(hc, ctx.settings.plasticity);
  ctx.write("curve.csv", r.csv());
  ctx.write_json("summary.json", {{"shift", ctx.text("shift")}, {"potentiation_cells", r.potentiation_cells()}});
}

// ---- feedforward classifier ----

std::vector<BinarySample> pick(const Dataset& data, const SfnnConfig& c, std::size_t per_class,
                               std::size_t count) {
  if (count == 0) return select_samples(data, c.classes, per_class, c.binarize_threshold);
  std::vector<BinarySample> out;
  for (std::size_t k = 0; k < data.size() && out.size() < count; ++k)
    if (std::find(c.classes.begin(), c.classes.end(), data.labels[k]) != c.classes.end())
      out.push_back(binarize(data.images[k], data.labels[k], c.binarize_threshold));
  if (out.size() < count)
    throw std::runtime_error("dataset holds only " + std::to_string(out.size()) + " samples of the listed classes");
  return out;
}

std::string binary_csv(const BinaryVector& v) {
  std::ostringstream out;
  for (std::size_t r = 0; r < kImageSide; ++r) {
    for (std::size_t c = 0; c < kImageSide; ++c) out << (c ? "," : "") << int(v[r * kImageSide + c]);
    out << '\n';
  }
  return out.str();
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt(m(r, c));
    out << '\n';
  }
  return out.str();
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + cell + "' in " + path.string(), offset);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row in " + path.string(), offset);
    rows.push_back(std::move(row));
    offset += line.size() + 1;
  }
  if (rows.empty()) throw ParseError("empty matrix file " + path.string(), 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

std::string weight_file(const SfnnConfig& c, std::size_t cls, std::size_t member) {
  std::string name = "weights_" + std::to_string(c.classes[cls]);
  if (c.n_class > 1) name += "_" + std::to_string(member);
  return name + ".csv";
}

void cmd_sfnn_train(Context& ctx) {
  const auto base = ctx.settings.sfnn();
  const auto data = load_mnist_split(ctx.data_dir, "train");
  const auto samples = pick(data, base, ctx.count("per_class"), ctx.count("train_count"));
  const auto seeds = ctx.seed_list("seeds");
  std::vector<TrainResult> results(seeds.size());
  parallel_for(seeds.size(), ctx.jobs, [&](std::size_t k) {
    auto c = base;
    c.seed = seeds[k];
    results[k] = train(samples, c);
  });

  json per_seed = json::array();
  std::vector<std::vector<double>> hd_by_class(base.classes.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const auto& r = results[k];
    const std::string dir = "seed_" + std::to_string(seeds[k]) + "/";
    ctx.write(dir + "w_hid.csv", matrix_csv(r.w_hid));
    for (std::size_t cls = 0; cls < base.classes.size(); ++cls)
      for (std::size_t m = 0; m < base.n_class; ++m)
        ctx.write(dir + weight_file(base, cls, m),
                  binary_csv(binary_matrix(r.w_hid, cls * base.n_class + m, base.plasticity.theta_w)));

    std::ostringstream tr;
    tr << "presentation,label,target_rate_hz,best_other_rate_hz,gate_open,gate_closed,target_gate_open,"
          "target_gate_closed\n";
    for (std::size_t p = 0; p < r.presentations.size(); ++p) {
      const auto& x = r.presentations[p];
      tr << p << ',' << x.label << ',' << fmt(x.target_rate_hz) << ',' << fmt(x.best_other_rate_hz) << ','
         << x.gate.open << ',' << x.gate.closed << ',' << x.target_gate.open << ',' << x.target_gate.closed
         << '\n';
    }
    ctx.write(dir + "training.csv", tr.str());

    std::ostringstream hd;
    hd << "sample,label,coding_level,hd\n";
    const auto pools = network_pools(r.w_hid, base);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto cls = static_cast<std::size_t>(
          std::find(base.classes.begin(), base.classes.end(), samples[i].label) - base.classes.begin());
      double sum = 0.0;
      for (const auto& m : pools[cls]) sum += static_cast<double>(hamming(m, samples[i].pixels));
      hd << i << ',' << samples[i].label << ',' << fmt(samples[i].coding_level) << ','
         << fmt(sum / static_cast<double>(pools[cls].size())) << '\n';
    }
    ctx.write(dir + "hd.csv", hd.str());

    json classes = json::object();
    for (std::size_t cls = 0; cls < base.classes.size(); ++cls) {
      const double h = mean_pool_hamming(r.w_hid, samples, base, cls);
      hd_by_class[cls].push_back(h);
      classes[std::to_string(base.classes[cls])] = h;
    }
    per_seed.push_back({{"seed", seeds[k]}, {"mean_hd", classes}, {"simulated_s", r.simulated_s}});
  }
  json mean_hd = json::object();
  for (std::size_t cls = 0; cls < base.classes.size(); ++cls)
    mean_hd[std::to_string(base.classes[cls])] = {{"mean", mean(hd_by_class[cls])},
                                                  {"std", stddev(hd_by_class[cls])}};
  ctx.write_json("hd.json", {{"samples", samples.size()}, {"per_seed", per_seed}, {"mean_hd", mean_hd}});
}

struct Model {
  Settings settings;
  std::vector<std::uint64_t> seeds;
  std::vector<Eigen::MatrixXd> w_hid;
};

json read_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("invalid JSON in " + path.string() + ": " + e.what(), e.byte);
  }
}

Model load_model(const fs::path& dir) {
  const auto manifest = read_manifest(dir);
  if (manifest.value("subcommand", "") != "sfnn-train")
    throw std::runtime_error(dir.string() + " is not an sfnn-train output directory");
  Model m;
  m.settings = apply_json(Settings{}, manifest.at("config"));
  for (const auto& s : manifest.at("seeds")) {
    m.seeds.push_back(s.get<std::uint64_t>());
    m.w_hid.push_back(read_matrix_csv(dir / ("seed_" + std::to_string(m.seeds.back())) / "w_hid.csv"));
  }
  return m;
}

void cmd_sfnn_eval(Context& ctx) {
  if (ctx.text("model").empty()) throw ConfigError("model", "an sfnn-train output directory is required");
  const auto model = load_model(ctx.text("model"));
  auto base = ctx.settings.sfnn();
  const auto trained = model.settings.sfnn();
  base.classes = trained.classes;
  base.n_class = trained.n_class;
  const auto data = load_mnist_split(ctx.data_dir, "t10k");
  const auto samples = pick(data, base, ctx.count("test_per_class"), ctx.count("test_count"));
  ctx.seeds = model.seeds;

  std::vector<std::vector<std::vector<double>>> rates(model.seeds.size());
  parallel_for(model.seeds.size(), ctx.jobs, [&](std::size_t k) {
    auto c = base;
    c.seed = model.seeds[k];
    rates[k] = infer(model.w_hid[k], samples, c);
  });

  std::ostringstream out;
  out << "seed,sample,label,coding_level";
  for (std::size_t o = 0; o < base.n_outputs(); ++o) out << ",rate_" << o;
  out << '\n';
  json per_seed = json::array();
  std::vector<double> mr, ar;
  for (std::size_t k = 0; k < model.seeds.size(); ++k) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out << model.seeds[k] << ',' << i << ',' << samples[i].label << ',' << fmt(samples[i].coding_level);
      for (double r : rates[k][i]) out << ',' << fmt(r);
      out << '\n';
    }
    mr.push_back(classification_rate(rates[k], samples, base, Readout::max_rate));
    ar.push_back(classification_rate(rates[k], samples, base, Readout::average_rate));
    per_seed.push_back({{"seed", model.seeds[k]}, {"MR", mr.back()}, {"AR", ar.back()}});
  }
  ctx.write("rates.csv", out.str());
  ctx.write_json("cr.json", {{"samples", samples.size()},
                             {"n_class", base.n_class},
                             {"per_seed", per_seed},
                             {"MR", {{"mean", mean(mr)}, {"std", stddev(mr)}}},
                             {"AR", {{"mean", mean(ar)}, {"std", stddev(ar)}}}});
}

// ---- recurrent network ----

PhaseMode parse_phase(const std::string& s) {
  if (s == "random") return PhaseMode::random;
  if (s == "correlated") return PhaseMode::correlated;
  throw ConfigError("phase_mode", "expected random or correlated");
}

void cmd_rsnn(Context& ctx) {
  auto base = ctx.settings.rsnn();
  base.phase_mode = parse_phase(ctx.text("phase_mode"));
  const auto seeds = ctx.seed_list("seeds");
  std::vector<AttractorRunResult> runs(seeds.size());
  parallel_for(seeds.size(), ctx.jobs, [&](std::size_t k) {
    auto c = base;
    c.seed = seeds[k];
    runs[k] = run_attractor_protocol(c);
  });

  std::ostringstream whid;
  whid << 't';
  for (auto s : seeds) whid << ",seed_" << s;
  whid << '\n';
  for (std::size_t row = 0; row < runs.front().whid_times.size(); ++row) {
    whid << fmt(runs.front().whid_times[row]);
    for (const auto& r : runs) whid << ',' << fmt(r.whid_mean[row]);
    whid << '\n';
  }
  ctx.write("whid_mean.csv", whid.str());

  std::ostringstream rates;
  rates << "seed,population,unit,rate_hz,stimulated\n";
  json per_seed = json::array();
  std::vector<double> sync, lock, final_w;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    for (std::size_t u = 0; u < r.exc_rates_hz.size(); ++u)
      rates << seeds[k] << ",exc," << u << ',' << fmt(r.exc_rates_hz[u]) << ',' << (u < base.n_stim) << '\n';
    for (std::size_t u = 0; u < r.inh_rates_hz.size(); ++u)
      rates << seeds[k] << ",inh," << u << ',' << fmt(r.inh_rates_hz[u]) << ",0\n";
    std::ostringstream raster;
    write_trains_csv(raster, r.stim_trains);
    ctx.write("raster_seed_" + std::to_string(seeds[k]) + ".csv", raster.str());
    sync.push_back(r.sync);
    lock.push_back(r.phase_locking);
    final_w.push_back(r.whid_mean.empty() ? 0.0 : r.whid_mean.back());
    per_seed.push_back({{"seed", seeds[k]},
                        {"sync", r.sync},
                        {"phase_locking", r.phase_locking},
                        {"final_whid_mean", final_w.back()},
                        {"mean_stim_rate_hz", mean(r.stim_rates_hz)},
                        {"silent_units", r.silent_units}});
  }
  ctx.write("rates.csv", rates.str());
  ctx.write_json("sync.json", {{"phase_mode", ctx.text("phase_mode")},
                               {"per_seed", per_seed},
                               {"sync", {{"mean", mean(sync)}, {"std", stddev(sync)}}},
                               {"phase_locking", {{"mean", mean(lock)}, {"std", stddev(lock)}}},
                               {"final_whid_mean", {{"mean", mean(final_w)}, {"std", stddev(final_w)}}}});
}

// ---- analyze ----

std::vector<double> read_column(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> v;
  std::string line;
  std::uint64_t offset = 0;
  bool first = true;
  while (std::getline(in, line)) {
    const auto row = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    const auto cell = split(line, ',').back();
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError("malformed number '" + cell + "' in " + path.string(), row);
    }
    first = false;
  }
  return v;
}

BinaryVector read_binary(const fs::path& path) {
  const auto m = read_matrix_csv(path);
  BinaryVector v;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double x = m(r, c);
      if (x != 0.0 && x != 1.0) throw ParseError("binary matrix entries must be 0 or 1 in " + path.string(), 0);
      v.push_back(static_cast<std::uint8_t>(x));
    }
  return v;
}

void cmd_analyze(Context& ctx) {
  const auto metric = ctx.text("metric");
  const auto need = [&](const char* key) {
    if (ctx.text(key).empty()) throw ConfigError(key, "required for metric " + metric);
    return fs::path(ctx.text(key));
  };
  if (metric == "sync") {
    std::istringstream in(read_text_file(need("input")));
    double duration = ctx.num("duration_s");
    auto trains = read_trains_csv(in, duration > 0.0 ? duration : 1e9, ctx.settings.dt);
    if (duration <= 0.0) {
      double last = 0.0;
      for (const auto& t : trains)
        if (!t.empty()) last = std::max(last, t.times.back());
      for (auto& t : trains) t.duration = last;
    }
    ctx.write_json("sync.json", {{"trains", trains.size()}, {"sync", spike_synchronization(trains)}});
  } else if (metric == "ks") {
    const auto a = read_column(need("input"));
    const auto b = read_column(need("input2"));
    const auto r = ks_two_sample(a, b);
    ctx.write_json("ks.json", {{"statistic", r.statistic}, {"p_value", r.p_value}});
  } else if (metric == "hamming") {
    const auto a = read_binary(need("input"));
    const auto b = read_binary(need("input2"));
    ctx.write_json("hamming.json", {{"hamming", hamming(a, b)}, {"coding_level_a", coding_level(a)},
                                    {"coding_level_b", coding_level(b)}});
  } else if (metric == "pools" || metric == "noise") {
    const auto model = load_model(need("model"));
    const auto c = model.settings.sfnn();
    if (metric == "pools") {
      std::vector<Pools> nets;
      for (const auto& w : model.w_hid) nets.push_back(network_pools(w, c));
      const auto v = pool_variability(nets);
      ctx.write_json("pools.json", {{"n_class", c.n_class}, {"mean_hd", v.mean}, {"std_hd", v.std},
                                    {"variance_hd", v.variance}});
    } else {
      const auto data = load_mnist_split(ctx.data_dir, "train");
      const auto samples = select_samples(data, c.classes, 0, c.binarize_threshold);
      std::ostringstream out;
      out << "seed,label,output,prototype_coding_level,matrix_coding_level,noise_percentage\n";
      for (std::size_t k = 0; k < model.seeds.size(); ++k)
        for (std::size_t cls = 0; cls < c.classes.size(); ++cls) {
          const auto proto = class_prototype(samples, c.classes[cls]);
          for (std::size_t m = 0; m < c.n_class; ++m) {
            const auto o = cls * c.n_class + m;
            const auto mat = binary_matrix(model.w_hid[k], o, c.plasticity.theta_w);
            out << model.seeds[k] << ',' << c.classes[cls] << ',' << o << ',' << fmt(coding_level(proto)) << ','
                << fmt(coding_level(mat)) << ',' << fmt(noise_percentage(mat, proto)) << '\n';
          }
        }
      ctx.write("noise.csv", out.str());
    }
  } else {
    throw ConfigError("metric", "expected sync, ks, hamming, pools or noise");
  }
}

void dispatch(Context& ctx) {
  const auto& c = ctx.command;
  if (c == "pair") return cmd_pair(ctx);
  if (c == "stdp") return cmd_stdp(ctx);
  if (c == "srdp") return cmd_srdp(ctx);
  if (c == "tracesweep") return cmd_tracesweep(ctx);
  if (c == "heatmap") return cmd_heatmap(ctx);
  if (c == "sfnn-train") return cmd_sfnn_train(ctx);
  if (c == "sfnn-eval") return cmd_sfnn_eval(ctx);
  if (c == "rsnn") return cmd_rsnn(ctx);
  if (c == "analyze") return cmd_analyze(ctx);
}

const char* type_label(ValueKind k) {
  switch (k) {
    case ValueKind::number: return "NUM";
    case ValueKind::integer: return "INT";
    case ValueKind::boolean: return "BOOL";
    case ValueKind::text: return "TEXT";
    case ValueKind::int_list: return "INT,...";
  }
  return "TEXT";
}

const char* type_label(OptKind k) {
  switch (k) {
    case OptKind::number: return "NUM";
    case OptKind::integer: return "INT";
    case OptKind::text: return "TEXT";
    case OptKind::number_list: return "NUM,...";
  }
  return "TEXT";
}

void fail(const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json j = {{"error", kind}, {"message", message}};
  j.update(extra);
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clock-driven spiking network simulator with the BCaLL plasticity rule"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(BCALL_VERSION));

  std::string config_file, out_dir = "out", data_dir;
  std::size_t jobs = 1;
  app.add_option("--config", config_file, "JSON config file or a previous manifest.json");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--jobs", jobs, "parallel seed jobs")->capture_default_str();
  app.add_option("--data-dir", data_dir, "MNIST directory (default: $BCALL_DATA_DIR or the bundled subset)");

  const Settings defaults;
  std::map<std::string, std::string> param_text;
  std::vector<std::pair<std::string, CLI::Option*>> param_opts;
  for (const auto& e : param_registry()) {
    auto* opt = app.add_option(e.flag(), param_text[e.key], e.help)
                    ->default_str(show(e.get(defaults)))
                    ->type_name(type_label(e.kind))
                    ->group(e.group);
    param_opts.emplace_back(e.key, opt);
  }

  std::map<std::string, std::map<std::string, std::string>> opt_text;
  std::map<std::string, std::vector<std::pair<const OptSpec*, CLI::Option*>>> opt_handles;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    subs[cmd.name] = sub;
    for (const auto& o : cmd.opts) {
      auto* opt = sub->add_option(dashed(o.key), opt_text[cmd.name][o.key], o.help)
                      ->default_str(show(o.fallback))
                      ->type_name(type_label(o.kind));
      opt_handles[cmd.name].emplace_back(&o, opt);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  try {
    Context ctx;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) ctx.command = name;
    const auto& cmd = *std::find_if(commands().begin(), commands().end(),
                                    [&](const Command& c) { return c.name == ctx.command; });

    std::map<std::string, std::string> overrides;
    for (const auto& [key, opt] : param_opts)
      if (opt->count() > 0) overrides[key] = param_text[key];
    const fs::path config_path(config_file);
    ctx.settings = load_config(config_file.empty() ? nullptr : &config_path, overrides);

    // Options: defaults, then a manifest of the same subcommand, then flags.
    for (const auto& o : cmd.opts) ctx.opts[o.key] = o.fallback;
    if (!config_file.empty()) {
      const auto j = json::parse(read_text_file(config_path));
      if (j.is_object() && j.value("subcommand", "") == ctx.command && j.contains("options"))
        for (const auto& [k, v] : j.at("options").items())
          if (ctx.opts.contains(k)) ctx.opts[k] = v;
    }
    for (const auto& [spec, opt] : opt_handles[ctx.command])
      if (opt->count() > 0) ctx.opts[spec->key] = parse_opt(*spec, opt_text[ctx.command][spec->key]);

    ctx.out = out_dir;
    ctx.jobs = std::max<std::size_t>(1, jobs);
    ctx.data_dir = data_dir.empty() ? default_data_dir() : fs::path(data_dir);
    fs::create_directories(ctx.out);

    const auto start = std::chrono::steady_clock::now();
    dispatch(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest = {{"subcommand", ctx.command},
                     {"version", BCALL_VERSION},
                     {"config", to_json(ctx.settings)},
                     {"options", ctx.opts},
                     {"seeds", ctx.seeds},
                     {"outputs", ctx.outputs}};
    write_text_file(ctx.out / "manifest.json", manifest.dump(2) + "\n");
    write_text_file(ctx.out / "timing.json", json{{"wall_s", wall}}.dump(2) + "\n");
    return 0;
  } catch (const ConfigError& e) {
    fail("config", e.what(), {{"field", e.field()}});
    return 2;
  } catch (const ParseError& e) {
    fail("parse", e.what());
    return 1;
  } catch (const json::exception& e) {
    fail("parse", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("runtime", e.what());
    return 1;
  }
}
