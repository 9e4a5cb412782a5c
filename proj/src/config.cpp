#include "bcall/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "bcall/error.hpp"
#include "bcall/io.hpp"

namespace bcall {

SfnnConfig Settings::sfnn() const {
  auto c = sfnn_base;
  c.plasticity = plasticity;
  c.neuron = exc_neuron;
  c.dt = dt;
  c.seed = seed;
  return c;
}

RsnnConfig Settings::rsnn() const {
  auto c = rsnn_base;
  c.plasticity = plasticity;
  c.exc_neuron = exc_neuron;
  c.inh_neuron = inh_neuron;
  c.dt = dt;
  c.seed = seed;
  return c;
}

void Settings::validate() const {
  plasticity.validate();
  exc_neuron.validate();
  try {
    inh_neuron.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("inh_" + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  sfnn().validate();
  rsnn().validate();
}

std::string ParamEntry::flag() const {
  std::string f = "--" + key;
  for (auto& ch : f)
    if (ch == '_') ch = '-';
  return f;
}

namespace {

double number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(key, "expected an integer");
}

std::size_t count(const nlohmann::json& v, const std::string& key) {
  const auto n = integer(v, key);
  if (n < 0) throw ConfigError(key, "must be >= 0");
  return static_cast<std::size_t>(n);
}

// Helpers building entries for a double stored in SI units.
template <typename Field>
ParamEntry scaled(std::string key, std::string help, double scale, Field field) {
  ParamEntry e;
  e.key = key;
  e.help = std::move(help);
  e.kind = ValueKind::number;
  e.get = [field, scale](const Settings& s) {
    Settings copy = s;
    return nlohmann::json(field(copy) * scale);
  };
  e.set = [field, scale, key](Settings& s, const nlohmann::json& v) { field(s) = number(v, key) / scale; };
  return e;
}

std::vector<ParamEntry> build_registry() {
  std::vector<ParamEntry> r;
  constexpr double ms = 1e3;
  std::string group;
  auto add = [&](ParamEntry e) {
    e.group = group;
    r.push_back(std::move(e));
  };
#define BCALL_P(key, help, scale, expr) \
  add(scaled(key, help, scale, [](Settings & s) -> double& { return expr; }))

  group = "Engine";
  BCALL_P("dt_ms", "simulation time step", ms, s.dt);
  {
    ParamEntry e;
    e.key = "seed";
    e.help = "master seed";
    e.kind = ValueKind::integer;
    e.get = [](const Settings& s) { return nlohmann::json(s.seed); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      if (v.is_number_unsigned()) {
        s.seed = v.get<std::uint64_t>();
        return;
      }
      const auto n = integer(v, "seed");
      if (n < 0) throw ConfigError("seed", "must be >= 0");
      s.seed = static_cast<std::uint64_t>(n);
    };
    add(std::move(e));
  }

  group = "Plasticity";
  BCALL_P("tau_i_ms", "presynaptic trace time constant", ms, s.plasticity.tau_i_s);
  BCALL_P("tau_j_ms", "postsynaptic trace time constant", ms, s.plasticity.tau_j_s);
  BCALL_P("tau_s_ms", "stop-learning trace time constant", ms, s.plasticity.tau_s_s);
  BCALL_P("tau_w_s", "bistability time constant", 1.0, s.plasticity.tau_w_s);
  BCALL_P("a_i", "presynaptic trace jump", 1.0, s.plasticity.a_i);
  BCALL_P("a_j", "postsynaptic trace jump", 1.0, s.plasticity.a_j);
  BCALL_P("a_s", "stop-learning trace jump", 1.0, s.plasticity.a_s);
  BCALL_P("x_max_i", "presynaptic trace bound", 1.0, s.plasticity.x_max_i);
  BCALL_P("x_max_j", "postsynaptic trace bound", 1.0, s.plasticity.x_max_j);
  BCALL_P("x_max_s", "stop-learning trace bound", 1.0, s.plasticity.x_max_s);
  BCALL_P("theta_i", "presynaptic trace threshold", 1.0, s.plasticity.theta_i);
  BCALL_P("theta_j", "postsynaptic trace threshold", 1.0, s.plasticity.theta_j);
  BCALL_P("theta_u", "upper stop-learning threshold", 1.0, s.plasticity.theta_u);
  BCALL_P("theta_l", "lower stop-learning threshold", 1.0, s.plasticity.theta_l);
  BCALL_P("theta_w", "hidden weight threshold", 1.0, s.plasticity.theta_w);
  BCALL_P("c1_d", "depression step on presynaptic spikes", 1.0, s.plasticity.c1_d);
  BCALL_P("c2_d", "penalty for weak presynaptic trace", 1.0, s.plasticity.c2_d);
  BCALL_P("c_p", "potentiation gain", 1.0, s.plasticity.c_p);
  BCALL_P("alpha", "upward drift above theta_w", 1.0, s.plasticity.alpha);
  BCALL_P("beta", "downward drift below theta_w", 1.0, s.plasticity.beta);
  BCALL_P("w_pot_mv", "potentiated weight (single-synapse protocols)", 1.0, s.plasticity.w_pot_mv);
  BCALL_P("w_dep_mv", "depressed weight", 1.0, s.plasticity.w_dep_mv);

  group = "Excitatory neuron";
  BCALL_P("v_rest_mv", "excitatory resting potential", 1.0, s.exc_neuron.v_rest_mv);
  BCALL_P("v_reset_mv", "excitatory reset potential", 1.0, s.exc_neuron.v_reset_mv);
  BCALL_P("v_thr_mv", "excitatory baseline threshold", 1.0, s.exc_neuron.v_thr_mv);
  BCALL_P("v_incr_mv", "excitatory threshold adaptation jump", 1.0, s.exc_neuron.v_incr_mv);
  BCALL_P("tau_thr_ms", "excitatory threshold relaxation", ms, s.exc_neuron.tau_thr_s);
  BCALL_P("tau_mem_ms", "excitatory membrane time constant", ms, s.exc_neuron.tau_mem_s);
  BCALL_P("tau_epsp_ms", "excitatory EPSP time constant", ms, s.exc_neuron.tau_epsp_s);
  BCALL_P("tau_ipsp_ms", "excitatory IPSP time constant", ms, s.exc_neuron.tau_ipsp_s);
  group = "Inhibitory neuron";
  BCALL_P("inh_v_rest_mv", "inhibitory resting potential", 1.0, s.inh_neuron.v_rest_mv);
  BCALL_P("inh_v_reset_mv", "inhibitory reset potential", 1.0, s.inh_neuron.v_reset_mv);
  BCALL_P("inh_v_thr_mv", "inhibitory threshold", 1.0, s.inh_neuron.v_thr_mv);
  BCALL_P("inh_v_incr_mv", "inhibitory threshold adaptation jump", 1.0, s.inh_neuron.v_incr_mv);
  BCALL_P("inh_tau_thr_ms", "inhibitory threshold relaxation", ms, s.inh_neuron.tau_thr_s);
  BCALL_P("inh_tau_mem_ms", "inhibitory membrane time constant", ms, s.inh_neuron.tau_mem_s);
  BCALL_P("inh_tau_epsp_ms", "inhibitory EPSP time constant", ms, s.inh_neuron.tau_epsp_s);
  BCALL_P("inh_tau_ipsp_ms", "inhibitory IPSP time constant", ms, s.inh_neuron.tau_ipsp_s);

  group = "Feedforward classifier";
  BCALL_P("f_a_hz", "rate of active pixels", 1.0, s.sfnn_base.f_a_hz);
  BCALL_P("f_s_hz", "rate of silent pixels", 1.0, s.sfnn_base.f_s_hz);
  BCALL_P("f_t_hz", "teacher rate", 1.0, s.sfnn_base.f_t_hz);
  BCALL_P("f_i_hz", "inhibitory rate scale", 1.0, s.sfnn_base.f_i_hz);
  BCALL_P("w_v_mv", "virtual to input weight", 1.0, s.sfnn_base.w_v_mv);
  BCALL_P("w_t_mv", "teacher to output weight", 1.0, s.sfnn_base.w_t_mv);
  BCALL_P("w_i_mv", "inhibitory to output weight", 1.0, s.sfnn_base.w_i_mv);
  BCALL_P("w_max_train_mv", "potentiated weight while training", 1.0, s.sfnn_base.w_max_train_mv);
  BCALL_P("w_max_test_mv", "potentiated weight at inference", 1.0, s.sfnn_base.w_max_test_mv);
  BCALL_P("t_inp_s", "presentation time per sample", 1.0, s.sfnn_base.t_inp_s);
  BCALL_P("gap_s", "silence between samples in gapped mode", 1.0, s.sfnn_base.gap_s);
  BCALL_P("fixed_inhibition_scale", "factor on f_i in fixed inhibition mode", 1.0,
          s.sfnn_base.fixed_inhibition_scale);
  {
    ParamEntry e;
    e.key = "n_class";
    e.help = "output neurons per class";
    e.kind = ValueKind::integer;
    e.get = [](const Settings& s) { return nlohmann::json(s.sfnn_base.n_class); };
    e.set = [](Settings& s, const nlohmann::json& v) { s.sfnn_base.n_class = count(v, "n_class"); };
    add(std::move(e));
  }
  {
    ParamEntry e;
    e.key = "classes";
    e.help = "digit classes to learn (comma separated)";
    e.kind = ValueKind::int_list;
    e.get = [](const Settings& s) { return nlohmann::json(s.sfnn_base.classes); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      if (!v.is_array()) throw ConfigError("classes", "expected a list of integers");
      std::vector<int> c;
      for (const auto& x : v) c.push_back(static_cast<int>(integer(x, "classes")));
      s.sfnn_base.classes = std::move(c);
    };
    add(std::move(e));
  }
  {
    ParamEntry e;
    e.key = "inhibition";
    e.help = "output inhibition: fixed or coding_level";
    e.kind = ValueKind::text;
    e.get = [](const Settings& s) { return nlohmann::json(to_string(s.sfnn_base.inhibition)); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      const auto t = v.is_string() ? v.get<std::string>() : "";
      if (t == "fixed") s.sfnn_base.inhibition = InhibitionMode::fixed;
      else if (t == "coding_level") s.sfnn_base.inhibition = InhibitionMode::coding_level;
      else throw ConfigError("inhibition", "must be fixed or coding_level");
    };
    add(std::move(e));
  }
  {
    ParamEntry e;
    e.key = "presentation";
    e.help = "sample presentation: continuous or gapped";
    e.kind = ValueKind::text;
    e.get = [](const Settings& s) { return nlohmann::json(to_string(s.sfnn_base.presentation)); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      const auto t = v.is_string() ? v.get<std::string>() : "";
      if (t == "continuous") s.sfnn_base.presentation = PresentationMode::continuous;
      else if (t == "gapped") s.sfnn_base.presentation = PresentationMode::gapped;
      else throw ConfigError("presentation", "must be continuous or gapped");
    };
    add(std::move(e));
  }
  {
    ParamEntry e;
    e.key = "stop_learning";
    e.help = "enable the stop-learning gate in the classifier";
    e.kind = ValueKind::boolean;
    e.get = [](const Settings& s) { return nlohmann::json(s.sfnn_base.stop_learning); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      if (!v.is_boolean()) throw ConfigError("stop_learning", "expected true or false");
      s.sfnn_base.stop_learning = v.get<bool>();
    };
    add(std::move(e));
  }
  {
    ParamEntry e;
    e.key = "binarize_threshold";
    e.help = "pixel intensity threshold";
    e.kind = ValueKind::integer;
    e.get = [](const Settings& s) { return nlohmann::json(s.sfnn_base.binarize_threshold); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      s.sfnn_base.binarize_threshold = static_cast<int>(integer(v, "binarize_threshold"));
    };
    add(std::move(e));
  }

  group = "Recurrent network";
  auto size_entry = [&](const char* key, const char* help, std::size_t RsnnConfig::*field) {
    ParamEntry e;
    e.key = key;
    e.help = help;
    e.kind = ValueKind::integer;
    e.get = [field](const Settings& s) { return nlohmann::json(s.rsnn_base.*field); };
    e.set = [field, k = std::string(key)](Settings& s, const nlohmann::json& v) {
      s.rsnn_base.*field = count(v, k);
    };
    add(std::move(e));
  };
  size_entry("n_exc", "excitatory population size", &RsnnConfig::n_exc);
  size_entry("n_inh", "inhibitory population size", &RsnnConfig::n_inh);
  size_entry("n_stim", "stimulated excitatory subset size", &RsnnConfig::n_stim);
  BCALL_P("w_ee_mv", "plastic e->e potentiated weight", 1.0, s.rsnn_base.w_ee_mv);
  BCALL_P("w_ei_mv", "e->i weight", 1.0, s.rsnn_base.w_ei_mv);
  BCALL_P("w_ie_mv", "i->e weight", 1.0, s.rsnn_base.w_ie_mv);
  BCALL_P("w_ii_mv", "i->i weight", 1.0, s.rsnn_base.w_ii_mv);
  BCALL_P("w_exc_mv", "virtual excitatory weight", 1.0, s.rsnn_base.w_exc_mv);
  BCALL_P("w_inh_mv", "virtual inhibitory weight", 1.0, s.rsnn_base.w_inh_mv);
  BCALL_P("f_exc_hz", "virtual excitatory rate", 1.0, s.rsnn_base.f_exc_hz);
  BCALL_P("f_inh_hz", "virtual inhibitory rate", 1.0, s.rsnn_base.f_inh_hz);
  BCALL_P("p_ee", "e->e connection probability", 1.0, s.rsnn_base.p_ee);
  BCALL_P("p_ei", "e->i connection probability", 1.0, s.rsnn_base.p_ei);
  BCALL_P("p_ie", "i->e connection probability", 1.0, s.rsnn_base.p_ie);
  BCALL_P("p_ii", "i->i connection probability", 1.0, s.rsnn_base.p_ii);
  BCALL_P("f_osc_hz", "subthreshold oscillation frequency", 1.0, s.rsnn_base.f_osc_hz);
  BCALL_P("osc_amp_mv", "subthreshold oscillation amplitude", 1.0, s.rsnn_base.osc_amp_mv);
  BCALL_P("background_exc_hz", "virtual excitatory rate of non-stimulated cells", 1.0,
          s.rsnn_base.background_exc_hz);
  BCALL_P("w_hid_init", "initial e->e hidden weight", 1.0, s.rsnn_base.w_hid_init);
  BCALL_P("rsnn_duration_s", "recurrent run length", 1.0, s.rsnn_base.duration_s);
  {
    ParamEntry e;
    e.key = "inhibitory_drive";
    e.help = "targets of the virtual inhibitory drive: all, excitatory, inhibitory or none";
    e.kind = ValueKind::text;
    e.get = [](const Settings& s) { return nlohmann::json(to_string(s.rsnn_base.inhibitory_drive)); };
    e.set = [](Settings& s, const nlohmann::json& v) {
      const auto t = v.is_string() ? v.get<std::string>() : "";
      if (t == "all") s.rsnn_base.inhibitory_drive = InhibitoryDrive::all;
      else if (t == "excitatory") s.rsnn_base.inhibitory_drive = InhibitoryDrive::excitatory;
      else if (t == "inhibitory") s.rsnn_base.inhibitory_drive = InhibitoryDrive::inhibitory;
      else if (t == "none") s.rsnn_base.inhibitory_drive = InhibitoryDrive::none;
      else throw ConfigError("inhibitory_drive", "must be all, excitatory, inhibitory or none");
    };
    add(std::move(e));
  }
  {
    ParamEntry e;
    e.key = "whid_stride_ms";
    e.help = "W_hid sampling interval";
    e.kind = ValueKind::number;
    e.get = [](const Settings& s) {
      return nlohmann::json(static_cast<double>(s.rsnn_base.whid_stride) * s.dt * 1e3);
    };
    e.set = [](Settings& s, const nlohmann::json& v) {
      const double stride_ms = number(v, "whid_stride_ms");
      const auto steps = std::llround(stride_ms * 1e-3 / s.dt);
      if (steps < 1) throw ConfigError("whid_stride_ms", "must be at least one time step");
      s.rsnn_base.whid_stride = steps;
    };
    add(std::move(e));
  }
#undef BCALL_P
  return r;
}

}  // namespace

const std::vector<ParamEntry>& param_registry() {
  static const std::vector<ParamEntry> registry = build_registry();
  return registry;
}

nlohmann::json parse_flag_value(const ParamEntry& entry, const std::string& text) {
  auto parse_int = [&](const std::string& t) {
    std::int64_t v = 0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(entry.key, "expected an integer, got '" + t + "'");
    return v;
  };
  switch (entry.kind) {
    case ValueKind::number: {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size())
        throw ConfigError(entry.key, "expected a number, got '" + text + "'");
      return v;
    }
    case ValueKind::integer: return parse_int(text);
    case ValueKind::boolean:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw ConfigError(entry.key, "expected true or false, got '" + text + "'");
    case ValueKind::text: return text;
    case ValueKind::int_list: {
      nlohmann::json list = nlohmann::json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) list.push_back(parse_int(item));
      return list;
    }
  }
  return text;
}

Settings apply_json(Settings s, const nlohmann::json& object) {
  if (!object.is_object()) throw ConfigError("config", "expected a JSON object");
  const auto& reg = param_registry();
  // dt first so that step-based values convert with the final step size
  if (object.contains("dt_ms")) reg.front().set(s, object.at("dt_ms"));
  for (const auto& [key, value] : object.items()) {
    auto it = std::find_if(reg.begin(), reg.end(), [&](const ParamEntry& e) { return e.key == key; });
    if (it == reg.end()) throw ConfigError(key, "unknown configuration key");
    it->set(s, value);
  }
  return s;
}

Settings load_config(const std::filesystem::path* file,
                     const std::map<std::string, std::string>& overrides) {
  Settings s;
  if (file) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(*file));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("invalid JSON in " + file->string() + ": " + e.what(), e.byte);
    }
    if (j.is_object() && j.contains("config") && j.at("config").is_object()) j = j.at("config");
    s = apply_json(s, j);
  }
  nlohmann::json flags = nlohmann::json::object();
  const auto& reg = param_registry();
  for (const auto& [key, text] : overrides) {
    auto it = std::find_if(reg.begin(), reg.end(), [&](const ParamEntry& e) { return e.key == key; });
    if (it == reg.end()) throw ConfigError(key, "unknown configuration key");
    flags[key] = parse_flag_value(*it, text);
  }
  s = apply_json(s, flags);
  s.validate();
  return s;
}

nlohmann::json to_json(const Settings& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : param_registry()) j[e.key] = e.get(s);
  return j;
}

}  // namespace bcall
