#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "bcall/neuron.hpp"
#include "bcall/plasticity.hpp"
#include "bcall/rsnn.hpp"
#include "bcall/sfnn.hpp"

namespace bcall {

/// Every tunable value of every experiment. Plasticity and neuron parameters
/// are shared and copied into the experiment configs by `sfnn()` and `rsnn()`.
struct Settings {
  BCaLLParams plasticity;
  NeuronParams exc_neuron = NeuronParams::excitatory();
  NeuronParams inh_neuron = NeuronParams::inhibitory();
  SfnnConfig sfnn_base;
  RsnnConfig rsnn_base;
  double dt = 1e-4;
  std::uint64_t seed = 1;

  SfnnConfig sfnn() const;
  RsnnConfig rsnn() const;
  void validate() const;
};

enum class ValueKind { number, integer, boolean, text, int_list };

/// One configurable value. Keys carry their unit as a suffix (`_ms`, `_s`,
/// `_mv`, `_hz`); `get` and `set` convert between the key unit and the SI
/// value stored in Settings.
struct ParamEntry {
  std::string key;
  std::string help;
  std::string group;
  ValueKind kind = ValueKind::number;
  std::function<nlohmann::json(const Settings&)> get;
  std::function<void(Settings&, const nlohmann::json&)> set;

  /// `--tau-i-ms` for key `tau_i_ms`.
  std::string flag() const;
};

const std::vector<ParamEntry>& param_registry();

/// Converts a command-line string to the entry's JSON type. Throws
/// ConfigError naming the key on malformed text.
nlohmann::json parse_flag_value(const ParamEntry& entry, const std::string& text);

/// Defaults, then the JSON file (a plain object of keys, or a manifest whose
/// "config" member holds one), then `overrides` keyed by parameter key.
/// Unknown keys and out-of-range values throw ConfigError.
Settings load_config(const std::filesystem::path* file,
                     const std::map<std::string, std::string>& overrides);

Settings apply_json(Settings s, const nlohmann::json& object);

/// Every key with its current value.
nlohmann::json to_json(const Settings& s);

}  // namespace bcall
