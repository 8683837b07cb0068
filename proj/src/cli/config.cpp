// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>
#include <sstream>

#include "fhecore/cli.hpp"

namespace fhecore::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

enum class KeyType { integer, boolean, string, int_list };

struct KeySpec {
  const char* name;
  KeyType type;
  ordered_json fallback;
};

const std::vector<KeySpec>& keys_for(Command c) {
  static const std::vector<KeySpec> ntt = {
      {"logN", KeyType::integer, 12},
      {"N1", KeyType::integer, 0},
      {"mode", KeyType::string, "negacyclic"},
      {"moduli", KeyType::int_list, ordered_json::array()},
      {"modulus_bits", KeyType::integer, 31},
      {"modulus_count", KeyType::integer, 1},
      {"strategy", KeyType::string, "tensorfhe_tile"},
      {"width", KeyType::integer, 32},
      {"vectors", KeyType::integer, 4},
      {"executor", KeyType::string, "direct"},
  };
  static const std::vector<KeySpec> baseconv = {
      {"logN", KeyType::integer, 8},
      {"source_moduli", KeyType::int_list, ordered_json::array()},
      {"target_moduli", KeyType::int_list, ordered_json::array()},
      {"alpha", KeyType::integer, 4},
      {"L", KeyType::integer, 8},
      {"modulus_bits", KeyType::integer, 31},
      {"executor", KeyType::string, "systolic"},
      {"width", KeyType::integer, 32},
  };
  static const std::vector<KeySpec> simulate = {
      {"rows", KeyType::integer, 16},
      {"cols", KeyType::integer, 8},
      {"pipeline_depth", KeyType::integer, 6},
      {"k_dim", KeyType::integer, 16},
      {"dataflow", KeyType::string, "output_stationary"},
      {"moduli", KeyType::int_list, ordered_json::array()},
      {"modulus_axis", KeyType::string, "shared"},
      {"modulus_bits", KeyType::integer, 31},
      {"trials", KeyType::integer, 10},
  };
  static const std::vector<KeySpec> cost = {
      {"workload", KeyType::string, ""},
      {"fhec_latency", KeyType::integer, 44},
      {"gemm_latency", KeyType::integer, 64},
      {"scalar_throughput", KeyType::integer, 64},
      {"ldst_throughput", KeyType::integer, 32},
      {"count_ntt_twiddle_scaling", KeyType::boolean, false},
  };
  static const std::vector<KeySpec> selftest = {};
  switch (c) {
    case Command::ntt: return ntt;
    case Command::baseconv: return baseconv;
    case Command::simulate: return simulate;
    case Command::cost: return cost;
    case Command::selftest: return selftest;
  }
  return selftest;
}

bool type_matches(const json& v, KeyType t) {
  switch (t) {
    case KeyType::integer: return v.is_number_integer();
    case KeyType::boolean: return v.is_boolean();
    case KeyType::string: return v.is_string();
    case KeyType::int_list:
      if (!v.is_array()) return false;
      for (const auto& x : v) {
        if (!x.is_number_integer()) return false;
      }
      return true;
  }
  return false;
}

const char* type_name(KeyType t) {
  switch (t) {
    case KeyType::integer: return "an integer";
    case KeyType::boolean: return "a boolean";
    case KeyType::string: return "a string";
    case KeyType::int_list: return "a list of integers";
  }
  return "?";
}

std::int64_t int_in(const ordered_json& p, const char* key, std::int64_t lo, std::int64_t hi) {
  const std::int64_t v = p.at(key).get<std::int64_t>();
  if (v < lo || v > hi) {
    throw ConfigError(std::string("key '") + key + "' must be in [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "], got " + std::to_string(v));
  }
  return v;
}

void one_of(const ordered_json& p, const char* key, std::initializer_list<const char*> allowed) {
  const std::string v = p.at(key).get<std::string>();
  for (const char* a : allowed) {
    if (v == a) return;
  }
  std::string msg = std::string("key '") + key + "' must be one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg + ", got '" + v + "'");
}

void check_moduli(const ordered_json& p, const char* key) {
  for (const auto& q : p.at(key)) {
    try {
      (void)make_modulus(q.get<std::uint64_t>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
  }
}

void validate(Command c, const ordered_json& p, const std::filesystem::path& base_dir) {
  switch (c) {
    case Command::ntt: {
      const auto log_n = int_in(p, "logN", 2, 16);
      const std::int64_t n = std::int64_t{1} << log_n;
      const auto n1 = int_in(p, "N1", 0, n);
      if (n1 != 0 && (n % n1 != 0 || (n1 & (n1 - 1)) != 0)) {
        throw ConfigError("key 'N1' must be a power of two dividing N");
      }
      one_of(p, "mode", {"cyclic", "negacyclic"});
      check_moduli(p, "moduli");
      int_in(p, "modulus_bits", 3, 31);
      int_in(p, "modulus_count", 1, 64);
      one_of(p, "strategy", {"tensorfhe_tile", "warpdrive_radix16"});
      one_of(p, "executor", {"direct", "systolic"});
      int_in(p, "vectors", 1, 1000);
      const auto width = int_in(p, "width", 32, 64);
      if (width != 32 && width != 64) throw ConfigError("key 'width' must be 32 or 64");
      try {
        (void)ntt_kernel_call_count(static_cast<std::size_t>(n),
                                    parse_ntt_strategy(p.at("strategy").get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("key 'strategy': ") + e.what());
      }
      break;
    }
    case Command::baseconv: {
      int_in(p, "logN", 1, 16);
      check_moduli(p, "source_moduli");
      check_moduli(p, "target_moduli");
      int_in(p, "alpha", 1, 64);
      int_in(p, "L", 1, 64);
      int_in(p, "modulus_bits", 3, 31);
      one_of(p, "executor", {"direct", "systolic"});
      const auto width = int_in(p, "width", 32, 64);
      if (width != 32 && width != 64) throw ConfigError("key 'width' must be 32 or 64");
      if (p.at("source_moduli").empty() != p.at("target_moduli").empty()) {
        throw ConfigError("give both 'source_moduli' and 'target_moduli', or neither");
      }
      break;
    }
    case Command::simulate: {
      const auto rows = int_in(p, "rows", 1, 256);
      const auto cols = int_in(p, "cols", 1, 256);
      int_in(p, "pipeline_depth", 1, 64);
      int_in(p, "k_dim", 1, 1024);
      int_in(p, "trials", 1, 10000);
      int_in(p, "modulus_bits", 3, 31);
      one_of(p, "dataflow", {"output_stationary", "operand_stationary"});
      one_of(p, "modulus_axis", {"shared", "per_row", "per_column"});
      check_moduli(p, "moduli");
      const auto& mods = p.at("moduli");
      const std::string axis = p.at("modulus_axis").get<std::string>();
      const std::size_t want = axis == "per_row" ? rows : axis == "per_column" ? cols : 1;
      if (!mods.empty() && mods.size() != want) {
        throw ConfigError("key 'moduli' needs " + std::to_string(want) + " entries for " + axis);
      }
      break;
    }
    case Command::cost: {
      const std::string w = p.at("workload").get<std::string>();
      if (w.empty()) throw ConfigError("key 'workload' is required for the cost command");
      const auto path = base_dir / w;
      if (!std::filesystem::exists(path)) {
        throw ConfigError("workload file not found: " + path.string());
      }
      for (const char* k : {"fhec_latency", "gemm_latency", "scalar_throughput", "ldst_throughput"}) {
        int_in(p, k, 1, 1'000'000);
      }
      break;
    }
    case Command::selftest:
      break;
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::ntt: return "ntt";
    case Command::baseconv: return "baseconv";
    case Command::simulate: return "simulate";
    case Command::cost: return "cost";
    case Command::selftest: return "selftest";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (auto c : {Command::ntt, Command::baseconv, Command::simulate, Command::cost,
                 Command::selftest}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown command '" + s +
                    "' (expected ntt, baseconv, simulate, cost or selftest)");
}

RunConfig parse_config_json(const json& doc, const std::string& command,
                            const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  std::string name = command;
  if (doc.contains("command")) {
    if (!doc["command"].is_string()) throw ConfigError("key 'command' must be a string");
    const std::string in_file = doc["command"].get<std::string>();
    if (!name.empty() && name != in_file) {
      throw ConfigError("config is for command '" + in_file + "', invoked as '" + name + "'");
    }
    name = in_file;
  }
  if (name.empty()) throw ConfigError("no command given");

  RunConfig cfg;
  cfg.command = parse_command(name);
  cfg.base_dir = base_dir;
  const auto& specs = keys_for(cfg.command);

  std::set<std::string> known = {"command", "seed", "out"};
  for (const auto& s : specs) known.insert(s.name);
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + key + "' for command '" + name + "'");
    }
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      throw ConfigError("key 'seed' must be a non-negative integer");
    }
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) throw ConfigError("key 'out' must be a string");
    cfg.out = doc["out"].get<std::string>();
  } else {
    cfg.out = "fhecore_" + name + "_report.json";
  }

  cfg.params = ordered_json::object();
  for (const auto& s : specs) {
    if (doc.contains(s.name)) {
      const auto& v = doc[s.name];
      if (!type_matches(v, s.type)) {
        throw ConfigError(std::string("key '") + s.name + "' must be " + type_name(s.type));
      }
      cfg.params[s.name] = v;
    } else {
      cfg.params[s.name] = s.fallback;
    }
  }
  validate(cfg.command, cfg.params, base_dir);
  return cfg;
}

RunConfig parse_config(const Invocation& inv) {
  json doc = json::object();
  std::filesystem::path base_dir = ".";
  if (inv.config_path) {
    std::ifstream in(*inv.config_path);
    if (!in) throw ConfigError("cannot open config file: " + inv.config_path->string());
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config parse error in " + inv.config_path->string() + ": " + e.what());
    }
    base_dir = inv.config_path->parent_path();
    if (base_dir.empty()) base_dir = ".";
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& kv : inv.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + kv + "' is not of the form key=value");
    }
    doc[kv.substr(0, eq)] = parse_override_value(kv.substr(eq + 1));
  }
  if (inv.seed) doc["seed"] = *inv.seed;
  if (inv.out) doc["out"] = *inv.out;
  return parse_config_json(doc, inv.command, base_dir);
}

WorkloadDescriptor parse_workload(const json& doc) {
  if (!doc.is_object()) throw ConfigError("workload must be a JSON object");
  static const std::set<std::string> top = {"name", "description", "metadata", "kernels"};
  for (const auto& [key, value] : doc.items()) {
    if (!top.count(key)) throw ConfigError("unknown workload key '" + key + "'");
  }
  WorkloadDescriptor w;
  w.name = doc.value("name", std::string("workload"));
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) throw ConfigError("workload 'metadata' must be an object");
    for (const auto& [key, value] : doc["metadata"].items()) {
      w.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  if (!doc.contains("kernels") || !doc["kernels"].is_array() || doc["kernels"].empty()) {
    throw ConfigError("workload needs a non-empty 'kernels' list");
  }
  static const std::set<std::string> kernel_keys = {"kind", "logN", "limbs", "alpha", "L",
                                                    "strategy", "width", "repeat", "label"};
  std::size_t index = 0;
  for (const auto& k : doc["kernels"]) {
    const std::string where = "kernel " + std::to_string(index++);
    if (!k.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : k.items()) {
      if (!kernel_keys.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
    try {
      KernelDescriptor d;
      d.kind = parse_kernel_kind(k.at("kind").get<std::string>());
      const int log_n = k.value("logN", 16);
      if (log_n < 1 || log_n > 30) throw ConfigError(where + ": logN must be in [1, 30]");
      d.n = std::size_t{1} << log_n;
      d.limbs = k.value("limbs", std::size_t{1});
      d.alpha = k.value("alpha", std::size_t{1});
      d.target = k.value("L", std::size_t{1});
      if (k.contains("strategy")) d.strategy = parse_ntt_strategy(k["strategy"].get<std::string>());
      const int width = k.value("width", 32);
      if (width != 32 && width != 64) throw ConfigError(where + ": width must be 32 or 64");
      d.width = width == 32 ? OperandWidth::w32 : OperandWidth::w64;
      d.repeat = k.value("repeat", std::uint64_t{1});
      d.label = k.value("label", std::string());
      d.validate();
      w.kernels.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return w;
}

WorkloadDescriptor load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload file: " + path.string());
  try {
    return parse_workload(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("workload parse error in " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace fhecore::cli
