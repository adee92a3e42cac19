#pragma once

#include <cctype>
#include <climits>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscat/errors.hpp"
#include "wscat/experiments.hpp"

namespace wscat {

using ConfigJson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalar readers. Doubles accept "<coef>pi" strings ("16pi", "-0.5pi", "pi")
// so configs can state grid geometry exactly.
// ---------------------------------------------------------------------------

inline double config_double(const ConfigJson& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
      const std::string head = s.substr(0, s.size() - 2);
      if (head.empty() || head == "+") return kPi;
      if (head == "-") return -kPi;
      try {
        std::size_t pos = 0;
        double coef = std::stod(head, &pos);
        if (pos == head.size()) return coef * kPi;
      } catch (const std::exception&) {
      }
    }
    throw ConfigError(key + ": cannot parse '" + s + "' as a number");
  }
  throw ConfigError(key + ": expected a number or '<coef>pi' string");
}

inline long long config_int(const ConfigJson& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    long long n = static_cast<long long>(d);
    if (static_cast<double>(n) == d) return n;
  }
  throw ConfigError(key + ": expected an integer");
}

inline std::uint64_t config_u64(const ConfigJson& v, const std::string& key) {
  long long n = config_int(v, key);
  if (n < 0) throw ConfigError(key + ": expected a nonnegative integer");
  return static_cast<std::uint64_t>(n);
}

inline bool config_bool(const ConfigJson& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  throw ConfigError(key + ": expected true or false");
}

inline std::string config_string(const ConfigJson& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError(key + ": expected a string");
}

inline std::vector<double> config_double_list(const ConfigJson& v,
                                              const std::string& key) {
  if (!v.is_array()) throw ConfigError(key + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(config_double(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<int> config_int_list(const ConfigJson& v,
                                        const std::string& key) {
  if (!v.is_array()) throw ConfigError(key + ": expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(static_cast<int>(
        config_int(v[i], key + "[" + std::to_string(i) + "]")));
  return out;
}

inline void require_object(const ConfigJson& v, const std::string& key) {
  if (!v.is_object())
    throw ConfigError(key + ": expected an object");
}

// ---------------------------------------------------------------------------
// Section parsers. Each starts from a caller-supplied default struct so the
// subcommands can ship different baselines through one code path.
// ---------------------------------------------------------------------------

inline GridConfig parse_grid_config(const ConfigJson& j, GridConfig base,
                                    const std::string& prefix = "grid") {
  require_object(j, prefix);
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix + "." + k;
    if (k == "origin")
      base.origin = config_double(v, key);
    else if (k == "period")
      base.period = config_double(v, key);
    else if (k == "length")
      base.length = static_cast<std::size_t>(config_u64(v, key));
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  if (base.period <= 0.0) throw ConfigError(prefix + ".period: must be > 0");
  if (base.length == 0 || (base.length & (base.length - 1)) != 0)
    throw ConfigError(prefix + ".length: must be a power of two");
  return base;
}

inline BankConfig parse_bank_config(const ConfigJson& j, BankConfig base,
                                    const std::string& prefix = "bank") {
  require_object(j, prefix);
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix + "." + k;
    if (k == "J")
      base.J = static_cast<int>(config_int(v, key));
    else if (k == "j_max") {
      if (v.is_string() && v.get<std::string>() == "auto")
        base.j_max = INT_MIN;
      else
        base.j_max = static_cast<int>(config_int(v, key));
    } else if (k == "omega_lo")
      base.omega_lo = config_double(v, key);
    else if (k == "max_depth")
      base.max_depth = static_cast<int>(config_int(v, key));
    else if (k == "path_cap")
      base.path_cap = static_cast<std::size_t>(config_u64(v, key));
    else if (k == "lp_tol")
      base.lp_tol = config_double(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  if (base.omega_lo <= 0.0)
    throw ConfigError(prefix + ".omega_lo: must be > 0");
  if (base.max_depth < 0)
    throw ConfigError(prefix + ".max_depth: must be >= 0");
  return base;
}

inline SignalConfig parse_signal_config(const ConfigJson& j, SignalConfig base,
                                        const std::string& prefix = "signal") {
  require_object(j, prefix);
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix + "." + k;
    if (k == "kind")
      base.kind = config_string(v, key);
    else if (k == "center")
      base.center = config_double(v, key);
    else if (k == "sigma")
      base.sigma = config_double(v, key);
    else if (k == "amplitude")
      base.amplitude = config_double(v, key);
    else if (k == "freq")
      base.freq = config_double(v, key);
    else if (k == "band_lo")
      base.band_lo = config_double(v, key);
    else if (k == "band_hi")
      base.band_hi = config_double(v, key);
    else if (k == "seed")
      base.seed = config_u64(v, key);
    else if (k == "value")
      base.value = config_double(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return base;
}

inline DeformationConfig parse_deformation_config(
    const ConfigJson& j, DeformationConfig base,
    const std::string& prefix = "deformation") {
  require_object(j, prefix);
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix + "." + k;
    if (k == "kind")
      base.kind = config_string(v, key);
    else if (k == "c")
      base.c = config_double(v, key);
    else if (k == "n_osc")
      base.n_osc = static_cast<int>(config_int(v, key));
    else if (k == "amplitude") {
      if (v.is_string() && v.get<std::string>() == "auto")
        base.amplitude = -1.0;
      else
        base.amplitude = config_double(v, key);
    } else if (k == "seed")
      base.seed = config_u64(v, key);
    else if (k == "bandwidth")
      base.bandwidth = config_double(v, key);
    else if (k == "lip")
      base.lip = config_double(v, key);
    else if (k == "eps")
      base.eps = config_double(v, key);
    else if (k == "freq")
      base.freq = config_double(v, key);
    else if (k == "amp")
      base.amp = config_double(v, key);
    else if (k == "lo")
      base.lo = config_double(v, key);
    else if (k == "hi")
      base.hi = config_double(v, key);
    else if (k == "ramp")
      base.ramp = config_double(v, key);
    else if (k == "slope")
      base.slope = config_double(v, key);
    else if (k == "tooth_width")
      base.tooth_width = config_double(v, key);
    else if (k == "sigma_mult")
      base.sigma_mult = config_double(v, key);
    else if (k == "scale")
      base.scale = config_double(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return base;
}

// ---------------------------------------------------------------------------
// Default documents per subcommand, merging, and dotted overrides.
// ---------------------------------------------------------------------------

inline ConfigJson signal_defaults_json(const SignalConfig& s) {
  ConfigJson j;
  j["kind"] = s.kind;
  j["center"] = s.center;
  j["sigma"] = s.sigma;
  j["amplitude"] = s.amplitude;
  j["freq"] = s.freq;
  j["band_lo"] = s.band_lo;
  j["band_hi"] = s.band_hi;
  j["seed"] = s.seed;
  j["value"] = s.value;
  return j;
}

inline ConfigJson deformation_defaults_json(const DeformationConfig& d) {
  ConfigJson j;
  j["kind"] = d.kind;
  j["c"] = d.c;
  j["n_osc"] = d.n_osc;
  j["amplitude"] = d.amplitude < 0.0 ? ConfigJson("auto") : ConfigJson(d.amplitude);
  j["seed"] = d.seed;
  j["bandwidth"] = d.bandwidth;
  j["lip"] = d.lip;
  j["eps"] = d.eps;
  j["freq"] = d.freq;
  j["amp"] = d.amp;
  j["lo"] = d.lo;
  j["hi"] = d.hi;
  j["ramp"] = d.ramp;
  j["slope"] = d.slope;
  j["tooth_width"] = d.tooth_width;
  j["sigma_mult"] = d.sigma_mult;
  j["scale"] = d.scale;
  return j;
}

inline ConfigJson grid_defaults_json(const GridConfig& g,
                                     const std::string& origin_str,
                                     const std::string& period_str) {
  ConfigJson j;
  if (origin_str.empty()) j["origin"] = g.origin; else j["origin"] = origin_str;
  if (period_str.empty()) j["period"] = g.period; else j["period"] = period_str;
  j["length"] = g.length;
  return j;
}

inline ConfigJson bank_defaults_json(const BankConfig& b) {
  ConfigJson j;
  j["J"] = b.J;
  j["j_max"] = b.j_max == INT_MIN ? ConfigJson("auto") : ConfigJson(b.j_max);
  j["omega_lo"] = b.omega_lo;
  j["max_depth"] = b.max_depth;
  j["path_cap"] = b.path_cap;
  j["lp_tol"] = b.lp_tol;
  return j;
}

inline ConfigJson default_config(const std::string& subcommand) {
  ConfigJson root;
  if (subcommand == "lp-check" || subcommand == "scatter" ||
      subcommand == "deform") {
    root["grid"] = grid_defaults_json(GridConfig{}, "-8pi", "16pi");
    root["bank"] = bank_defaults_json(BankConfig{});
    root["signal"] = signal_defaults_json(SignalConfig{});
    root["deformation"] = deformation_defaults_json(DeformationConfig{});
    ConfigJson exp = ConfigJson::object();
    if (subcommand == "deform") {
      exp["alpha_list"] = {0.5};
      exp["allow_unsafe"] = false;
    }
    root["experiment"] = exp;
    return root;
  }
  if (subcommand == "instability") {
    InstabilityConfig c;
    root["grid"] = grid_defaults_json(c.grid, "-4pi", "16pi");
    root["bank"] = bank_defaults_json(c.bank);
    ConfigJson exp;
    exp["n_osc_list"] = c.n_osc_list;
    exp["n_list"] = c.n_list;
    exp["alpha_list"] = c.alpha_list;
    exp["amplitude"] = "auto";
    exp["j_prime"] = "auto";
    exp["audit_n_max"] = c.audit_n_max;
    exp["min_samples_per_osc"] = c.min_samples_per_osc;
    root["experiment"] = exp;
    return root;
  }
  if (subcommand == "stability") {
    StabilityConfig c;
    root["grid"] = grid_defaults_json(c.grid, "-8pi", "16pi");
    root["bank"] = bank_defaults_json(c.bank);
    ConfigJson exp;
    exp["J_list"] = c.J_list;
    exp["alpha_list"] = c.alpha_list;
    ConfigJson sigs = ConfigJson::array();
    for (const auto& s : default_stability_signals())
      sigs.push_back(signal_defaults_json(s));
    exp["signals"] = sigs;
    ConfigJson flds = ConfigJson::array();
    for (const auto& f : default_stability_fields())
      flds.push_back(deformation_defaults_json(f));
    exp["fields"] = flds;
    root["experiment"] = exp;
    return root;
  }
  if (subcommand == "translation") {
    TranslationConfig c;
    root["grid"] = grid_defaults_json(c.grid, "-64pi", "128pi");
    root["bank"] = bank_defaults_json(c.bank);
    root["signal"] = signal_defaults_json(c.signal);
    ConfigJson exp;
    exp["J_list"] = c.J_list;
    exp["shift"] = c.shift;
    root["experiment"] = exp;
    return root;
  }
  if (subcommand == "bandlimited") {
    BandlimitedConfig c;
    root["grid"] = grid_defaults_json(c.grid, "-8pi", "16pi");
    root["bank"] = bank_defaults_json(c.bank);
    root["signal"] = signal_defaults_json(c.base);
    root["deformation"] = deformation_defaults_json(c.tau);
    ConfigJson exp;
    exp["R_list"] = c.R_list;
    exp["beta"] = c.beta;
    root["experiment"] = exp;
    return root;
  }
  if (subcommand == "decay") {
    DecayConfig c;
    root["grid"] = grid_defaults_json(c.grid, "-8pi", "16pi");
    root["bank"] = bank_defaults_json(c.bank);
    ConfigJson exp;
    ConfigJson sigs = ConfigJson::array();
    for (const auto& s : default_decay_signals())
      sigs.push_back(signal_defaults_json(s));
    exp["signals"] = sigs;
    ConfigJson profs = ConfigJson::array();
    for (const auto& p : c.profiles)
      profs.push_back(ConfigJson{{"a", p.a}, {"r", p.r}});
    exp["profiles"] = profs;
    exp["beta"] = c.beta;
    root["experiment"] = exp;
    return root;
  }
  if (subcommand == "commutator") {
    CommutatorConfig c;
    root["grid"] = grid_defaults_json(c.grid, "-8pi", "16pi");
    root["bank"] = bank_defaults_json(c.bank);
    ConfigJson exp;
    exp["alpha"] = c.alpha;
    ConfigJson flds = ConfigJson::array();
    for (const auto& f : default_commutator_fields())
      flds.push_back(deformation_defaults_json(f));
    exp["fields"] = flds;
    exp["dense_check"] = true;
    ConfigJson pow;
    pow["tol"] = c.power.tol;
    pow["max_iter"] = c.power.max_iter;
    pow["seed"] = c.power.seed;
    exp["power"] = pow;
    root["experiment"] = exp;
    return root;
  }
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

inline void merge_config(ConfigJson& dst, const ConfigJson& src,
                         const std::string& prefix) {
  if (!src.is_object())
    throw ConfigError((prefix.empty() ? std::string("config") : prefix) +
                      ": expected an object");
  for (const auto& [k, v] : src.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (!dst.contains(k)) throw ConfigError("unknown key '" + path + "'");
    if (dst.at(k).is_object() && v.is_object())
      merge_config(dst.at(k), v, path);
    else
      dst.at(k) = v;
  }
}

// --set value strings parse as JSON when possible, else stay raw strings
// ("16pi" falls through to the pi-literal reader).
inline ConfigJson parse_override_value(const std::string& text) {
  ConfigJson v = ConfigJson::parse(text, nullptr, false);
  if (!v.is_discarded()) return v;
  return ConfigJson(text);
}

inline void apply_override(ConfigJson& root, const std::string& entry) {
  const std::size_t eq = entry.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set '" + entry + "': expected key=value");
  const std::string path = entry.substr(0, eq);
  const ConfigJson value = parse_override_value(entry.substr(eq + 1));

  ConfigJson* node = &root;
  std::size_t start = 0;
  std::vector<std::string> segs;
  while (true) {
    std::size_t dot = path.find('.', start);
    segs.push_back(path.substr(start, dot == std::string::npos
                                          ? std::string::npos
                                          : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string& seg = segs[i];
    const bool last = (i + 1 == segs.size());
    if (node->is_array()) {
      bool digits = !seg.empty();
      for (char ch : seg)
        if (!std::isdigit(static_cast<unsigned char>(ch))) digits = false;
      if (!digits)
        throw ConfigError("unknown key '" + path + "' (array index expected)");
      std::size_t idx = std::stoul(seg);
      if (idx >= node->size())
        throw ConfigError("unknown key '" + path + "' (index out of range)");
      if (last) {
        (*node)[idx] = value;
        return;
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(seg)) throw ConfigError("unknown key '" + path + "'");
      if (last) {
        node->at(seg) = value;
        return;
      }
      node = &node->at(seg);
    } else {
      throw ConfigError("unknown key '" + path + "'");
    }
  }
}

inline ConfigJson resolve_config(const std::string& subcommand,
                                 const ConfigJson& user,
                                 const std::vector<std::string>& overrides,
                                 const std::uint64_t* seed = nullptr) {
  ConfigJson root = default_config(subcommand);
  if (!user.is_null()) merge_config(root, user, "");
  for (const auto& ov : overrides) apply_override(root, ov);
  if (seed != nullptr) {
    if (root.contains("signal")) root["signal"]["seed"] = *seed;
    if (root.contains("deformation")) root["deformation"]["seed"] = *seed;
  }
  return root;
}

// ---------------------------------------------------------------------------
// Typed loaders from a resolved document.
// ---------------------------------------------------------------------------

struct LpCheckConfig {
  GridConfig grid;
  BankConfig bank;
};

struct ScatterConfig {
  GridConfig grid;
  BankConfig bank;
  SignalConfig signal;
  unsigned threads = 1;
};

inline LpCheckConfig make_lp_check_config(const ConfigJson& root) {
  LpCheckConfig c;
  c.grid = parse_grid_config(root.at("grid"), GridConfig{});
  c.bank = parse_bank_config(root.at("bank"), BankConfig{});
  return c;
}

inline ScatterConfig make_scatter_config(const ConfigJson& root) {
  ScatterConfig c;
  c.grid = parse_grid_config(root.at("grid"), GridConfig{});
  c.bank = parse_bank_config(root.at("bank"), BankConfig{});
  c.signal = parse_signal_config(root.at("signal"), SignalConfig{});
  return c;
}

inline DeformReportConfig make_deform_config(const ConfigJson& root) {
  DeformReportConfig c;
  c.grid = parse_grid_config(root.at("grid"), GridConfig{});
  c.bank = parse_bank_config(root.at("bank"), BankConfig{});
  c.signal = parse_signal_config(root.at("signal"), SignalConfig{});
  c.field = parse_deformation_config(root.at("deformation"),
                                     DeformationConfig{});
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "alpha_list")
      c.alpha_list = config_double_list(v, key);
    else if (k == "allow_unsafe")
      c.allow_unsafe = config_bool(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

inline InstabilityConfig make_instability_config(const ConfigJson& root) {
  InstabilityConfig c;
  c.grid = parse_grid_config(root.at("grid"), c.grid);
  c.bank = parse_bank_config(root.at("bank"), c.bank);
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "n_osc_list")
      c.n_osc_list = config_int_list(v, key);
    else if (k == "n_list")
      c.n_list = config_int_list(v, key);
    else if (k == "alpha_list")
      c.alpha_list = config_double_list(v, key);
    else if (k == "amplitude") {
      if (v.is_string() && v.get<std::string>() == "auto")
        c.amplitude = -1.0;
      else
        c.amplitude = config_double(v, key);
    } else if (k == "j_prime") {
      if (v.is_string() && v.get<std::string>() == "auto")
        c.j_prime = -1;
      else
        c.j_prime = static_cast<int>(config_int(v, key));
    } else if (k == "audit_n_max")
      c.audit_n_max = static_cast<int>(config_int(v, key));
    else if (k == "min_samples_per_osc")
      c.min_samples_per_osc = static_cast<int>(config_int(v, key));
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

inline StabilityConfig make_stability_config(const ConfigJson& root) {
  StabilityConfig c;
  c.grid = parse_grid_config(root.at("grid"), c.grid);
  c.bank = parse_bank_config(root.at("bank"), c.bank);
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "J_list")
      c.J_list = config_int_list(v, key);
    else if (k == "alpha_list")
      c.alpha_list = config_double_list(v, key);
    else if (k == "signals") {
      if (!v.is_array()) throw ConfigError(key + ": expected an array");
      c.signals.clear();
      for (std::size_t i = 0; i < v.size(); ++i)
        c.signals.push_back(parse_signal_config(
            v[i], SignalConfig{}, key + "[" + std::to_string(i) + "]"));
    } else if (k == "fields") {
      if (!v.is_array()) throw ConfigError(key + ": expected an array");
      c.fields.clear();
      for (std::size_t i = 0; i < v.size(); ++i)
        c.fields.push_back(parse_deformation_config(
            v[i], DeformationConfig{}, key + "[" + std::to_string(i) + "]"));
    } else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

inline TranslationConfig make_translation_config(const ConfigJson& root) {
  TranslationConfig c;
  c.grid = parse_grid_config(root.at("grid"), c.grid);
  c.bank = parse_bank_config(root.at("bank"), c.bank);
  c.signal = parse_signal_config(root.at("signal"), c.signal);
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "J_list")
      c.J_list = config_int_list(v, key);
    else if (k == "shift")
      c.shift = config_double(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

inline BandlimitedConfig make_bandlimited_config(const ConfigJson& root) {
  BandlimitedConfig c;
  c.grid = parse_grid_config(root.at("grid"), c.grid);
  c.bank = parse_bank_config(root.at("bank"), c.bank);
  c.base = parse_signal_config(root.at("signal"), c.base);
  c.tau = parse_deformation_config(root.at("deformation"), c.tau);
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "R_list")
      c.R_list = config_double_list(v, key);
    else if (k == "beta")
      c.beta = config_double(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

inline DecayConfig make_decay_config(const ConfigJson& root) {
  DecayConfig c;
  c.grid = parse_grid_config(root.at("grid"), c.grid);
  c.bank = parse_bank_config(root.at("bank"), c.bank);
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "signals") {
      if (!v.is_array()) throw ConfigError(key + ": expected an array");
      c.signals.clear();
      for (std::size_t i = 0; i < v.size(); ++i)
        c.signals.push_back(parse_signal_config(
            v[i], SignalConfig{}, key + "[" + std::to_string(i) + "]"));
    } else if (k == "profiles") {
      if (!v.is_array()) throw ConfigError(key + ": expected an array");
      c.profiles.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string pfx = key + "[" + std::to_string(i) + "]";
        require_object(v[i], pfx);
        DecayProfile p;
        for (const auto& [pk, pv] : v[i].items()) {
          if (pk == "a")
            p.a = config_double(pv, pfx + ".a");
          else if (pk == "r")
            p.r = config_double(pv, pfx + ".r");
          else
            throw ConfigError("unknown key '" + pfx + "." + pk + "'");
        }
        c.profiles.push_back(p);
      }
    } else if (k == "beta")
      c.beta = config_double(v, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

inline CommutatorConfig make_commutator_config(const ConfigJson& root) {
  CommutatorConfig c;
  c.grid = parse_grid_config(root.at("grid"), c.grid);
  c.bank = parse_bank_config(root.at("bank"), c.bank);
  const ConfigJson& exp = root.at("experiment");
  require_object(exp, "experiment");
  for (const auto& [k, v] : exp.items()) {
    const std::string key = "experiment." + k;
    if (k == "alpha")
      c.alpha = config_double(v, key);
    else if (k == "fields") {
      if (!v.is_array()) throw ConfigError(key + ": expected an array");
      c.fields.clear();
      for (std::size_t i = 0; i < v.size(); ++i)
        c.fields.push_back(parse_deformation_config(
            v[i], DeformationConfig{}, key + "[" + std::to_string(i) + "]"));
    } else if (k == "dense_check")
      c.dense_check = config_bool(v, key);
    else if (k == "power") {
      require_object(v, key);
      for (const auto& [pk, pv] : v.items()) {
        if (pk == "tol")
          c.power.tol = config_double(pv, key + ".tol");
        else if (pk == "max_iter")
          c.power.max_iter =
              static_cast<int>(config_int(pv, key + ".max_iter"));
        else if (pk == "seed")
          c.power.seed = config_u64(pv, key + ".seed");
        else
          throw ConfigError("unknown key '" + key + "." + pk + "'");
      }
    } else
      throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

}  // namespace wscat
