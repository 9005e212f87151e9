#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "secopt/errors.hpp"
#include "secopt/protocol.hpp"

namespace secopt {

// Config files are JSON objects whose keys mirror ProtocolConfig. Constant
// replacements nest under "overrides" and are addressed as "overrides.C0"
// on the command line.
//
//   {"T": 200000, "delta_adv": 0.1, "mode": "convex",
//    "overrides": {"C0": 2, "c0_inner_log": "2"}}

namespace detail {

using Json = nlohmann::json;
using Setter = std::function<void(ProtocolConfig&, const Json&)>;

inline double as_double(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  throw ParameterError("config key '" + key + "' expects a number");
}

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = {
      {"T", [](ProtocolConfig& c, const Json& v) {
         if (!v.is_number_integer()) throw ParameterError("config key 'T' expects an integer");
         c.T = v.get<std::int64_t>();
       }},
      {"delta_adv", [](ProtocolConfig& c, const Json& v) { c.delta_adv = as_double(v, "delta_adv"); }},
      {"eps_adv", [](ProtocolConfig& c, const Json& v) { c.eps_adv = as_double(v, "eps_adv"); }},
      {"eps", [](ProtocolConfig& c, const Json& v) { c.eps = as_double(v, "eps"); }},
      {"delta", [](ProtocolConfig& c, const Json& v) { c.delta = as_double(v, "delta"); }},
      {"kappa", [](ProtocolConfig& c, const Json& v) { c.kappa = as_double(v, "kappa"); }},
      {"lambda", [](ProtocolConfig& c, const Json& v) { c.lambda = as_double(v, "lambda"); }},
      {"W", [](ProtocolConfig& c, const Json& v) { c.w = as_double(v, "W"); }},
      {"sigma", [](ProtocolConfig& c, const Json& v) { c.sigma = as_double(v, "sigma"); }},
      {"p", [](ProtocolConfig& c, const Json& v) { c.p = as_double(v, "p"); }},
      {"seed", [](ProtocolConfig& c, const Json& v) {
         if (!v.is_number_integer()) throw ParameterError("config key 'seed' expects an integer");
         c.seed = v.get<std::uint64_t>();
       }},
      {"mode", [](ProtocolConfig& c, const Json& v) {
         if (!v.is_string()) throw ParameterError("config key 'mode' expects a string");
         c.mode = parse_mode(v.get<std::string>());
       }},
      {"x_init", [](ProtocolConfig& c, const Json& v) { c.x_init = as_double(v, "x_init"); }},
      {"with_replacement", [](ProtocolConfig& c, const Json& v) { c.with_replacement = v.get<bool>(); }},
      {"x_star", [](ProtocolConfig& c, const Json& v) {
         if (v.is_null()) {
           c.x_star.reset();
         } else {
           c.x_star = as_double(v, "x_star");
         }
       }},
      {"full_range_x_star", [](ProtocolConfig& c, const Json& v) { c.full_range_x_star = v.get<bool>(); }},
      {"adversary_samples", [](ProtocolConfig& c, const Json& v) { c.adversary_samples = v.get<int>(); }},
      {"error_kind", [](ProtocolConfig& c, const Json& v) {
         const auto s = v.get<std::string>();
         if (s == "point") {
           c.error_kind = ErrorKind::Point;
         } else if (s == "function") {
           c.error_kind = ErrorKind::Function;
         } else {
           throw ParameterError("error_kind must be 'point' or 'function'");
         }
       }},
      {"overrides.C0", [](ProtocolConfig& c, const Json& v) { c.overrides.c0 = as_double(v, "overrides.C0"); }},
      {"overrides.C1", [](ProtocolConfig& c, const Json& v) { c.overrides.c1 = as_double(v, "overrides.C1"); }},
      {"overrides.C2", [](ProtocolConfig& c, const Json& v) { c.overrides.c2 = as_double(v, "overrides.C2"); }},
      {"overrides.c0_inner_log", [](ProtocolConfig& c, const Json& v) {
         const auto s = v.is_string() ? v.get<std::string>() : v.dump();
         if (s == "2") {
           c.overrides.c0_inner_log = LogBase::Two;
         } else if (s == "e") {
           c.overrides.c0_inner_log = LogBase::Natural;
         } else {
           throw ParameterError("overrides.c0_inner_log must be \"2\" or \"e\"");
         }
       }},
  };
  return setters;
}

inline void apply_json(ProtocolConfig& config, const Json& obj, const std::string& prefix) {
  if (!obj.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      apply_json(config, value, full);
      continue;
    }
    const auto& setters = config_setters();
    const auto it = setters.find(full);
    if (it == setters.end()) throw ParameterError("unknown config key '" + full + "'");
    try {
      it->second(config, value);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("config key '" + full + "': " + e.what());
    }
  }
}

}  // namespace detail

inline ProtocolConfig config_from_json(const std::string& text, ProtocolConfig base = {}) {
  detail::Json obj;
  try {
    obj = detail::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("config parse error: ") + e.what());
  }
  detail::apply_json(base, obj, "");
  return base;
}

inline ProtocolConfig load_config(const std::string& path, ProtocolConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text, std::move(base));
}

/// Applies one key=value override; the value is read as JSON when it parses,
/// otherwise as a bare string (so mode=convex works unquoted).
inline void apply_override(ProtocolConfig& config, const std::string& key, const std::string& value) {
  const auto& setters = detail::config_setters();
  const auto it = setters.find(key);
  if (it == setters.end()) throw ParameterError("unknown config key '" + key + "'");
  detail::Json v = detail::Json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;
  try {
    it->second(config, v);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("config key '" + key + "': " + e.what());
  }
}

inline std::string config_to_json(const ProtocolConfig& c) {
  detail::Json j = {
      {"T", c.T},
      {"delta_adv", c.delta_adv},
      {"eps_adv", c.eps_adv},
      {"eps", c.eps},
      {"delta", c.delta},
      {"kappa", c.kappa},
      {"lambda", c.lambda},
      {"W", c.w},
      {"sigma", c.sigma},
      {"p", c.p},
      {"seed", c.seed},
      {"mode", to_string(c.mode)},
      {"x_init", c.x_init},
      {"with_replacement", c.with_replacement},
      {"full_range_x_star", c.full_range_x_star},
      {"adversary_samples", c.adversary_samples},
      {"error_kind", c.error_kind == ErrorKind::Point ? "point" : "function"},
  };
  j["x_star"] = c.x_star ? detail::Json(*c.x_star) : detail::Json(nullptr);
  detail::Json ov = {{"c0_inner_log", c.overrides.c0_inner_log == LogBase::Two ? "2" : "e"}};
  if (c.overrides.c0) ov["C0"] = *c.overrides.c0;
  if (c.overrides.c1) ov["C1"] = *c.overrides.c1;
  if (c.overrides.c2) ov["C2"] = *c.overrides.c2;
  j["overrides"] = ov;
  return j.dump(2);
}

}  // namespace secopt
