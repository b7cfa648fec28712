#pragma once

// Scenario files: JSON, strict (unknown fields are errors).
//
// {
//   "grid": {"freq_units": 12, "time_units": 16, "mu_max": 2,
//            "base_freq_hz": 1440000, "base_time_ms": 0.125,
//            "numerologies": [{"mu": 0, "cp_overhead": 0.0, "ctrl_overhead": 0.0}, ...],
//            "precompute_conflicts": false},
//   "rate_model": {"ctrl_overhead": 0.0, "frame_duration_ms": 2.0},
//   "users": [{"id": 0, "class": "urllc", "spectral_efficiency": 3.0,
//              "demand_kbps": 64, "latency_ms": 1.0, "slack_kbps": 136}, ...],
//   "generate": {...},            // instead of "users"
//   "methods": ["p0", "p1", "heuristic"],
//   "seed": 1,
//   "node_limit": 10000000
// }
//
// A numerology's ctrl_overhead overrides rate_model.ctrl_overhead. See
// docs/scenario_format.md for "generate".

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nrsched/grid.hpp"
#include "nrsched/rate.hpp"
#include "nrsched/solver.hpp"

namespace nrsched::harness {

using nlohmann::json;

enum class Method { kP0, kP1, kHeuristic };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kP0: return "p0";
    case Method::kP1: return "p1";
    case Method::kHeuristic: return "heuristic";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "p0") return Method::kP0;
  if (s == "p1") return Method::kP1;
  if (s == "heuristic") return Method::kHeuristic;
  throw std::invalid_argument("unknown method '" + std::string(s) +
                              "' (expected p0, p1 or heuristic)");
}

struct Scenario {
  GridConfig grid;
  std::vector<User> users;
  RateModelParams rate_params;
  std::vector<Method> methods;
  std::uint64_t seed = 0;
  std::int64_t node_limit = kDefaultNodeLimit;
};

// Config problems (schema, ranges, I/O). Distinct from solver bugs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void only_fields(const json& j, const std::string& where,
                        std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

template <class T>
T get(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline const json& field(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get_or(const json& j, const std::string& where, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, where, key) : fallback;
}

// Uniform in [lo, hi] from the top 53 bits; fixed across standard libraries.
inline double draw(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// A number, or {"min": a, "max": b} drawn uniformly.
inline double value_or_range(const json& j, const std::string& where,
                             std::mt19937_64& rng) {
  if (j.is_number()) return j.get<double>();
  only_fields(j, where, {"min", "max"});
  const double lo = get<double>(j, where, "min");
  const double hi = get<double>(j, where, "max");
  if (!(lo <= hi)) throw ConfigError(where + ": min > max");
  return draw(rng, lo, hi);
}

inline GridConfig parse_grid(const json& j, RateModelParams& rp) {
  const std::string w = "grid";
  only_fields(j, w, {"freq_units", "time_units", "mu_max", "base_freq_hz",
                     "base_time_ms", "numerologies", "precompute_conflicts"});
  GridConfig g;
  g.freq_units = get<int>(j, w, "freq_units");
  g.time_units = get<int>(j, w, "time_units");
  g.mu_max = get<int>(j, w, "mu_max");
  g.base_freq_hz = get_or<double>(j, w, "base_freq_hz", 180e3);
  // Default: a 1 ms reference slot split into 2^mu_max mini-slots.
  const double default_ms = g.mu_max >= 0 && g.mu_max <= 16 ? 1.0 / double(1 << g.mu_max) : 1.0;
  g.base_time_s = get_or<double>(j, w, "base_time_ms", default_ms) * 1e-3;
  g.precompute_conflicts = get_or<bool>(j, w, "precompute_conflicts", false);
  const auto& ns = j.contains("numerologies") ? j.at("numerologies") : json();
  if (!ns.is_array() || ns.empty())
    throw ConfigError("grid.numerologies: expected a non-empty array");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::string wi = "grid.numerologies[" + std::to_string(i) + "]";
    only_fields(ns[i], wi, {"mu", "cp_overhead", "ctrl_overhead"});
    Numerology n;
    n.mu = get<int>(ns[i], wi, "mu");
    n.cp_overhead = get_or<double>(ns[i], wi, "cp_overhead", 0.0);
    if (ns[i].contains("ctrl_overhead"))
      rp.ctrl_overhead_by_mu[n.mu] = get<double>(ns[i], wi, "ctrl_overhead");
    g.numerologies.push_back(n);
  }
  return g;
}

inline User parse_user(const json& j, const std::string& w) {
  only_fields(j, w, {"id", "class", "spectral_efficiency", "demand_kbps",
                     "latency_ms", "slack_kbps"});
  User u;
  u.id = get<std::size_t>(j, w, "id");
  const auto cls = get<std::string>(j, w, "class");
  if (cls == "embb")
    u.service_class = ServiceClass::kEmbb;
  else if (cls == "urllc")
    u.service_class = ServiceClass::kUrllc;
  else
    throw ConfigError(w + ".class: expected 'embb' or 'urllc', got '" + cls + "'");
  u.spectral_efficiency = get<double>(j, w, "spectral_efficiency");
  u.demand_q_kbps = get_or<double>(j, w, "demand_kbps", 0.0);
  if (j.contains("latency_ms")) u.latency_tau_ms = get<double>(j, w, "latency_ms");
  u.slack_u_kbps = get_or<double>(j, w, "slack_kbps", 0.0);
  return u;
}

inline std::vector<User> generate_users(const json& j, std::uint64_t seed) {
  const std::string w = "generate";
  only_fields(j, w, {"urllc", "embb"});
  std::mt19937_64 rng(seed);
  std::vector<User> users;
  if (j.contains("urllc")) {
    const auto& g = j.at("urllc");
    const std::string wu = "generate.urllc";
    only_fields(g, wu, {"count", "spectral_efficiency", "demand_kbps", "latency_ms",
                        "slack_kbps"});
    const int n = get<int>(g, wu, "count");
    if (n < 0) throw ConfigError(wu + ".count: must be >= 0");
    for (int i = 0; i < n; ++i) {
      User u;
      u.id = users.size();
      u.service_class = ServiceClass::kUrllc;
      u.spectral_efficiency = value_or_range(field(g, wu, "spectral_efficiency"),
                                             wu + ".spectral_efficiency", rng);
      u.demand_q_kbps = get<double>(g, wu, "demand_kbps");
      u.latency_tau_ms = get<double>(g, wu, "latency_ms");
      u.slack_u_kbps = get_or<double>(g, wu, "slack_kbps", 0.0);
      users.push_back(u);
    }
  }
  if (j.contains("embb")) {
    const auto& g = j.at("embb");
    const std::string we = "generate.embb";
    only_fields(g, we, {"count", "spectral_efficiency"});
    const int n = get<int>(g, we, "count");
    if (n < 0) throw ConfigError(we + ".count: must be >= 0");
    for (int i = 0; i < n; ++i) {
      User u;
      u.id = users.size();
      u.spectral_efficiency = value_or_range(field(g, we, "spectral_efficiency"),
                                             we + ".spectral_efficiency", rng);
      users.push_back(u);
    }
  }
  return users;
}

}  // namespace detail

// Range and consistency checks shared by the loader and programmatic use.
inline void validate(const Scenario& s) {
  try {
    validate(s.grid);
    if (s.users.empty()) throw std::invalid_argument("scenario has no users");
    validate_users(s.users);
    validate(s.rate_params, s.grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (s.methods.empty()) throw ConfigError("scenario needs at least one method");
  for (std::size_t i = 0; i < s.methods.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (s.methods[i] == s.methods[j])
        throw ConfigError(std::string("duplicate method ") + to_string(s.methods[i]));
  if (s.node_limit <= 0) throw ConfigError("node_limit must be > 0");
}

inline Scenario parse_scenario(const json& j) {
  detail::only_fields(j, "scenario", {"grid", "rate_model", "users", "generate",
                                      "methods", "seed", "node_limit"});
  Scenario s;
  if (!j.contains("grid")) throw ConfigError("scenario: missing field 'grid'");
  s.grid = detail::parse_grid(j.at("grid"), s.rate_params);
  if (j.contains("rate_model")) {
    const auto& r = j.at("rate_model");
    detail::only_fields(r, "rate_model", {"ctrl_overhead", "frame_duration_ms"});
    s.rate_params.ctrl_overhead = detail::get_or<double>(r, "rate_model", "ctrl_overhead", 0.0);
    s.rate_params.frame_duration_ms =
        detail::get_or<double>(r, "rate_model", "frame_duration_ms", 2.0);
  }
  s.seed = detail::get_or<std::uint64_t>(j, "scenario", "seed", 0);
  s.node_limit = detail::get_or<std::int64_t>(j, "scenario", "node_limit", kDefaultNodeLimit);

  if (j.contains("users") == j.contains("generate"))
    throw ConfigError("scenario: give exactly one of 'users' or 'generate'");
  if (j.contains("users")) {
    const auto& us = j.at("users");
    if (!us.is_array()) throw ConfigError("users: expected an array");
    for (std::size_t i = 0; i < us.size(); ++i)
      s.users.push_back(detail::parse_user(us[i], "users[" + std::to_string(i) + "]"));
  } else {
    s.users = detail::generate_users(j.at("generate"), s.seed);
  }

  if (!j.contains("methods") || !j.at("methods").is_array())
    throw ConfigError("scenario: 'methods' must be an array");
  for (const auto& m : j.at("methods")) {
    if (!m.is_string()) throw ConfigError("methods: expected strings");
    try {
      s.methods.push_back(parse_method(m.get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("methods: ") + e.what());
    }
  }
  validate(s);
  return s;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_json_file(path));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
}

}  // namespace nrsched::harness
