#pragma once

// (demand, latency) sweeps. Every URLLC user of the base scenario gets the
// cell's demand, latency and slack u_k; one Metrics row per cell and method.
//
// Spec files:
// {
//   "scenario": "desk_preset.json" | {...inline scenario...},
//   "latency_ms": [0.25, 0.5, 1, 1.5, 2],
//   "demand_kbps": [16, 32, 64, 128, 256, 512, 1024],
//   "slack_table": {"units": "kbps",
//                   "rows": [{"demand_kbps": [64], "latency_ms": [0.5], "slack_kbps": 116}, ...]},
//   "methods": ["p0", "p1", "heuristic"],   // optional, overrides the scenario
//   "threads": 1,
//   "record_wall_time": false
// }
// Omitted lists and table fall back to the defaults below.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "nrsched/harness/run.hpp"
#include "nrsched/harness/scenario.hpp"

namespace nrsched::harness {

using SlackTable = std::map<std::pair<double, double>, double>;  // (demand, latency) -> u_k

inline std::vector<double> default_latencies_ms() { return {0.25, 0.5, 1.0, 1.5, 2.0}; }
inline std::vector<double> default_demands_kbps() {
  return {16, 32, 64, 128, 256, 512, 1024};
}

// u_k in kbps. 16 and 32 kbps reuse the 64 kbps values.
inline SlackTable default_slack_table() {
  SlackTable t;
  auto put = [&](std::vector<double> demands, std::vector<double> lats, double u) {
    for (double q : demands)
      for (double l : lats) t[{q, l}] = u;
  };
  put({16, 32, 64, 128}, {0.25, 1.0}, 136);
  put({16, 32, 64, 128}, {0.5}, 116);
  put({16, 32, 64, 128}, {1.5, 2.0}, 96);
  put({256}, {0.25, 0.5, 1.0}, 244);
  put({256}, {1.5, 2.0}, 124);
  put({512}, {0.25, 0.5, 1.0, 1.5}, 158);
  put({512}, {2.0}, 138);
  put({1024}, {0.25, 0.5, 1.0, 1.5, 2.0}, 176);
  return t;
}

struct SweepSpec {
  Scenario base;
  std::vector<double> latency_ms = default_latencies_ms();
  std::vector<double> demand_kbps = default_demands_kbps();
  SlackTable slack_kbps = default_slack_table();
  unsigned threads = 1;
  // Off by default so repeated runs give identical files.
  bool record_wall_time = false;
};

inline void validate(const SweepSpec& s) {
  validate(s.base);
  if (s.latency_ms.empty() || s.demand_kbps.empty())
    throw ConfigError("sweep needs at least one latency and one demand");
  for (double v : s.latency_ms)
    if (!(v > 0.0)) throw ConfigError("sweep latencies must be positive");
  for (double v : s.demand_kbps)
    if (!(v > 0.0)) throw ConfigError("sweep demands must be positive");
  for (const auto& [key, u] : s.slack_kbps)
    if (!(u >= 0.0)) throw ConfigError("slack values must be >= 0");
  if (std::none_of(s.base.users.begin(), s.base.users.end(),
                   [](const User& u) { return u.is_urllc(); }))
    throw ConfigError("sweep base scenario has no URLLC user");
  if (s.threads == 0) throw ConfigError("threads must be >= 1");
  for (double q : s.demand_kbps)
    for (double l : s.latency_ms)
      if (!s.slack_kbps.count({q, l}))
        throw ConfigError("no slack (u_k) preset for demand " + std::to_string(q) +
                          " kbps, latency " + std::to_string(l) + " ms");
}

// The base scenario with the cell's URLLC parameters applied.
inline Scenario cell_scenario(const SweepSpec& spec, double demand, double latency) {
  Scenario s = spec.base;
  const double u = spec.slack_kbps.at({demand, latency});
  for (auto& user : s.users) {
    if (!user.is_urllc()) continue;
    user.demand_q_kbps = demand;
    user.latency_tau_ms = latency;
    user.slack_u_kbps = u;
  }
  return s;
}

// (demand, latency, method name) order used by every emitter.
inline void sort_rows(std::vector<Metrics>& rows) {
  auto key = [](const Metrics& m) {
    return std::tuple{m.demand_kbps.value_or(0.0), m.latency_ms.value_or(0.0),
                      std::string(to_string(m.method))};
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const Metrics& a, const Metrics& b) { return key(a) < key(b); });
}

inline std::vector<Metrics> sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<std::pair<double, double>> cells;
  for (double q : spec.demand_kbps)
    for (double l : spec.latency_ms) cells.emplace_back(q, l);

  std::vector<std::vector<Metrics>> out(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const auto [q, l] = cells[i];
        auto rows = run_scenario(cell_scenario(spec, q, l));
        for (auto& r : rows) {
          r.demand_kbps = q;
          r.latency_ms = l;
          if (!spec.record_wall_time) r.wall_time_s.reset();
        }
        out[i] = std::move(rows);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(spec.threads, cells.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Metrics> rows;
  for (auto& c : out) rows.insert(rows.end(), c.begin(), c.end());
  sort_rows(rows);
  return rows;
}

namespace detail {

inline std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline SlackTable parse_slack_table(const json& j) {
  only_fields(j, "slack_table", {"units", "rows"});
  if (get<std::string>(j, "slack_table", "units") != "kbps")
    throw ConfigError("slack_table.units: only 'kbps' is supported");
  const auto& rows = field(j, "slack_table", "rows");
  if (!rows.is_array()) throw ConfigError("slack_table.rows: expected an array");
  SlackTable t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string w = "slack_table.rows[" + std::to_string(i) + "]";
    only_fields(rows[i], w, {"demand_kbps", "latency_ms", "slack_kbps"});
    const double u = get<double>(rows[i], w, "slack_kbps");
    for (double q : number_list(field(rows[i], w, "demand_kbps"), w + ".demand_kbps"))
      for (double l : number_list(field(rows[i], w, "latency_ms"), w + ".latency_ms"))
        if (!t.emplace(std::pair{q, l}, u).second)
          throw ConfigError(w + ": duplicate entry for demand " + std::to_string(q) +
                            ", latency " + std::to_string(l));
  }
  return t;
}

}  // namespace detail

// Relative scenario paths resolve against `base_dir`.
inline SweepSpec parse_sweep_spec(const json& j, const std::filesystem::path& base_dir) {
  detail::only_fields(j, "sweep", {"scenario", "latency_ms", "demand_kbps", "slack_table",
                                   "methods", "threads", "record_wall_time"});
  SweepSpec s;
  const auto& sc = detail::field(j, "sweep", "scenario");
  if (sc.is_string())
    s.base = load_scenario(base_dir / sc.get<std::string>());
  else
    s.base = parse_scenario(sc);
  if (j.contains("latency_ms")) s.latency_ms = detail::number_list(j.at("latency_ms"), "latency_ms");
  if (j.contains("demand_kbps"))
    s.demand_kbps = detail::number_list(j.at("demand_kbps"), "demand_kbps");
  if (j.contains("slack_table")) s.slack_kbps = detail::parse_slack_table(j.at("slack_table"));
  if (j.contains("methods")) {
    const auto& ms = j.at("methods");
    if (!ms.is_array()) throw ConfigError("methods: expected an array");
    s.base.methods.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) throw ConfigError("methods: expected strings");
      try {
        s.base.methods.push_back(parse_method(m.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("methods: ") + e.what());
      }
    }
  }
  s.threads = detail::get_or<unsigned>(j, "sweep", "threads", 1);
  s.record_wall_time = detail::get_or<bool>(j, "sweep", "record_wall_time", false);
  validate(s);
  return s;
}

inline SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  try {
    return parse_sweep_spec(read_json_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
}

}  // namespace nrsched::harness
