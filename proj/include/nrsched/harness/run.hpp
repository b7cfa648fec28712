#pragma once

// Runs the requested methods on one scenario and turns each allocation into
// a Metrics row. Every allocation is checked with verify_allocation first; a
// failed check is a bug, reported as VerificationError.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrsched/grid.hpp"
#include "nrsched/harness/scenario.hpp"
#include "nrsched/heuristic.hpp"
#include "nrsched/ilp.hpp"
#include "nrsched/rate.hpp"
#include "nrsched/solver.hpp"

namespace nrsched::harness {

enum class RunStatus { kOptimal, kInfeasible, kBestEffort, kNodeLimit };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kOptimal: return "Optimal";
    case RunStatus::kInfeasible: return "Infeasible";
    case RunStatus::kBestEffort: return "BestEffort";
    case RunStatus::kNodeLimit: return "NodeLimit";
  }
  return "?";
}

inline RunStatus parse_run_status(const std::string& s) {
  if (s == "Optimal") return RunStatus::kOptimal;
  if (s == "Infeasible") return RunStatus::kInfeasible;
  if (s == "BestEffort") return RunStatus::kBestEffort;
  if (s == "NodeLimit") return RunStatus::kNodeLimit;
  throw std::invalid_argument("unknown status '" + s + "'");
}

// Throughput fields are empty when the method returned no allocation.
struct Metrics {
  std::optional<double> demand_kbps;
  std::optional<double> latency_ms;
  Method method = Method::kHeuristic;
  RunStatus status = RunStatus::kBestEffort;
  std::optional<double> embb_sum_kbps;
  std::optional<double> urllc_coverage;
  std::optional<int> fully_covered;
  std::optional<double> wall_time_s;
  std::optional<std::int64_t> nodes;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

class VerificationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Grid, users and rates built once per scenario.
struct Prepared {
  Grid grid;
  std::vector<User> users;
  RateMatrix rates;
};

inline Prepared prepare(const Scenario& s) {
  validate(s);
  Prepared p{build_grid(s.grid), s.users, {}};
  p.rates = build_rate_matrix(p.grid, p.users, s.rate_params);
  return p;
}

struct MethodOutcome {
  Metrics metrics;
  std::optional<Allocation> allocation;
};

// Σ min(served, q) / Σ q over URLLC users; 1 when there are none.
inline double urllc_coverage(const std::vector<User>& users, const Allocation& a) {
  double num = 0.0, den = 0.0;
  for (const auto& u : users) {
    if (!u.is_urllc()) continue;
    num += std::min(a.per_user_served_kbps.at(u.id), u.demand_q_kbps);
    den += u.demand_q_kbps;
  }
  return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 1.0;
}

inline int fully_covered_count(const std::vector<User>& users, const Allocation& a) {
  int n = 0;
  for (const auto& u : users)
    if (u.is_urllc() && a.per_user_served_kbps.at(u.id) >= u.demand_q_kbps - kRateEpsilon)
      ++n;
  return n;
}

inline double embb_sum(const std::vector<User>& users, const Allocation& a) {
  double s = 0.0;
  for (const auto& u : users)
    if (u.is_embb()) s += a.per_user_served_kbps.at(u.id);
  return s;
}

namespace detail {

inline void require_clean(const IlpInstance& inst, const Allocation& a, Method m,
                          bool demands_checked) {
  for (const auto& v : verify_allocation(inst, a)) {
    if (!demands_checked && v.kind == Violation::Kind::kDemand) continue;
    throw VerificationError(std::string(to_string(m)) + " allocation violates " +
                            v.constraint + " (margin " + std::to_string(v.margin) + ")");
  }
}

inline void fill_throughput(Metrics& m, const std::vector<User>& users,
                            const Allocation& a) {
  m.embb_sum_kbps = embb_sum(users, a);
  m.urllc_coverage = urllc_coverage(users, a);
  m.fully_covered = fully_covered_count(users, a);
}

}  // namespace detail

inline MethodOutcome run_method(const Prepared& p, Method method,
                                std::int64_t node_limit = kDefaultNodeLimit) {
  MethodOutcome out;
  out.metrics.method = method;
  const auto start = std::chrono::steady_clock::now();
  if (method == Method::kHeuristic) {
    auto h = run_heuristic(p.grid, p.users, p.rates);
    // Overlap and bookkeeping only; unmet URLLC demand is a reported outcome.
    detail::require_clean(build_p0(p.grid, p.users, p.rates), h.allocation, method, false);
    out.metrics.status = RunStatus::kBestEffort;
    out.allocation = std::move(h.allocation);
  } else {
    const auto inst = method == Method::kP0 ? build_p0(p.grid, p.users, p.rates)
                                            : build_p1(p.grid, p.users, p.rates);
    auto r = solve_exact(inst, node_limit);
    out.metrics.nodes = r.nodes_explored;
    switch (r.status) {
      case SolveStatus::kOptimal: out.metrics.status = RunStatus::kOptimal; break;
      case SolveStatus::kInfeasible: out.metrics.status = RunStatus::kInfeasible; break;
      case SolveStatus::kNodeLimit: out.metrics.status = RunStatus::kNodeLimit; break;
    }
    if (method == Method::kP1 && r.status == SolveStatus::kInfeasible)
      throw VerificationError("p1 reported Infeasible; the empty allocation is feasible");
    if (r.allocation) detail::require_clean(inst, *r.allocation, method, true);
    out.allocation = std::move(r.allocation);
  }
  out.metrics.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.allocation) detail::fill_throughput(out.metrics, p.users, *out.allocation);
  return out;
}

inline std::vector<Metrics> run_scenario(const Scenario& s) {
  const auto p = prepare(s);
  std::vector<Metrics> rows;
  for (auto m : s.methods) rows.push_back(run_method(p, m, s.node_limit).metrics);
  return rows;
}

}  // namespace nrsched::harness
