#pragma once

// Two-step best-effort scheduler.
//
// Step 1 places URLLC users one at a time, tightest deadline first (ties by
// user id). Each placement takes the free, unmasked block with the highest
// score = rate / (1 + conflict_cost), where conflict_cost is the eMBB rate
// lost by making the still-free overlapping blocks unusable (each priced at
// its best eMBB rate). A user keeps receiving blocks until its demand q_k is
// met or no candidate is left; a user left short is reported, never rolled
// back.
//
// Step 2 hands the remaining free blocks to eMBB users, highest rate first
// (ties: block id, then user id).

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nrsched/grid.hpp"
#include "nrsched/ilp.hpp"
#include "nrsched/rate.hpp"
#include "nrsched/slot_set.hpp"

namespace nrsched {

struct PlacementCandidate {
  BlockId block = 0;
  UserId user = 0;
  double rate_kbps = 0.0;
  double conflict_cost = 0.0;
  double score = 0.0;
};

struct UrllcCoverage {
  enum class Kind { kFully, kPartially, kDropped };
  Kind kind = Kind::kDropped;
  double served_kbps = 0.0;
  friend bool operator==(const UrllcCoverage&, const UrllcCoverage&) = default;
};

inline const char* to_string(UrllcCoverage::Kind k) {
  switch (k) {
    case UrllcCoverage::Kind::kFully: return "fully";
    case UrllcCoverage::Kind::kPartially: return "partially";
    case UrllcCoverage::Kind::kDropped: return "dropped";
  }
  return "?";
}

struct HeuristicResult {
  Allocation allocation;
  std::map<UserId, UrllcCoverage> urllc_covered;
  double embb_sum_kbps = 0.0;
};

namespace detail {

inline void check_dimensions(const Grid& grid, const std::vector<User>& users,
                             const RateMatrix& rates) {
  if (rates.block_count() != grid.block_count() || rates.user_count() != users.size())
    throw std::invalid_argument("rate matrix dimensions do not match grid/users");
  for (std::size_t k = 0; k < users.size(); ++k)
    if (users[k].id != k)
      throw std::invalid_argument("user ids must be dense and ordered");
}

inline std::vector<double> best_embb_rate(const Grid& grid,
                                          const std::vector<User>& users,
                                          const RateMatrix& rates) {
  std::vector<double> best(grid.block_count(), 0.0);
  for (const auto& b : grid.blocks())
    for (const auto& u : users)
      if (u.is_embb()) best[b.id] = std::max(best[b.id], rates(b.id, u.id));
  return best;
}

inline SlotSet occupied_by(const Grid& grid, const std::vector<Assignment>& as) {
  SlotSet occ(grid.slot_count());
  for (const auto& a : as) occ |= grid.block(a.block).covered;
  return occ;
}

// Objective is the eMBB sum, matching the P0 objective.
inline Allocation allocation_from(const std::vector<User>& users,
                                  const RateMatrix& rates,
                                  std::vector<Assignment> assignments) {
  std::sort(assignments.begin(), assignments.end());
  Allocation a;
  a.per_user_served_kbps.assign(users.size(), 0.0);
  for (const auto& as : assignments) {
    const double r = rates.at(as.block, as.user);
    a.per_user_served_kbps[as.user] += r;
    if (users[as.user].is_embb()) a.objective_kbps += r;
  }
  a.assignments = std::move(assignments);
  return a;
}

}  // namespace detail

// Free, unmasked candidates for `user` given the occupied slots, in block id
// order.
inline std::vector<PlacementCandidate> placement_candidates(
    const Grid& grid, const std::vector<User>& users, const RateMatrix& rates,
    UserId user, const SlotSet& occupied) {
  detail::check_dimensions(grid, users, rates);
  const auto best_embb = detail::best_embb_rate(grid, users, rates);
  std::vector<PlacementCandidate> out;
  for (const auto& b : grid.blocks()) {
    const double r = rates(b.id, user);
    if (r <= 0.0 || b.covered.intersects(occupied)) continue;
    double cost = 0.0;
    for (auto other : grid.conflict_set(b.id))
      if (!grid.block(other).covered.intersects(occupied)) cost += best_embb[other];
    out.push_back({b.id, user, r, cost, r / (1.0 + cost)});
  }
  return out;
}

inline Allocation schedule_urllc_phase(const Grid& grid, const std::vector<User>& users,
                                       const RateMatrix& rates) {
  detail::check_dimensions(grid, users, rates);
  std::vector<UserId> order;
  for (const auto& u : users)
    if (u.is_urllc()) order.push_back(u.id);
  std::stable_sort(order.begin(), order.end(), [&](UserId a, UserId b) {
    return *users[a].latency_tau_ms < *users[b].latency_tau_ms;
  });

  SlotSet occupied(grid.slot_count());
  std::vector<Assignment> placed;
  for (auto k : order) {
    double served = 0.0;
    while (served < users[k].demand_q_kbps - kRateEpsilon) {
      const auto cands = placement_candidates(grid, users, rates, k, occupied);
      if (cands.empty()) break;
      const PlacementCandidate* best = &cands.front();
      for (const auto& c : cands)
        if (c.score > best->score) best = &c;
      placed.push_back({best->block, k});
      occupied |= grid.block(best->block).covered;
      served += best->rate_kbps;
    }
  }
  return detail::allocation_from(users, rates, std::move(placed));
}

inline Allocation schedule_embb_phase(const Grid& grid, const std::vector<User>& users,
                                      const RateMatrix& rates, const Allocation& partial) {
  detail::check_dimensions(grid, users, rates);
  SlotSet occupied(grid.slot_count());
  for (const auto& a : partial.assignments) {
    const auto& cover = grid.block(a.block).covered;
    if (cover.intersects(occupied))
      throw std::invalid_argument("partial allocation has overlapping blocks");
    occupied |= cover;
  }

  struct Pair {
    double rate;
    BlockId block;
    UserId user;
  };
  std::vector<Pair> pairs;
  for (const auto& b : grid.blocks())
    for (const auto& u : users)
      if (u.is_embb() && rates(b.id, u.id) > 0.0)
        pairs.push_back({rates(b.id, u.id), b.id, u.id});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(b.rate, a.block, a.user) < std::tie(a.rate, b.block, b.user);
  });

  std::vector<Assignment> out = partial.assignments;
  for (const auto& p : pairs) {
    const auto& cover = grid.block(p.block).covered;
    if (cover.intersects(occupied)) continue;
    occupied |= cover;
    out.push_back({p.block, p.user});
  }
  return detail::allocation_from(users, rates, std::move(out));
}

inline HeuristicResult run_heuristic(const Grid& grid, const std::vector<User>& users,
                                     const RateMatrix& rates) {
  const auto partial = schedule_urllc_phase(grid, users, rates);
  HeuristicResult result;
  result.allocation = schedule_embb_phase(grid, users, rates, partial);
  result.embb_sum_kbps = result.allocation.objective_kbps;
  for (const auto& u : users) {
    if (!u.is_urllc()) continue;
    const double s = result.allocation.per_user_served_kbps[u.id];
    UrllcCoverage c{UrllcCoverage::Kind::kDropped, s};
    if (s >= u.demand_q_kbps - kRateEpsilon)
      c.kind = UrllcCoverage::Kind::kFully;
    else if (s > 0.0)
      c.kind = UrllcCoverage::Kind::kPartially;
    result.urllc_covered[u.id] = c;
  }
  return result;
}

}  // namespace nrsched
