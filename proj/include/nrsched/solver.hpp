#pragma once

// Exact depth-first branch-and-bound for IlpInstance.
//
// Variables are visited block by block in (block id, user id) order. At a
// block whose mini-slots are still free the solver tries x=1 for each user in
// id order, then the x=0 branch for the whole block; assigning a block fixes
// every overlapping variable to 0.
//
// Node bound: current objective plus, for every free mini-slot, the best
// per-slot objective density (rate / block area) among variables that can
// still be set. Rows with a <= cap additionally limit the capped users'
// total to the remaining cap. Rows with a >= demand and zero objective
// (URLLC users in P0) force some free area away from the objective: at least
// remaining_demand / best_density slots, charged at the cheapest usable
// slots. All three are relaxations, so pruning on them keeps optimality.
//
// When the slot layout is known a second bound splits every block into its
// per-frequency-row time intervals and solves weighted interval scheduling
// on each row (a block's value is shared evenly by its rows). This sees
// rows that cannot be tiled exactly. Demand rows enter it through a
// Lagrangian term: >= rows credit lambda per slot of needed area, <= rows
// discount the capped objective by mu and add mu * remaining caps. The node
// bound is the smaller of the two.
//
// Reductions that keep at least one optimum reachable:
//  * Interchangeable users (identical columns and rows) in the same state
//    (served amount, has a block) mirror each other; only the lowest id
//    among them is branched on.
//  * A zero-objective variable in a >= row that is already satisfied is not
//    set to 1 (it would only consume capacity).
//
// Among equal-objective optima the first one met in this search order is
// returned; a later solution must be better by more than kRateEpsilon.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "nrsched/ilp.hpp"

namespace nrsched {

enum class SolveStatus { kOptimal, kInfeasible, kNodeLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kNodeLimit: return "NodeLimit";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<Allocation> allocation;
  std::int64_t nodes_explored = 0;
  double wall_time_s = 0.0;
};

inline constexpr std::int64_t kDefaultNodeLimit = 10'000'000;

struct SolveOptions {
  std::int64_t node_limit = kDefaultNodeLimit;
  bool break_symmetry = true;
};

namespace detail {

class BranchAndBound {
 public:
  BranchAndBound(const IlpInstance& inst, const SolveOptions& options)
      : inst_(inst), options_(options) {
    for (std::size_t v = 1; v < inst.variables.size(); ++v) {
      const auto& a = inst.variables[v - 1];
      const auto& b = inst.variables[v];
      if (std::tie(a.block, a.user) >= std::tie(b.block, b.user))
        throw std::invalid_argument("instance variables must be sorted and unique");
    }
    setup_rows();
    setup_blocks();
    setup_symmetry();
    setup_dominance();
    setup_lanes();
    setup_caps();
    occupied_ = SlotSet(inst.slot_count);
    row_value_.assign(inst.demand_constraints.size(), 0.0);
    user_blocks_.assign(inst.user_count(), 0);
    best_e_.resize(inst.slot_count);
    best_g_.resize(inst.slot_count);
    usable_ge_.resize(inst.slot_count);
    row_slot_best_.resize(inst.demand_constraints.size());
  }

  SolveResult run() {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    if (!root_may_be_feasible()) {
      result.status = SolveStatus::kInfeasible;
    } else {
      search(0);
      if (aborted_)
        result.status = SolveStatus::kNodeLimit;
      else
        result.status = incumbent_ ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
      if (incumbent_) {
        std::vector<Assignment> as;
        for (auto v : *incumbent_)
          as.push_back({inst_.variables[v].block, inst_.variables[v].user});
        result.allocation = make_allocation(inst_, std::move(as));
      }
    }
    result.nodes_explored = nodes_;
    result.wall_time_s = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    return result;
  }

 private:
  struct BlockInfo {
    BlockId id;
    std::vector<SlotIndex> slots;
    double area;
    std::size_t var_begin, var_end;
  };

  static constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

  void setup_rows() {
    row_of_var_.assign(inst_.variables.size(), kNoRow);
    row_of_user_.assign(inst_.user_count(), kNoRow);
    for (std::size_t r = 0; r < inst_.demand_constraints.size(); ++r) {
      const auto& c = inst_.demand_constraints[r];
      if (c.user >= inst_.user_count() || row_of_user_[c.user] != kNoRow)
        throw std::invalid_argument("demand rows must name distinct known users");
      row_of_user_[c.user] = r;
      for (auto v : c.vars) {
        if (v >= inst_.variables.size() || inst_.variables[v].user != c.user)
          throw std::invalid_argument("demand row references a foreign variable");
        row_of_var_[v] = r;
      }
      if (c.sense == Sense::kAtMost) {
        has_cap_rows_ = true;
        for (auto v : c.vars)
          if (inst_.variables[v].objective > inst_.variables[v].rate * (1 + 1e-12))
            cap_bound_valid_ = false;
      } else {
        has_ge_rows_ = true;
        for (auto v : c.vars)
          if (inst_.variables[v].objective != 0.0) ge_zero_objective_ = false;
      }
    }
  }

  void setup_blocks() {
    std::size_t v = 0;
    const auto& vars = inst_.variables;
    while (v < vars.size()) {
      BlockInfo b;
      b.id = vars[v].block;
      if (b.id >= inst_.block_count())
        throw std::invalid_argument("variable references unknown block");
      b.slots = inst_.block_cover[b.id].indices();
      b.area = static_cast<double>(b.slots.size());
      if (b.slots.empty()) throw std::invalid_argument("block covers no slot");
      b.var_begin = v;
      while (v < vars.size() && vars[v].block == b.id) ++v;
      b.var_end = v;
      blocks_.push_back(std::move(b));
    }
    block_pos_of_var_.resize(vars.size());
    for (std::size_t p = 0; p < blocks_.size(); ++p)
      for (auto i = blocks_[p].var_begin; i < blocks_[p].var_end; ++i)
        block_pos_of_var_[i] = p;
  }

  void setup_symmetry() {
    prev_in_class_.assign(inst_.user_count(), kNoRow);
    if (!options_.break_symmetry) return;
    // Signature: row (sense, bound) and the (block, objective, rate) column.
    using Column = std::vector<std::tuple<BlockId, double, double>>;
    std::vector<Column> column(inst_.user_count());
    for (const auto& var : inst_.variables)
      column[var.user].emplace_back(var.block, var.objective, var.rate);
    std::vector<std::optional<std::pair<int, double>>> row(inst_.user_count());
    for (const auto& c : inst_.demand_constraints)
      row[c.user] = std::pair{static_cast<int>(c.sense), c.bound};
    std::map<std::tuple<int, std::optional<std::pair<int, double>>, Column>, UserId>
        last;
    for (UserId k = 0; k < inst_.user_count(); ++k) {
      auto key = std::tuple{static_cast<int>(inst_.user_class[k]), row[k], column[k]};
      auto it = last.find(key);
      if (it != last.end()) {
        prev_in_class_[k] = it->second;
        it->second = k;
      } else {
        last.emplace(std::move(key), k);
      }
    }
  }

  // A user without a demand row is dominated when another such user has an
  // objective at least as large on every block where it has a variable
  // (strictly larger somewhere, or equal everywhere with a smaller id).
  // Moving its blocks to the dominating user never lowers the objective.
  void setup_dominance() {
    const std::size_t users = inst_.user_count();
    dominated_.assign(users, false);
    std::vector<bool> has_row(users, false);
    for (const auto& c : inst_.demand_constraints) has_row[c.user] = true;
    std::vector<std::vector<double>> obj(users);
    for (UserId k = 0; k < users; ++k)
      if (!has_row[k]) obj[k].assign(inst_.block_count(), -1.0);
    for (const auto& var : inst_.variables)
      if (!has_row[var.user]) obj[var.user][var.block] = var.objective;
    for (UserId k = 0; k < users; ++k) {
      if (has_row[k]) continue;
      for (UserId j = 0; j < users && !dominated_[k]; ++j) {
        if (j == k || has_row[j] || dominated_[j]) continue;
        bool covers_all = true;
        bool strict = false;
        for (BlockId b = 0; b < inst_.block_count() && covers_all; ++b) {
          if (obj[k][b] < 0.0) continue;
          if (obj[j][b] < obj[k][b]) covers_all = false;
          if (obj[j][b] > obj[k][b]) strict = true;
        }
        if (covers_all && (strict || j < k)) dominated_[k] = true;
      }
    }
  }

  // Per-row intervals of every block, grouped by row and ordered by end.
  void setup_lanes() {
    const std::size_t T = inst_.time_units;
    if (T == 0 || inst_.slot_count % T != 0) return;
    const std::size_t lanes = inst_.slot_count / T;
    lanes_.assign(lanes, {});
    for (std::size_t p = 0; p < blocks_.size(); ++p) {
      std::map<std::size_t, std::pair<std::size_t, std::size_t>> span;  // lane -> [lo, hi]
      std::map<std::size_t, std::size_t> count;
      for (auto i : blocks_[p].slots) {
        const std::size_t f = i / T, t = i % T;
        auto [it, fresh] = span.try_emplace(f, t, t);
        if (!fresh) {
          it->second.first = std::min(it->second.first, t);
          it->second.second = std::max(it->second.second, t);
        }
        ++count[f];
      }
      for (const auto& [f, lo_hi] : span) {
        const auto [lo, hi] = lo_hi;
        if (count[f] != hi - lo + 1) {
          lanes_.clear();
          return;
        }
        lanes_[f].push_back({lo, hi + 1, p, static_cast<double>(span.size())});
      }
    }
    for (auto& lane : lanes_)
      std::sort(lane.begin(), lane.end(),
                [](const LaneInterval& a, const LaneInterval& b) {
                  return std::tie(a.end, a.start, a.pos) < std::tie(b.end, b.start, b.pos);
                });
    lane_dp_.resize(T + 1);
    lane_ge_.resize(T + 1);
    lane_g_.resize(T + 1);
  }

  // Sum over rows of the best interval packing. A block's value is its best
  // settable objective, with capped objectives scaled by (1 - mu) and open
  // >= variables worth lambda per slot.
  // Also reports, through `ge_area`, how many slots of open >= variables the
  // packing uses (the subgradient in lambda).
  double lane_bound(double lambda, double mu, double* ge_area = nullptr,
                    double* capped_value = nullptr) {
    for (std::size_t p = 0; p < blocks_.size(); ++p) {
      double v = block_e_[p];
      block_is_ge_[p] = false;
      block_g_used_[p] = 0.0;
      if (block_g_[p] >= 0.0 && (1.0 - mu) * block_g_[p] > v) {
        v = (1.0 - mu) * block_g_[p];
        block_g_used_[p] = block_g_[p];
      }
      if (block_ge_[p] && lambda * blocks_[p].area > v) {
        v = lambda * blocks_[p].area;
        block_is_ge_[p] = true;
        block_g_used_[p] = 0.0;
      }
      block_value_[p] = v;
    }
    double total = 0.0, used = 0.0, capped = 0.0;
    for (const auto& lane : lanes_) {
      std::size_t t = 0;
      lane_dp_[0] = 0.0;
      lane_ge_[0] = 0.0;
      lane_g_[0] = 0.0;
      for (const auto& iv : lane) {
        while (t < iv.end) {
          lane_dp_[t + 1] = lane_dp_[t];
          lane_ge_[t + 1] = lane_ge_[t];
          lane_g_[t + 1] = lane_g_[t];
          ++t;
        }
        const double v = block_value_[iv.pos];
        if (v <= 0.0) continue;
        const double cand = lane_dp_[iv.start] + v / iv.width;
        if (cand > lane_dp_[iv.end]) {
          lane_dp_[iv.end] = cand;
          lane_ge_[iv.end] = lane_ge_[iv.start] +
                             (block_is_ge_[iv.pos] ? double(iv.end - iv.start) : 0.0);
          lane_g_[iv.end] = lane_g_[iv.start] + block_g_used_[iv.pos] / iv.width;
        }
      }
      total += lane_dp_[t];
      used += lane_ge_[t];
      capped += lane_g_[t];
    }
    if (ge_area) *ge_area = used;
    if (capped_value) *capped_value = capped;
    return total;
  }

  // Largest sum of the row's rates (each used at most as often as it
  // occurs) that fits in the remaining cap. Falls back to the plain
  // remaining cap when the enumeration gets large.
  double reachable_cap(std::size_t r) {
    const double rem = std::max(0.0, inst_.demand_constraints[r].bound - row_value_[r]);
    if (!cap_bound_valid_) return rem;
    auto& memo = cap_memo_[r];
    if (auto it = memo.find(rem); it != memo.end()) return it->second;
    const auto& items = cap_items_[r];
    double best = 0.0;
    long budget = 20000;
    const double limit = rem + kRateEpsilon;
    auto dfs = [&](auto&& self, std::size_t i, double sum) -> void {
      if (--budget < 0) return;
      best = std::max(best, sum);
      if (i == items.size() || best >= rem) return;
      const auto [rate, count] = items[i];
      for (std::size_t n = std::min<std::size_t>(
               count, static_cast<std::size_t>((limit - sum) / rate));;
           --n) {
        self(self, i + 1, sum + static_cast<double>(n) * rate);
        if (n == 0 || budget < 0) break;
      }
    };
    dfs(dfs, 0, 0.0);
    const double value = budget < 0 ? rem : std::min(rem, best);
    memo.emplace(rem, value);
    return value;
  }

  void setup_caps() {
    cap_items_.assign(inst_.demand_constraints.size(), {});
    cap_memo_.assign(inst_.demand_constraints.size(), {});
    for (std::size_t r = 0; r < inst_.demand_constraints.size(); ++r) {
      const auto& c = inst_.demand_constraints[r];
      if (c.sense != Sense::kAtMost) continue;
      std::map<double, std::size_t, std::greater<>> count;
      for (auto v : c.vars)
        if (inst_.variables[v].rate > 0.0) ++count[inst_.variables[v].rate];
      for (const auto& [rate, n] : count) cap_items_[r].emplace_back(rate, n);
    }
  }

  bool root_may_be_feasible() const {
    // Conflict-free relaxation: each slot carries the best density of the
    // row's variables covering it.
    for (const auto& c : inst_.demand_constraints) {
      if (c.sense != Sense::kAtLeast || c.bound <= kRateEpsilon) continue;
      std::vector<double> best(inst_.slot_count, 0.0);
      for (auto v : c.vars) {
        const auto& b = blocks_[block_pos_of_var_[v]];
        const double d = inst_.variables[v].rate / b.area;
        for (auto i : b.slots) best[i] = std::max(best[i], d);
      }
      double total = 0.0;
      for (double x : best) total += x;
      if (total < c.bound - kRateEpsilon) return false;
    }
    return true;
  }

  bool block_free(const BlockInfo& b) const {
    for (auto i : b.slots)
      if (occupied_.test(i)) return false;
    return true;
  }

  bool row_satisfied(std::size_t r) const {
    return row_value_[r] >= inst_.demand_constraints[r].bound - kRateEpsilon;
  }

  // Whether x_v = 1 is allowed in the current state (block freedom aside).
  // Row-based exclusions only tighten as the search descends; the symmetry
  // rule does not, so bound() skips it.
  bool can_set(std::size_t v, bool with_symmetry = true) const {
    const auto& var = inst_.variables[v];
    if (dominated_[var.user]) return false;
    const auto r = row_of_var_[v];
    if (r != kNoRow) {
      const auto& c = inst_.demand_constraints[r];
      if (c.sense == Sense::kAtMost &&
          row_value_[r] + var.rate > c.bound + kRateEpsilon)
        return false;
      if (c.sense == Sense::kAtLeast && var.objective <= 0.0 && row_satisfied(r))
        return false;
    }
    if (!with_symmetry) return true;
    // Interchangeable users in the same state lead to mirrored subtrees;
    // only the lowest id among them branches.
    const auto row = r;
    for (auto peer = prev_in_class_[var.user]; peer != kNoRow; peer = prev_in_class_[peer]) {
      const bool same_served =
          row == kNoRow || row_value_[row_of_user_[peer]] == row_value_[row];
      if (same_served && (user_blocks_[peer] > 0) == (user_blocks_[var.user] > 0))
        return false;
    }
    return true;
  }

  // Returns nullopt when the node cannot lead to a feasible completion;
  // otherwise an upper bound on the best completion and whether any
  // variable can still be set.
  std::optional<std::pair<double, bool>> bound(std::size_t pos) {
    std::fill(best_e_.begin(), best_e_.end(), 0.0);
    std::fill(best_g_.begin(), best_g_.end(), 0.0);
    std::fill(usable_ge_.begin(), usable_ge_.end(), false);
    const std::size_t rows = inst_.demand_constraints.size();
    row_best_density_.assign(rows, 0.0);
    row_max_rate_.assign(rows, 0.0);
    row_min_area_.assign(rows, std::numeric_limits<double>::infinity());
    row_has_var_.assign(rows, false);
    for (std::size_t r = 0; r < rows; ++r)
      if (inst_.demand_constraints[r].sense == Sense::kAtLeast && !row_satisfied(r))
        row_slot_best_[r].assign(inst_.slot_count, 0.0);

    const bool lanes = !lanes_.empty();
    if (lanes) {
      block_e_.assign(blocks_.size(), 0.0);
      block_g_.assign(blocks_.size(), -1.0);
      block_ge_.assign(blocks_.size(), false);
      block_value_.resize(blocks_.size());
      block_is_ge_.resize(blocks_.size());
      block_g_used_.resize(blocks_.size());
    }
    bool any = false;
    for (std::size_t p = pos; p < blocks_.size(); ++p) {
      const auto& b = blocks_[p];
      if (!block_free(b)) continue;
      for (auto v = b.var_begin; v < b.var_end; ++v) {
        if (!can_set(v, false)) continue;
        any = true;
        const auto& var = inst_.variables[v];
        if (lanes) {
          const auto rv = row_of_var_[v];
          const auto* c = rv == kNoRow ? nullptr : &inst_.demand_constraints[rv];
          if (c && c->sense == Sense::kAtMost && cap_bound_valid_)
            block_g_[p] = std::max(block_g_[p], var.objective);
          else
            block_e_[p] = std::max(block_e_[p], var.objective);
          if (c && c->sense == Sense::kAtLeast && !row_satisfied(rv)) block_ge_[p] = true;
        }
        const double obj_d = var.objective / b.area;
        const auto r = row_of_var_[v];
        const bool capped =
            r != kNoRow && inst_.demand_constraints[r].sense == Sense::kAtMost;
        const bool ge_open = r != kNoRow &&
                             inst_.demand_constraints[r].sense == Sense::kAtLeast &&
                             !row_satisfied(r);
        if (ge_open) {
          row_has_var_[r] = true;
          const double rd = var.rate / b.area;
          row_best_density_[r] = std::max(row_best_density_[r], rd);
          row_max_rate_[r] = std::max(row_max_rate_[r], var.rate);
          row_min_area_[r] = std::min(row_min_area_[r], b.area);
          for (auto i : b.slots) {
            usable_ge_[i] = true;
            row_slot_best_[r][i] = std::max(row_slot_best_[r][i], rd);
          }
        }
        if (capped && cap_bound_valid_) {
          for (auto i : b.slots) best_g_[i] = std::max(best_g_[i], obj_d);
        } else {
          for (auto i : b.slots) best_e_[i] = std::max(best_e_[i], obj_d);
        }
      }
    }

    // Open >= rows: reachable at all, and the area they need. A row needs
    // whole blocks, so at least ceil(rem / max_rate) of them, and at least
    // rem / best_density slots.
    double needed_area = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& c = inst_.demand_constraints[r];
      if (c.sense != Sense::kAtLeast || row_satisfied(r)) continue;
      const double rem = c.bound - row_value_[r];
      if (!row_has_var_[r]) return std::nullopt;
      double attainable = 0.0;
      for (double x : row_slot_best_[r]) attainable += x;
      if (attainable < rem - kRateEpsilon) return std::nullopt;
      const double blocks = std::ceil(rem / row_max_rate_[r] - 1e-9);
      needed_area += std::max(rem / row_best_density_[r], blocks * row_min_area_[r]);
    }

    double remaining_cap = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
      if (inst_.demand_constraints[r].sense == Sense::kAtMost) remaining_cap += reachable_cap(r);
    double free_sum = 0.0;
    knapsack_.clear();
    for (SlotIndex i = 0; i < inst_.slot_count; ++i) {
      if (occupied_.test(i)) continue;
      free_sum += best_e_[i];
      if (best_g_[i] > best_e_[i]) knapsack_.push_back({best_g_[i], best_e_[i]});
    }
    // Capped users: fractional knapsack over free slots. Slot i yields
    // g_i - e_i over the uncapped bound and consumes g_i of the summed
    // remaining caps; best gain-per-consumed-cap first.
    double cap_gain = 0.0;
    if (!knapsack_.empty()) {
      double cap_left = remaining_cap;
      std::sort(knapsack_.begin(), knapsack_.end(),
                [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
                  return (a.first - a.second) * b.first > (b.first - b.second) * a.first;
                });
      for (const auto& [g, e] : knapsack_) {
        if (cap_left <= 0.0) break;
        const double take = std::min(1.0, cap_left / g);
        cap_gain += take * (g - e);
        cap_left -= take * g;
      }
    }

    double loss = 0.0;
    const bool charge_area = needed_area > 0.0 && !has_cap_rows_ && ge_zero_objective_;
    if (charge_area) {
      cheapest_.clear();
      for (SlotIndex i = 0; i < inst_.slot_count; ++i)
        if (!occupied_.test(i) && usable_ge_[i]) cheapest_.push_back(best_e_[i]);
      // Slightly shrink the area so float noise never overstates the loss.
      double area = needed_area * (1.0 - 1e-12);
      if (area > static_cast<double>(cheapest_.size()) + 1e-9) return std::nullopt;
      std::sort(cheapest_.begin(), cheapest_.end());
      for (double x : cheapest_) {
        if (area <= 0.0) break;
        const double take = std::min(1.0, area);
        loss += take * x;
        area -= take;
      }
    }
    double ub = objective_ + free_sum + cap_gain - loss;
    if (lanes) {
      ub = std::min(ub, objective_ + lane_bound(0.0, 0.0));
      if (charge_area) {
        // Every lambda >= 0 gives a valid bound; bisect towards the best one.
        double top = 0.0;
        for (std::size_t p = pos; p < blocks_.size(); ++p)
          top = std::max(top, block_e_[p] / blocks_[p].area);
        double lo = 0.0, hi = 2.0 * top, lambda = top;
        for (int step = 0; step < 6 && top > 0.0; ++step) {
          double used = 0.0;
          const double value = lane_bound(lambda, 0.0, &used);
          ub = std::min(ub, objective_ + value - lambda * needed_area);
          if (used < needed_area) lo = lambda; else hi = lambda;
          lambda = 0.5 * (lo + hi);
        }
      }
      if (has_cap_rows_ && cap_bound_valid_) {
        double lo = 0.0, hi = 1.0, mu = 0.5;
        for (int step = 0; step < 6; ++step) {
          double capped = 0.0;
          const double value = lane_bound(0.0, mu, nullptr, &capped);
          ub = std::min(ub, objective_ + value + mu * remaining_cap);
          if (capped > remaining_cap) lo = mu; else hi = mu;
          mu = 0.5 * (lo + hi);
        }
        ub = std::min(ub, objective_ + lane_bound(0.0, 1.0) + remaining_cap);
      }
    }
    return std::pair{ub, any};
  }

  void leaf() {
    for (std::size_t r = 0; r < inst_.demand_constraints.size(); ++r)
      if (inst_.demand_constraints[r].sense == Sense::kAtLeast && !row_satisfied(r))
        return;
    if (!incumbent_ || objective_ > incumbent_value_ + kRateEpsilon) {
      incumbent_ = chosen_;
      incumbent_value_ = objective_;
    }
  }

  void apply(std::size_t v, const BlockInfo& b, int sign) {
    const auto& var = inst_.variables[v];
    for (auto i : b.slots) {
      if (sign > 0)
        occupied_.set(i);
      else
        occupied_.reset(i);
    }
    objective_ += sign * var.objective;
    if (row_of_var_[v] != kNoRow) row_value_[row_of_var_[v]] += sign * var.rate;
    user_blocks_[var.user] += sign;
    if (sign > 0)
      chosen_.push_back(v);
    else
      chosen_.pop_back();
  }

  void search(std::size_t pos) {
    if (aborted_) return;
    if (nodes_ >= options_.node_limit) {
      aborted_ = true;
      return;
    }
    ++nodes_;
    const auto ub = bound(pos);
    if (!ub) return;
    if (incumbent_ && ub->first <= incumbent_value_ + kRateEpsilon) return;
    if (!ub->second) {
      leaf();
      return;
    }
    // Skip ahead to the next block that can take a variable.
    while (pos < blocks_.size()) {
      const auto& b = blocks_[pos];
      if (block_free(b)) {
        bool settable = false;
        for (auto v = b.var_begin; v < b.var_end && !settable; ++v)
          settable = can_set(v);
        if (settable) break;
      }
      ++pos;
    }
    if (pos == blocks_.size()) {
      leaf();
      return;
    }
    const auto& b = blocks_[pos];
    for (auto v = b.var_begin; v < b.var_end; ++v) {
      if (!can_set(v)) continue;
      apply(v, b, +1);
      search(pos + 1);
      apply(v, b, -1);
      if (aborted_) return;
    }
    search(pos + 1);
  }

  const IlpInstance& inst_;
  SolveOptions options_;
  std::vector<BlockInfo> blocks_;
  std::vector<std::size_t> block_pos_of_var_;
  std::vector<std::size_t> row_of_var_;
  std::vector<std::size_t> row_of_user_;
  std::vector<std::size_t> prev_in_class_;
  bool has_cap_rows_ = false;
  bool has_ge_rows_ = false;
  bool cap_bound_valid_ = true;
  bool ge_zero_objective_ = true;

  SlotSet occupied_;
  std::vector<double> row_value_;
  std::vector<int> user_blocks_;
  std::vector<std::size_t> chosen_;
  double objective_ = 0.0;

  std::optional<std::vector<std::size_t>> incumbent_;
  double incumbent_value_ = 0.0;
  std::int64_t nodes_ = 0;
  bool aborted_ = false;

  std::vector<double> best_e_, best_g_, cheapest_;
  std::vector<std::pair<double, double>> knapsack_;
  std::vector<bool> dominated_;
  std::vector<double> row_best_density_, row_max_rate_, row_min_area_;
  std::vector<bool> row_has_var_;
  std::vector<bool> usable_ge_;
  std::vector<std::vector<double>> row_slot_best_;

  struct LaneInterval {
    std::size_t start, end, pos;
    double width;
  };
  std::vector<std::vector<LaneInterval>> lanes_;
  std::vector<std::vector<std::pair<double, std::size_t>>> cap_items_;
  std::vector<std::map<double, double>> cap_memo_;
  std::vector<double> lane_dp_, lane_ge_, lane_g_, block_e_, block_g_, block_g_used_,
      block_value_;
  std::vector<bool> block_ge_, block_is_ge_;
};

}  // namespace detail

inline SolveResult solve_exact(const IlpInstance& instance,
                               const SolveOptions& options) {
  if (options.node_limit <= 0) throw std::invalid_argument("node_limit must be > 0");
  return detail::BranchAndBound(instance, options).run();
}

inline SolveResult solve_exact(const IlpInstance& instance,
                               std::int64_t node_limit = kDefaultNodeLimit) {
  return solve_exact(instance, SolveOptions{node_limit, true});
}

}  // namespace nrsched
