#pragma once

// Binary programs over x_{b,k} for the hard-constraint (P0) and the
// soft-constraint (P1) scheduling formulations, allocation bookkeeping, and
// constraint verification.
//
// P0: maximize the eMBB sum rate; every URLLC user must receive at least q_k;
//     no mini-slot is covered by more than one assigned block.
// P1: maximize the sum rate over all users; every URLLC user receives at
//     most q'_k = q_k + u_k; same overlap rows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nrsched/grid.hpp"
#include "nrsched/rate.hpp"
#include "nrsched/slot_set.hpp"

namespace nrsched {

enum class Formulation { kP0, kP1 };
enum class Sense { kAtLeast, kAtMost };

inline const char* to_string(Formulation f) {
  return f == Formulation::kP0 ? "P0" : "P1";
}

struct Variable {
  BlockId block = 0;
  UserId user = 0;
  double objective = 0.0;  // coefficient in the objective
  double rate = 0.0;       // r_{b,k}; coefficient in the user's demand row
};

// sum_{v in vars} rate_v x_v  (>= | <=)  bound
struct DemandConstraint {
  UserId user = 0;
  Sense sense = Sense::kAtLeast;
  double bound = 0.0;
  std::vector<std::size_t> vars;
};

// sum_{v in vars} x_v <= 1
struct OverlapConstraint {
  SlotIndex slot = 0;
  std::vector<std::size_t> vars;
};

struct IlpInstance {
  Formulation formulation = Formulation::kP0;
  std::size_t slot_count = 0;
  // Slot layout hint: slot = f * time_units + t. 0 when unknown.
  std::size_t time_units = 0;
  std::vector<SlotSet> block_cover;  // indexed by block id
  std::vector<ServiceClass> user_class;  // indexed by user id
  std::vector<Variable> variables;  // sorted by (block, user)
  std::vector<DemandConstraint> demand_constraints;
  std::vector<OverlapConstraint> overlap_constraints;

  std::size_t block_count() const { return block_cover.size(); }
  std::size_t user_count() const { return user_class.size(); }

  std::optional<std::size_t> variable_index(BlockId b, UserId k) const {
    auto it = std::lower_bound(
        variables.begin(), variables.end(), std::pair{b, k},
        [](const Variable& v, const std::pair<BlockId, UserId>& key) {
          return std::pair{v.block, v.user} < key;
        });
    if (it == variables.end() || it->block != b || it->user != k)
      return std::nullopt;
    return static_cast<std::size_t>(it - variables.begin());
  }
};

struct BuildOptions {
  // Drop variables whose rate is zero (masked URLLC pairs, dominated eMBB).
  bool prune_zero_rate = true;
};

namespace detail {

inline IlpInstance build_instance(Formulation formulation, const Grid& grid,
                                  const std::vector<User>& users,
                                  const RateMatrix& rates,
                                  const BuildOptions& options) {
  if (rates.block_count() != grid.block_count() ||
      rates.user_count() != users.size())
    throw std::invalid_argument("rate matrix dimensions do not match grid/users");
  for (std::size_t k = 0; k < users.size(); ++k)
    if (users[k].id != k)
      throw std::invalid_argument("user ids must be dense and ordered");

  IlpInstance inst;
  inst.formulation = formulation;
  inst.slot_count = grid.slot_count();
  inst.time_units = static_cast<std::size_t>(grid.time_units());
  for (const auto& b : grid.blocks()) inst.block_cover.push_back(b.covered);
  for (const auto& u : users) inst.user_class.push_back(u.service_class);

  for (const auto& b : grid.blocks()) {
    for (const auto& u : users) {
      const double r = rates(b.id, u.id);
      if (options.prune_zero_rate && r <= 0.0) continue;
      const bool counted = formulation == Formulation::kP1 || u.is_embb();
      inst.variables.push_back({b.id, u.id, counted ? r : 0.0, r});
    }
  }

  std::vector<std::optional<std::size_t>> row_of(users.size());
  for (const auto& u : users) {
    if (!u.is_urllc()) continue;
    DemandConstraint c;
    c.user = u.id;
    if (formulation == Formulation::kP0) {
      c.sense = Sense::kAtLeast;
      c.bound = u.demand_q_kbps;
    } else {
      c.sense = Sense::kAtMost;
      c.bound = u.capped_demand_kbps();
    }
    row_of[u.id] = inst.demand_constraints.size();
    inst.demand_constraints.push_back(std::move(c));
  }

  inst.overlap_constraints.resize(inst.slot_count);
  for (SlotIndex i = 0; i < inst.slot_count; ++i) inst.overlap_constraints[i].slot = i;
  for (std::size_t v = 0; v < inst.variables.size(); ++v) {
    const auto& var = inst.variables[v];
    if (row_of[var.user]) inst.demand_constraints[*row_of[var.user]].vars.push_back(v);
    for (auto i : inst.block_cover[var.block].indices())
      inst.overlap_constraints[i].vars.push_back(v);
  }
  return inst;
}

}  // namespace detail

inline IlpInstance build_p0(const Grid& grid, const std::vector<User>& users,
                            const RateMatrix& rates, const BuildOptions& options = {}) {
  return detail::build_instance(Formulation::kP0, grid, users, rates, options);
}

// The objective counts every user's rate, URLLC included; with URLLC
// excluded the all-zero URLLC assignment would always be optimal.
inline IlpInstance build_p1(const Grid& grid, const std::vector<User>& users,
                            const RateMatrix& rates, const BuildOptions& options = {}) {
  return detail::build_instance(Formulation::kP1, grid, users, rates, options);
}

struct Assignment {
  BlockId block = 0;
  UserId user = 0;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

struct Allocation {
  std::vector<Assignment> assignments;  // sorted by (block, user)
  double objective_kbps = 0.0;
  std::vector<double> per_user_served_kbps;  // indexed by user id

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

// Builds an allocation whose objective and per-user totals are computed from
// the instance coefficients. Pairs that are not variables count as rate 0.
inline Allocation make_allocation(const IlpInstance& inst,
                                  std::vector<Assignment> assignments) {
  std::sort(assignments.begin(), assignments.end());
  Allocation a;
  a.per_user_served_kbps.assign(inst.user_count(), 0.0);
  for (const auto& as : assignments) {
    if (as.block >= inst.block_count() || as.user >= inst.user_count())
      throw std::out_of_range("assignment references unknown block/user");
    if (auto v = inst.variable_index(as.block, as.user)) {
      a.objective_kbps += inst.variables[*v].objective;
      a.per_user_served_kbps[as.user] += inst.variables[*v].rate;
    }
  }
  a.assignments = std::move(assignments);
  return a;
}

struct Violation {
  enum class Kind { kOverlap, kDemand, kCap, kInconsistent };
  Kind kind = Kind::kOverlap;
  std::string constraint;
  double margin = 0.0;  // amount by which the constraint is violated
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::kOverlap: return "overlap";
    case Violation::Kind::kDemand: return "demand";
    case Violation::Kind::kCap: return "cap";
    case Violation::Kind::kInconsistent: return "inconsistent";
  }
  return "?";
}

// Checks overlap rows, demand/cap rows (within kRateEpsilon) and that the
// allocation's recorded totals match its assignments. Empty result means
// feasible.
inline std::vector<Violation> verify_allocation(const IlpInstance& inst,
                                                const Allocation& alloc) {
  std::vector<Violation> out;
  std::vector<int> use(inst.slot_count, 0);
  std::vector<double> served(inst.user_count(), 0.0);
  double objective = 0.0;
  for (const auto& as : alloc.assignments) {
    if (as.block >= inst.block_count())
      throw std::out_of_range("allocation references unknown block " +
                              std::to_string(as.block));
    if (as.user >= inst.user_count())
      throw std::out_of_range("allocation references unknown user " +
                              std::to_string(as.user));
    for (auto i : inst.block_cover[as.block].indices()) ++use[i];
    if (auto v = inst.variable_index(as.block, as.user)) {
      served[as.user] += inst.variables[*v].rate;
      objective += inst.variables[*v].objective;
    }
  }
  for (SlotIndex i = 0; i < inst.slot_count; ++i)
    if (use[i] > 1)
      out.push_back({Violation::Kind::kOverlap, "slot_" + std::to_string(i),
                     static_cast<double>(use[i] - 1)});

  for (const auto& c : inst.demand_constraints) {
    const double s = served[c.user];
    if (c.sense == Sense::kAtLeast && s < c.bound - kRateEpsilon)
      out.push_back({Violation::Kind::kDemand, "demand_u" + std::to_string(c.user),
                     c.bound - s});
    if (c.sense == Sense::kAtMost && s > c.bound + kRateEpsilon)
      out.push_back({Violation::Kind::kCap, "cap_u" + std::to_string(c.user),
                     s - c.bound});
  }

  auto tol = [](double x) { return kRateEpsilon * std::max(1.0, std::abs(x)); };
  if (std::abs(objective - alloc.objective_kbps) > tol(objective))
    out.push_back({Violation::Kind::kInconsistent, "objective",
                   std::abs(objective - alloc.objective_kbps)});
  if (alloc.per_user_served_kbps.size() != inst.user_count()) {
    out.push_back({Violation::Kind::kInconsistent, "per_user_served", 0.0});
  } else {
    for (UserId k = 0; k < inst.user_count(); ++k)
      if (std::abs(served[k] - alloc.per_user_served_kbps[k]) > tol(served[k]))
        out.push_back({Violation::Kind::kInconsistent, "served_u" + std::to_string(k),
                       std::abs(served[k] - alloc.per_user_served_kbps[k])});
  }
  return out;
}

namespace detail {

inline std::string lp_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string lp_var(const Variable& v) {
  return "x_b" + std::to_string(v.block) + "_u" + std::to_string(v.user);
}

inline void lp_terms(std::ostream& os, const IlpInstance& inst,
                     const std::vector<std::size_t>& vars, bool unit_coeffs,
                     bool use_objective) {
  int on_line = 0;
  for (auto v : vars) {
    const auto& var = inst.variables[v];
    const double c = unit_coeffs ? 1.0 : (use_objective ? var.objective : var.rate);
    if (on_line == 8) {
      os << "\n   ";
      on_line = 0;
    }
    os << " + " << lp_number(c) << ' ' << lp_var(var);
    ++on_line;
  }
}

}  // namespace detail

// CPLEX-style LP text; layout documented in docs/lp_format.md.
inline void write_lp(std::ostream& os, const IlpInstance& inst) {
  os << "\\ nrsched " << to_string(inst.formulation) << " blocks="
     << inst.block_count() << " users=" << inst.user_count()
     << " slots=" << inst.slot_count << " vars=" << inst.variables.size() << '\n';
  os << "Maximize\n obj:";
  std::vector<std::size_t> obj_vars;
  for (std::size_t v = 0; v < inst.variables.size(); ++v)
    if (inst.variables[v].objective != 0.0) obj_vars.push_back(v);
  if (obj_vars.empty())
    os << " 0";
  else
    detail::lp_terms(os, inst, obj_vars, false, true);
  os << "\nSubject To\n";
  for (const auto& c : inst.demand_constraints) {
    const char* op = c.sense == Sense::kAtLeast ? ">=" : "<=";
    const std::string name = (c.sense == Sense::kAtLeast ? "demand_u" : "cap_u") +
                             std::to_string(c.user);
    if (c.vars.empty()) {
      os << "\\ " << name << ": empty row, 0 " << op << ' '
         << detail::lp_number(c.bound) << '\n';
      continue;
    }
    os << ' ' << name << ':';
    detail::lp_terms(os, inst, c.vars, false, false);
    os << ' ' << op << ' ' << detail::lp_number(c.bound) << '\n';
  }
  for (const auto& c : inst.overlap_constraints) {
    if (c.vars.empty()) continue;
    os << " slot_" << c.slot << ':';
    detail::lp_terms(os, inst, c.vars, true, false);
    os << " <= 1\n";
  }
  os << "Binary\n";
  for (const auto& v : inst.variables) os << ' ' << detail::lp_var(v) << '\n';
  os << "End\n";
}

}  // namespace nrsched
