#include <gtest/gtest.h>

#include <random>

#include "nrsched/solver.hpp"
#include "oracle.hpp"

using namespace nrsched;

namespace {

// One frequency row of `n` 1x1 blocks, or `n` copies of the same slot.
IlpInstance single_user(std::vector<double> rates, bool overlapping) {
  IlpInstance inst;
  inst.slot_count = overlapping ? 1 : rates.size();
  inst.user_class = {ServiceClass::kEmbb};
  for (std::size_t b = 0; b < rates.size(); ++b) {
    SlotSet s(inst.slot_count);
    s.set(overlapping ? 0 : b);
    inst.block_cover.push_back(s);
    inst.variables.push_back({b, 0, rates[b], rates[b]});
  }
  inst.overlap_constraints.resize(inst.slot_count);
  for (std::size_t i = 0; i < inst.slot_count; ++i) inst.overlap_constraints[i].slot = i;
  for (std::size_t v = 0; v < inst.variables.size(); ++v)
    for (auto i : inst.block_cover[v].indices()) inst.overlap_constraints[i].vars.push_back(v);
  return inst;
}

}  // namespace

TEST(SolveExact, DisjointTakesAll) {
  auto r = solve_exact(single_user({10, 20}, false));
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_DOUBLE_EQ(r.allocation->objective_kbps, 30.0);
  EXPECT_EQ(r.allocation->assignments.size(), 2u);
}

TEST(SolveExact, OverlapPicksBetter) {
  auto r = solve_exact(single_user({10, 20}, true));
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_DOUBLE_EQ(r.allocation->objective_kbps, 20.0);
  ASSERT_EQ(r.allocation->assignments.size(), 1u);
  EXPECT_EQ(r.allocation->assignments[0].block, 1u);
}

TEST(SolveExact, DemandAboveCapacityInfeasible) {
  auto inst = single_user({20, 30}, false);
  inst.user_class = {ServiceClass::kUrllc};
  for (auto& v : inst.variables) v.objective = 0.0;
  inst.demand_constraints.push_back({0, Sense::kAtLeast, 100.0, {0, 1}});
  auto r = solve_exact(inst);
  EXPECT_EQ(r.status, SolveStatus::kInfeasible);
  EXPECT_FALSE(r.allocation);
}

TEST(SolveExact, EmptyInstance) {
  IlpInstance inst;
  auto r = solve_exact(inst);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_TRUE(r.allocation->assignments.empty());
}

TEST(SolveExact, NodeLimitMustBePositive) {
  auto inst = single_user({1}, false);
  EXPECT_THROW(solve_exact(inst, 0), std::invalid_argument);
  EXPECT_THROW(solve_exact(inst, -5), std::invalid_argument);
}

TEST(SolveExact, NodeLimitReturnsIncumbent) {
  std::vector<double> rates;
  for (int i = 0; i < 30; ++i) rates.push_back(1 + (i * 7) % 11);
  auto r = solve_exact(single_user(rates, true), 1);
  EXPECT_EQ(r.status, SolveStatus::kNodeLimit);
  EXPECT_LE(r.nodes_explored, 2);
}

TEST(SolveExact, UnsortedVariablesRejected) {
  auto inst = single_user({1, 2}, false);
  std::swap(inst.variables[0], inst.variables[1]);
  EXPECT_THROW(solve_exact(inst), std::invalid_argument);
}

// Optimal objective and feasibility agree with exhaustive enumeration, with
// and without symmetry reduction and the lane bound.
TEST(SolveExact, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto c = oracle::random_case(rng, 12, 3);
    for (bool p1 : {false, true}) {
      auto inst = p1 ? build_p1(c.grid, c.users, c.rates) : build_p0(c.grid, c.users, c.rates);
      const auto expect = oracle::brute_force(inst);
      for (int variant = 0; variant < 3; ++variant) {
        auto copy = inst;
        SolveOptions opt;
        opt.break_symmetry = variant != 1;
        if (variant == 2) copy.time_units = 0;
        auto r = solve_exact(copy, opt);
        SCOPED_TRACE(testing::Message() << "case " << i << (p1 ? " P1" : " P0") << " variant "
                                        << variant);
        ASSERT_NE(r.status, SolveStatus::kNodeLimit);
        if (!expect.best) {
          EXPECT_EQ(r.status, SolveStatus::kInfeasible);
          continue;
        }
        ASSERT_EQ(r.status, SolveStatus::kOptimal);
        EXPECT_EQ(r.allocation->objective_kbps, *expect.best);
        EXPECT_TRUE(verify_allocation(inst, *r.allocation).empty());
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 600);
}

TEST(SolveExact, P1NeverInfeasible) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    auto c = oracle::random_case(rng, 16, 4);
    auto r = solve_exact(build_p1(c.grid, c.users, c.rates));
    EXPECT_EQ(r.status, SolveStatus::kOptimal) << i;
  }
}

TEST(SolveExact, Deterministic) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    auto c = oracle::random_case(rng, 12, 3);
    auto inst = build_p0(c.grid, c.users, c.rates);
    auto a = solve_exact(inst), b = solve_exact(inst);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.allocation, b.allocation);
    EXPECT_EQ(a.nodes_explored, b.nodes_explored);
  }
}

TEST(SolveExact, RowsMustNameDistinctUsers) {
  auto inst = single_user({10, 20}, false);
  inst.user_class = {ServiceClass::kUrllc};
  inst.demand_constraints.push_back({0, Sense::kAtMost, 15.0, {0, 1}});
  inst.demand_constraints.push_back({0, Sense::kAtMost, 15.0, {0, 1}});
  EXPECT_THROW(solve_exact(inst), std::invalid_argument);
}
