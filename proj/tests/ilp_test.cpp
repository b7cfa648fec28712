#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nrsched/ilp.hpp"
#include "nrsched/solver.hpp"
#include "oracle.hpp"

using namespace nrsched;

namespace {

// F=2, T=2, mu_max=1: two 1x2 blocks (ids 0,1) and two 2x1 blocks (ids 2,3).
Grid four_block_grid() {
  GridConfig c;
  c.freq_units = 2;
  c.time_units = 2;
  c.mu_max = 1;
  c.base_time_s = 0.5e-3;
  c.numerologies = {{0, 0.0}, {1, 0.0}};
  return build_grid(c);
}

User embb(UserId id) {
  User u;
  u.id = id;
  return u;
}

User urllc(UserId id, double q, double slack = 0.0, double tau = 1.0) {
  User u;
  u.id = id;
  u.service_class = ServiceClass::kUrllc;
  u.demand_q_kbps = q;
  u.slack_u_kbps = slack;
  u.latency_tau_ms = tau;
  return u;
}

RateMatrix uniform_rates(std::size_t blocks, std::size_t users, double r) {
  return RateMatrix::from_entries(blocks, users, std::vector<double>(blocks * users, r));
}

}  // namespace

TEST(Build, OneEmbbUserCounts) {
  auto g = four_block_grid();
  auto inst = build_p0(g, {embb(0)}, uniform_rates(4, 1, 10.0));
  EXPECT_EQ(inst.variables.size(), 4u);
  EXPECT_EQ(inst.demand_constraints.size(), 0u);
  EXPECT_EQ(inst.overlap_constraints.size(), 4u);
  for (const auto& c : inst.overlap_constraints) EXPECT_EQ(c.vars.size(), 2u);
}

TEST(Build, MaskedUrllcGivesEmptyRow) {
  auto g = four_block_grid();
  auto rates = uniform_rates(4, 2, 10.0);
  for (BlockId b = 0; b < 4; ++b) rates.set(b, 1, 0.0);
  auto inst = build_p0(g, {embb(0), urllc(1, 50.0)}, rates);
  ASSERT_EQ(inst.demand_constraints.size(), 1u);
  EXPECT_TRUE(inst.demand_constraints[0].vars.empty());
  EXPECT_EQ(solve_exact(inst).status, SolveStatus::kInfeasible);

  BuildOptions keep;
  keep.prune_zero_rate = false;
  auto full = build_p0(g, {embb(0), urllc(1, 50.0)}, rates, keep);
  EXPECT_EQ(full.variables.size(), 8u);
  EXPECT_EQ(solve_exact(full).status, SolveStatus::kInfeasible);
}

TEST(Build, TwoUsersCounts) {
  auto g = four_block_grid();
  auto inst = build_p0(g, {embb(0), urllc(1, 5.0)}, uniform_rates(4, 2, 10.0));
  EXPECT_EQ(inst.variables.size(), 8u);
  ASSERT_EQ(inst.demand_constraints.size(), 1u);
  EXPECT_EQ(inst.demand_constraints[0].sense, Sense::kAtLeast);
  EXPECT_EQ(inst.demand_constraints[0].vars.size(), 4u);
  EXPECT_EQ(inst.overlap_constraints.size(), 4u);
  for (const auto& v : inst.variables)
    EXPECT_EQ(v.objective, v.user == 0 ? v.rate : 0.0);
}

TEST(Build, P1CapsAndObjective) {
  auto g = four_block_grid();
  auto inst = build_p1(g, {embb(0), urllc(1, 5.0, 3.0)}, uniform_rates(4, 2, 10.0));
  ASSERT_EQ(inst.demand_constraints.size(), 1u);
  EXPECT_EQ(inst.demand_constraints[0].sense, Sense::kAtMost);
  EXPECT_DOUBLE_EQ(inst.demand_constraints[0].bound, 8.0);
  for (const auto& v : inst.variables) EXPECT_EQ(v.objective, v.rate);
}

TEST(Build, DimensionMismatchThrows) {
  auto g = four_block_grid();
  EXPECT_THROW(build_p0(g, {embb(0)}, uniform_rates(3, 1, 1.0)), std::invalid_argument);
  EXPECT_THROW(build_p0(g, {embb(1)}, uniform_rates(4, 1, 1.0)), std::invalid_argument);
}

TEST(P1, AllZeroIsFeasible) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto c = oracle::random_case(rng, 12, 3);
    auto inst = build_p1(c.grid, c.users, c.rates);
    auto empty = make_allocation(inst, {});
    EXPECT_TRUE(verify_allocation(inst, empty).empty());
  }
}

TEST(P1, CapBoundaryAdmitted) {
  GridConfig c;
  c.freq_units = c.time_units = 1;
  c.numerologies = {{0, 0.0}};
  auto g = build_grid(c);
  auto inst = build_p1(g, {urllc(0, 64.0)}, uniform_rates(1, 1, 64.0));
  auto a = make_allocation(inst, {{0, 0}});
  EXPECT_TRUE(verify_allocation(inst, a).empty());
  auto r = solve_exact(inst);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_EQ(r.allocation->assignments.size(), 1u);
}

TEST(Verify, OverlapNamesSharedSlot) {
  auto g = four_block_grid();
  auto inst = build_p0(g, {embb(0)}, uniform_rates(4, 1, 10.0));
  // block 0 covers slots {0,1}, block 2 covers {0,2}
  auto a = make_allocation(inst, {{0, 0}, {2, 0}});
  auto v = verify_allocation(inst, a);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kOverlap);
  EXPECT_EQ(v[0].constraint, "slot_0");
}

TEST(Verify, DemandMargin) {
  auto g = four_block_grid();
  auto inst = build_p0(g, {urllc(0, 64.0)}, uniform_rates(4, 1, 40.0));
  auto a = make_allocation(inst, {{0, 0}});
  auto v = verify_allocation(inst, a);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kDemand);
  EXPECT_EQ(v[0].constraint, "demand_u0");
  EXPECT_DOUBLE_EQ(v[0].margin, 24.0);
}

TEST(Verify, CapAndInconsistency) {
  auto g = four_block_grid();
  auto inst = build_p1(g, {urllc(0, 10.0, 5.0)}, uniform_rates(4, 1, 10.0));
  auto a = make_allocation(inst, {{0, 0}, {1, 0}});
  auto v = verify_allocation(inst, a);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kCap);
  EXPECT_DOUBLE_EQ(v[0].margin, 5.0);

  auto b = make_allocation(inst, {{0, 0}});
  b.objective_kbps += 1.0;
  v = verify_allocation(inst, b);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kInconsistent);

  auto bad = make_allocation(inst, {});
  bad.assignments.push_back({9, 0});
  EXPECT_THROW(verify_allocation(inst, bad), std::out_of_range);
}

TEST(Verify, EmptyP1AllocationClean) {
  auto g = four_block_grid();
  auto inst = build_p1(g, {embb(0), urllc(1, 10.0)}, uniform_rates(4, 2, 10.0));
  EXPECT_TRUE(verify_allocation(inst, make_allocation(inst, {})).empty());
}

TEST(WriteLp, Layout) {
  auto g = four_block_grid();
  auto rates = uniform_rates(4, 2, 10.0);
  rates.set(3, 1, 0.0);
  auto inst = build_p0(g, {embb(0), urllc(1, 15.0)}, rates);
  std::ostringstream os;
  write_lp(os, inst);
  const std::string lp = os.str();
  EXPECT_EQ(lp.rfind("\\ nrsched P0 blocks=4 users=2 slots=4 vars=7\n", 0), 0u);
  EXPECT_NE(lp.find("Maximize\n obj: + 10 x_b0_u0 + 10 x_b1_u0 + 10 x_b2_u0 + 10 x_b3_u0\n"),
            std::string::npos);
  EXPECT_NE(lp.find(" demand_u1: + 10 x_b0_u1 + 10 x_b1_u1 + 10 x_b2_u1 >= 15\n"),
            std::string::npos);
  EXPECT_NE(lp.find(" slot_0: + 1 x_b0_u0 + 1 x_b0_u1 + 1 x_b2_u0 + 1 x_b2_u1 <= 1\n"),
            std::string::npos);
  EXPECT_NE(lp.find("Binary\n x_b0_u0\n"), std::string::npos);
  EXPECT_EQ(lp.substr(lp.size() - 4), "End\n");

  auto p1 = build_p1(g, {embb(0), urllc(1, 15.0, 5.0)}, rates);
  std::ostringstream os1;
  write_lp(os1, p1);
  EXPECT_NE(os1.str().find(" cap_u1: + 10 x_b0_u1 + 10 x_b1_u1 + 10 x_b2_u1 <= 20\n"),
            std::string::npos);
}

TEST(WriteLp, EmptyRowIsComment) {
  auto g = four_block_grid();
  auto inst = build_p0(g, {urllc(0, 15.0)}, uniform_rates(4, 1, 0.0));
  std::ostringstream os;
  write_lp(os, inst);
  EXPECT_NE(os.str().find("\\ demand_u0: empty row, 0 >= 15\n"), std::string::npos);
  EXPECT_NE(os.str().find(" obj: 0\n"), std::string::npos);
}

// Dropping zero-rate variables never changes the optimum.
TEST(Build, PruningPreservesOptimum) {
  std::mt19937_64 rng(11);
  BuildOptions keep;
  keep.prune_zero_rate = false;
  for (int i = 0; i < 100; ++i) {
    auto c = oracle::random_case(rng, 8, 3);
    for (bool p1 : {false, true}) {
      auto pruned = p1 ? build_p1(c.grid, c.users, c.rates) : build_p0(c.grid, c.users, c.rates);
      auto full = p1 ? build_p1(c.grid, c.users, c.rates, keep)
                     : build_p0(c.grid, c.users, c.rates, keep);
      auto a = oracle::brute_force(pruned), b = oracle::brute_force(full);
      EXPECT_EQ(a.best, b.best) << "case " << i << (p1 ? " P1" : " P0");
    }
  }
}
