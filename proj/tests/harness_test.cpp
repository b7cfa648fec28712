#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nrsched/harness/output.hpp"
#include "nrsched/harness/run.hpp"
#include "nrsched/harness/scenario.hpp"
#include "nrsched/harness/sweep.hpp"

using namespace nrsched;
using namespace nrsched::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = NRSCHED_CONFIG_DIR;

json small_scenario() {
  return json::parse(R"({
    "grid": {"freq_units": 2, "time_units": 4, "mu_max": 1, "base_freq_hz": 180000,
             "base_time_ms": 0.5, "numerologies": [{"mu": 0}, {"mu": 1}]},
    "rate_model": {"frame_duration_ms": 1.0},
    "users": [
      {"id": 0, "class": "urllc", "spectral_efficiency": 1.0, "demand_kbps": 64,
       "latency_ms": 1.0, "slack_kbps": 32},
      {"id": 1, "class": "embb", "spectral_efficiency": 1.0}
    ],
    "methods": ["p0", "p1", "heuristic"]
  })");
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("nrsched_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Scenario, ParsesInlineUsers) {
  auto s = parse_scenario(small_scenario());
  EXPECT_EQ(s.users.size(), 2u);
  EXPECT_TRUE(s.users[0].is_urllc());
  EXPECT_DOUBLE_EQ(*s.users[0].latency_tau_ms, 1.0);
  EXPECT_DOUBLE_EQ(s.grid.base_time_s, 0.5e-3);
  EXPECT_EQ(s.methods.size(), 3u);
}

TEST(Scenario, RejectsUnknownAndMissingFields) {
  auto j = small_scenario();
  j["colour"] = "red";
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j["users"][1]["demand_kbps"] = 5;
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j["users"][0].erase("latency_ms");
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j.erase("grid");
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j["methods"] = {"p2"};
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j["grid"]["freq_units"] = 0;
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j["grid"]["freq_units"] = "two";
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j = small_scenario();
  j["generate"] = json::object();
  EXPECT_THROW(parse_scenario(j), ConfigError);
}

TEST(Scenario, LoadErrorsNameTheFile) {
  try {
    load_scenario(kConfigs / "does_not_exist.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("does_not_exist.json"), std::string::npos);
  }
}

TEST(Scenario, AllPresetsLoad) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kConfigs / "scenarios")) {
    SCOPED_TRACE(e.path().string());
    EXPECT_NO_THROW(load_scenario(e.path()));
    ++n;
  }
  EXPECT_GE(n, 3);
}

TEST(Scenario, GenerateIsSeeded) {
  auto a = load_scenario(kConfigs / "scenarios" / "small_random.json");
  auto b = load_scenario(kConfigs / "scenarios" / "small_random.json");
  ASSERT_EQ(a.users.size(), 4u);
  for (std::size_t i = 0; i < a.users.size(); ++i)
    EXPECT_EQ(a.users[i].spectral_efficiency, b.users[i].spectral_efficiency);
  auto j = read_json_file(kConfigs / "scenarios" / "small_random.json");
  j["seed"] = 43;
  auto c = parse_scenario(j);
  bool differs = false;
  for (std::size_t i = 0; i < a.users.size(); ++i)
    differs |= a.users[i].spectral_efficiency != c.users[i].spectral_efficiency;
  EXPECT_TRUE(differs);
  for (const auto& u : a.users) {
    EXPECT_GE(u.spectral_efficiency, u.is_urllc() ? 1.5 : 1.0);
    EXPECT_LT(u.spectral_efficiency, u.is_urllc() ? 3.5 : 3.0);
  }
}

TEST(RunScenario, P1OnlyOneRowNeverInfeasible) {
  auto j = small_scenario();
  j["methods"] = {"p1"};
  j["users"][0]["demand_kbps"] = 1e6;
  auto rows = run_scenario(parse_scenario(j));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, RunStatus::kOptimal);
}

TEST(RunScenario, MaskedUrllcMakesP0Infeasible) {
  auto j = small_scenario();
  j["methods"] = {"p0"};
  j["users"][0]["latency_ms"] = 0.1;
  auto rows = run_scenario(parse_scenario(j));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, RunStatus::kInfeasible);
  EXPECT_FALSE(rows[0].embb_sum_kbps);
  EXPECT_FALSE(rows[0].urllc_coverage);
  EXPECT_FALSE(rows[0].fully_covered);
  EXPECT_TRUE(rows[0].nodes);
}

TEST(RunScenario, HeuristicDominatedByP0) {
  auto rows = run_scenario(parse_scenario(small_scenario()));
  ASSERT_EQ(rows.size(), 3u);
  ASSERT_EQ(rows[0].status, RunStatus::kOptimal);
  EXPECT_EQ(*rows[0].urllc_coverage, 1.0);
  EXPECT_EQ(rows[2].status, RunStatus::kBestEffort);
  EXPECT_LE(*rows[2].embb_sum_kbps, *rows[0].embb_sum_kbps);
  EXPECT_FALSE(rows[2].nodes);
}

TEST(Sweep, DefaultGridHeuristicOnly) {
  SweepSpec spec;
  spec.base = load_scenario(kConfigs / "scenarios" / "desk_preset.json");
  spec.base.methods = {Method::kHeuristic};
  auto rows = sweep(spec);
  EXPECT_EQ(rows.size(), 35u);
  for (const auto& r : rows) EXPECT_FALSE(r.wall_time_s);
  auto dir = temp_dir("plot35");
  EXPECT_EQ(emit_plot_data(rows, dir).size(), 7u);
}

TEST(Sweep, SingleCellAllMethods) {
  SweepSpec spec;
  spec.base = parse_scenario(small_scenario());
  spec.latency_ms = {2.0};
  spec.demand_kbps = {64};
  auto rows = sweep(spec);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, Method::kHeuristic);
  EXPECT_EQ(rows[1].method, Method::kP0);
  EXPECT_EQ(rows[2].method, Method::kP1);
  for (const auto& r : rows) {
    EXPECT_EQ(*r.demand_kbps, 64.0);
    EXPECT_EQ(*r.latency_ms, 2.0);
  }
}

TEST(Sweep, MissingSlackIsAnError) {
  SweepSpec spec;
  spec.base = parse_scenario(small_scenario());
  spec.demand_kbps = {100};
  EXPECT_THROW(sweep(spec), ConfigError);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  SweepSpec spec;
  spec.base = load_scenario(kConfigs / "scenarios" / "small_random.json");
  spec.latency_ms = {0.5, 1.0, 2.0};
  spec.demand_kbps = {64, 256};
  auto a = sweep(spec);
  spec.threads = 3;
  auto b = sweep(spec);
  EXPECT_EQ(a, b);
}

TEST(Sweep, SpecFileParses) {
  auto spec = load_sweep_spec(kConfigs / "sweeps" / "default.json");
  EXPECT_EQ(spec.latency_ms.size(), 5u);
  EXPECT_EQ(spec.demand_kbps.size(), 7u);
  EXPECT_EQ(spec.slack_kbps, default_slack_table());
  EXPECT_EQ(spec.base.methods.size(), 3u);

  auto j = read_json_file(kConfigs / "sweeps" / "default.json");
  j["slack_table"]["units"] = "bps";
  EXPECT_THROW(parse_sweep_spec(j, kConfigs / "sweeps"), ConfigError);
}

TEST(SlackTable, PresetValues) {
  const auto t = default_slack_table();
  EXPECT_EQ(t.size(), 35u);
  EXPECT_EQ(t.at({64, 0.5}), 116);
  EXPECT_EQ(t.at({16, 1.0}), 136);
  EXPECT_EQ(t.at({128, 2.0}), 96);
  EXPECT_EQ(t.at({256, 1.0}), 244);
  EXPECT_EQ(t.at({256, 1.5}), 124);
  EXPECT_EQ(t.at({512, 1.5}), 158);
  EXPECT_EQ(t.at({512, 2.0}), 138);
  EXPECT_EQ(t.at({1024, 0.25}), 176);
}

TEST(Csv, OneRowTwoLines) {
  Metrics m;
  m.demand_kbps = 64;
  m.latency_ms = 0.5;
  m.method = Method::kP0;
  m.status = RunStatus::kOptimal;
  m.embb_sum_kbps = 1234.5;
  m.urllc_coverage = 1.0;
  m.fully_covered = 5;
  m.nodes = 17;
  std::ostringstream os;
  write_csv(os, {m});
  EXPECT_EQ(os.str(), std::string(kCsvHeader) +
                          "\n64.000000,0.500000,p0,Optimal,1234.500000,1.000000,5,,17\n");
}

TEST(Csv, InfeasibleCellsAreEmpty) {
  Metrics m;
  m.demand_kbps = 1024;
  m.latency_ms = 0.25;
  m.method = Method::kP0;
  m.status = RunStatus::kInfeasible;
  m.nodes = 3;
  std::ostringstream os;
  write_csv(os, {m});
  EXPECT_NE(os.str().find("\n1024.000000,0.250000,p0,Infeasible,,,,,3\n"), std::string::npos);
}

TEST(Csv, RoundTripAndDeterminism) {
  SweepSpec spec;
  spec.base = parse_scenario(small_scenario());
  spec.latency_ms = {0.5, 1.0};
  spec.demand_kbps = {64, 1024};
  auto rows = sweep(spec);
  std::ostringstream a, b;
  write_csv(a, rows);
  write_csv(b, sweep(spec));
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  auto back = parse_csv(in);
  std::ostringstream c;
  write_csv(c, back);
  EXPECT_EQ(a.str(), c.str());
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_EQ(back[i].nodes, rows[i].nodes);
    EXPECT_EQ(back[i].embb_sum_kbps.has_value(), rows[i].embb_sum_kbps.has_value());
  }
}

TEST(Csv, RejectsMalformed) {
  std::istringstream bad_header("a,b,c\n");
  EXPECT_THROW(parse_csv(bad_header), std::invalid_argument);
  std::istringstream bad_row(std::string(kCsvHeader) + "\n1,2,p0\n");
  EXPECT_THROW(parse_csv(bad_row), std::invalid_argument);
  std::istringstream bad_num(std::string(kCsvHeader) + "\nx,2,p0,Optimal,,,,,\n");
  EXPECT_THROW(parse_csv(bad_num), std::invalid_argument);
}

TEST(PlotData, InfeasiblePointIsAGap) {
  std::vector<Metrics> rows;
  for (double l : {0.25, 0.5}) {
    Metrics m;
    m.demand_kbps = 1024;
    m.latency_ms = l;
    m.method = Method::kP0;
    m.status = l < 0.3 ? RunStatus::kInfeasible : RunStatus::kOptimal;
    if (l > 0.3) m.embb_sum_kbps = 100;
    rows.push_back(m);
  }
  auto dir = temp_dir("gap");
  auto files = emit_plot_data(rows, dir);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].filename(), "embb_q1024.dat");
  EXPECT_EQ(slurp(files[0]),
            "# demand_kbps 1024.000000\n# columns: latency_ms embb_sum_kbps\n"
            "# method p0\n0.500000 100.000000\n");
}

// With URLLC blocks small enough to fit under the cap and worth more than an
// eMBB block, P0 and P1 hand the same number of blocks to eMBB.
TEST(Compare, P0AndP1CoincideAtLooseCell) {
  auto s = load_scenario(kConfigs / "scenarios" / "fine_blocks.json");
  auto rows = run_scenario(s);
  ASSERT_EQ(rows.size(), 3u);
  ASSERT_EQ(rows[0].status, RunStatus::kOptimal);
  ASSERT_EQ(rows[1].status, RunStatus::kOptimal);
  EXPECT_NEAR(*rows[0].embb_sum_kbps, *rows[1].embb_sum_kbps, 1e-6 * *rows[0].embb_sum_kbps);
  EXPECT_EQ(*rows[1].urllc_coverage, 1.0);
}
