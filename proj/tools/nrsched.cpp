// nrsched: solve, sweep, validate and compare URLLC/eMBB scheduling scenarios.
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 internal verification
// failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nrsched/harness/output.hpp"
#include "nrsched/harness/run.hpp"
#include "nrsched/harness/scenario.hpp"
#include "nrsched/harness/sweep.hpp"
#include "nrsched/ilp.hpp"

namespace fs = std::filesystem;
using namespace nrsched;
using namespace nrsched::harness;

namespace {

std::string show(const std::optional<double>& v, const char* fmt = "%.3f") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

void print_table(const std::vector<Metrics>& rows) {
  std::printf("%-10s %-11s %14s %9s %6s %10s %10s\n", "method", "status", "embb_kbps",
              "coverage", "fully", "nodes", "time_s");
  for (const auto& m : rows) {
    std::printf("%-10s %-11s %14s %9s %6s %10s %10s\n", to_string(m.method),
                to_string(m.status), show(m.embb_sum_kbps).c_str(),
                show(m.urllc_coverage, "%.4f").c_str(),
                m.fully_covered ? std::to_string(*m.fully_covered).c_str() : "-",
                m.nodes ? std::to_string(*m.nodes).c_str() : "-",
                show(m.wall_time_s, "%.3f").c_str());
  }
}

// Uniform URLLC demand/latency of a scenario, used to label CSV rows.
void label(Metrics& m, const Scenario& s) {
  std::optional<double> q, tau;
  bool uniform = true;
  for (const auto& u : s.users) {
    if (!u.is_urllc()) continue;
    if (!q) {
      q = u.demand_q_kbps;
      tau = u.latency_tau_ms;
    } else if (*q != u.demand_q_kbps || tau != u.latency_tau_ms) {
      uniform = false;
    }
  }
  if (uniform) {
    m.demand_kbps = q;
    m.latency_ms = tau;
  }
}

int cmd_solve(const fs::path& scenario_path, const std::string& method_name,
              const std::optional<fs::path>& out, std::optional<long long> node_limit,
              const std::optional<fs::path>& dump_lp) {
  auto s = load_scenario(scenario_path);
  const Method method = parse_method(method_name);
  if (node_limit) {
    if (*node_limit <= 0) throw ConfigError("--node-limit must be > 0");
    s.node_limit = *node_limit;
  }
  const auto p = prepare(s);
  if (dump_lp) {
    if (method == Method::kHeuristic) throw ConfigError("--dump-lp needs p0 or p1");
    std::ofstream lp(*dump_lp, std::ios::binary);
    if (!lp) throw OutputError("cannot write " + dump_lp->string());
    write_lp(lp, method == Method::kP0 ? build_p0(p.grid, p.users, p.rates)
                                       : build_p1(p.grid, p.users, p.rates));
  }
  auto outcome = run_method(p, method, s.node_limit);
  label(outcome.metrics, s);
  print_table({outcome.metrics});
  if (outcome.allocation) {
    std::printf("\nassignments (block mu f0 t0 -> user, kbps):\n");
    for (const auto& a : outcome.allocation->assignments) {
      const auto& b = p.grid.block(a.block);
      std::printf("  %4zu mu=%d f0=%-3d t0=%-3d -> %zu (%s) %.3f\n", a.block, b.numerology_mu,
                  b.f0, b.t0, a.user, nrsched::to_string(p.users[a.user].service_class),
                  p.rates(a.block, a.user));
    }
  }
  if (out) emit_csv({outcome.metrics}, *out);
  return 0;
}

int cmd_sweep(const fs::path& spec_path, const fs::path& out_dir,
              std::optional<unsigned> threads) {
  auto spec = load_sweep_spec(spec_path);
  if (threads) {
    if (*threads == 0) throw ConfigError("--threads must be >= 1");
    spec.threads = *threads;
  }
  const auto rows = sweep(spec);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create " + out_dir.string() + ": " + ec.message());
  emit_csv(rows, out_dir / "sweep.csv");
  const auto files = emit_plot_data(rows, out_dir / "plot");
  std::printf("%zu rows -> %s, %zu plot files -> %s\n", rows.size(),
              (out_dir / "sweep.csv").string().c_str(), files.size(),
              (out_dir / "plot").string().c_str());
  return 0;
}

int cmd_validate(const fs::path& scenario_path) {
  const auto s = load_scenario(scenario_path);
  const auto p = prepare(s);
  const auto p0 = build_p0(p.grid, p.users, p.rates);
  std::size_t urllc = 0;
  for (const auto& u : p.users) urllc += u.is_urllc();
  std::printf("ok: grid %dx%d mu_max=%d, %zu blocks (area %zu), %zu users (%zu URLLC), "
              "%zu P0 variables\n",
              p.grid.freq_units(), p.grid.time_units(), p.grid.mu_max(), p.grid.block_count(),
              p.grid.block_area(), p.users.size(), urllc, p0.variables.size());
  for (int mu : p.grid.empty_numerologies())
    std::printf("note: numerology %d does not fit on the grid\n", mu);
  return 0;
}

int cmd_compare(const fs::path& scenario_path) {
  auto s = load_scenario(scenario_path);
  s.methods = {Method::kP0, Method::kP1, Method::kHeuristic};
  print_table(run_scenario(s));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"URLLC/eMBB scheduling on a flexible-numerology mini-slot grid"};
  app.require_subcommand(1);

  fs::path scenario, spec, out_dir;
  std::string method;
  std::optional<fs::path> out, dump_lp;
  std::optional<long long> node_limit;
  std::optional<unsigned> threads;

  auto* solve = app.add_subcommand("solve", "run one method on a scenario");
  solve->add_option("--scenario", scenario, "scenario JSON")->required();
  solve->add_option("--method", method, "p0, p1 or heuristic")
      ->required()
      ->check(CLI::IsMember({"p0", "p1", "heuristic"}));
  solve->add_option("--out", out, "write a metrics CSV");
  solve->add_option("--node-limit", node_limit, "branch-and-bound node limit");
  solve->add_option("--dump-lp", dump_lp, "write the ILP in LP format");

  auto* sw = app.add_subcommand("sweep", "demand x latency sweep");
  sw->add_option("--spec", spec, "sweep spec JSON")->required();
  sw->add_option("--out-dir", out_dir, "output directory")->required();
  sw->add_option("--threads", threads, "worker threads (overrides the spec)");

  auto* val = app.add_subcommand("validate", "check a scenario without solving");
  val->add_option("--scenario", scenario, "scenario JSON")->required();

  auto* cmp = app.add_subcommand("compare", "run p0, p1 and heuristic side by side");
  cmp->add_option("--scenario", scenario, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(scenario, method, out, node_limit, dump_lp);
    if (*sw) return cmd_sweep(spec, out_dir, threads);
    if (*val) return cmd_validate(scenario);
    if (*cmp) return cmd_compare(scenario);
  } catch (const VerificationError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
