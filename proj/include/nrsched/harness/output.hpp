#pragma once

// CSV and plot-data files for Metrics rows.
//
// CSV: fixed header, one row per (demand, latency, method) in that order,
// reals with 6 decimals, absent values as empty cells.
//
// Plot data: one file per demand, `embb_q<demand>.dat`. Each method is a
// block of "latency_ms embb_sum_kbps" lines headed by `# method <name>`;
// blocks are separated by two blank lines (gnuplot `index`). Cells without
// an allocation are left out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "nrsched/harness/run.hpp"
#include "nrsched/harness/sweep.hpp"

namespace nrsched::harness {

inline constexpr const char* kCsvHeader =
    "demand_kbps,latency_ms,method,status,embb_sum_kbps,urllc_coverage,fully_covered,"
    "wall_time_s,nodes";

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string cell(const std::optional<double>& v) { return v ? fixed6(*v) : ""; }

template <class Int>
std::string int_cell(const std::optional<Int>& v) {
  return v ? std::to_string(*v) : "";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',')
      out.emplace_back();
    else
      out.back() += c;
  }
  return out;
}

inline std::optional<double> parse_real(const std::string& s, const std::string& what) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw std::invalid_argument("bad " + what + " '" + s + "'");
  return v;
}

inline std::optional<long long> parse_int(const std::string& s, const std::string& what) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw std::invalid_argument("bad " + what + " '" + s + "'");
  return v;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw OutputError("write failed for " + path.string());
}

}  // namespace detail

inline void write_csv(std::ostream& os, std::vector<Metrics> rows) {
  sort_rows(rows);
  os << kCsvHeader << '\n';
  for (const auto& m : rows) {
    os << detail::cell(m.demand_kbps) << ',' << detail::cell(m.latency_ms) << ','
       << to_string(m.method) << ',' << to_string(m.status) << ','
       << detail::cell(m.embb_sum_kbps) << ',' << detail::cell(m.urllc_coverage) << ','
       << detail::int_cell(m.fully_covered) << ',' << detail::cell(m.wall_time_s) << ','
       << detail::int_cell(m.nodes) << '\n';
  }
}

inline void emit_csv(const std::vector<Metrics>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  auto out = detail::open_out(path);
  write_csv(out, rows);
  detail::finish(out, path);
}

inline std::vector<Metrics> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw std::invalid_argument("csv: unexpected header");
  std::vector<Metrics> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    const std::string at = "line " + std::to_string(lineno);
    if (f.size() != 9) throw std::invalid_argument("csv " + at + ": expected 9 fields");
    try {
      Metrics m;
      m.demand_kbps = detail::parse_real(f[0], "demand_kbps");
      m.latency_ms = detail::parse_real(f[1], "latency_ms");
      m.method = parse_method(f[2]);
      m.status = parse_run_status(f[3]);
      m.embb_sum_kbps = detail::parse_real(f[4], "embb_sum_kbps");
      m.urllc_coverage = detail::parse_real(f[5], "urllc_coverage");
      if (auto v = detail::parse_int(f[6], "fully_covered")) m.fully_covered = static_cast<int>(*v);
      m.wall_time_s = detail::parse_real(f[7], "wall_time_s");
      m.nodes = detail::parse_int(f[8], "nodes");
      rows.push_back(m);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("csv " + at + ": " + e.what());
    }
  }
  return rows;
}

inline std::vector<Metrics> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError("cannot read " + path.string());
  return parse_csv(in);
}

inline std::string plot_file_name(double demand_kbps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "embb_q%g.dat", demand_kbps);
  return buf;
}

// Writes one series file per demand into `dir`; returns the paths in demand
// order.
inline std::vector<std::filesystem::path> emit_plot_data(
    std::vector<Metrics> rows, const std::filesystem::path& dir) {
  if (rows.empty()) throw std::invalid_argument("emit_plot_data: no rows");
  sort_rows(rows);
  std::map<double, std::map<std::string, std::vector<const Metrics*>>> by_demand;
  for (const auto& m : rows) {
    if (!m.demand_kbps || !m.latency_ms)
      throw std::invalid_argument("emit_plot_data: rows need demand and latency");
    by_demand[*m.demand_kbps][to_string(m.method)].push_back(&m);
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  for (const auto& [demand, methods] : by_demand) {
    const auto path = dir / plot_file_name(demand);
    auto out = detail::open_out(path);
    out << "# demand_kbps " << detail::fixed6(demand) << '\n';
    out << "# columns: latency_ms embb_sum_kbps\n";
    bool first = true;
    for (const auto& [name, series] : methods) {
      if (!first) out << "\n\n";
      first = false;
      out << "# method " << name << '\n';
      for (const auto* m : series)
        if (m->embb_sum_kbps)
          out << detail::fixed6(*m->latency_ms) << ' ' << detail::fixed6(*m->embb_sum_kbps)
              << '\n';
    }
    detail::finish(out, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace nrsched::harness
