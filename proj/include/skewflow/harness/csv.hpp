#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skewflow/diagnostics.hpp"
#include "skewflow/dynamics.hpp"
#include "skewflow/errors.hpp"
#include "skewflow/game.hpp"

namespace skewflow::harness {

/// Shortest text that reads back to the same double (printf "%.17g").
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> trajectory_columns(const BilinearGame& game) {
  std::vector<std::string> cols{"step"};
  auto add = [&](const char* prefix, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) cols.push_back(prefix + std::to_string(i));
  };
  add("x_", game.rows());
  add("y_", game.cols());
  add("p_", game.rows());
  add("q_", game.cols());
  for (const char* c : {"energy", "modified_energy", "commutator", "regret1", "regret2",
                        "total_regret", "duality_gap_avg"}) {
    cols.emplace_back(c);
  }
  return cols;
}

inline const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols{"step",    "energy",  "modified_energy",
                                             "commutator", "regret1", "regret2",
                                             "total_regret", "duality_gap_avg"};
  return cols;
}

namespace detail {

inline void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

inline void write_diag_tail(std::ostream& out, const DiagnosticsRow& r) {
  out << ',' << format_real(r.energy) << ',' << format_real(r.modified_energy) << ','
      << format_real(r.commutator_step) << ',' << format_real(r.regret1) << ','
      << format_real(r.regret2) << ',' << format_real(r.total_regret) << ',';
  if (r.duality_gap_avg) out << format_real(*r.duality_gap_avg);
  out << '\n';
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& out, const BilinearGame& game,
                                 const Trajectory& traj, const std::vector<DiagnosticsRow>& rows) {
  detail::write_header(out, trajectory_columns(game));
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const JointState& s = traj.states[k];
    out << k;
    for (const Vec* v : {&s.x, &s.y, &s.p, &s.q})
      for (double c : *v) out << ',' << format_real(c);
    detail::write_diag_tail(out, rows[k]);
  }
}

inline void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  detail::write_header(out, diagnostics_columns());
  for (const DiagnosticsRow& r : rows) {
    out << r.step;
    detail::write_diag_tail(out, r);
  }
}

/// Column-addressed numeric table read back from a CSV file. Empty cells
/// read as NaN.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) return t;
    t.columns_ = split(line);
    for (std::size_t i = 0; i < t.columns_.size(); ++i) t.index_[t.columns_[i]] = i;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      for (const std::string& cell : split(line)) {
        row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
      }
      row.resize(t.columns_.size(), std::numeric_limits<double>::quiet_NaN());
      t.rows_.push_back(std::move(row));
    }
    return t;
  }

  static CsvTable read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open CSV '" + path + "'");
    return parse(in);
  }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<double> column(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw MissingColumnError("CSV has no column '" + name + "'");
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[it->second]);
    return out;
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  }

  std::vector<std::string> columns_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace skewflow::harness
