#pragma once

// Check results with exact-decimal serialization. Every number prints via
// %.17g so identical doubles serialize to identical bytes, which is what the
// byte-for-byte reproducibility contract rests on.

#include <cstdio>
#include <string>
#include <vector>

namespace levydpp {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckReport {
  std::string check_name;
  double lhs = 0;
  double rhs = 0;
  double lhs_se = 0;
  double rhs_se = 0;
  double stat_gate = 0;           // SE-multiplier component of the tolerance
  double declared_allowance = 0;  // deterministic component, declared up front
  bool pass = false;
  std::vector<std::string> notes;
  std::vector<Table> tables;

  double tolerance() const { return stat_gate + declared_allowance; }
};

inline std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_text(const CheckReport& r) {
  std::string out;
  out += "check: " + r.check_name + "\n";
  out += std::string("pass: ") + (r.pass ? "true" : "false") + "\n";
  out += "lhs: " + format_double(r.lhs) + "\n";
  out += "lhs_se: " + format_double(r.lhs_se) + "\n";
  out += "rhs: " + format_double(r.rhs) + "\n";
  out += "rhs_se: " + format_double(r.rhs_se) + "\n";
  out += "stat_gate: " + format_double(r.stat_gate) + "\n";
  out += "declared_allowance: " + format_double(r.declared_allowance) + "\n";
  out += "tolerance: " + format_double(r.tolerance()) + "\n";
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  for (const auto& t : r.tables) {
    out += "table: " + t.name + "\n";
    out += to_csv(t);
  }
  return out;
}

}  // namespace levydpp
