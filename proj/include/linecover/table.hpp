#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

#include "linecover/sim.hpp"

namespace linecover {

// 12 significant digits; NaN is written as "nan" on every platform.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.12g", v);
  return buf.data();
}

// Header `t,x_1,...,x_n,Q,phi,err_sq`, one row per recorded step.
inline void write_run_table(std::ostream& out, const RunRecord& record) {
  out << "t";
  for (std::size_t i = 1; i <= record.config.n; ++i) out << ",x_" << i;
  out << ",Q,phi,err_sq\n";
  for (const RunRow& row : record.rows) {
    out << row.t;
    for (double x : row.positions) out << ',' << format_number(x);
    out << ',' << format_number(row.q) << ',' << format_number(row.phi) << ','
        << format_number(row.err_sq) << '\n';
  }
}

// Header `t,mean_err,stderr,bound,slope_so_far`.
inline void write_sweep_table(std::ostream& out, const SweepResult& result) {
  out << "t,mean_err,stderr,bound,slope_so_far\n";
  for (const SweepRow& row : result.rows) {
    out << row.t << ',' << format_number(row.mean_err) << ','
        << format_number(row.std_err) << ',' << format_number(row.bound) << ','
        << format_number(row.slope_so_far) << '\n';
  }
}

}  // namespace linecover
