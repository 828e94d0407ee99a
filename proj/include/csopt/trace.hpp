#ifndef CSOPT_TRACE_HPP
#define CSOPT_TRACE_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csopt/core.hpp"

namespace csopt {

/// Compensated running sum; trace aggregations can reach 1e6 terms.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
    ++count_;
  }
  double sum() const { return sum_; }
  double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
  long count() const { return count_; }

 private:
  double sum_ = 0, comp_ = 0;
  long count_ = 0;
};

/// One recorded trace row: full-data estimates at iterate x_t together
/// with the running averages over all iterations up to and including t.
struct TraceRecord {
  long t = 0;
  double obj_est = 0;        // F(x_t), full-data estimate
  double obj_avg = 0;        // (1/t) sum_{u<=t} F(x_u)
  std::vector<double> h;     // H_i(x_t)
  std::vector<double> h_avg; // (1/t) sum_{u<=t} H_i(x_u)
  double lambda_norm = 0;
  double eta = 0;
  double upsilon = 0;
};

// Numbers carry 17 significant digits so a re-run reproduces the file
// byte for byte and parsing is lossless.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string trace_header(int n_constraints) {
  std::string s = "t,obj_est,obj_avg";
  for (int i = 1; i <= n_constraints; ++i) s += ",h" + std::to_string(i);
  for (int i = 1; i <= n_constraints; ++i) s += ",h" + std::to_string(i) + "_avg";
  s += ",lambda_norm,eta,upsilon";
  return s;
}

inline std::string trace_row_csv(const TraceRecord& r) {
  std::string s = std::to_string(r.t);
  s += "," + format_g17(r.obj_est) + "," + format_g17(r.obj_avg);
  for (double v : r.h) s += "," + format_g17(v);
  for (double v : r.h_avg) s += "," + format_g17(v);
  s += "," + format_g17(r.lambda_norm) + "," + format_g17(r.eta) + "," +
       format_g17(r.upsilon);
  return s;
}

inline void write_trace_csv(const std::string& path,
                            const std::vector<TraceRecord>& rows,
                            int n_constraints) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open trace file for writing: " + path);
  out << trace_header(n_constraints) << "\n";
  for (const auto& r : rows) out << trace_row_csv(r) << "\n";
}

struct Trace {
  std::vector<std::string> columns;
  std::vector<TraceRecord> rows;
  int n_constraints = 0;
};

inline Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw error("empty trace file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Trace tr;
  std::stringstream hs(line);
  std::string col;
  while (std::getline(hs, col, ',')) tr.columns.push_back(col);
  int n = 0;
  for (const auto& c : tr.columns)
    if (c.size() > 1 && c[0] == 'h' && c.find("_avg") == std::string::npos &&
        c != "lambda_norm")
      ++n;
  tr.n_constraints = n;
  const std::size_t expect = 3 + 2 * static_cast<std::size_t>(n) + 3;
  if (tr.columns.size() != expect)
    throw error("unrecognized trace schema in " + path);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != expect)
      throw error("malformed trace row in " + path);
    TraceRecord r;
    std::size_t k = 0;
    r.t = static_cast<long>(vals[k++]);
    r.obj_est = vals[k++];
    r.obj_avg = vals[k++];
    r.h.assign(vals.begin() + k, vals.begin() + k + n);
    k += n;
    r.h_avg.assign(vals.begin() + k, vals.begin() + k + n);
    k += n;
    r.lambda_norm = vals[k++];
    r.eta = vals[k++];
    r.upsilon = vals[k++];
    tr.rows.push_back(std::move(r));
  }
  return tr;
}

}  // namespace csopt

#endif  // CSOPT_TRACE_HPP
