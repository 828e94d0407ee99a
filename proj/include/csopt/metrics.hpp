#ifndef CSOPT_METRICS_HPP
#define CSOPT_METRICS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "csopt/core.hpp"
#include "csopt/trace.hpp"

namespace csopt {

struct PPercentResult {
  double value = 0;        // in [0, 100]
  bool degenerate = false; // a group had zero positive rate
};

/// Disparate-impact measure: 100 * min of the two conditional
/// positive-rate ratios for predictions sign(<w, x>) across the binary
/// sensitive attribute.
inline PPercentResult p_percent(const Vector& weights, const Matrix& X,
                                const Vector& s) {
  if (X.rows() != s.size() || X.cols() != weights.size())
    throw std::invalid_argument("p_percent: dimension mismatch");
  long n1 = 0, n0 = 0, pos1 = 0, pos0 = 0;
  for (long i = 0; i < X.rows(); ++i) {
    const bool pos = X.row(i).dot(weights) >= 0;
    if (s[i] >= 0.5) {
      ++n1;
      pos1 += pos;
    } else {
      ++n0;
      pos0 += pos;
    }
  }
  if (n1 == 0 || n0 == 0)
    throw error("p_percent: a sensitive group is empty");
  const double r1 = static_cast<double>(pos1) / n1;
  const double r0 = static_cast<double>(pos0) / n0;
  if (r1 == 0.0 || r0 == 0.0) return {0.0, true};
  const double r = r1 / r0;
  return {100.0 * std::min(r, 1.0 / r), false};
}

/// Observed-entry squared error over observed-entry energy, with
/// compensated summation so the enumeration order of the index set does
/// not matter.
inline double normalized_error(const Vector& x_obs, const Vector& m_obs) {
  if (x_obs.size() != m_obs.size())
    throw std::invalid_argument("normalized_error: length mismatch");
  KahanSum num, den;
  for (long k = 0; k < x_obs.size(); ++k) {
    const double d = x_obs[k] - m_obs[k];
    num.add(d * d);
    den.add(m_obs[k] * m_obs[k]);
  }
  if (!(den.sum() > 0))
    throw error("normalized_error: observed entries are all zero");
  return num.sum() / den.sum();
}

struct ConstraintSummary {
  double running_avg_final = 0;  // (1/T) sum_t H_i(x_t) over the trace rows
  double max_instantaneous = 0;
  double fraction_violated = 0;
};

/// Per-constraint violation digest of a trace. The headline
/// zero-average-violation claim is certified when running_avg_final stays
/// at or below tolerance for every constraint.
inline std::vector<ConstraintSummary> violation_summary(
    const std::vector<TraceRecord>& rows) {
  if (rows.empty()) throw std::invalid_argument("violation_summary: empty trace");
  const std::size_t N = rows.front().h.size();
  std::vector<KahanSum> sums(N);
  std::vector<ConstraintSummary> out(N);
  std::vector<long> violated(N, 0);
  for (std::size_t i = 0; i < N; ++i)
    out[i].max_instantaneous = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.h.size() != N)
      throw std::invalid_argument("violation_summary: ragged trace");
    for (std::size_t i = 0; i < N; ++i) {
      sums[i].add(r.h[i]);
      out[i].max_instantaneous = std::max(out[i].max_instantaneous, r.h[i]);
      if (r.h[i] > 0) ++violated[i];
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    out[i].running_avg_final = sums[i].mean();
    out[i].fraction_violated =
        static_cast<double>(violated[i]) / static_cast<double>(rows.size());
  }
  return out;
}

struct RateFit {
  std::vector<double> horizons;
  std::vector<double> gaps;
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::vector<std::size_t> excluded;  // indices of nonpositive gaps
  bool clamped = false;
};

/// Least-squares fit of log(gap) against log(T); the theorem exponents
/// show up as the slope. Nonpositive gaps are excluded with a flag.
inline RateFit fit_rate(const std::vector<double>& horizons,
                        const std::vector<double>& gaps) {
  if (horizons.size() != gaps.size())
    throw std::invalid_argument("fit_rate: length mismatch");
  if (horizons.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 horizons");
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (!(horizons[i] > horizons[i - 1]))
      throw std::invalid_argument("fit_rate: horizons must be increasing");
  if (!(horizons.back() >= 100.0 * horizons.front()))
    throw std::invalid_argument("fit_rate: horizons must span >= 2 decades");

  RateFit fit;
  fit.horizons = horizons;
  fit.gaps = gaps;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] > 0)) {
      fit.excluded.push_back(i);
      fit.clamped = true;
      continue;
    }
    lx.push_back(std::log(horizons[i]));
    ly.push_back(std::log(gaps[i]));
  }
  if (lx.size() < 3)
    throw error("fit_rate: fewer than 3 usable (positive) gaps");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace csopt

#endif  // CSOPT_METRICS_HPP
