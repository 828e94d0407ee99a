#ifndef CSOPT_SOLVER_HPP
#define CSOPT_SOLVER_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "csopt/core.hpp"
#include "csopt/trace.hpp"

namespace csopt {

enum class Algorithm { csoa, fw_csoa };

inline const char* algorithm_name(Algorithm a) {
  return a == Algorithm::csoa ? "csoa" : "fw_csoa";
}

/// Per-step scratch diagnostics, filled when a pointer is supplied.
struct StepDiag {
  double primal_grad_sq = 0;  // ||grad_x L(x_t, lambda_t, theta_t)||^2
  double dual_grad_sq = 0;
  bool decay_clamped = false;
};

namespace detail {

inline void check_oracle_output(const OracleEval& ev, long t) {
  if (!ev.obj_grad.allFinite() || !ev.constr_vals.allFinite() ||
      !ev.constr_jac.allFinite())
    throw numeric_error("non-finite oracle output", t);
}

inline Vector dual_update(const Vector& lambda, const Vector& constr_vals,
                          const HyperParams& hp, StepDiag* diag) {
  double decay = 1.0 - hp.eta * hp.eta * hp.delta;
  if (decay < 0) {
    // only reachable with user-supplied parameters violating eta < 1/(4B)
    decay = 0;
    if (diag) diag->decay_clamped = true;
  }
  return (decay * lambda.array() +
          hp.eta * (constr_vals.array() + hp.upsilon))
      .max(0.0)
      .matrix();
}

}  // namespace detail

/// One projected primal-dual step. Draws theta_t from (hp.seed, state.t);
/// the primal projection step and the dual ascent step both consume that
/// same sample and the pre-update iterate x_t.
template <class Problem, class Set>
SolverState csoa_step(SolverState st, const HyperParams& hp, const Problem& p,
                      Set& set, StepDiag* diag = nullptr) {
  static_assert(Set::has_projection, "csoa_step needs a projection");
  const SampleContext ctx = make_sample_context(hp.seed, st.t);
  const OracleEval ev = p.eval(st.x, ctx);
  detail::check_oracle_output(ev, st.t);

  const Vector g = primal_grad_aug_lagrangian(ev, st.lambda);
  Vector x_next = set.project(st.x - hp.eta * g);
  if (!x_next.allFinite()) throw numeric_error("projection failure", st.t);

  if (diag) {
    diag->primal_grad_sq = g.squaredNorm();
    diag->dual_grad_sq =
        dual_grad_aug_lagrangian(ev, st.lambda, hp).squaredNorm();
  }
  st.lambda = detail::dual_update(st.lambda, ev.constr_vals, hp, diag);
  st.x = std::move(x_next);
  st.t += 1;
  return st;
}

/// One projection-free step: momentum-tracked gradient, linear
/// minimization, convex-combination move, then the same dual update as
/// the projected solver. Both gradient evaluations use the single sample
/// theta_t; no projection is ever invoked.
template <class Problem, class Set>
SolverState fw_csoa_step(SolverState st, const HyperParams& hp,
                         const Problem& p, Set& set,
                         StepDiag* diag = nullptr) {
  static_assert(Set::has_lmo, "fw_csoa_step needs a linear minimization oracle");
  if (!(hp.eta > 0) || hp.eta > 1.0)
    throw std::invalid_argument("fw_csoa_step: eta must lie in (0, 1]");
  const SampleContext ctx = make_sample_context(hp.seed, st.t);
  const OracleEval ev_cur = p.eval(st.x, ctx);
  const OracleEval ev_prev = p.eval(st.x_prev, ctx);
  detail::check_oracle_output(ev_cur, st.t);
  detail::check_oracle_output(ev_prev, st.t);

  const Vector g_cur = primal_grad_aug_lagrangian(ev_cur, st.lambda);
  const Vector g_prev = primal_grad_aug_lagrangian(ev_prev, st.lambda_prev);
  Vector d = (1.0 - hp.rho) * (st.d - g_prev) + g_cur;

  Vector s;
  try {
    s = set.lmo(d);
  } catch (const error& e) {
    throw numeric_error(e.what(), st.t);
  }
  Vector x_next = st.x + hp.eta * (s - st.x);
  if (!x_next.allFinite()) throw numeric_error("non-finite iterate", st.t);

  if (diag) {
    diag->primal_grad_sq = g_cur.squaredNorm();
    diag->dual_grad_sq =
        dual_grad_aug_lagrangian(ev_cur, st.lambda, hp).squaredNorm();
  }
  st.x_prev = st.x;
  st.lambda_prev = st.lambda;
  st.lambda = detail::dual_update(st.lambda, ev_cur.constr_vals, hp, diag);
  st.x = std::move(x_next);
  st.d = std::move(d);
  st.t += 1;
  return st;
}

template <class Set>
SolverState initial_state(Algorithm alg, const Set& set, int n_constraints,
                          const Vector& x1 = Vector()) {
  SolverState st;
  st.x = x1.size() > 0 ? x1 : set.canonical_point();
  st.lambda = Vector::Zero(n_constraints);
  st.t = 1;
  if (alg == Algorithm::fw_csoa) {
    // x_0 = x_1, lambda_0 = lambda_1 = 0, d_0 = 0; the recursion then
    // yields d_1 = rho * grad_x L(x_1, 0, theta_1).
    st.d = Vector::Zero(set.dim());
    st.x_prev = st.x;
    st.lambda_prev = st.lambda;
  }
  return st;
}

struct RunOptions {
  long trace_stride = 0;  // 0 -> max(1, T/200)
  Vector x1;              // empty -> set.canonical_point()
  bool collect_trace = true;
  std::function<void(const TraceRecord&)> on_row;
  long membership_stride = 0;  // 0 -> every trace row (and cheap sets every t)
};

struct RunResult {
  SolverState state;               // state after T steps (holds x_{T+1})
  std::vector<TraceRecord> trace;
  long T = 0;
  double obj_avg = 0;              // (1/T) sum_t F(x_t)
  std::vector<double> h_avg;       // (1/T) sum_t H_i(x_t)
  double obj_first = 0;            // F(x_1)
  std::vector<double> h_first;     // H_i(x_1)
  double max_lambda_norm = 0;
  double min_lambda = 0;
  double max_membership_residual = 0;
  long projection_calls = 0;
  long decay_clamps = 0;
  double mean_primal_grad_sq = 0;  // second-moment diagnostics
  double mean_dual_grad_sq = 0;
  std::vector<std::string> warnings;
};

/// Runs T iterations of the selected algorithm. Records full-data
/// objective/constraint estimates at every iterate (the theorem
/// quantities are sums over all t) and emits trace rows every
/// trace_stride iterations. Deterministic given (seed, problem, hp).
template <class Problem, class Set>
RunResult run(Algorithm alg, const Problem& problem, Set set,
              const HyperParams& hp, const RunOptions& opt = {}) {
  if (hp.T < 0) throw std::invalid_argument("run: T must be >= 0");
  if (hp.T > 0 && !(hp.eta > 0))
    throw std::invalid_argument("run: eta must be > 0");
  if (alg == Algorithm::csoa && !Set::has_projection)
    throw std::invalid_argument("run: csoa requires a set with projection");
  if (alg == Algorithm::fw_csoa && !Set::has_lmo)
    throw std::invalid_argument("run: fw_csoa requires a set with an lmo");

  const int N = problem.n_constraints();
  const long T = hp.T;
  const long stride = opt.trace_stride > 0 ? opt.trace_stride
                                           : std::max<long>(1, T / 200);
  // membership checks are O(eigendecomposition) for the nuclear ball, so
  // large sets are only checked at trace rows
  const long mem_stride =
      opt.membership_stride > 0 ? opt.membership_stride
                                : (set.dim() <= 64 ? 1 : stride);

  RunResult res;
  res.T = T;
  res.h_avg.assign(N, 0.0);
  res.h_first.assign(N, 0.0);
  SolverState st = initial_state(alg, set, N, opt.x1);
  if (set.membership_residual(st.x) > 1e-9)
    throw std::invalid_argument("run: initial point is not in the set");

  KahanSum obj_sum, pg_sum, dg_sum;
  std::vector<KahanSum> h_sums(N);
  StepDiag diag;

  for (long t = 1; t <= T; ++t) {
    const double F_t = problem.full_objective(st.x);
    const Vector H_t = problem.full_constraints(st.x);
    obj_sum.add(F_t);
    for (int i = 0; i < N; ++i) h_sums[i].add(H_t[i]);
    if (t == 1) {
      res.obj_first = F_t;
      for (int i = 0; i < N; ++i) res.h_first[i] = H_t[i];
    }

    const double lam_norm = st.lambda.norm();
    res.max_lambda_norm = std::max(res.max_lambda_norm, lam_norm);
    if (N > 0) res.min_lambda = std::min(res.min_lambda, st.lambda.minCoeff());
    if ((t - 1) % mem_stride == 0 || t == T)
      res.max_membership_residual = std::max(
          res.max_membership_residual, set.membership_residual(st.x));

    if ((t - 1) % stride == 0 || t == T) {
      TraceRecord row;
      row.t = t;
      row.obj_est = F_t;
      row.obj_avg = obj_sum.mean();
      row.h.resize(N);
      row.h_avg.resize(N);
      for (int i = 0; i < N; ++i) {
        row.h[i] = H_t[i];
        row.h_avg[i] = h_sums[i].mean();
      }
      row.lambda_norm = lam_norm;
      row.eta = hp.eta;
      row.upsilon = hp.upsilon;
      if (opt.on_row) opt.on_row(row);
      if (opt.collect_trace) res.trace.push_back(std::move(row));
    }

    diag = StepDiag{};
    if (alg == Algorithm::csoa) {
      if constexpr (Set::has_projection)
        st = csoa_step(std::move(st), hp, problem, set, &diag);
    } else {
      if constexpr (Set::has_lmo)
        st = fw_csoa_step(std::move(st), hp, problem, set, &diag);
    }
    pg_sum.add(diag.primal_grad_sq);
    dg_sum.add(diag.dual_grad_sq);
    if (diag.decay_clamped) ++res.decay_clamps;
  }

  res.state = std::move(st);
  res.obj_avg = obj_sum.mean();
  for (int i = 0; i < N; ++i) res.h_avg[i] = h_sums[i].mean();
  res.mean_primal_grad_sq = pg_sum.mean();
  res.mean_dual_grad_sq = dg_sum.mean();
  res.projection_calls = set.projection_calls();
  if (res.decay_clamps > 0)
    res.warnings.push_back("dual decay factor (1 - eta^2 delta) < 0 clamped "
                           "to 0 on " + std::to_string(res.decay_clamps) +
                           " iterations");
  return res;
}

}  // namespace csopt

#endif  // CSOPT_SOLVER_HPP
