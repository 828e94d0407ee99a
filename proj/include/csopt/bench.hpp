#ifndef CSOPT_BENCH_HPP
#define CSOPT_BENCH_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "csopt/core.hpp"
#include "csopt/rng.hpp"
#include "csopt/sets.hpp"

namespace csopt {

// Support point argmin_{x in set} <a, x>; used for Slater points and
// feasibility bounds of the desk problem.
inline Vector min_linear_point(const L2BallSet& set, const Vector& a) {
  const double n = a.norm();
  if (n == 0) return set.center();
  return set.center() - (set.radius() / n) * a;
}
template <class Set>
Vector min_linear_point(const Set& set, const Vector& a) {
  return set.lmo(a);
}

// Supremum of ||x - p|| over the set (convex, so attained at extreme points).
inline double sup_dist(const L2BallSet& set, const Vector& p) {
  return (set.center() - p).norm() + set.radius();
}
inline double sup_dist(const L1BallSet& set, const Vector& p) {
  double best = 0;
  for (int i = 0; i < set.dim(); ++i) {
    Vector v = Vector::Zero(set.dim());
    v[i] = set.radius();
    best = std::max({best, (v - p).norm(), (-v - p).norm()});
  }
  return best;
}
inline double sup_dist(const BoxSet& set, const Vector& p) {
  double sq = 0;
  for (int i = 0; i < set.dim(); ++i) {
    const double lo = set.lower()[i] - p[i], hi = set.upper()[i] - p[i];
    sq += std::max(lo * lo, hi * hi);
  }
  return std::sqrt(sq);
}

// Supremum of |<a, x> - b| over the set.
inline double sup_abs_linear(const L2BallSet& set, const Vector& a, double b) {
  return std::abs(a.dot(set.center()) - b) + set.radius() * a.norm();
}
inline double sup_abs_linear(const L1BallSet& set, const Vector& a, double b) {
  return set.radius() * a.cwiseAbs().maxCoeff() + std::abs(b);
}
inline double sup_abs_linear(const BoxSet& set, const Vector& a, double b) {
  double lo = -b, hi = -b;
  for (int i = 0; i < set.dim(); ++i) {
    const double u = a[i] * set.upper()[i], l = a[i] * set.lower()[i];
    hi += std::max(u, l);
    lo += std::min(u, l);
  }
  return std::max(std::abs(lo), std::abs(hi));
}

/// Desk-scale quadratic test problem with every quantity in closed form:
///   f(x, theta) = ||x - theta||^2,  theta ~ Normal(mu, I)
///   h(x, theta) = <a, x> - b + nu,  nu ~ Normal(0, s^2)
/// so F(x) = ||x - mu||^2 + m and H(x) = <a, x> - b. The constraint noise
/// keeps the dual update genuinely stochastic.
template <class SetT = L2BallSet>
class DeskQP {
 public:
  DeskQP(Vector mu, Vector a, double b, SetT set, double noise_s = 0.5)
      : mu_(std::move(mu)),
        a_(std::move(a)),
        b_(b),
        noise_s_(noise_s),
        set_(std::move(set)) {
    if (mu_.size() != a_.size() || mu_.size() != set_.dim())
      throw std::invalid_argument("DeskQP: dimension mismatch");
  }

  int dim() const { return static_cast<int>(mu_.size()); }
  int n_constraints() const { return 1; }
  const SetT& set() const { return set_; }
  const Vector& mu() const { return mu_; }
  const Vector& a() const { return a_; }
  double b() const { return b_; }
  double noise_s() const { return noise_s_; }

  OracleEval eval(const Vector& x, const SampleContext& ctx) const {
    splitmix64 rng(ctx.rng_tag);
    Vector theta(dim());
    for (int i = 0; i < dim(); ++i) theta[i] = mu_[i] + rng.next_gaussian();
    const double nu = noise_s_ * rng.next_gaussian();
    OracleEval ev;
    ev.obj_grad = 2.0 * (x - theta);
    ev.constr_vals = Vector::Constant(1, a_.dot(x) - b_ + nu);
    ev.constr_jac = a_.transpose();
    return ev;
  }

  double sample_objective(const Vector& x, const SampleContext& ctx) const {
    splitmix64 rng(ctx.rng_tag);
    Vector theta(dim());
    for (int i = 0; i < dim(); ++i) theta[i] = mu_[i] + rng.next_gaussian();
    return (x - theta).squaredNorm();
  }

  double full_objective(const Vector& x) const {
    return (x - mu_).squaredNorm() + dim();
  }
  Vector full_constraints(const Vector& x) const {
    return Vector::Constant(1, a_.dot(x) - b_);
  }
  Vector full_objective_grad(const Vector& x) const { return 2.0 * (x - mu_); }
  Matrix full_constraints_jac(const Vector&) const { return a_.transpose(); }

  double smoothness_f() const { return 2.0; }
  double smoothness_h() const { return 0.0; }

  Vector slater_point() const { return min_linear_point(set_, a_); }

  /// Tight constants from the closed forms; supremum-based so that the
  /// assumptions hold over the whole set.
  ProblemConstants exact_constants() const {
    ProblemConstants c;
    const double rm = sup_dist(set_, mu_);
    const double hm = sup_abs_linear(set_, a_, b_);
    c.sigma_f = 2.0 * std::sqrt(rm * rm + dim());
    c.sigma_h = a_.norm();
    c.sigma_lambda = std::sqrt(hm * hm + noise_s_ * noise_s_);
    c.G_f = 2.0 * rm;
    c.G_h = a_.norm();
    c.L_f = 2.0;
    c.L_h = 0.0;
    c.slater_sigma = b_ - a_.dot(slater_point());
    c.D = set_.diameter();
    c.N = 1;
    c.validate();
    return c;
  }

 private:
  Vector mu_, a_;
  double b_, noise_s_;
  SetT set_;
};

struct DeskQPSolution {
  Vector x_star;       // optimum of the original problem
  double F_star = 0;
  Vector x_upsilon;    // optimum of the tightened problem
  double F_upsilon = 0;
};

/// Closed-form optimum of min ||x - mu||^2 s.t. <a,x> <= b - upsilon over
/// the set; only valid while the norm-ball constraint stays inactive at
/// the halfspace projection (checked).
template <class SetT>
DeskQPSolution desk_qp_solution(const DeskQP<SetT>& qp, double upsilon = 0.0) {
  const Vector& a = qp.a();
  const Vector& mu = qp.mu();
  const double amin = a.dot(min_linear_point(qp.set(), a));
  if (!(amin < qp.b() - upsilon))
    throw error("desk_qp_solution: tightened constraint infeasible "
                "(upsilon exceeds the Slater margin)");
  auto halfspace_proj = [&](double level) {
    const double viol = a.dot(mu) - level;
    if (viol <= 0) return mu;
    return Vector(mu - (viol / a.squaredNorm()) * a);
  };
  DeskQPSolution sol;
  sol.x_star = halfspace_proj(qp.b());
  sol.x_upsilon = halfspace_proj(qp.b() - upsilon);
  SetT probe = qp.set();
  if (probe.membership_residual(sol.x_star) > 0 ||
      probe.membership_residual(sol.x_upsilon) > 0)
    throw error("desk_qp_solution: norm ball active at the optimum, "
                "no closed form for this instance");
  sol.F_star = qp.full_objective(sol.x_star);
  sol.F_upsilon = qp.full_objective(sol.x_upsilon);
  return sol;
}

// ---------------------------------------------------------------------------
// Reference solvers backing the derived test values.
// ---------------------------------------------------------------------------

struct BruteForceResult {
  Vector x;
  double F = 0;
  double kkt_residual = 0;  // projected-gradient mode only
};

template <class Set>
std::pair<Vector, Vector> bounding_box(const Set& set) {
  if constexpr (std::is_same_v<Set, BoxSet>) {
    return {set.lower(), set.upper()};
  } else if constexpr (std::is_same_v<Set, L2BallSet>) {
    return {set.center().array() - set.radius(),
            set.center().array() + set.radius()};
  } else {
    return {Vector::Constant(set.dim(), -set.radius()),
            Vector::Constant(set.dim(), set.radius())};
  }
}

/// Exhaustive lattice search at resolution eps_grid with a feasibility
/// filter on the full-data constraints. m <= 3 only.
template <class Problem>
BruteForceResult brute_force_grid(const Problem& problem, double eps_grid) {
  const int m = problem.dim();
  if (m > 3)
    throw std::invalid_argument("brute_force_grid: dimension must be <= 3");
  auto [lo, hi] = bounding_box(problem.set());
  std::vector<long> steps(m);
  for (int i = 0; i < m; ++i)
    steps[i] = static_cast<long>(std::floor((hi[i] - lo[i]) / eps_grid)) + 1;

  BruteForceResult best;
  best.F = std::numeric_limits<double>::infinity();
  Vector x(m);
  std::vector<long> idx(m, 0);
  auto probe = problem.set();
  while (true) {
    for (int i = 0; i < m; ++i) x[i] = lo[i] + eps_grid * idx[i];
    if (probe.membership_residual(x) <= 0 &&
        (problem.full_constraints(x).array() <= 0).all()) {
      const double F = problem.full_objective(x);
      if (F < best.F) {
        best.F = F;
        best.x = x;
      }
    }
    int k = 0;
    while (k < m && ++idx[k] >= steps[k]) idx[k++] = 0;
    if (k == m) break;
  }
  if (!std::isfinite(best.F))
    throw error("brute_force_grid: no feasible grid point");
  return best;
}

struct ProjGradConfig {
  long iters = 1000000;
  double primal_step = 0;  // 0 -> 1 / smoothness
  double dual_step0 = 1.0;
  double kkt_tol = 1e-6;
};

/// Long-horizon deterministic primal-dual reference run on the full-data
/// problem, certified by the KKT residual
///   ||x - P(x - gradF - J'lambda)|| + sum_i |lambda_i H_i| + ||max(0,H)||.
template <class Problem>
BruteForceResult brute_force_projected_gradient(const Problem& problem,
                                                ProjGradConfig cfg = {}) {
  auto set = problem.set();
  const int N = problem.n_constraints();
  Vector x = set.canonical_point();
  Vector lambda = Vector::Zero(N);
  const double gp = cfg.primal_step > 0
                        ? cfg.primal_step
                        : 1.0 / std::max(problem.smoothness_f(), 1e-12);
  for (long k = 1; k <= cfg.iters; ++k) {
    const Vector g = problem.full_objective_grad(x) +
                     (N > 0 ? Vector(problem.full_constraints_jac(x).transpose() * lambda)
                            : Vector(Vector::Zero(x.size())));
    x = set.project(x - gp * g);
    if (N > 0) {
      const Vector H = problem.full_constraints(x);
      const double gd = cfg.dual_step0 / std::sqrt(static_cast<double>(k));
      lambda = (lambda + gd * H).cwiseMax(0.0);
    }
  }
  BruteForceResult res;
  const Vector g = problem.full_objective_grad(x) +
                   (N > 0 ? Vector(problem.full_constraints_jac(x).transpose() * lambda)
                          : Vector(Vector::Zero(x.size())));
  const Vector H = problem.full_constraints(x);
  double resid = (x - set.project(x - g)).norm();
  for (int i = 0; i < N; ++i) resid += std::abs(lambda[i] * H[i]);
  resid += H.cwiseMax(0.0).norm();
  res.x = x;
  res.F = problem.full_objective(x);
  res.kkt_residual = resid;
  if (resid > cfg.kkt_tol)
    throw error("brute_force_projected_gradient: KKT residual " +
                std::to_string(resid) + " above tolerance");
  return res;
}

/// Central-difference check of the oracle gradients: worst relative error
/// over n_points random interior points, same theta for both sides.
template <class Problem>
double finite_diff_check(const Problem& problem, int n_points, double h_fd,
                         std::uint64_t seed = 12345) {
  if (h_fd < 1e-7 || h_fd > 1e-3)
    throw std::invalid_argument("finite_diff_check: h_fd out of [1e-7, 1e-3]");
  splitmix64 rng(mix_seed(seed, 0xfd));
  const int m = problem.dim();
  const int N = problem.n_constraints();
  const Vector center = problem.set().canonical_point();
  double worst = 0;
  for (int k = 0; k < n_points; ++k) {
    Vector x = problem.set().sample_point(rng);
    x = center + 0.9 * (x - center);  // keep strictly interior
    const SampleContext ctx{static_cast<std::uint64_t>(k),
                            mix_seed(seed, static_cast<std::uint64_t>(k))};
    const OracleEval ev = problem.eval(x, ctx);
    Vector fd_f(m);
    Matrix fd_h(N, m);
    Vector xp = x, xm = x;
    for (int j = 0; j < m; ++j) {
      xp[j] = x[j] + h_fd;
      xm[j] = x[j] - h_fd;
      fd_f[j] = (problem.sample_objective(xp, ctx) -
                 problem.sample_objective(xm, ctx)) /
                (2.0 * h_fd);
      if (N > 0) {
        const Vector hp = problem.eval(xp, ctx).constr_vals;
        const Vector hm = problem.eval(xm, ctx).constr_vals;
        fd_h.col(j) = (hp - hm) / (2.0 * h_fd);
      }
      xp[j] = x[j];
      xm[j] = x[j];
    }
    worst = std::max(worst, (fd_f - ev.obj_grad).norm() /
                                std::max(ev.obj_grad.norm(), 1e-6));
    for (int i = 0; i < N; ++i)
      worst = std::max(worst,
                       (fd_h.row(i) - ev.constr_jac.row(i)).norm() /
                           std::max(ev.constr_jac.row(i).norm(), 1e-6));
  }
  return worst;
}

}  // namespace csopt

#endif  // CSOPT_BENCH_HPP
