#ifndef CSOPT_CORE_HPP
#define CSOPT_CORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csopt/rng.hpp"

namespace csopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: config files, CLI flags, malformed data files.
struct config_error : error {
  using error::error;
};

// Numeric failure mid-run (non-finite oracle output, LMO breakdown).
struct numeric_error : error {
  numeric_error(const std::string& msg, long iter)
      : error(msg + " (iteration " + std::to_string(iter) + ")"),
        iteration(iter) {}
  long iteration;
};

/// Identifies one draw of the random sample. Oracles must be pure
/// functions of (query point, rng_tag): evaluating twice with the same
/// context reproduces the draw exactly, which is what lets FW-CSOA query
/// two points under one sample.
struct SampleContext {
  std::uint64_t sample_id = 0;
  std::uint64_t rng_tag = 0;
};

inline SampleContext make_sample_context(std::uint64_t run_seed, long t) {
  return SampleContext{static_cast<std::uint64_t>(t),
                       mix_seed(run_seed, static_cast<std::uint64_t>(t))};
}

/// One stochastic oracle response at a query point: objective gradient,
/// constraint values and constraint Jacobian, all under the same sample.
struct OracleEval {
  Vector obj_grad;   // length m
  Vector constr_vals;  // length N
  Matrix constr_jac;   // N x m, row i = gradient of h_i
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void check_eval_shapes(const OracleEval& eval, const Vector& lambda) {
  const auto n = eval.constr_vals.size();
  if (lambda.size() != n)
    throw std::invalid_argument("dual vector length " +
                                std::to_string(lambda.size()) +
                                " does not match constraint count " +
                                std::to_string(n));
  if (eval.constr_jac.rows() != n ||
      (n > 0 && eval.constr_jac.cols() != eval.obj_grad.size()))
    throw std::invalid_argument("constraint Jacobian shape mismatch");
  if (!eval.obj_grad.allFinite() || !eval.constr_vals.allFinite() ||
      !eval.constr_jac.allFinite() || !lambda.allFinite())
    throw std::invalid_argument("non-finite oracle input");
}

struct HyperParams {
  double eta = 0.0;      // primal/dual step size
  double delta = 0.0;    // dual regularization weight
  double upsilon = 0.0;  // conservative tightening
  double rho = 1.0;      // gradient-tracking momentum (FW only)
  long T = 0;            // horizon
  std::uint64_t seed = 0;
};

/// Problem-level constants feeding the theorem schedules.
struct ProblemConstants {
  double sigma_f = 0;       // second-moment bound on ||grad f||
  double sigma_h = 0;       // second-moment bound on ||grad h_i||
  double sigma_lambda = 0;  // second-moment bound on |h_i|
  double G_f = 0;           // Lipschitz constant of F
  double G_h = 0;           // Lipschitz constant of H_i
  double L_f = 0;           // smoothness of f
  double L_h = 0;           // smoothness of h_i
  double slater_sigma = 0;  // strict-feasibility margin
  double D = 0;             // set diameter
  int N = 0;                // constraint count

  double B() const {
    return std::max(sigma_f, sigma_h * std::sqrt(static_cast<double>(N)));
  }
  double C() const { return 2.0 * G_f * D / slater_sigma; }

  void validate() const {
    auto pos = [](double v, const char* name) {
      if (!(v > 0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("ProblemConstants: ") + name +
                                    " must be strictly positive");
    };
    pos(sigma_f, "sigma_f");
    pos(sigma_h, "sigma_h");
    pos(sigma_lambda, "sigma_lambda");
    pos(G_f, "G_f");
    pos(slater_sigma, "slater_sigma");
    pos(D, "D");
    if (N < 0) throw std::invalid_argument("ProblemConstants: N < 0");
  }
};

/// Iterate bundle shared by both solvers. `d` and the *_prev members are
/// only populated for FW-CSOA.
struct SolverState {
  Vector x;
  Vector lambda;       // elementwise >= 0 at all times
  Vector d;            // tracked gradient (zero-length for CSOA)
  long t = 1;
  Vector x_prev;
  Vector lambda_prev;
};

// ---------------------------------------------------------------------------
// Augmented-Lagrangian gradients.
//
// The saddle function is f(x,th) + sum_i lambda_i (h_i(x,th) + upsilon)
// - (delta eta / 2) ||lambda||^2; its x-gradient does not see the dual
// regularizer, its lambda-gradient does.
// ---------------------------------------------------------------------------

inline Vector primal_grad_aug_lagrangian(const OracleEval& eval,
                                         const Vector& lambda) {
  check_eval_shapes(eval, lambda);
  if (lambda.size() == 0) return eval.obj_grad;
  return eval.obj_grad + eval.constr_jac.transpose() * lambda;
}

inline Vector dual_grad_aug_lagrangian(const OracleEval& eval,
                                       const Vector& lambda,
                                       const HyperParams& hp) {
  check_eval_shapes(eval, lambda);
  if (!std::isfinite(hp.upsilon) || !std::isfinite(hp.delta) ||
      !std::isfinite(hp.eta))
    throw std::invalid_argument("non-finite hyperparameters");
  return eval.constr_vals.array() + hp.upsilon -
         hp.delta * hp.eta * lambda.array();
}

// ---------------------------------------------------------------------------
// Empirical constant estimation.
//
// The schedules need (sigma_f, sigma_h, sigma_lambda, G_f, G_h, D, slater
// margin); outside of closed-form test problems nobody knows these, so we
// estimate them from sampled feasible points with a safety factor. Every
// field can be overridden with an exact value.
// ---------------------------------------------------------------------------

struct ConstantOverrides {
  std::optional<double> sigma_f, sigma_h, sigma_lambda;
  std::optional<double> G_f, G_h, L_f, L_h, slater_sigma, D;
};

// Problem concept used here and by the solvers:
//   int dim(); int n_constraints();
//   const SetType& set();
//   OracleEval eval(x, ctx);
//   double full_objective(x); Vector full_constraints(x);
//   Vector full_objective_grad(x); Matrix full_constraints_jac(x);
//   Vector slater_point(); double smoothness_f(); double smoothness_h();
template <class Problem>
ProblemConstants estimate_constants(const Problem& problem, int n_samples,
                                    double safety, std::uint64_t seed,
                                    const ConstantOverrides& ovr = {}) {
  if (n_samples < 100)
    throw std::invalid_argument("estimate_constants: n_samples must be >= 100");
  if (!(safety > 0))
    throw std::invalid_argument("estimate_constants: safety must be > 0");

  const int N = problem.n_constraints();
  ProblemConstants c;
  c.N = N;
  c.D = ovr.D.value_or(problem.set().diameter());
  c.L_f = ovr.L_f.value_or(problem.smoothness_f());
  c.L_h = ovr.L_h.value_or(problem.smoothness_h());

  const bool need_samples = !ovr.sigma_f || !ovr.sigma_h || !ovr.sigma_lambda ||
                            !ovr.G_f || !ovr.G_h;
  double ms_f = 0, ms_h = 0, ms_lam = 0;  // mean squares
  double max_Gf = 0, max_Gh = 0;
  if (need_samples) {
    splitmix64 rng(mix_seed(seed, 0x5e5));
    for (int k = 0; k < n_samples; ++k) {
      const Vector x = problem.set().sample_point(rng);
      const SampleContext ctx{static_cast<std::uint64_t>(k),
                              mix_seed(seed, static_cast<std::uint64_t>(k))};
      const OracleEval ev = problem.eval(x, ctx);
      ms_f += ev.obj_grad.squaredNorm();
      double worst_row = 0, worst_val = 0;
      for (int i = 0; i < N; ++i) {
        worst_row = std::max(worst_row, ev.constr_jac.row(i).squaredNorm());
        worst_val = std::max(worst_val, ev.constr_vals[i] * ev.constr_vals[i]);
      }
      ms_h += worst_row;
      ms_lam += worst_val;
      max_Gf = std::max(max_Gf, problem.full_objective_grad(x).norm());
      if (N > 0) {
        const Matrix jac = problem.full_constraints_jac(x);
        for (int i = 0; i < N; ++i)
          max_Gh = std::max(max_Gh, jac.row(i).norm());
      }
    }
    ms_f /= n_samples;
    ms_h /= n_samples;
    ms_lam /= n_samples;
  }
  c.sigma_f = ovr.sigma_f.value_or(safety * std::sqrt(ms_f));
  c.sigma_h = ovr.sigma_h.value_or(safety * std::sqrt(ms_h));
  c.sigma_lambda = ovr.sigma_lambda.value_or(safety * std::sqrt(ms_lam));
  c.G_f = ovr.G_f.value_or(max_Gf);
  c.G_h = ovr.G_h.value_or(N > 0 ? max_Gh : 0.0);

  if (ovr.slater_sigma) {
    c.slater_sigma = *ovr.slater_sigma;
  } else {
    const Vector xs = problem.slater_point();
    const Vector H = problem.full_constraints(xs);
    int worst = 0;
    for (int i = 1; i < H.size(); ++i)
      if (H[i] > H[worst]) worst = i;
    const double margin = H.size() > 0 ? -H[worst] : 1.0;
    if (!(margin > 0)) {
      std::ostringstream os;
      os << "declared Slater point is not strictly feasible: constraint "
         << (worst + 1) << " has value " << (H.size() ? H[worst] : 0.0)
         << " >= 0";
      throw error(os.str());
    }
    c.slater_sigma = margin;
  }
  c.validate();
  return c;
}

}  // namespace csopt

#endif  // CSOPT_CORE_HPP
