#ifndef CSOPT_SETS_HPP
#define CSOPT_SETS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include "csopt/core.hpp"
#include "csopt/rng.hpp"

namespace csopt {

// Feasible-set concept shared by the solvers:
//   static constexpr bool has_projection, has_lmo;
//   int dim(); double diameter();
//   Vector project(const Vector&)           [if has_projection]
//   Vector lmo(const Vector&)               [if has_lmo]
//   double membership_residual(const Vector&);
//   Vector sample_point(splitmix64&);
//   Vector canonical_point();
//   long projection_calls();
//
// Sets are copied per run; the call counters and the LMO restart stream
// are therefore private to one run.

inline void check_dim(Eigen::Index got, Eigen::Index want, const char* who) {
  if (got != want)
    throw std::invalid_argument(std::string(who) + ": vector length " +
                                std::to_string(got) + ", set dimension " +
                                std::to_string(want));
  (void)who;
}

class BoxSet {
 public:
  static constexpr bool has_projection = true;
  static constexpr bool has_lmo = true;

  BoxSet(Vector lower, Vector upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || ((upper_ - lower_).array() < 0).any())
      throw std::invalid_argument("BoxSet: need lower <= upper elementwise");
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  double diameter() const { return (upper_ - lower_).norm(); }

  Vector project(const Vector& x) {
    check_dim(x.size(), lower_.size(), "BoxSet::project");
    ++projection_calls_;
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  // s_i = lower_i if d_i > 0 else upper_i (upper on ties)
  Vector lmo(const Vector& d) const {
    check_dim(d.size(), lower_.size(), "BoxSet::lmo");
    if (!d.allFinite()) throw std::invalid_argument("BoxSet::lmo: non-finite d");
    Vector s(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i)
      s[i] = d[i] > 0 ? lower_[i] : upper_[i];
    return s;
  }

  double membership_residual(const Vector& x) const {
    double r = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      r = std::max({r, lower_[i] - x[i], x[i] - upper_[i]});
    return std::max(r, 0.0);
  }

  Vector sample_point(splitmix64& rng) const {
    Vector x(lower_.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x[i] = lower_[i] + (upper_[i] - lower_[i]) * rng.next_double();
    return x;
  }

  Vector canonical_point() const { return 0.5 * (lower_ + upper_); }
  long projection_calls() const { return projection_calls_; }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_, upper_;
  long projection_calls_ = 0;
};

class L2BallSet {
 public:
  static constexpr bool has_projection = true;
  static constexpr bool has_lmo = false;

  L2BallSet(Vector center, double radius)
      : center_(std::move(center)), radius_(radius) {
    if (!(radius > 0)) throw std::invalid_argument("L2BallSet: radius <= 0");
  }
  L2BallSet(int dim, double radius) : L2BallSet(Vector::Zero(dim), radius) {}

  int dim() const { return static_cast<int>(center_.size()); }
  double diameter() const { return 2.0 * radius_; }
  double radius() const { return radius_; }
  const Vector& center() const { return center_; }

  Vector project(const Vector& x) {
    check_dim(x.size(), center_.size(), "L2BallSet::project");
    ++projection_calls_;
    const Vector diff = x - center_;
    const double n = diff.norm();
    if (n <= radius_) return x;
    return center_ + (radius_ / n) * diff;
  }

  double membership_residual(const Vector& x) const {
    return std::max(0.0, (x - center_).norm() - radius_);
  }

  Vector sample_point(splitmix64& rng) const {
    Vector dir(center_.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.next_gaussian();
    const double n = dir.norm();
    if (n == 0) return center_;
    const double r =
        radius_ * std::pow(rng.next_double(), 1.0 / std::max(1, dim()));
    return center_ + (r / n) * dir;
  }

  Vector canonical_point() const { return center_; }
  long projection_calls() const { return projection_calls_; }

 private:
  Vector center_;
  double radius_;
  long projection_calls_ = 0;
};

class L1BallSet {
 public:
  static constexpr bool has_projection = false;
  static constexpr bool has_lmo = true;

  L1BallSet(int dim, double radius) : dim_(dim), radius_(radius) {
    if (dim <= 0 || !(radius > 0))
      throw std::invalid_argument("L1BallSet: need dim > 0 and radius > 0");
  }

  int dim() const { return dim_; }
  double diameter() const { return 2.0 * radius_; }
  double radius() const { return radius_; }

  // s = -radius * sign(d_i*) e_{i*}, i* = argmax |d_i|, smallest index on
  // ties. d = 0 has the whole ball as argmin; return the canonical vertex.
  Vector lmo(const Vector& d) const {
    check_dim(d.size(), dim_, "L1BallSet::lmo");
    if (!d.allFinite())
      throw std::invalid_argument("L1BallSet::lmo: non-finite d");
    Vector s = Vector::Zero(dim_);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < d.size(); ++i)
      if (std::abs(d[i]) > std::abs(d[best])) best = i;
    if (d[best] == 0.0) {
      s[0] = radius_;  // canonical vertex
      return s;
    }
    s[best] = d[best] > 0 ? -radius_ : radius_;
    return s;
  }

  double membership_residual(const Vector& x) const {
    return std::max(0.0, x.lpNorm<1>() - radius_);
  }

  Vector sample_point(splitmix64& rng) const {
    // exponential spacings give a uniform point on the simplex
    Vector e(dim_);
    for (int i = 0; i < dim_; ++i)
      e[i] = -std::log(1.0 - rng.next_double());
    e /= e.sum();
    const double r = radius_ * std::pow(rng.next_double(), 1.0 / dim_);
    Vector x(dim_);
    for (int i = 0; i < dim_; ++i)
      x[i] = (rng.next() & 1 ? 1.0 : -1.0) * r * e[i];
    return x;
  }

  Vector canonical_point() const { return Vector::Zero(dim_); }
  long projection_calls() const { return 0; }

 private:
  int dim_;
  double radius_;
};

struct PowerIterConfig {
  double tol = 1e-10;
  int max_iters = 500;
  std::uint64_t seed = 0;
};

/// Nuclear-norm ball over m x n matrices, flattened column-major into
/// vectors of length m*n. The LMO returns the rank-1 matrix
/// -radius * u1 v1' built from the top singular pair of d, found by power
/// iteration on d'd.
class NuclearBallSet {
 public:
  static constexpr bool has_projection = false;
  static constexpr bool has_lmo = true;

  NuclearBallSet(int rows, int cols, double radius, PowerIterConfig pi = {})
      : rows_(rows), cols_(cols), radius_(radius), pi_(pi) {
    if (rows <= 0 || cols <= 0 || !(radius > 0))
      throw std::invalid_argument("NuclearBallSet: bad shape or radius");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return rows_ * cols_; }
  double diameter() const { return 2.0 * radius_; }
  double radius() const { return radius_; }

  Vector lmo(const Vector& d) {
    check_dim(d.size(), dim(), "NuclearBallSet::lmo");
    if (!d.allFinite())
      throw std::invalid_argument("NuclearBallSet::lmo: non-finite d");
    Eigen::Map<const Matrix> D(d.data(), rows_, cols_);
    splitmix64 rng(mix_seed(pi_.seed, static_cast<std::uint64_t>(++calls_)));

    if (D.norm() == 0.0) {
      Matrix S = Matrix::Zero(rows_, cols_);
      S(0, 0) = radius_;  // canonical rank-1 vertex
      return Eigen::Map<const Vector>(S.data(), dim());
    }

    Vector v(cols_);
    for (int i = 0; i < cols_; ++i) v[i] = rng.next_gaussian();
    v.normalize();
    double lambda = 0, resid = 0;
    bool converged = false;
    for (int it = 0; it < pi_.max_iters; ++it) {
      Vector w = D.transpose() * (D * v);  // (d'd) v
      const double wn = w.norm();
      if (wn == 0.0) {
        // started orthogonal to the row space; reseed
        for (int i = 0; i < cols_; ++i) v[i] = rng.next_gaussian();
        v.normalize();
        continue;
      }
      lambda = v.dot(w);
      resid = (w - lambda * v).norm();
      v = w / wn;
      if (resid <= pi_.tol * std::max(lambda, 1e-300)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "NuclearBallSet::lmo: power iteration did not converge after "
         << pi_.max_iters << " iterations (residual " << resid << ", tol "
         << pi_.tol << ")";
      throw error(os.str());
    }
    Vector u = D * v;
    u /= u.norm();  // u'Dv = ||Dv|| > 0, sign convention holds
    Matrix S = -radius_ * u * v.transpose();
    return Eigen::Map<const Vector>(S.data(), dim());
  }

  double nuclear_norm(const Vector& x) const {
    Eigen::Map<const Matrix> X(x.data(), rows_, cols_);
    // singular values via the smaller Gram matrix
    if (rows_ <= cols_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(X * X.transpose());
      return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(X.transpose() * X);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  }

  double membership_residual(const Vector& x) const {
    return std::max(0.0, nuclear_norm(x) - radius_);
  }

  Vector sample_point(splitmix64& rng) const {
    Matrix G(rows_, cols_);
    for (int j = 0; j < cols_; ++j)
      for (int i = 0; i < rows_; ++i) G(i, j) = rng.next_gaussian();
    Vector g = Eigen::Map<const Vector>(G.data(), dim());
    const double nn = nuclear_norm(g);
    const double scale =
        radius_ * std::pow(rng.next_double(), 1.0 / dim()) / nn;
    return scale * g;
  }

  Vector canonical_point() const { return Vector::Zero(dim()); }
  long projection_calls() const { return 0; }

 private:
  int rows_, cols_;
  double radius_;
  PowerIterConfig pi_;
  long calls_ = 0;
};

}  // namespace csopt

#endif  // CSOPT_SETS_HPP
