#ifndef CSOPT_PROBLEMS_HPP
#define CSOPT_PROBLEMS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "csopt/core.hpp"
#include "csopt/rng.hpp"
#include "csopt/sets.hpp"

namespace csopt {

// ---------------------------------------------------------------------------
// Fairness-constrained classification.
//
// Logistic loss over weights, with the covariance between the sensitive
// attribute and the decision value budgeted to [-c, c]. The two-sided
// budget is encoded as two one-sided constraints
//   h+ = cov - c <= 0   and   h- = -cov - c <= 0
// so h+(x) + h-(x) = -2c identically.
// ---------------------------------------------------------------------------

struct FairDataset {
  Matrix X;         // n x m features
  Vector y;         // labels in {0,1}
  Vector s;         // sensitive attribute in {0,1}
  long size() const { return X.rows(); }
};

inline double logistic_loss(double t, double y) {
  // log(1 + e^t) - y t, evaluated stably
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))) - y * t;
}

class FairClassificationProblem {
 public:
  FairClassificationProblem(FairDataset train, double c, double radius,
                            int minibatch = 1)
      : train_(std::move(train)),
        c_(c),
        b_(minibatch),
        set_(static_cast<int>(train_.X.cols()), radius) {
    if (train_.size() == 0) throw error("fairness problem: empty dataset");
    if (!(c > 0)) throw std::invalid_argument("fairness problem: c must be > 0");
    if (b_ < 1 || b_ > train_.size())
      throw std::invalid_argument("fairness problem: bad minibatch size");
    s_bar_ = train_.s.mean();
    // frozen training-set functional: cov(x) = <w_bar, x>
    w_bar_ = Vector::Zero(dim());
    for (long i = 0; i < train_.size(); ++i)
      w_bar_ += (train_.s[i] - s_bar_) * train_.X.row(i).transpose();
    w_bar_ /= static_cast<double>(train_.size());
  }

  int dim() const { return static_cast<int>(train_.X.cols()); }
  int n_constraints() const { return 2; }
  const L2BallSet& set() const { return set_; }
  double c() const { return c_; }
  double s_bar() const { return s_bar_; }
  const Vector& covariance_direction() const { return w_bar_; }
  const FairDataset& train() const { return train_; }
  const FairDataset& test() const { return test_; }
  const FairDataset& validation() const { return val_; }
  void attach_holdout(FairDataset test, FairDataset val = {}) {
    test_ = std::move(test);
    val_ = std::move(val);
  }

  OracleEval eval(const Vector& theta, const SampleContext& ctx) const {
    splitmix64 rng(ctx.rng_tag);
    OracleEval ev;
    ev.obj_grad = Vector::Zero(dim());
    Vector zx = Vector::Zero(dim());
    double cov = 0;
    for (int k = 0; k < b_; ++k) {
      const long i = static_cast<long>(rng.next_below(train_.size()));
      const auto xi = train_.X.row(i);
      const double t = xi.dot(theta);
      const double sig = 1.0 / (1.0 + std::exp(-t));
      ev.obj_grad += (sig - train_.y[i]) * xi.transpose();
      const double z = train_.s[i] - s_bar_;
      zx += z * xi.transpose();
      cov += z * t;
    }
    ev.obj_grad /= b_;
    zx /= b_;
    cov /= b_;
    ev.constr_vals = Vector(2);
    ev.constr_vals << cov - c_, -cov - c_;
    ev.constr_jac = Matrix(2, dim());
    ev.constr_jac.row(0) = zx.transpose();
    ev.constr_jac.row(1) = -zx.transpose();
    return ev;
  }

  double sample_objective(const Vector& theta, const SampleContext& ctx) const {
    splitmix64 rng(ctx.rng_tag);
    double loss = 0;
    for (int k = 0; k < b_; ++k) {
      const long i = static_cast<long>(rng.next_below(train_.size()));
      loss += logistic_loss(train_.X.row(i).dot(theta), train_.y[i]);
    }
    return loss / b_;
  }

  double full_objective(const Vector& theta) const {
    double loss = 0;
    for (long i = 0; i < train_.size(); ++i)
      loss += logistic_loss(train_.X.row(i).dot(theta), train_.y[i]);
    return loss / static_cast<double>(train_.size());
  }

  Vector full_constraints(const Vector& theta) const {
    const double cov = w_bar_.dot(theta);
    Vector h(2);
    h << cov - c_, -cov - c_;
    return h;
  }

  Vector full_objective_grad(const Vector& theta) const {
    Vector g = Vector::Zero(dim());
    for (long i = 0; i < train_.size(); ++i) {
      const double t = train_.X.row(i).dot(theta);
      g += (1.0 / (1.0 + std::exp(-t)) - train_.y[i]) *
           train_.X.row(i).transpose();
    }
    return g / static_cast<double>(train_.size());
  }

  Matrix full_constraints_jac(const Vector&) const {
    Matrix j(2, dim());
    j.row(0) = w_bar_.transpose();
    j.row(1) = -w_bar_.transpose();
    return j;
  }

  double smoothness_f() const {
    double mx = 0;
    for (long i = 0; i < train_.size(); ++i)
      mx = std::max(mx, train_.X.row(i).squaredNorm());
    return mx / 4.0;
  }
  double smoothness_h() const { return 0.0; }

  Vector slater_point() const { return Vector::Zero(dim()); }

 private:
  FairDataset train_, test_, val_;
  double c_;
  int b_;
  L2BallSet set_;
  double s_bar_ = 0;
  Vector w_bar_;
};

// ---------------------------------------------------------------------------
// Synthetic fairness data: labels uniform, features from two Gaussians,
// sensitive attribute Bernoulli with the class-density ratio evaluated at
// rotated features. Smaller rotation angles correlate the attribute more
// strongly with the label.
// ---------------------------------------------------------------------------

struct SyntheticFairnessConfig {
  long n_samples = 4000;
  Eigen::Vector2d mean_pos{2.0, 2.0};
  Eigen::Matrix2d cov_pos{{5.0, 1.0}, {1.0, 5.0}};
  Eigen::Vector2d mean_neg{-2.0, -2.0};
  Eigen::Matrix2d cov_neg{{10.0, 1.0}, {1.0, 3.0}};
  double phi = 3.14159265358979323846 / 4.0;  // rotation angle
  double c = 0.05;
  double radius = 10.0;
  int minibatch = 1;
  double test_frac = 0.3;
};

inline double gaussian2_pdf(const Eigen::Vector2d& x,
                            const Eigen::Vector2d& mean,
                            const Eigen::Matrix2d& cov) {
  const Eigen::Matrix2d inv = cov.inverse();
  const double det = cov.determinant();
  const Eigen::Vector2d d = x - mean;
  return std::exp(-0.5 * d.dot(inv * d)) /
         (2.0 * 3.14159265358979323846 * std::sqrt(det));
}

inline FairDataset sample_synthetic_fairness(const SyntheticFairnessConfig& cfg,
                                             std::uint64_t seed) {
  if (cfg.cov_pos.determinant() <= 0 || cfg.cov_neg.determinant() <= 0)
    throw std::invalid_argument("synthetic fairness: covariances must be "
                                "positive definite");
  const Eigen::Matrix2d Lp = cfg.cov_pos.llt().matrixL();
  const Eigen::Matrix2d Ln = cfg.cov_neg.llt().matrixL();
  Eigen::Matrix2d rot;
  rot << std::cos(cfg.phi), -std::sin(cfg.phi), std::sin(cfg.phi),
      std::cos(cfg.phi);

  FairDataset ds;
  ds.X = Matrix(cfg.n_samples, 2);
  ds.y = Vector(cfg.n_samples);
  ds.s = Vector(cfg.n_samples);
  splitmix64 rng(mix_seed(seed, 0xfa12));
  for (long i = 0; i < cfg.n_samples; ++i) {
    const int y = rng.next() & 1;
    Eigen::Vector2d z{rng.next_gaussian(), rng.next_gaussian()};
    const Eigen::Vector2d x =
        y ? Eigen::Vector2d(cfg.mean_pos + Lp * z)
          : Eigen::Vector2d(cfg.mean_neg + Ln * z);
    const Eigen::Vector2d xr = rot * x;
    const double p1 = gaussian2_pdf(xr, cfg.mean_pos, cfg.cov_pos);
    const double p0 = gaussian2_pdf(xr, cfg.mean_neg, cfg.cov_neg);
    const double pz = p1 / (p1 + p0);
    ds.X.row(i) = x.transpose();
    ds.y[i] = y;
    ds.s[i] = rng.next_double() < pz ? 1.0 : 0.0;
  }
  return ds;
}

inline std::pair<FairDataset, FairDataset> split_dataset(const FairDataset& ds,
                                                         double test_frac,
                                                         std::uint64_t seed) {
  const long n = ds.size();
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  splitmix64 rng(mix_seed(seed, 0x5917));
  for (long i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.next_below(static_cast<std::uint64_t>(i + 1))]);
  const long n_test = std::llround(test_frac * n);
  auto take = [&](long from, long count) {
    FairDataset out;
    out.X = Matrix(count, ds.X.cols());
    out.y = Vector(count);
    out.s = Vector(count);
    for (long k = 0; k < count; ++k) {
      out.X.row(k) = ds.X.row(idx[from + k]);
      out.y[k] = ds.y[idx[from + k]];
      out.s[k] = ds.s[idx[from + k]];
    }
    return out;
  };
  return {take(n_test, n - n_test), take(0, n_test)};  // {train, test}
}

inline FairClassificationProblem gen_synthetic_fairness(
    const SyntheticFairnessConfig& cfg, std::uint64_t seed) {
  const FairDataset all = sample_synthetic_fairness(cfg, seed);
  auto [train, test] = split_dataset(all, cfg.test_frac, seed);
  FairClassificationProblem p(std::move(train), cfg.c, cfg.radius,
                              cfg.minibatch);
  p.attach_holdout(std::move(test));
  return p;
}

// ---------------------------------------------------------------------------
// CSV ingestion for external fairness datasets.
// ---------------------------------------------------------------------------

struct FairSchema {
  std::string label_col;
  std::string sensitive_col;
  std::vector<std::string> feature_cols;
  bool standardize = true;
};

struct IngestOptions {
  double c = 0.05;
  double radius = 10.0;
  int minibatch = 1;
  double test_frac = 0.3;
  double val_frac = 0.07;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline bool parse_number(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

// Maps a column with exactly two distinct values onto {0,1}
// (lexicographically smaller value -> 0). Errors name the offending row.
inline Vector binarize_column(const std::vector<std::string>& raw,
                              const std::string& col) {
  std::map<std::string, int> seen;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (seen.emplace(raw[r], 0).second && seen.size() > 2)
      throw config_error("column '" + col + "' is not binary: third distinct "
                         "value '" + raw[r] + "' at data row " +
                         std::to_string(r + 1));
  }
  if (seen.size() < 2)
    throw config_error("column '" + col + "' has fewer than two values");
  int v = 0;
  for (auto& kv : seen) kv.second = v++;
  Vector out(static_cast<long>(raw.size()));
  for (std::size_t r = 0; r < raw.size(); ++r)
    out[static_cast<long>(r)] = seen[raw[r]];
  return out;
}

}  // namespace detail

struct IngestResult {
  FairClassificationProblem problem;  // built on the training split
  std::vector<std::string> feature_names;  // after one-hot expansion
};

inline IngestResult ingest_csv(const std::string& path, const FairSchema& schema,
                               const IngestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty CSV file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  auto col_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    throw config_error("column '" + name + "' not found in " + path);
  };
  const long label_idx = col_index(schema.label_col);
  const long sens_idx = col_index(schema.sensitive_col);
  std::vector<long> feat_idx;
  for (const auto& f : schema.feature_cols) feat_idx.push_back(col_index(f));

  std::vector<std::vector<std::string>> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw config_error(path + ": row " + std::to_string(lineno) + " has " +
                         std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header.size()));
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw config_error("no data rows in " + path);
  const long n = static_cast<long>(rows.size());

  auto column = [&](long idx) {
    std::vector<std::string> col(n);
    for (long r = 0; r < n; ++r) col[r] = rows[r][idx];
    return col;
  };
  const Vector y = detail::binarize_column(column(label_idx), schema.label_col);
  const Vector s =
      detail::binarize_column(column(sens_idx), schema.sensitive_col);

  // numeric feature columns pass through; categorical ones expand one-hot
  std::vector<Vector> feat_vecs;
  std::vector<std::string> feat_names;
  for (std::size_t f = 0; f < feat_idx.size(); ++f) {
    const auto raw = column(feat_idx[f]);
    bool numeric = true;
    Vector vals(n);
    for (long r = 0; r < n && numeric; ++r)
      numeric = detail::parse_number(raw[r], vals[r]);
    if (numeric) {
      feat_vecs.push_back(vals);
      feat_names.push_back(schema.feature_cols[f]);
    } else {
      std::map<std::string, long> levels;
      for (const auto& v : raw) levels.emplace(v, 0);
      long k = 0;
      for (auto& kv : levels) kv.second = k++;
      for (const auto& [level, j] : levels) {
        Vector onehot = Vector::Zero(n);
        for (long r = 0; r < n; ++r)
          if (raw[r] == level) onehot[r] = 1.0;
        feat_vecs.push_back(onehot);
        feat_names.push_back(schema.feature_cols[f] + "=" + level);
      }
    }
  }
  FairDataset all;
  all.X = Matrix(n, static_cast<long>(feat_vecs.size()));
  for (std::size_t j = 0; j < feat_vecs.size(); ++j)
    all.X.col(static_cast<long>(j)) = feat_vecs[j];
  all.y = y;
  all.s = s;

  if (schema.standardize) {
    for (long j = 0; j < all.X.cols(); ++j) {
      const double mean = all.X.col(j).mean();
      all.X.col(j).array() -= mean;
      const double sd =
          std::sqrt(all.X.col(j).squaredNorm() / static_cast<double>(n));
      if (sd > 0) all.X.col(j) /= sd;
    }
  }

  // shuffle once, then carve test / validation / train
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  splitmix64 rng(mix_seed(opts.seed, 0x59f7));
  for (long i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.next_below(static_cast<std::uint64_t>(i + 1))]);
  const long n_test = std::llround(opts.test_frac * n);
  const long n_val = std::llround(opts.val_frac * n);
  if (n_test + n_val >= n)
    throw config_error("ingest_csv: splits leave no training rows");
  auto take = [&](long from, long count) {
    FairDataset out;
    out.X = Matrix(count, all.X.cols());
    out.y = Vector(count);
    out.s = Vector(count);
    for (long k = 0; k < count; ++k) {
      out.X.row(k) = all.X.row(idx[from + k]);
      out.y[k] = all.y[idx[from + k]];
      out.s[k] = all.s[idx[from + k]];
    }
    return out;
  };
  FairDataset test = take(0, n_test);
  FairDataset val = take(n_test, n_val);
  FairDataset train = take(n_test + n_val, n - n_test - n_val);
  FairClassificationProblem problem(std::move(train), opts.c, opts.radius,
                                    opts.minibatch);
  problem.attach_holdout(std::move(test), std::move(val));
  return IngestResult{std::move(problem), std::move(feat_names)};
}

// ---------------------------------------------------------------------------
// Structured matrix completion: least squares on observed cells inside a
// nuclear-norm ball, with the energy of the unobserved cells budgeted.
// Decision variables are m x n matrices flattened column-major.
// ---------------------------------------------------------------------------

class MatrixCompletionProblem {
 public:
  MatrixCompletionProblem(int rows, int cols, std::vector<long> obs_cells,
                          std::vector<double> obs_vals, double alpha,
                          double beta, int minibatch,
                          PowerIterConfig pi = {})
      : rows_(rows),
        cols_(cols),
        obs_cells_(std::move(obs_cells)),
        obs_vals_(std::move(obs_vals)),
        alpha_(alpha),
        beta_(beta),
        b_(minibatch),
        set_(rows, cols, alpha, pi) {
    if (obs_cells_.size() != obs_vals_.size())
      throw std::invalid_argument("matrix completion: cell/value mismatch");
    const long total = static_cast<long>(rows_) * cols_;
    std::vector<char> is_obs(total, 0);
    for (long c : obs_cells_) {
      if (c < 0 || c >= total)
        throw std::invalid_argument("matrix completion: cell out of range");
      if (is_obs[c]) throw std::invalid_argument("matrix completion: duplicate cell");
      is_obs[c] = 1;
    }
    comp_cells_.reserve(total - obs_cells_.size());
    for (long c = 0; c < total; ++c)
      if (!is_obs[c]) comp_cells_.push_back(c);
    if (b_ < 1 || b_ > static_cast<int>(obs_cells_.size()) ||
        b_ > static_cast<int>(comp_cells_.size()))
      throw std::invalid_argument(
          "matrix completion: minibatch exceeds an index set");
    obs_sq_sum_ = 0;
    for (double v : obs_vals_) obs_sq_sum_ += v * v;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return rows_ * cols_; }
  int n_constraints() const { return 1; }
  const NuclearBallSet& set() const { return set_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  int minibatch() const { return b_; }
  const std::vector<long>& observed_cells() const { return obs_cells_; }
  const std::vector<double>& observed_values() const { return obs_vals_; }
  const std::vector<long>& unobserved_cells() const { return comp_cells_; }
  double observed_sq_sum() const { return obs_sq_sum_; }

  /// Deterministic core of the oracle: unbiased gradient/constraint
  /// estimates from explicit index subsets. Exposed so tests can
  /// enumerate every subset.
  OracleEval eval_with_indices(const Vector& x,
                               const std::vector<std::size_t>& obs_pick,
                               const std::vector<std::size_t>& comp_pick) const {
    const double so = static_cast<double>(obs_cells_.size()) / obs_pick.size();
    const double sc =
        static_cast<double>(comp_cells_.size()) / comp_pick.size();
    OracleEval ev;
    ev.obj_grad = Vector::Zero(dim());
    for (std::size_t k : obs_pick) {
      const long cell = obs_cells_[k];
      ev.obj_grad[cell] = (x[cell] - obs_vals_[k]) * so;
    }
    double energy = 0;
    ev.constr_jac = Matrix::Zero(1, dim());
    for (std::size_t k : comp_pick) {
      const long cell = comp_cells_[k];
      energy += x[cell] * x[cell];
      ev.constr_jac(0, cell) = x[cell] * sc;
    }
    ev.constr_vals = Vector::Constant(1, 0.5 * sc * energy - beta_);
    return ev;
  }

  OracleEval eval(const Vector& x, const SampleContext& ctx) const {
    splitmix64 rng(ctx.rng_tag);
    const auto obs_pick = sample_distinct(rng, obs_cells_.size(), b_);
    const auto comp_pick = sample_distinct(rng, comp_cells_.size(), b_);
    return eval_with_indices(x, obs_pick, comp_pick);
  }

  double sample_objective(const Vector& x, const SampleContext& ctx) const {
    splitmix64 rng(ctx.rng_tag);
    const auto obs_pick = sample_distinct(rng, obs_cells_.size(), b_);
    const double so = static_cast<double>(obs_cells_.size()) / obs_pick.size();
    double sq = 0;
    for (std::size_t k : obs_pick) {
      const double d = x[obs_cells_[k]] - obs_vals_[k];
      sq += d * d;
    }
    return 0.5 * so * sq;
  }

  double full_objective(const Vector& x) const {
    double sq = 0;
    for (std::size_t k = 0; k < obs_cells_.size(); ++k) {
      const double d = x[obs_cells_[k]] - obs_vals_[k];
      sq += d * d;
    }
    return 0.5 * sq;
  }

  Vector full_constraints(const Vector& x) const {
    double energy = 0;
    for (long cell : comp_cells_) energy += x[cell] * x[cell];
    return Vector::Constant(1, 0.5 * energy - beta_);
  }

  Vector full_objective_grad(const Vector& x) const {
    Vector g = Vector::Zero(dim());
    for (std::size_t k = 0; k < obs_cells_.size(); ++k)
      g[obs_cells_[k]] = x[obs_cells_[k]] - obs_vals_[k];
    return g;
  }

  Matrix full_constraints_jac(const Vector& x) const {
    Matrix j = Matrix::Zero(1, dim());
    for (long cell : comp_cells_) j(0, cell) = x[cell];
    return j;
  }

  double smoothness_f() const {
    return static_cast<double>(obs_cells_.size()) / b_;
  }
  double smoothness_h() const {
    return static_cast<double>(comp_cells_.size()) / b_;
  }

  Vector slater_point() const { return Vector::Zero(dim()); }

  /// Observed-entry squared error of X divided by observed-entry energy
  /// of M; equals 2 F(X) / sum_I M^2.
  double normalized_error(const Vector& x) const {
    if (!(obs_sq_sum_ > 0))
      throw error("normalized_error: observed entries are all zero");
    return 2.0 * full_objective(x) / obs_sq_sum_;
  }

 private:
  int rows_, cols_;
  std::vector<long> obs_cells_;
  std::vector<double> obs_vals_;
  std::vector<long> comp_cells_;
  double alpha_, beta_;
  int b_;
  NuclearBallSet set_;
  double obs_sq_sum_ = 0;
};

struct SyntheticMCConfig {
  int rows = 200;
  int cols = 300;
  int rank = 10;
  double gamma = 1e-3;             // observation noise level
  double sparsity_left = 0.7;      // zero probability in the left factor
  double sparsity_right = 0.5;
  double obs_zero_frac = 0.01;     // fraction of zero cells observed
  double obs_nonzero_frac = 0.90;  // fraction of nonzero cells observed
  int minibatch = 200;
  PowerIterConfig power_iter;
};

struct SyntheticMC {
  MatrixCompletionProblem problem;
  Matrix ground_truth;  // X*
  Matrix noise;         // W on the full grid
};

inline SyntheticMC gen_synthetic_mc(const SyntheticMCConfig& cfg,
                                    std::uint64_t seed) {
  if (cfg.rank > std::min(cfg.rows, cfg.cols))
    throw std::invalid_argument("gen_synthetic_mc: rank too large");
  const long total = static_cast<long>(cfg.rows) * cfg.cols;
  Matrix Xs;
  int attempt = 0;
  for (;; ++attempt) {
    if (attempt >= 10)
      throw error("gen_synthetic_mc: ground truth degenerate (all zero) "
                  "after 10 attempts");
    splitmix64 rng(mix_seed(seed, 0x3c0 + attempt));
    Matrix L(cfg.rows, cfg.rank), R(cfg.rank, cfg.cols);
    for (int j = 0; j < cfg.rank; ++j)
      for (int i = 0; i < cfg.rows; ++i)
        L(i, j) = rng.next_double() < cfg.sparsity_left ? 0.0
                                                        : rng.next_double();
    for (int j = 0; j < cfg.cols; ++j)
      for (int i = 0; i < cfg.rank; ++i)
        R(i, j) = rng.next_double() < cfg.sparsity_right ? 0.0
                                                         : rng.next_double();
    Xs = L * R;
    if (Xs.norm() > 0) break;
  }

  splitmix64 rng(mix_seed(seed, 0x77aa));
  std::vector<long> zero_cells, nonzero_cells;
  for (long c = 0; c < total; ++c)
    (Xs(c % cfg.rows, c / cfg.rows) == 0.0 ? zero_cells : nonzero_cells)
        .push_back(c);
  const long nz_obs = std::llround(cfg.obs_nonzero_frac *
                                   static_cast<double>(nonzero_cells.size()));
  const long z_obs = std::llround(cfg.obs_zero_frac *
                                  static_cast<double>(zero_cells.size()));
  std::vector<long> obs;
  for (std::size_t k : sample_distinct(rng, nonzero_cells.size(),
                                       static_cast<std::size_t>(nz_obs)))
    obs.push_back(nonzero_cells[k]);
  for (std::size_t k :
       sample_distinct(rng, zero_cells.size(), static_cast<std::size_t>(z_obs)))
    obs.push_back(zero_cells[k]);
  std::sort(obs.begin(), obs.end());

  Matrix Z(cfg.rows, cfg.cols);
  for (int j = 0; j < cfg.cols; ++j)
    for (int i = 0; i < cfg.rows; ++i) Z(i, j) = rng.next_gaussian();
  const Matrix W = (cfg.gamma * Xs.norm() / Z.norm()) * Z;

  std::vector<double> vals;
  vals.reserve(obs.size());
  for (long c : obs)
    vals.push_back(Xs(c % cfg.rows, c / cfg.rows) +
                   W(c % cfg.rows, c / cfg.rows));

  // alpha = ||X*||_*, beta = half the unobserved energy of X*
  Eigen::BDCSVD<Matrix> svd(Xs);
  const double alpha = svd.singularValues().sum();
  std::vector<char> is_obs(total, 0);
  for (long c : obs) is_obs[c] = 1;
  double beta = 0;
  for (long c = 0; c < total; ++c)
    if (!is_obs[c]) {
      const double v = Xs(c % cfg.rows, c / cfg.rows);
      beta += 0.5 * v * v;
    }

  return SyntheticMC{
      MatrixCompletionProblem(cfg.rows, cfg.cols, std::move(obs),
                              std::move(vals), alpha, beta, cfg.minibatch,
                              cfg.power_iter),
      std::move(Xs), W};
}

}  // namespace csopt

#endif  // CSOPT_PROBLEMS_HPP
