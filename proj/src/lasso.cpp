#include "phk/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace phk {

void validate(const FitConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("FitConfig: tol must be > 0");
  if (cfg.max_iter < 1) throw std::invalid_argument("FitConfig: max_iter must be >= 1");
  if (cfg.lambda_rule.kind == LambdaRule::Kind::cv) {
    if (cfg.lambda_rule.folds < 2)
      throw std::invalid_argument("FitConfig: cv needs folds >= 2");
    if (cfg.lambda_rule.grid_size < 1)
      throw std::invalid_argument("FitConfig: cv needs grid_size >= 1");
  } else if (cfg.lambda_rule.lambda < 0.0) {
    throw std::invalid_argument("FitConfig: lambda must be >= 0");
  }
}

namespace {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

double logistic_nll(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double e = eta[i];
    // log(1 + exp(e)) - y*e, evaluated stably
    s += (e > 0.0 ? e : 0.0) + std::log1p(std::exp(-std::fabs(e))) - y[i] * e;
  }
  return s / static_cast<double>(eta.size());
}

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (x.rows() != y.size()) throw std::invalid_argument("fit_l1: shape mismatch");
  if (x.rows() == 0) throw std::invalid_argument("fit_l1: empty design");
  if (!y.allFinite()) throw std::invalid_argument("fit_l1: non-finite response");
  if (!x.allFinite()) throw std::invalid_argument("fit_l1: non-finite design");
  if (lambda < 0.0) throw std::invalid_argument("fit_l1: lambda must be >= 0");
}

}  // namespace

double l1_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                    double lambda, const Eigen::VectorXd& beta) {
  const auto n = static_cast<double>(x.rows());
  double loss;
  if (family == Family::gaussian) {
    loss = 0.5 * (y - x * beta).squaredNorm() / n;
  } else {
    loss = logistic_nll(x * beta, y);
  }
  return loss + lambda * beta.lpNorm<1>();
}

Eigen::VectorXd fit_l1(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                       double lambda, double tol, int max_iter,
                       std::vector<double>* objective_trace,
                       const Eigen::VectorXd* warm_start) {
  check_inputs(x, y, lambda);
  if (!(tol > 0.0)) throw std::invalid_argument("fit_l1: tol must be > 0");
  const auto n = static_cast<double>(x.rows());
  const Eigen::Index q = x.cols();

  Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(q);
  if (warm_start && warm_start->size() != q)
    throw std::invalid_argument("fit_l1: warm start size mismatch");

  Eigen::VectorXd colsq(q);
  for (Eigen::Index j = 0; j < q; ++j) colsq[j] = x.col(j).squaredNorm() / n;

  if (family == Family::gaussian) {
    Eigen::VectorXd resid = y - x * beta;
    for (int sweep = 0; sweep < max_iter; ++sweep) {
      double max_delta = 0.0;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (colsq[j] == 0.0) continue;
        double z = x.col(j).dot(resid) / n + colsq[j] * beta[j];
        double bj = soft_threshold(z, lambda) / colsq[j];
        double delta = bj - beta[j];
        if (delta != 0.0) {
          resid.noalias() -= delta * x.col(j);
          beta[j] = bj;
          max_delta = std::max(max_delta, std::fabs(delta));
        }
      }
      if (objective_trace)
        objective_trace->push_back(0.5 * resid.squaredNorm() / n +
                                   lambda * beta.lpNorm<1>());
      if (max_delta <= tol) break;
    }
    return beta;
  }

  // Logistic: proximal coordinate steps under the global curvature bound
  // sigma'(.) <= 1/4, which keeps every update a descent step.
  Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = sigmoid(eta[i]);
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
      double lj = colsq[j] / 4.0;
      if (lj == 0.0) continue;
      double grad = x.col(j).dot(mu - y) / n;
      double bj = soft_threshold(lj * beta[j] - grad, lambda) / lj;
      double delta = bj - beta[j];
      if (delta != 0.0) {
        eta.noalias() += delta * x.col(j);
        for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = sigmoid(eta[i]);
        beta[j] = bj;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    if (objective_trace)
      objective_trace->push_back(logistic_nll(eta, y) + lambda * beta.lpNorm<1>());
    if (max_delta <= tol) break;
  }
  return beta;
}

double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family) {
  check_inputs(x, y, 0.0);
  const auto n = static_cast<double>(x.rows());
  // Same per-column dot products as the solver's first sweep, so the
  // all-zero fit at lambda = lambda_max is exact.
  Eigen::VectorXd r = family == Family::gaussian ? y : (y.array() - 0.5).matrix();
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    lmax = std::max(lmax, std::fabs(x.col(j).dot(r) / n));
  return lmax;
}

std::vector<double> make_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     Family family, int size, double min_ratio) {
  if (size < 1) throw std::invalid_argument("make_lambda_grid: size must be >= 1");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0))
    throw std::invalid_argument("make_lambda_grid: min_ratio must be in (0, 1]");
  double lmax = lambda_max(x, y, family);
  std::vector<double> grid;
  grid.reserve(size);
  if (size == 1 || lmax == 0.0) {
    grid.assign(size, lmax);
    return grid;
  }
  double logmax = std::log(lmax);
  double logmin = std::log(lmax * min_ratio);
  for (int i = 0; i < size; ++i) {
    double f = static_cast<double>(i) / (size - 1);
    grid.push_back(std::exp(logmax + f * (logmin - logmax)));
  }
  grid.front() = lmax;
  return grid;
}

namespace {

struct FoldSplit {
  std::vector<std::vector<int>> val_rows;  // per fold
};

FoldSplit assign_folds(int n, int folds, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  FoldSplit split;
  split.val_rows.resize(folds);
  for (int i = 0; i < n; ++i) split.val_rows[i % folds].push_back(idx[i]);
  return split;
}

bool has_both_classes(const Eigen::VectorXd& y, const std::vector<int>& rows) {
  bool zero = false, one = false;
  for (int r : rows) (y[r] < 0.5 ? zero : one) = true;
  return zero && one;
}

bool folds_ok(const Eigen::VectorXd& y, const FoldSplit& split, Family family) {
  if (family != Family::logistic) return true;
  const int n = static_cast<int>(y.size());
  std::vector<char> in_fold(n, 0);
  for (const auto& rows : split.val_rows) {
    if (!has_both_classes(y, rows)) return false;
    for (int r : rows) in_fold[r] = 1;
    std::vector<int> train;
    for (int i = 0; i < n; ++i)
      if (!in_fold[i]) train.push_back(i);
    for (int r : rows) in_fold[r] = 0;
    if (!has_both_classes(y, train)) return false;
  }
  return true;
}

}  // namespace

double cv_select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                        int folds, const std::vector<double>& grid, std::mt19937_64& rng) {
  if (grid.empty()) throw std::invalid_argument("cv_select_lambda: empty grid");
  if (folds < 2) throw std::invalid_argument("cv_select_lambda: folds must be >= 2");
  const int n = static_cast<int>(x.rows());
  if (folds > n) throw std::invalid_argument("cv_select_lambda: more folds than rows");
  if (grid.size() == 1) return grid.front();

  std::vector<double> lambdas = grid;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());

  FoldSplit split = assign_folds(n, folds, rng);
  if (!folds_ok(y, split, family)) {
    split = assign_folds(n, folds, rng);
    if (!folds_ok(y, split, family))
      throw std::runtime_error("cv_select_lambda: fold with a single response class");
  }

  const int m = static_cast<int>(lambdas.size());
  std::vector<double> mean_loss(m, 0.0);
  std::vector<char> is_val(n, 0);
  for (int f = 0; f < folds; ++f) {
    const auto& val = split.val_rows[f];
    for (int r : val) is_val[r] = 1;
    const int n_train = n - static_cast<int>(val.size());
    Eigen::MatrixXd xt(n_train, x.cols());
    Eigen::VectorXd yt(n_train);
    Eigen::MatrixXd xv(val.size(), x.cols());
    Eigen::VectorXd yv(val.size());
    int ti = 0;
    for (int i = 0; i < n; ++i) {
      if (is_val[i]) continue;
      xt.row(ti) = x.row(i);
      yt[ti++] = y[i];
    }
    for (std::size_t vi = 0; vi < val.size(); ++vi) {
      xv.row(static_cast<Eigen::Index>(vi)) = x.row(val[vi]);
      yv[static_cast<Eigen::Index>(vi)] = y[val[vi]];
    }
    for (int r : val) is_val[r] = 0;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    for (int li = 0; li < m; ++li) {
      beta = fit_l1(xt, yt, family, lambdas[li], 1e-5, 250, nullptr, &beta);
      double loss;
      if (family == Family::gaussian) {
        loss = 0.5 * (yv - xv * beta).squaredNorm() / static_cast<double>(yv.size());
      } else {
        loss = logistic_nll(xv * beta, yv);
      }
      mean_loss[li] += loss / folds;
    }
  }

  int best = 0;
  for (int li = 1; li < m; ++li)
    if (mean_loss[li] < mean_loss[best]) best = li;  // strict: ties keep larger lambda
  return lambdas[best];
}

}  // namespace phk
