#include "phk/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace phk {

double w_from_scores(double z, double z_tilde) {
  return std::fabs(z) - std::fabs(z_tilde);
}

namespace {

void standardize_in_place(Eigen::MatrixXd& m) {
  const auto n = static_cast<double>(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double mean = m.col(j).mean();
    m.col(j).array() -= mean;
    double sd = std::sqrt(m.col(j).squaredNorm() / n);
    if (sd == 0.0)
      throw std::invalid_argument("standardize: zero-variance column");
    m.col(j) /= sd;
  }
}

// -1/0/+1 value-lexicographic order of two columns.
int compare_columns(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, a) < m(i, b)) return -1;
    if (m(i, a) > m(i, b)) return 1;
  }
  return 0;
}

}  // namespace

ImportanceScores importance_scores(const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& x_tilde,
                                   const Eigen::VectorXd& y, const FitConfig& config,
                                   std::mt19937_64& rng) {
  validate(config);
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols())
    throw std::invalid_argument("importance_scores: knockoff shape mismatch");
  if (x.rows() != y.size())
    throw std::invalid_argument("importance_scores: response shape mismatch");
  const Eigen::Index p = x.cols();
  const Eigen::Index q = 2 * p;

  Eigen::MatrixXd aug(x.rows(), q);
  aug.leftCols(p) = x;
  aug.rightCols(p) = x_tilde;
  if (config.standardize) standardize_in_place(aug);

  // Canonical within-pair order; `flipped[i]` means the knockoff column sits
  // in slot i. Ties (identical columns) keep the input order and are averaged
  // after the fit.
  std::vector<char> flipped(p, 0), tied(p, 0);
  for (Eigen::Index i = 0; i < p; ++i) {
    int c = compare_columns(aug, i, p + i);
    if (c == 0) {
      tied[i] = 1;
    } else if (c > 0) {
      flipped[i] = 1;
      aug.col(i).swap(aug.col(p + i));
    }
  }

  std::vector<Eigen::Index> perm(q);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd shuffled(aug.rows(), q);
  for (Eigen::Index j = 0; j < q; ++j) shuffled.col(j) = aug.col(perm[j]);

  double lambda;
  if (config.lambda_rule.kind == LambdaRule::Kind::fixed) {
    lambda = config.lambda_rule.lambda;
  } else {
    auto grid = make_lambda_grid(shuffled, y, config.family, config.lambda_rule.grid_size);
    lambda = cv_select_lambda(shuffled, y, config.family, config.lambda_rule.folds,
                              grid, rng);
  }
  Eigen::VectorXd beta_shuffled =
      fit_l1(shuffled, y, config.family, lambda, config.tol, config.max_iter);

  Eigen::VectorXd beta(q);
  for (Eigen::Index j = 0; j < q; ++j) beta[perm[j]] = beta_shuffled[j];

  ImportanceScores scores;
  scores.z.resize(p);
  scores.z_tilde.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double first = beta[i], second = beta[p + i];
    if (tied[i]) {
      double avg = 0.5 * (first + second);
      scores.z[i] = avg;
      scores.z_tilde[i] = avg;
    } else if (flipped[i]) {
      scores.z[i] = second;
      scores.z_tilde[i] = first;
    } else {
      scores.z[i] = first;
      scores.z_tilde[i] = second;
    }
  }
  return scores;
}

WStatistics knockoff_statistics(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_tilde,
                                const Eigen::VectorXd& y, const FitConfig& config,
                                std::mt19937_64& rng, int run_id) {
  ImportanceScores s = importance_scores(x, x_tilde, y, config, rng);
  WStatistics ws;
  ws.run_id = run_id;
  ws.w.resize(s.z.size());
  for (Eigen::Index i = 0; i < s.z.size(); ++i)
    ws.w[i] = w_from_scores(s.z[i], s.z_tilde[i]);
  return ws;
}

}  // namespace phk
