#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "phk/lasso.hpp"

using phk::Family;

namespace {

Eigen::MatrixXd random_matrix(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(n, p);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < p; ++c) m(r, c) = normal(rng);
  return m;
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

void population_standardize(Eigen::MatrixXd& m) {
  const auto n = static_cast<double>(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    m.col(j).array() -= m.col(j).mean();
    m.col(j) /= std::sqrt(m.col(j).squaredNorm() / n);
  }
}

}  // namespace

TEST_CASE("full shrinkage at lambda_max") {
  std::mt19937_64 rng(41);
  Eigen::MatrixXd x = random_matrix(60, 8, rng);
  Eigen::VectorXd y = random_vector(60, rng);
  double lmax = phk::lambda_max(x, y, Family::gaussian);
  CHECK(phk::fit_l1(x, y, Family::gaussian, lmax, 1e-9, 500).isZero(0.0));
  CHECK(phk::fit_l1(x, y, Family::gaussian, 2.0 * lmax, 1e-9, 500).isZero(0.0));

  Eigen::VectorXd yb(60);
  for (int i = 0; i < 60; ++i) yb[i] = i % 2;
  double lmax_b = phk::lambda_max(x, yb, Family::logistic);
  CHECK(phk::fit_l1(x, yb, Family::logistic, lmax_b, 1e-9, 500).isZero(0.0));
}

TEST_CASE("lambda zero recovers least squares") {
  std::mt19937_64 rng(42);
  Eigen::MatrixXd x = random_matrix(80, 5, rng);
  Eigen::VectorXd y = random_vector(80, rng);
  Eigen::VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  Eigen::VectorXd cd = phk::fit_l1(x, y, Family::gaussian, 0.0, 1e-11, 20000);
  CHECK((cd - ols).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("single standardized column equals the soft-threshold solution") {
  std::mt19937_64 rng(43);
  Eigen::MatrixXd x = random_matrix(50, 1, rng);
  population_standardize(x);
  Eigen::VectorXd y = random_vector(50, rng) + 0.8 * x.col(0);
  double z = x.col(0).dot(y) / 50.0;
  for (double lambda : {0.05, 0.3, 2.0}) {
    double expect = z > lambda ? z - lambda : (z < -lambda ? z + lambda : 0.0);
    Eigen::VectorXd beta = phk::fit_l1(x, y, Family::gaussian, lambda, 1e-12, 100);
    CHECK(beta[0] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("objective is non-increasing across sweeps") {
  std::mt19937_64 rng(44);
  Eigen::MatrixXd x = random_matrix(70, 12, rng);
  Eigen::VectorXd y = random_vector(70, rng);
  std::vector<double> trace;
  phk::fit_l1(x, y, Family::gaussian, 0.02, 1e-10, 200, &trace);
  REQUIRE(trace.size() > 1);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-14);

  Eigen::VectorXd yb(70);
  for (int i = 0; i < 70; ++i) yb[i] = (x(i, 0) + x(i, 1) > 0) ? 1.0 : 0.0;
  trace.clear();
  phk::fit_l1(x, yb, Family::logistic, 0.01, 1e-8, 200, &trace);
  REQUIRE(trace.size() > 1);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-14);
}

TEST_CASE("logistic fit finds a strong signal") {
  std::mt19937_64 rng(45);
  Eigen::MatrixXd x = random_matrix(400, 4, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd y(400);
  for (int i = 0; i < 400; ++i) {
    double pr = 1.0 / (1.0 + std::exp(-2.5 * x(i, 2)));
    y[i] = unif(rng) < pr ? 1.0 : 0.0;
  }
  Eigen::VectorXd beta = phk::fit_l1(x, y, Family::logistic, 0.02, 1e-8, 2000);
  CHECK(beta[2] > 0.5);
  CHECK(std::fabs(beta[0]) < 0.3);
}

TEST_CASE("fit input validation") {
  std::mt19937_64 rng(46);
  Eigen::MatrixXd x = random_matrix(20, 3, rng);
  Eigen::VectorXd y = random_vector(20, rng);
  y[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(phk::fit_l1(x, y, Family::gaussian, 0.1, 1e-6, 10),
                  std::invalid_argument);
  Eigen::VectorXd ok = random_vector(20, rng);
  CHECK_THROWS_AS(phk::fit_l1(x, ok, Family::gaussian, -0.1, 1e-6, 10),
                  std::invalid_argument);
  phk::FitConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(phk::validate(bad), std::invalid_argument);
  phk::FitConfig bad_folds;
  bad_folds.lambda_rule.folds = 1;
  CHECK_THROWS_AS(phk::validate(bad_folds), std::invalid_argument);
}

TEST_CASE("lambda grid shape") {
  std::mt19937_64 rng(47);
  Eigen::MatrixXd x = random_matrix(40, 6, rng);
  Eigen::VectorXd y = random_vector(40, rng);
  auto grid = phk::make_lambda_grid(x, y, Family::gaussian, 20, 0.01);
  REQUIRE(grid.size() == 20);
  CHECK(grid.front() == phk::lambda_max(x, y, Family::gaussian));
  CHECK(grid.back() == doctest::Approx(0.01 * grid.front()));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
  auto one = phk::make_lambda_grid(x, y, Family::gaussian, 1);
  CHECK(one == std::vector<double>{grid.front()});
}

TEST_CASE("cv picks the forced choice on a one-point grid") {
  std::mt19937_64 rng(48);
  Eigen::MatrixXd x = random_matrix(30, 4, rng);
  Eigen::VectorXd y = random_vector(30, rng);
  std::mt19937_64 cv_rng(1);
  CHECK(phk::cv_select_lambda(x, y, Family::gaussian, 5, {0.37}, cv_rng) == 0.37);
}

TEST_CASE("cv on pure noise stays near lambda_max") {
  std::mt19937_64 rng(49);
  Eigen::MatrixXd x = random_matrix(120, 8, rng);
  population_standardize(x);
  Eigen::VectorXd y = random_vector(120, rng);
  auto grid = phk::make_lambda_grid(x, y, Family::gaussian, 30);
  std::mt19937_64 cv_rng(2);
  double chosen = phk::cv_select_lambda(x, y, Family::gaussian, 5, grid, cv_rng);
  CHECK(chosen >= 0.2 * grid.front());
}

TEST_CASE("cv finds a strong single signal") {
  std::mt19937_64 rng(50);
  Eigen::MatrixXd x = random_matrix(300, 5, rng);
  population_standardize(x);
  Eigen::VectorXd y = 1.5 * x.col(1) + 0.3 * random_vector(300, rng);
  auto grid = phk::make_lambda_grid(x, y, Family::gaussian, 40);
  std::mt19937_64 cv_rng(3);
  double chosen = phk::cv_select_lambda(x, y, Family::gaussian, 10, grid, cv_rng);
  CHECK(chosen < grid.front());
  Eigen::VectorXd beta = phk::fit_l1(x, y, Family::gaussian, chosen, 1e-8, 2000);
  CHECK(beta[1] != 0.0);
}

TEST_CASE("cv rejects folds with a single class") {
  std::mt19937_64 rng(51);
  Eigen::MatrixXd x = random_matrix(24, 3, rng);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(24);
  y[5] = 1.0;  // training sets opposite the fold holding row 5 lose class 1
  std::mt19937_64 cv_rng(4);
  CHECK_THROWS_AS(
      phk::cv_select_lambda(x, y, Family::logistic, 4, {0.1, 0.05}, cv_rng),
      std::runtime_error);
}
