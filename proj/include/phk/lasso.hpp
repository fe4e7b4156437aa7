#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace phk {

enum class Family { gaussian, logistic };

struct LambdaRule {
  enum class Kind { fixed, cv };
  Kind kind = Kind::cv;
  double lambda = 0.0;  // fixed
  int folds = 10;       // cv
  int grid_size = 50;   // cv
};

struct FitConfig {
  Family family = Family::gaussian;
  LambdaRule lambda_rule;
  int max_iter = 1000;   // full coordinate sweeps
  double tol = 1e-6;     // max coefficient change per sweep
  bool standardize = true;
};

void validate(const FitConfig& cfg);

// Penalized objective at beta: (1/2n)||y - Xb||^2 + lambda ||b||_1 for the
// gaussian family, mean logistic negative log-likelihood + lambda ||b||_1
// otherwise. No intercept; callers standardize columns beforehand if wanted.
double l1_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                    double lambda, const Eigen::VectorXd& beta);

// Coordinate-descent minimizer. Gaussian coordinates are minimized exactly;
// logistic coordinates take a proximal step under the 1/4 curvature bound,
// so the objective is non-increasing across sweeps for both families.
// `objective_trace`, when given, receives the objective after every sweep.
Eigen::VectorXd fit_l1(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                       double lambda, double tol, int max_iter,
                       std::vector<double>* objective_trace = nullptr,
                       const Eigen::VectorXd* warm_start = nullptr);

// Smallest lambda with an all-zero solution: max_j |x_j'y|/n (gaussian) or
// max_j |x_j'(y - 1/2)|/n (logistic).
double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family);

// Log-spaced grid from lambda_max down to lambda_max * min_ratio.
std::vector<double> make_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     Family family, int size, double min_ratio = 0.01);

// K-fold cross-validation over a descending grid with warm starts; returns
// the lambda with the smallest mean held-out loss, ties toward larger lambda.
double cv_select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                        int folds, const std::vector<double>& grid, std::mt19937_64& rng);

}  // namespace phk
