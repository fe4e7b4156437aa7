#pragma once

#include <Eigen/Dense>
#include <random>

namespace phk {

// Covariance of the model-X design; unit diagonal and positive definite in
// everything this library builds.
struct CovarianceMatrix {
  Eigen::MatrixXd m;
  int dim() const { return static_cast<int>(m.rows()); }
};

struct DesignMatrix {
  Eigen::MatrixXd values;  // n x p
  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
};

// Diagonal decoupling parameters s for the conditional knockoff draw. The
// slack keeps 2D - D Sigma^-1 D positive semidefinite under floating-point
// eigenvalue drift.
struct KnockoffConfig {
  Eigen::VectorXd s;
  double psd_slack = 1.0 - 1e-6;
};

struct KnockoffMatrix {
  Eigen::MatrixXd values;  // n x p
};

constexpr double kDefaultPsdSlack = 1.0 - 1e-6;

// AR(1) correlation matrix: entry (j,k) = rho^|j-k|. Requires |rho| < 1.
CovarianceMatrix ar1_covariance(int p, double rho);

// n i.i.d. N(0, Sigma) rows via the lower-triangular Cholesky factor.
DesignMatrix sample_design(int n, const CovarianceMatrix& cov, std::mt19937_64& rng);

// Equicorrelated construction: s_j = psd_slack * min(2 lambda_min(Sigma), 1).
KnockoffConfig equicorrelated_s(const CovarianceMatrix& cov,
                                double psd_slack = kDefaultPsdSlack);

// Precomputed conditional-Gaussian sampler: given a design row x, knockoffs
// are drawn from N(x (I - Sigma^-1 D), 2D - D Sigma^-1 D).
class KnockoffSampler {
 public:
  KnockoffSampler(const CovarianceMatrix& cov, const KnockoffConfig& config);

  KnockoffMatrix sample(const DesignMatrix& x, std::mt19937_64& rng) const;

 private:
  Eigen::MatrixXd mean_map_;    // I - Sigma^-1 D
  Eigen::MatrixXd noise_root_;  // B with B B' = 2D - D Sigma^-1 D
};

KnockoffMatrix sample_knockoffs(const DesignMatrix& x, const CovarianceMatrix& cov,
                                const KnockoffConfig& config, std::mt19937_64& rng);

}  // namespace phk
