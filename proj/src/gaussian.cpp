#include "phk/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace phk {

namespace {

Eigen::MatrixXd standard_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) z(r, c) = normal(rng);
  return z;
}

}  // namespace

CovarianceMatrix ar1_covariance(int p, double rho) {
  if (p < 1) throw std::invalid_argument("ar1_covariance: p must be >= 1");
  if (!(std::fabs(rho) < 1.0))
    throw std::invalid_argument("ar1_covariance: |rho| must be < 1");
  CovarianceMatrix cov;
  cov.m.resize(p, p);
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < p; ++k) cov.m(j, k) = std::pow(rho, std::abs(j - k));
  return cov;
}

DesignMatrix sample_design(int n, const CovarianceMatrix& cov, std::mt19937_64& rng) {
  if (n < 0) throw std::invalid_argument("sample_design: n must be >= 0");
  Eigen::LLT<Eigen::MatrixXd> llt(cov.m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_design: covariance is not positive definite");
  DesignMatrix x;
  if (n == 0) {
    x.values.resize(0, cov.dim());
    return x;
  }
  Eigen::MatrixXd z = standard_normal(n, cov.dim(), rng);
  x.values = z * llt.matrixL().transpose();
  return x;
}

KnockoffConfig equicorrelated_s(const CovarianceMatrix& cov, double psd_slack) {
  if (!(psd_slack > 0.0 && psd_slack <= 1.0))
    throw std::invalid_argument("equicorrelated_s: psd_slack must be in (0, 1]");
  const int p = cov.dim();
  for (int j = 0; j < p; ++j)
    if (std::fabs(cov.m(j, j) - 1.0) > 1e-9)
      throw std::invalid_argument("equicorrelated_s: covariance must have unit diagonal");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.m);
  double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0))
    throw std::runtime_error("equicorrelated_s: covariance is not positive definite");
  KnockoffConfig config;
  config.psd_slack = psd_slack;
  config.s = Eigen::VectorXd::Constant(p, psd_slack * std::min(2.0 * lmin, 1.0));
  return config;
}

KnockoffSampler::KnockoffSampler(const CovarianceMatrix& cov, const KnockoffConfig& config) {
  const int p = cov.dim();
  if (config.s.size() != p)
    throw std::invalid_argument("KnockoffSampler: s has wrong length");
  Eigen::LLT<Eigen::MatrixXd> llt(cov.m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("KnockoffSampler: covariance is not positive definite");
  Eigen::MatrixXd d = config.s.asDiagonal();
  Eigen::MatrixXd sigma_inv_d = llt.solve(d);
  mean_map_ = Eigen::MatrixXd::Identity(p, p) - sigma_inv_d;
  Eigen::MatrixXd cond = 2.0 * d - d * sigma_inv_d;
  cond = 0.5 * (cond + cond.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cond);
  double scale = std::max(1.0, cond.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale)
    throw std::runtime_error("KnockoffSampler: conditional covariance is not PSD");
  Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  noise_root_ = eig.eigenvectors() * roots.asDiagonal();
}

KnockoffMatrix KnockoffSampler::sample(const DesignMatrix& x, std::mt19937_64& rng) const {
  if (x.p() != mean_map_.rows())
    throw std::invalid_argument("KnockoffSampler: design has wrong width");
  KnockoffMatrix out;
  if (x.n() == 0) {
    out.values.resize(0, x.p());
    return out;
  }
  Eigen::MatrixXd g = standard_normal(x.n(), x.p(), rng);
  out.values = x.values * mean_map_ + g * noise_root_.transpose();
  return out;
}

KnockoffMatrix sample_knockoffs(const DesignMatrix& x, const CovarianceMatrix& cov,
                                const KnockoffConfig& config, std::mt19937_64& rng) {
  KnockoffSampler sampler(cov, config);
  return sampler.sample(x, rng);
}

}  // namespace phk
