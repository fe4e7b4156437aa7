#pragma once

#include <Eigen/Dense>
#include <random>

#include "phk/filters.hpp"
#include "phk/lasso.hpp"

namespace phk {

// L1 coefficients for each variable and its knockoff on the augmented design.
struct ImportanceScores {
  Eigen::VectorXd z;        // original-variable scores
  Eigen::VectorXd z_tilde;  // knockoff scores
};

// Antisymmetric contrast |u| - |v|.
double w_from_scores(double z, double z_tilde);

// Fits the L1 solver on [X, X_tilde] and returns the per-pair coefficients.
// Within each pair the two columns are put in a content-canonical order and
// the whole set of 2p columns is then shuffled (seeded), so the solver input
// is invariant under swapping any X_i with its knockoff; swapping therefore
// swaps z_i and z_tilde_i exactly, bit for bit. Pairs with bit-identical
// columns get the averaged coefficient on both sides.
ImportanceScores importance_scores(const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& x_tilde,
                                   const Eigen::VectorXd& y, const FitConfig& config,
                                   std::mt19937_64& rng);

// W_i = |z_i| - |z_tilde_i| from importance_scores.
WStatistics knockoff_statistics(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_tilde,
                                const Eigen::VectorXd& y, const FitConfig& config,
                                std::mt19937_64& rng, int run_id = 0);

}  // namespace phk
