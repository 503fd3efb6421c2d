#pragma once

#include <Eigen/Dense>

#include "tspca/types.hpp"

namespace tspca {

// Brute-force batch PCA and subspace metrics, used as ground truth when
// validating streaming runs. Everything here is a pure function; O(d^3) by
// design and intended for d up to a few hundred.

struct EigenSolution {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // orthonormal, column t pairs with eigenvalue t
};

// Uncentered second-moment matrix pooled over all instance/time rows:
// C = (1 / (B*N)) sum x xᵀ. No mean subtraction, matching the streaming
// estimator. Expects a validated dataset.
Eigen::MatrixXd pooled_covariance(const Dataset& ds);

// Full symmetric eigendecomposition, eigenvalues sorted descending and each
// eigenvector's largest-magnitude entry made positive for determinism.
EigenSolution batch_pca(const Eigen::MatrixXd& covariance);

// Normalized projector distance ||Q1 Q1ᵀ - Q2 Q2ᵀ||_F / sqrt(2k) in [0, 1];
// 0 iff the column spans coincide, 1 iff they are orthogonal. Invariant to
// column sign flips and permutations.
double subspace_distance(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2);

// Relative Frobenius error of the rank-k projection, ||X - X q qᵀ||_F / ||X||_F
// over all instance/time rows. Exactly 0 when k = d.
double reconstruction_error(const Dataset& ds, const Eigen::MatrixXd& basis);

}  // namespace tspca
