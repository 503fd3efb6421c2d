#include "tspca/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tspca {

namespace {

void check_orthonormal(const Eigen::MatrixXd& q, const char* which) {
  const Index k = q.cols();
  const double dev =
      (q.transpose() * q - Eigen::MatrixXd::Identity(k, k)).norm();
  if (!(dev <= 1e-6)) {
    throw NotOrthonormalError(std::string(which) + " basis is not orthonormal: ||QtQ - I||_F = " +
                              std::to_string(dev));
  }
}

}  // namespace

Eigen::MatrixXd pooled_covariance(const Dataset& ds) {
  const Index d = ds.variables();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  for (const Eigen::MatrixXd& slice : ds.slices()) {
    c.selfadjointView<Eigen::Lower>().rankUpdate(slice.transpose(), 1.0);
  }
  c /= static_cast<double>(ds.instances() * ds.length());
  c = c.selfadjointView<Eigen::Lower>();  // mirror so the result is exactly symmetric
  return c;
}

EigenSolution batch_pca(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols()) {
    throw NotSymmetricError("covariance must be square, got " +
                            std::to_string(covariance.rows()) + "x" +
                            std::to_string(covariance.cols()));
  }
  if (covariance.size() > 0 &&
      (covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw NotSymmetricError("covariance is not symmetric within 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigendecomposition failed to converge");
  }
  EigenSolution sol;
  sol.eigenvalues = solver.eigenvalues().reverse();       // ascending -> descending
  sol.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Index c = 0; c < sol.eigenvectors.cols(); ++c) {
    Index pivot = 0;
    sol.eigenvectors.col(c).cwiseAbs().maxCoeff(&pivot);  // first maximal entry
    if (sol.eigenvectors(pivot, c) < 0.0) {
      sol.eigenvectors.col(c) = -sol.eigenvectors.col(c);
    }
  }
  return sol;
}

double subspace_distance(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2) {
  if (q1.rows() != q2.rows() || q1.cols() != q2.cols()) {
    throw ShapeMismatchError("subspace distance expects matching shapes, got " +
                             std::to_string(q1.rows()) + "x" + std::to_string(q1.cols()) +
                             " vs " + std::to_string(q2.rows()) + "x" +
                             std::to_string(q2.cols()));
  }
  check_orthonormal(q1, "first");
  check_orthonormal(q2, "second");
  const double k = static_cast<double>(q1.cols());
  const double dist =
      (q1 * q1.transpose() - q2 * q2.transpose()).norm() / std::sqrt(2.0 * k);
  return std::min(dist, 1.0);
}

double reconstruction_error(const Dataset& ds, const Eigen::MatrixXd& basis) {
  if (basis.rows() != ds.variables()) {
    throw ShapeMismatchError("basis has " + std::to_string(basis.rows()) +
                             " rows, dataset has " + std::to_string(ds.variables()) +
                             " variables");
  }
  check_orthonormal(basis, "projection");
  double residual = 0.0;
  double total = 0.0;
  for (const Eigen::MatrixXd& slice : ds.slices()) {
    total += slice.squaredNorm();
    residual += (slice - (slice * basis) * basis.transpose()).squaredNorm();
  }
  if (total == 0.0) {
    throw ZeroDataError("reconstruction error undefined on all-zero data");
  }
  if (basis.cols() == ds.variables()) {
    return 0.0;  // full basis reconstructs exactly
  }
  return std::sqrt(residual / total);
}

}  // namespace tspca
