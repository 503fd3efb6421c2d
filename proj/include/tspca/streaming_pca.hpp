#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "tspca/types.hpp"

namespace tspca {

// Streaming temporal-batch PCA.
//
// Time points are absorbed one at a time in temporal order. Each point runs a
// small power-iteration loop against an estimator that blends the carried
// spectral history Q Λ Qᵀ (weight (j-1)/j) with the point's uncentered sample
// covariance XᵀX / B (weight 1/j), re-orthonormalizing by QR after every
// sweep. The very first point has no history and instead iterates on
// W = Q + (XᵀX / B) Q. At each batch boundary the batch's data is projected
// with the batch-final basis, and that basis carries into the next batch as
// prior history.

// Invoked with every orthonormalized iterate produced by an inner loop.
using PostQrHook = std::function<void(const Eigen::MatrixXd& q)>;

// rows x cols matrix of i.i.d. standard-normal draws, filled column-major.
Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng);

// Orthonormal factor of a seeded Gaussian matrix; deterministic per seed.
Eigen::MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed);

// Fresh state: seeded random orthonormal basis, zero eigenvalues, no history.
ProjectionState init_state(Index variables, Index components, std::uint64_t seed);

// First-time-point update W = Q + (XᵀX / B) Q. Requires a history-free state.
Eigen::MatrixXd bootstrap_update(const ProjectionState& state,
                                 const TimePointSlice& x, Index data_size);

// Convex pair ((j-1)/j, 1/j); the two always sum to exactly 1.0.
std::pair<double, double> history_weights(Index weight_counter);

// History-weighted update
//   W = ((j-1)/j) Q Λ Qᵀ q_iter + (1/j)(XᵀX / B) q_iter
// with Q, Λ frozen from `state` and q_iter the current inner iterate.
Eigen::MatrixXd history_update(const ProjectionState& state,
                               const Eigen::MatrixXd& q_iter,
                               const TimePointSlice& x, Index data_size,
                               Index weight_counter);

// Thin QR with the sign convention diag(R) >= 0 so results are reproducible.
// Throws RankDeficientError when any |R(c,c)| falls below 1e-12.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> qr_orthonormalize(
    const Eigen::MatrixXd& w);

// Column-wise Euclidean norms of W, the per-component eigenvalue estimates.
Eigen::VectorXd estimate_eigenvalues(const Eigen::MatrixXd& w);

// Absorbs one time point: repeats {update, QR} until the subspace distance
// between successive iterates drops to cfg.tol or cfg.max_inner_iters sweeps
// have run. weight_counter selects the update rule: 1 means the bootstrap
// rule, >= 2 the history rule. An all-zero update restarts the iterate from
// the seeded generator instead of factorizing.
std::pair<ProjectionState, InnerIterationReport> inner_converge(
    const ProjectionState& state, const TimePointSlice& x, Index data_size,
    Index weight_counter, const RunConfig& cfg, const PostQrHook* hook = nullptr);

struct BatchOutput {
  ProjectionState state;
  std::vector<Eigen::MatrixXd> projected;  // batch-length slices, instances x components
  std::vector<InnerIterationReport> reports;
};

// Absorbs every time point of the batch in temporal order, then projects the
// whole batch with the batch-final basis. Errors from inner loops are
// rethrown with the offending absolute time index attached.
BatchOutput process_batch(const ProjectionState& state, const BatchView& batch,
                          Index data_size, const RunConfig& cfg,
                          const PostQrHook* hook = nullptr);

// Full run over a dataset: init, every batch in order, concatenation of the
// projected batches along time (or one mean row per batch when pooling is
// mean_over_batch). Bit-reproducible for a fixed seed.
CompactRepresentation compress(const Dataset& ds, const RunConfig& cfg,
                               const PostQrHook* hook = nullptr);

}  // namespace tspca
