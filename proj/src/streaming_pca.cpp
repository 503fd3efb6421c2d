#include "tspca/streaming_pca.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "tspca/oracle.hpp"

namespace tspca {

namespace {

constexpr double kRankTol = 1e-12;

void check_slice_shape(const TimePointSlice& x, Index data_size, Index variables) {
  if (x.matrix.rows() != data_size) {
    throw ShapeMismatchError("time slice has " + std::to_string(x.matrix.rows()) +
                             " rows, expected data size " + std::to_string(data_size));
  }
  if (x.matrix.cols() != variables) {
    throw ShapeMismatchError("time slice has " + std::to_string(x.matrix.cols()) +
                             " variables, expected " + std::to_string(variables));
  }
}

// (XᵀX / B) q without forming the d x d covariance.
Eigen::MatrixXd covariance_apply(const Eigen::MatrixXd& x, Index data_size,
                                 const Eigen::MatrixXd& q) {
  return x.transpose() * (x * q) / static_cast<double>(data_size);
}

Eigen::MatrixXd bootstrap_rule(const Eigen::MatrixXd& q_iter, const Eigen::MatrixXd& x,
                               Index data_size) {
  return q_iter + covariance_apply(x, data_size, q_iter);
}

Eigen::MatrixXd history_rule(const ProjectionState& state, const Eigen::MatrixXd& q_iter,
                             const Eigen::MatrixXd& x, Index data_size,
                             Index weight_counter) {
  const auto [w_hist, w_data] = history_weights(weight_counter);
  Eigen::MatrixXd w =
      w_hist * (state.q * (state.lambda.asDiagonal() * (state.q.transpose() * q_iter)));
  w.noalias() += w_data * covariance_apply(x, data_size, q_iter);
  return w;
}

std::uint64_t restart_seed(std::uint64_t seed, Index time_index) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(time_index + 1));
}

}  // namespace

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      m(r, c) = normal(rng);
    }
  }
  return m;
}

Eigen::MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  if (cols < 1 || cols > rows) {
    throw BadDimensionsError("orthonormal basis needs 1 <= cols <= rows, got " +
                             std::to_string(cols) + " x " + std::to_string(rows));
  }
  std::mt19937_64 rng(seed);
  return qr_orthonormalize(gaussian_matrix(rows, cols, rng)).first;
}

ProjectionState init_state(Index variables, Index components, std::uint64_t seed) {
  if (components < 1 || components > variables) {
    throw BadDimensionsError("components k must satisfy 1 <= k <= d (d = " +
                             std::to_string(variables) + ", got k = " +
                             std::to_string(components) + ")");
  }
  ProjectionState state;
  state.q = random_orthonormal(variables, components, seed);
  state.lambda = Eigen::VectorXd::Zero(components);
  state.time_index = 0;
  return state;
}

Eigen::MatrixXd bootstrap_update(const ProjectionState& state, const TimePointSlice& x,
                                 Index data_size) {
  if (state.time_index != 0) {
    throw BadCounterError("bootstrap update requires a history-free state, but " +
                          std::to_string(state.time_index) +
                          " time points were already absorbed");
  }
  check_slice_shape(x, data_size, state.q.rows());
  return bootstrap_rule(state.q, x.matrix, data_size);
}

std::pair<double, double> history_weights(Index weight_counter) {
  if (weight_counter < 2) {
    throw BadCounterError("history weights need a counter >= 2, got " +
                          std::to_string(weight_counter));
  }
  const double w_data = 1.0 / static_cast<double>(weight_counter);
  // 1 - w_data keeps the pair summing to exactly 1.0 in double arithmetic.
  return {1.0 - w_data, w_data};
}

Eigen::MatrixXd history_update(const ProjectionState& state, const Eigen::MatrixXd& q_iter,
                               const TimePointSlice& x, Index data_size,
                               Index weight_counter) {
  if (weight_counter < 2) {
    throw BadCounterError("history update needs a weight counter >= 2, got " +
                          std::to_string(weight_counter));
  }
  check_slice_shape(x, data_size, state.q.rows());
  if (q_iter.rows() != state.q.rows() || q_iter.cols() != state.q.cols()) {
    throw ShapeMismatchError("iterate is " + std::to_string(q_iter.rows()) + "x" +
                             std::to_string(q_iter.cols()) + ", state basis is " +
                             std::to_string(state.q.rows()) + "x" +
                             std::to_string(state.q.cols()));
  }
  return history_rule(state, q_iter, x.matrix, data_size, weight_counter);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> qr_orthonormalize(const Eigen::MatrixXd& w) {
  const Index rows = w.rows();
  const Index cols = w.cols();
  if (cols < 1 || rows < cols) {
    throw BadDimensionsError("QR expects a tall matrix, got " + std::to_string(rows) +
                             "x" + std::to_string(cols));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  Eigen::MatrixXd r = qr.matrixQR()
                          .topLeftCorner(cols, cols)
                          .triangularView<Eigen::Upper>();
  for (Index c = 0; c < cols; ++c) {
    if (std::abs(r(c, c)) < kRankTol) {
      throw RankDeficientError(
          "rank-deficient update: |R(" + std::to_string(c) + "," + std::to_string(c) +
          ")| < 1e-12; the data cannot support this many components — reduce K");
    }
    if (r(c, c) < 0.0) {
      q.col(c) = -q.col(c);
      r.row(c) = -r.row(c);
    }
  }
  return {std::move(q), std::move(r)};
}

Eigen::VectorXd estimate_eigenvalues(const Eigen::MatrixXd& w) {
  return w.colwise().norm().transpose();
}

std::pair<ProjectionState, InnerIterationReport> inner_converge(
    const ProjectionState& state, const TimePointSlice& x, Index data_size,
    Index weight_counter, const RunConfig& cfg, const PostQrHook* hook) {
  check_slice_shape(x, data_size, state.q.rows());
  if (weight_counter < 1) {
    throw BadCounterError("weight counter must be >= 1, got " +
                          std::to_string(weight_counter));
  }

  const Index d = state.q.rows();
  const Index k = state.q.cols();
  const bool fresh = weight_counter == 1;  // no usable history weight

  Eigen::MatrixXd q_iter = state.q;
  Eigen::MatrixXd w_final = Eigen::MatrixXd::Zero(d, k);
  std::optional<std::mt19937_64> restart_rng;
  double delta = 1.0;
  bool converged = false;
  Index sweeps = 0;

  while (sweeps < cfg.max_inner_iters) {
    ++sweeps;
    Eigen::MatrixXd w = fresh ? bootstrap_rule(q_iter, x.matrix, data_size)
                              : history_rule(state, q_iter, x.matrix, data_size,
                                             weight_counter);
    if (w.colwise().norm().maxCoeff() < kRankTol) {
      // Collapsed update (zero data and zero history): restart the iterate.
      if (!restart_rng) {
        restart_rng.emplace(restart_seed(cfg.seed, state.time_index));
      }
      q_iter = qr_orthonormalize(gaussian_matrix(d, k, *restart_rng)).first;
      continue;
    }
    auto [q_next, r] = qr_orthonormalize(w);
    if (hook && *hook) {
      (*hook)(q_next);
    }
    delta = subspace_distance(q_next, q_iter);
    q_iter = std::move(q_next);
    w_final = std::move(w);
    if (delta <= cfg.tol) {
      converged = true;
      break;
    }
  }

  ProjectionState next;
  next.q = std::move(q_iter);
  next.lambda = estimate_eigenvalues(w_final);
  next.time_index = state.time_index + 1;

  InnerIterationReport report;
  report.time_index = state.time_index;  // absolute index of the absorbed point
  report.sweeps_used = sweeps;
  report.final_subspace_delta = delta;
  report.converged = converged;
  return {std::move(next), report};
}

BatchOutput process_batch(const ProjectionState& state, const BatchView& batch,
                          Index data_size, const RunConfig& cfg, const PostQrHook* hook) {
  BatchOutput out;
  out.state = state;
  out.reports.reserve(static_cast<std::size_t>(batch.length()));
  for (Index t = 0; t < batch.length(); ++t) {
    const Index abs_time = batch.start_time + t;
    const Index weight_counter =
        cfg.counter == CounterMode::global ? out.state.time_index + 1 : t + 1;
    TimePointSlice x{abs_time, batch.time_slices[static_cast<std::size_t>(t)]};
    try {
      auto [next, report] = inner_converge(out.state, x, data_size, weight_counter, cfg, hook);
      out.state = std::move(next);
      out.reports.push_back(report);
    } catch (const RankDeficientError& e) {
      throw RankDeficientError("time point " + std::to_string(abs_time) + ": " + e.what());
    }
  }
  out.projected.reserve(static_cast<std::size_t>(batch.length()));
  for (Index t = 0; t < batch.length(); ++t) {
    out.projected.push_back(batch.time_slices[static_cast<std::size_t>(t)] * out.state.q);
  }
  return out;
}

CompactRepresentation compress(const Dataset& ds, const RunConfig& cfg,
                               const PostQrHook* hook) {
  validate_dataset(ds);
  validate_config(cfg, ds.variables(), ds.length());

  CompactRepresentation rep;
  rep.config = cfg;
  rep.labels = ds.labels();

  const Index batches = batch_count(ds.length(), cfg.time_batch);
  ProjectionState state = init_state(ds.variables(), cfg.components, cfg.seed);
  for (Index i = 0; i < batches; ++i) {
    BatchOutput out =
        process_batch(state, ds.slice_batch(i, cfg.time_batch), ds.instances(), cfg, hook);
    state = std::move(out.state);
    if (cfg.pooling == Pooling::mean_over_batch) {
      Eigen::MatrixXd mean =
          Eigen::MatrixXd::Zero(ds.instances(), cfg.components);
      for (const Eigen::MatrixXd& y : out.projected) {
        mean += y;
      }
      mean /= static_cast<double>(out.projected.size());
      rep.values.push_back(std::move(mean));
    } else {
      for (Eigen::MatrixXd& y : out.projected) {
        rep.values.push_back(std::move(y));
      }
    }
    rep.eigen_trajectory.emplace_back(i, state.lambda);
    rep.reports.push_back(BatchReports{i, std::move(out.reports)});
  }
  rep.final_basis = state.q;
  return rep;
}

}  // namespace tspca
