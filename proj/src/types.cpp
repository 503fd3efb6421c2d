#include "tspca/types.hpp"

#include <cmath>

namespace tspca {

const Eigen::MatrixXd& Dataset::slice(Index time) const {
  if (time < 0 || time >= length()) {
    throw IndexOutOfRangeError("time index " + std::to_string(time) +
                               " outside [0, " + std::to_string(length()) + ")");
  }
  return slices_[static_cast<std::size_t>(time)];
}

TimePointSlice Dataset::slice_time_point(Index time) const {
  return TimePointSlice{time, slice(time)};
}

BatchView Dataset::slice_batch(Index batch_index, Index time_batch) const {
  if (time_batch < 1) {
    throw BadDimensionsError("time batch must be >= 1, got " +
                             std::to_string(time_batch));
  }
  const Index batches = batch_count(length(), time_batch);
  if (batch_index < 0 || batch_index >= batches) {
    throw IndexOutOfRangeError("batch index " + std::to_string(batch_index) +
                               " outside [0, " + std::to_string(batches) + ")");
  }
  const Index start = batch_index * time_batch;
  const Index stop = std::min(start + time_batch, length());  // last batch may be short
  return BatchView{batch_index, start,
                   std::span<const Eigen::MatrixXd>(slices_.data() + start,
                                                    static_cast<std::size_t>(stop - start))};
}

const Dataset& validate_dataset(const Dataset& ds) {
  if (ds.length() < 1 || ds.instances() < 1 || ds.variables() < 1) {
    throw ShapeMismatchError(
        "dataset must have at least one instance, time point, and variable (got B=" +
        std::to_string(ds.instances()) + ", N=" + std::to_string(ds.length()) +
        ", d=" + std::to_string(ds.variables()) + ")");
  }
  const Index b = ds.instances();
  const Index d = ds.variables();
  for (Index n = 0; n < ds.length(); ++n) {
    const Eigen::MatrixXd& s = ds.slices()[static_cast<std::size_t>(n)];
    if (s.rows() != b || s.cols() != d) {
      throw ShapeMismatchError("time slice " + std::to_string(n) + " is " +
                               std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                               ", expected " + std::to_string(b) + "x" + std::to_string(d));
    }
  }
  for (Index bi = 0; bi < b; ++bi) {
    for (Index n = 0; n < ds.length(); ++n) {
      for (Index v = 0; v < d; ++v) {
        if (!std::isfinite(ds.at(bi, n, v))) {
          throw NonFiniteError(bi, n, v);
        }
      }
    }
  }
  if (ds.labels() && static_cast<Index>(ds.labels()->size()) != b) {
    throw ShapeMismatchError("label count " + std::to_string(ds.labels()->size()) +
                             " does not match instance count " + std::to_string(b));
  }
  return ds;
}

Index batch_count(Index length, Index time_batch) {
  if (time_batch < 1) {
    throw BadDimensionsError("time batch must be >= 1, got " +
                             std::to_string(time_batch));
  }
  return (length + time_batch - 1) / time_batch;
}

void validate_config(const RunConfig& cfg, Index variables, Index length) {
  if (cfg.components < 1 || cfg.components > variables) {
    throw BadDimensionsError("components K must satisfy 1 <= K <= d (d = " +
                             std::to_string(variables) + ", got K = " +
                             std::to_string(cfg.components) + ")");
  }
  if (cfg.time_batch < 1 || cfg.time_batch > length) {
    throw BadDimensionsError("time batch T must satisfy 1 <= T <= N (N = " +
                             std::to_string(length) + ", got T = " +
                             std::to_string(cfg.time_batch) + ")");
  }
  if (!(cfg.tol > 0.0)) {
    throw InputError("tolerance must be > 0, got " + std::to_string(cfg.tol));
  }
  if (cfg.max_inner_iters < 1) {
    throw InputError("max inner iterations must be >= 1, got " +
                     std::to_string(cfg.max_inner_iters));
  }
}

}  // namespace tspca
