#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tspca/errors.hpp"

namespace tspca {

using Index = Eigen::Index;

// All instances' values at one time index; matrix is instances x variables.
struct TimePointSlice {
  Index time_index = 0;
  Eigen::MatrixXd matrix;
};

// One contiguous block of time points, the unit of the outer processing loop.
// Holds views into the parent Dataset; valid only while that Dataset lives.
struct BatchView {
  Index batch_index = 0;
  Index start_time = 0;
  std::span<const Eigen::MatrixXd> time_slices;  // each instances x variables

  Index length() const { return static_cast<Index>(time_slices.size()); }
};

// A multivariate time-series collection, stored time-major: slice n is the
// (instances x variables) matrix of every series at time n. Instances may
// carry one integer class label each. Immutable after construction; content
// invariants (finiteness, label count) are checked by validate_dataset, not
// by the constructor.
class Dataset {
public:
  Dataset() = default;
  explicit Dataset(std::vector<Eigen::MatrixXd> time_slices,
                   std::optional<std::vector<long>> labels = std::nullopt,
                   std::vector<std::string> variable_names = {})
      : slices_(std::move(time_slices)),
        labels_(std::move(labels)),
        names_(std::move(variable_names)) {}

  Index instances() const { return slices_.empty() ? 0 : slices_.front().rows(); }
  Index length() const { return static_cast<Index>(slices_.size()); }
  Index variables() const { return slices_.empty() ? 0 : slices_.front().cols(); }

  // Unchecked element access; valid on shape-consistent data only.
  double at(Index instance, Index time, Index variable) const {
    return slices_[static_cast<std::size_t>(time)](instance, variable);
  }

  const Eigen::MatrixXd& slice(Index time) const;
  const std::vector<Eigen::MatrixXd>& slices() const { return slices_; }
  const std::optional<std::vector<long>>& labels() const { return labels_; }
  const std::vector<std::string>& variable_names() const { return names_; }

  TimePointSlice slice_time_point(Index time) const;
  BatchView slice_batch(Index batch_index, Index time_batch) const;

private:
  std::vector<Eigen::MatrixXd> slices_;
  std::optional<std::vector<long>> labels_;
  std::vector<std::string> names_;
};

// Checks every dataset invariant; returns its argument on success so calls
// can be chained. Throws ShapeMismatchError or NonFiniteError (reporting the
// first offending index in instance-major scan order).
const Dataset& validate_dataset(const Dataset& ds);

// Number of time batches, ceil(length / time_batch).
Index batch_count(Index length, Index time_batch);

// Carried spectral history: an orthonormal projection basis plus the current
// eigenvalue estimates and the count of time points absorbed so far.
struct ProjectionState {
  Eigen::MatrixXd q;       // variables x components, orthonormal columns
  Eigen::VectorXd lambda;  // components, nonnegative
  Index time_index = 0;    // time points absorbed across the whole run
};

enum class Pooling { none, mean_over_batch };

// Scope of the convex weight counter: `global` never resets, so older history
// keeps decaying across batch boundaries; `per_batch` restarts the weights at
// every batch while the basis still carries over.
enum class CounterMode { global, per_batch };

struct RunConfig {
  Index time_batch = 1;         // T, time points per batch
  Index components = 1;         // K, retained principal components
  double tol = 1e-6;            // inner-loop subspace-distance tolerance
  Index max_inner_iters = 100;  // cap on power-iteration sweeps per time point
  std::uint64_t seed = 0;       // seeds the starting basis (and restarts)
  Pooling pooling = Pooling::none;
  CounterMode counter = CounterMode::global;
};

// Validates a config against the dataset dimensions it will run on.
// Error messages name the violated constraint.
void validate_config(const RunConfig& cfg, Index variables, Index length);

// Observability record for one time point's inner convergence loop.
struct InnerIterationReport {
  Index time_index = 0;  // absolute time index of the point absorbed
  Index sweeps_used = 0;
  double final_subspace_delta = 0.0;
  bool converged = false;
};

struct BatchReports {
  Index batch_index = 0;
  std::vector<InnerIterationReport> points;
};

// Output of a compression run: the projected tensor (time-major slices of
// instances x components), the per-batch eigenvalue trajectory, and enough
// bookkeeping to audit and reuse the run (final basis, convergence reports,
// labels carried over from the source dataset).
struct CompactRepresentation {
  std::vector<Eigen::MatrixXd> values;  // N_out slices, each instances x components
  std::vector<std::pair<Index, Eigen::VectorXd>> eigen_trajectory;
  RunConfig config;
  Eigen::MatrixXd final_basis;  // variables x components
  std::vector<BatchReports> reports;
  std::optional<std::vector<long>> labels;

  Index instances() const { return values.empty() ? 0 : values.front().rows(); }
  Index length() const { return static_cast<Index>(values.size()); }
  Index components() const { return values.empty() ? 0 : values.front().cols(); }
};

}  // namespace tspca
