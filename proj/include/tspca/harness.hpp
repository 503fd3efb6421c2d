#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tspca/types.hpp"

namespace tspca {

// Synthetic data generation, a 1-NN classification proxy, parameter sweeps
// over (T, K), and wall-clock scaling benchmarks.

struct DriftSpec {
  Index change_point = 0;        // first time index drawn from the second basis
  std::uint64_t basis_seed = 0;  // seeds the post-drift eigenbasis
};

struct TwoClassSpec {
  Eigen::VectorXd mean0;  // class-0 mean offset, length = variables
  Eigen::VectorXd mean1;  // class-1 mean offset
};

// Ground-truth recipe: rows at each time point are drawn from
// N(mu_class, V diag(eigenvalues) Vᵀ) with V a seeded random eigenbasis.
struct SyntheticSpec {
  Index instances = 16;
  Index length = 64;
  Index variables = 4;
  Eigen::VectorXd covariance_eigenvalues;  // positive, nonincreasing, size = variables
  std::uint64_t rotation_seed = 1;
  std::optional<DriftSpec> drift;
  std::optional<TwoClassSpec> classes;  // labels instance b as b % 2
};

Dataset generate(const SyntheticSpec& spec, std::uint64_t seed);

// Instance-major flattening (time-major within a row) plus labels, the form
// the neighbor classifier consumes.
struct FlatLabeled {
  Eigen::MatrixXd features;  // instances x (time * feature)
  std::vector<long> labels;
};

FlatLabeled flatten(const Dataset& ds);
FlatLabeled flatten(const CompactRepresentation& rep);

// Fraction of test rows whose nearest training row (Euclidean, ties broken by
// lowest training index) shares their label; majority vote for k > 1.
double knn_accuracy(const FlatLabeled& train, const FlatLabeled& test,
                    int k_neighbors = 1);

// First-half / second-half row split, the harness's train/test protocol.
// With interleaved labels both sides stay class-balanced.
std::pair<FlatLabeled, FlatLabeled> split_train_test(const FlatLabeled& all);

struct SweepCell {
  Index time_batch = 0;
  Index components = 0;
  double accuracy = 0.0;              // NaN when the dataset is unlabeled
  double reconstruction_error = 0.0;  // relative Frobenius, vs the run's basis
  double wall_time_s = 0.0;
  double converged_fraction = 0.0;
  bool unstable = false;  // non-convergence, rank deficiency, or non-finite output
  std::string error;      // non-empty when the cell's run threw
};

struct SweepResult {
  std::vector<SweepCell> cells;  // t-major over (t_values x k_values)
};

// Runs compress + proxy accuracy + reconstruction error per (T, K) cell.
// A failing cell records its error and never aborts the rest of the grid;
// cells are independent and run on `jobs` worker threads.
SweepResult sweep(const Dataset& ds, const std::vector<Index>& t_values,
                  const std::vector<Index>& k_values, const RunConfig& base,
                  int jobs = 1);

std::string sweep_csv(const SweepResult& result);

struct BenchRow {
  Index length = 0;
  double median_seconds = 0.0;
};

// Median-of-`repeats` compress wall time for each sequence length, warm cache
// (one untimed run first). At least 3 repetitions are always taken.
std::vector<BenchRow> bench_scaling(const SyntheticSpec& base,
                                    const std::vector<Index>& lengths,
                                    const RunConfig& cfg, int repeats = 3);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace tspca
