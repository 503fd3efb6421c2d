#include <cmath>
#include <vector>

#include "doctest.h"
#include "tspca/harness.hpp"
#include "tspca/oracle.hpp"
#include "tspca/streaming_pca.hpp"

using namespace tspca;

namespace {

SyntheticSpec basic_spec(Index b, Index n, Index d) {
  SyntheticSpec spec;
  spec.instances = b;
  spec.length = n;
  spec.variables = d;
  spec.covariance_eigenvalues = Eigen::VectorXd::Ones(d);
  for (Index i = 0; i < d; ++i) {
    spec.covariance_eigenvalues[i] = std::pow(0.5, static_cast<double>(i));
  }
  return spec;
}

SyntheticSpec two_class_spec(Index b, Index n, Index d, double offset) {
  SyntheticSpec spec = basic_spec(b, n, d);
  const Eigen::VectorXd dir = Eigen::VectorXd::Ones(d) / std::sqrt(double(d));
  spec.classes = TwoClassSpec{-offset * dir, offset * dir};
  return spec;
}

}  // namespace

TEST_CASE("generate is deterministic per seed") {
  const SyntheticSpec spec = basic_spec(8, 20, 3);
  const Dataset a = generate(spec, 5);
  const Dataset b = generate(spec, 5);
  const Dataset c = generate(spec, 6);
  for (Index n = 0; n < 20; ++n) {
    CHECK(a.slice(n) == b.slice(n));
  }
  CHECK(a.slice(0) != c.slice(0));
}

TEST_CASE("isotropic eigenvalues give a near-identity pooled covariance") {
  SyntheticSpec spec = basic_spec(64, 100, 2);
  spec.covariance_eigenvalues = Eigen::VectorXd::Ones(2);
  const Dataset ds = generate(spec, 7);
  const Eigen::MatrixXd c = pooled_covariance(ds);
  const double tol = 3.0 / std::sqrt(64.0 * 100.0);
  CHECK(std::abs(c(0, 0) - 1.0) <= tol);
  CHECK(std::abs(c(1, 1) - 1.0) <= tol);
  CHECK(std::abs(c(0, 1)) <= tol);
}

TEST_CASE("class means shift the generated rows") {
  const SyntheticSpec spec = two_class_spec(64, 50, 4, 3.0);
  const Dataset ds = generate(spec, 9);
  REQUIRE(ds.labels());
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(4);
  Index n0 = 0;
  Index n1 = 0;
  for (Index b = 0; b < 64; ++b) {
    for (Index n = 0; n < 50; ++n) {
      for (Index v = 0; v < 4; ++v) {
        if ((*ds.labels())[static_cast<std::size_t>(b)] == 0) {
          mean0[v] += ds.at(b, n, v);
        } else {
          mean1[v] += ds.at(b, n, v);
        }
      }
      if ((*ds.labels())[static_cast<std::size_t>(b)] == 0) {
        ++n0;
      } else {
        ++n1;
      }
    }
  }
  mean0 /= static_cast<double>(n0);
  mean1 /= static_cast<double>(n1);
  CHECK((mean0 - spec.classes->mean0).norm() <= 0.1);
  CHECK((mean1 - spec.classes->mean1).norm() <= 0.1);
}

TEST_CASE("drift plants a recoverable basis switch") {
  SyntheticSpec spec = basic_spec(32, 120, 4);
  spec.covariance_eigenvalues << 8, 0.5, 0.25, 0.125;  // strong top direction
  spec.rotation_seed = 3;
  spec.drift = DriftSpec{60, 91};
  const Dataset ds = generate(spec, 11);

  std::vector<Eigen::MatrixXd> pre_slices;
  std::vector<Eigen::MatrixXd> post_slices;
  for (Index n = 0; n < 60; ++n) {
    pre_slices.push_back(ds.slice(n));
  }
  for (Index n = 60; n < 120; ++n) {
    post_slices.push_back(ds.slice(n));
  }
  const Dataset pre{std::move(pre_slices)};
  const Dataset post{std::move(post_slices)};

  const Eigen::MatrixXd top_pre =
      batch_pca(pooled_covariance(pre)).eigenvectors.leftCols(1);
  const Eigen::MatrixXd top_post =
      batch_pca(pooled_covariance(post)).eigenvectors.leftCols(1);

  const Eigen::MatrixXd v1 = random_orthonormal(4, 4, spec.rotation_seed).leftCols(1);
  const Eigen::MatrixXd v2 = random_orthonormal(4, 4, 91).leftCols(1);
  const double planted = subspace_distance(v1, v2);
  const double recovered = subspace_distance(top_pre, top_post);
  CHECK(std::abs(recovered - planted) <= 0.1);
}

TEST_CASE("generate validates its spec") {
  SyntheticSpec spec = basic_spec(4, 10, 2);
  spec.covariance_eigenvalues << 1, 2;  // ascending
  CHECK_THROWS_AS(generate(spec, 1), InputError);
  spec.covariance_eigenvalues << 1, 0;  // not strictly positive
  CHECK_THROWS_AS(generate(spec, 1), InputError);
  spec = basic_spec(4, 10, 2);
  spec.drift = DriftSpec{10, 1};  // change point outside (0, N)
  CHECK_THROWS_AS(generate(spec, 1), InputError);
  spec = basic_spec(4, 10, 2);
  spec.classes = TwoClassSpec{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(generate(spec, 1), InputError);
}

TEST_CASE("a test set equal to the training set scores 1.0") {
  const Dataset ds = generate(two_class_spec(10, 8, 3, 1.0), 13);
  const FlatLabeled flat = flatten(ds);
  CHECK(knn_accuracy(flat, flat, 1) == 1.0);
}

TEST_CASE("well-separated classes score 1.0") {
  const Dataset train = generate(two_class_spec(20, 10, 3, 10.0), 15);
  const Dataset test = generate(two_class_spec(20, 10, 3, 10.0), 16);
  CHECK(knn_accuracy(flatten(train), flatten(test), 1) == 1.0);
}

TEST_CASE("labels without structure score near one half") {
  double total = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dataset train = generate(two_class_spec(100, 6, 3, 0.0), 40 + s);
    const Dataset test = generate(two_class_spec(100, 6, 3, 0.0), 50 + s);
    total += knn_accuracy(flatten(train), flatten(test), 1);
  }
  const double mean = total / 5.0;
  CHECK(mean >= 0.4);
  CHECK(mean <= 0.6);
}

TEST_CASE("majority voting with k > 1 still separates clean classes") {
  const Dataset train = generate(two_class_spec(20, 10, 3, 10.0), 17);
  const Dataset test = generate(two_class_spec(20, 10, 3, 10.0), 18);
  CHECK(knn_accuracy(flatten(train), flatten(test), 3) == 1.0);
  CHECK(knn_accuracy(flatten(train), flatten(test), 25) >= 0.0);  // k clamps to train size
}

TEST_CASE("knn_accuracy validates inputs") {
  const Dataset labeled = generate(two_class_spec(4, 3, 2, 1.0), 1);
  const Dataset unlabeled = generate(basic_spec(4, 3, 2), 1);
  CHECK_THROWS_AS(flatten(unlabeled), UnlabeledError);

  FlatLabeled narrow = flatten(labeled);
  FlatLabeled wide = flatten(labeled);
  wide.features.conservativeResize(wide.features.rows(), wide.features.cols() + 1);
  CHECK_THROWS_AS(knn_accuracy(narrow, wide, 1), DimensionMismatchError);
}

TEST_CASE("sweep produces one cell per grid point in t-major order") {
  const Dataset ds = generate(two_class_spec(8, 20, 3, 2.0), 21);
  RunConfig base;
  base.seed = 21;
  const SweepResult result = sweep(ds, {2, 5, 10}, {1, 2}, base);
  REQUIRE(result.cells.size() == 6);
  CHECK(result.cells[0].time_batch == 2);
  CHECK(result.cells[0].components == 1);
  CHECK(result.cells[1].time_batch == 2);
  CHECK(result.cells[1].components == 2);
  CHECK(result.cells[5].time_batch == 10);
  CHECK(result.cells[5].components == 2);
  for (const SweepCell& c : result.cells) {
    CHECK(c.error.empty());
    CHECK(c.wall_time_s >= 0.0);
  }
}

TEST_CASE("a full-rank sweep cell has zero reconstruction error") {
  const Dataset ds = generate(basic_spec(8, 12, 3), 22);
  RunConfig base;
  base.seed = 22;
  const SweepResult result = sweep(ds, {12}, {3}, base);
  REQUIRE(result.cells.size() == 1);
  CHECK(result.cells[0].reconstruction_error == 0.0);
  CHECK(std::isnan(result.cells[0].accuracy));  // unlabeled input
}

TEST_CASE("sweep is deterministic and captures per-cell errors") {
  const Dataset ds = generate(two_class_spec(8, 16, 3, 2.0), 23);
  RunConfig base;
  base.seed = 23;
  const SweepResult a = sweep(ds, {4, 8}, {1, 9}, base, 2);
  const SweepResult b = sweep(ds, {4, 8}, {1, 9}, base, 1);
  REQUIRE(a.cells.size() == b.cells.size());
  const auto same = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(same(a.cells[i].accuracy, b.cells[i].accuracy));
    CHECK(same(a.cells[i].reconstruction_error, b.cells[i].reconstruction_error));
    CHECK(same(a.cells[i].converged_fraction, b.cells[i].converged_fraction));
    CHECK(a.cells[i].unstable == b.cells[i].unstable);
    CHECK(a.cells[i].error == b.cells[i].error);
  }
  // K = 9 > d cells fail with a message but the sweep still completes.
  CHECK_FALSE(a.cells[1].error.empty());
  CHECK(a.cells[0].error.empty());
}

TEST_CASE("instability concentrates at large K when instances are scarce") {
  SyntheticSpec spec = basic_spec(4, 48, 6);
  spec.covariance_eigenvalues << 5, 3, 0.4, 0.2, 0.1, 0.05;  // gap after component 2
  RunConfig base;
  base.tol = 1e-8;
  base.max_inner_iters = 40;

  int low_k_flags = 0;
  int high_k_flags = 0;
  double recon_k1 = 0.0;
  double recon_k2 = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Dataset ds = generate(spec, 100 + s);
    base.seed = s;
    const SweepResult r = sweep(ds, {8}, {1, 2, 5, 6}, base);
    REQUIRE(r.cells.size() == 4);
    low_k_flags += (r.cells[0].unstable ? 1 : 0) + (r.cells[1].unstable ? 1 : 0);
    high_k_flags += (r.cells[2].unstable ? 1 : 0) + (r.cells[3].unstable ? 1 : 0);
    recon_k1 += r.cells[0].reconstruction_error;
    recon_k2 += r.cells[1].reconstruction_error;
  }
  CHECK(high_k_flags > low_k_flags);
  CHECK(recon_k2 < recon_k1);
}

TEST_CASE("post-drift batches track the new basis under the global counter") {
  SyntheticSpec spec = basic_spec(48, 160, 4);
  spec.covariance_eigenvalues << 8, 4, 0.2, 0.1;
  spec.rotation_seed = 5;
  spec.drift = DriftSpec{80, 71};
  const Eigen::MatrixXd target = random_orthonormal(4, 4, 71).leftCols(2);

  RunConfig cfg;
  cfg.time_batch = 16;
  cfg.components = 2;

  const Index post_batches = 5;  // batches 5..9 are post-drift
  std::vector<double> mean_dist(static_cast<std::size_t>(post_batches), 0.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dataset ds = generate(spec, 900 + s);
    cfg.seed = s;
    ProjectionState state = init_state(4, 2, cfg.seed);
    for (Index i = 0; i < 10; ++i) {
      const BatchOutput out = process_batch(state, ds.slice_batch(i, 16), 48, cfg);
      state = out.state;
      if (i >= 5) {
        mean_dist[static_cast<std::size_t>(i - 5)] +=
            subspace_distance(state.q, target) / 5.0;
      }
    }
  }
  for (Index i = 1; i < post_batches; ++i) {
    CHECK(mean_dist[static_cast<std::size_t>(i)] <=
          mean_dist[static_cast<std::size_t>(i - 1)] + 1e-9);
  }
}

TEST_CASE("compression keeps proxy accuracy close to the raw space") {
  SyntheticSpec spec = two_class_spec(80, 24, 8, 2.5);
  spec.covariance_eigenvalues << 5, 3, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05;
  const Dataset ds = generate(spec, 61);
  const auto [raw_train, raw_test] = split_train_test(flatten(ds));
  const double raw = knn_accuracy(raw_train, raw_test, 1);

  RunConfig cfg;
  cfg.time_batch = 6;
  cfg.components = 2;
  cfg.seed = 61;
  const CompactRepresentation rep = compress(ds, cfg);
  const auto [c_train, c_test] = split_train_test(flatten(rep));
  const double compressed = knn_accuracy(c_train, c_test, 1);
  CHECK(compressed >= raw - 0.05);
}

TEST_CASE("bench handles empty families and grows with K") {
  const SyntheticSpec spec = basic_spec(16, 10, 8);
  RunConfig cfg;
  cfg.time_batch = 8;
  cfg.components = 2;
  CHECK(bench_scaling(spec, {}, cfg).empty());

  RunConfig small = cfg;
  small.components = 1;
  RunConfig large = cfg;
  large.components = 8;
  const double t_small = bench_scaling(spec, {400}, small, 5)[0].median_seconds;
  const double t_large = bench_scaling(spec, {400}, large, 5)[0].median_seconds;
  CHECK(t_small > 0.0);
  CHECK(t_large > t_small);
}

TEST_CASE("sweep_csv and bench_csv carry one row per entry") {
  SweepResult result;
  SweepCell cell;
  cell.time_batch = 2;
  cell.components = 1;
  cell.accuracy = 0.5;
  cell.reconstruction_error = 0.25;
  cell.wall_time_s = 0.001;
  cell.converged_fraction = 1.0;
  cell.error = "bad, \"quoted\"";
  result.cells.push_back(cell);
  const std::string csv = sweep_csv(result);
  CHECK(csv.find("time_batch,components,accuracy") == 0);
  CHECK(csv.find("\"bad, \"\"quoted\"\"\"") != std::string::npos);

  const std::string bench = bench_csv({BenchRow{100, 0.5}});
  CHECK(bench == "length,median_seconds\n100,0.5\n");
}
