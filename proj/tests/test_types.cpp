#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "tspca/types.hpp"

using namespace tspca;

namespace {

Dataset make_dataset(Index b, Index n, Index d, double fill = 0.0) {
  std::vector<Eigen::MatrixXd> slices(static_cast<std::size_t>(n),
                                      Eigen::MatrixXd::Constant(b, d, fill));
  return Dataset(std::move(slices));
}

}  // namespace

TEST_CASE("validate_dataset accepts the minimal tensor") {
  const Dataset ds = make_dataset(1, 1, 1);
  CHECK_NOTHROW(validate_dataset(ds));
  CHECK(ds.instances() == 1);
  CHECK(ds.length() == 1);
  CHECK(ds.variables() == 1);
}

TEST_CASE("validate_dataset reports the first non-finite index") {
  std::vector<Eigen::MatrixXd> slices(5, Eigen::MatrixXd::Zero(2, 3));
  slices[3](0, 1) = std::numeric_limits<double>::quiet_NaN();
  const Dataset ds{std::move(slices)};
  try {
    validate_dataset(ds);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.instance == 0);
    CHECK(e.time == 3);
    CHECK(e.variable == 1);
  }
}

TEST_CASE("validate_dataset rejects label count mismatch") {
  std::vector<Eigen::MatrixXd> slices(2, Eigen::MatrixXd::Zero(4, 2));
  const Dataset ds{std::move(slices), std::vector<long>{0, 1, 0}};
  CHECK_THROWS_AS(validate_dataset(ds), ShapeMismatchError);
}

TEST_CASE("validate_dataset rejects empty and ragged shapes") {
  CHECK_THROWS_AS(validate_dataset(Dataset{}), ShapeMismatchError);
  std::vector<Eigen::MatrixXd> ragged;
  ragged.emplace_back(Eigen::MatrixXd::Zero(2, 2));
  ragged.emplace_back(Eigen::MatrixXd::Zero(2, 3));
  CHECK_THROWS_AS(validate_dataset(Dataset{std::move(ragged)}), ShapeMismatchError);
}

TEST_CASE("slice_time_point copies the instances-by-variables matrix") {
  std::vector<Eigen::MatrixXd> slices;
  Eigen::MatrixXd t0(2, 2);
  t0 << 1, 2, 3, 4;
  slices.push_back(t0);
  slices.push_back(Eigen::MatrixXd::Zero(2, 2));
  const Dataset ds{std::move(slices)};

  const TimePointSlice s = ds.slice_time_point(0);
  CHECK(s.time_index == 0);
  CHECK(s.matrix == t0);
  CHECK_THROWS_AS(ds.slice_time_point(2), IndexOutOfRangeError);
}

TEST_CASE("slice_time_point handles a single-instance dataset") {
  std::vector<Eigen::MatrixXd> slices(2, Eigen::MatrixXd::Zero(1, 3));
  slices[1] << 5, 6, 7;
  const Dataset ds{std::move(slices)};
  const TimePointSlice s = ds.slice_time_point(1);
  CHECK(s.matrix.rows() == 1);
  CHECK(s.matrix(0, 0) == 5);
  CHECK(s.matrix(0, 1) == 6);
  CHECK(s.matrix(0, 2) == 7);
}

TEST_CASE("slice_batch splits N=10 into T=4 batches with a short tail") {
  const Dataset ds = make_dataset(2, 10, 1);
  const BatchView b0 = ds.slice_batch(0, 4);
  CHECK(b0.start_time == 0);
  CHECK(b0.length() == 4);
  const BatchView b2 = ds.slice_batch(2, 4);
  CHECK(b2.start_time == 8);
  CHECK(b2.length() == 2);
  CHECK_THROWS_AS(ds.slice_batch(3, 4), IndexOutOfRangeError);
}

TEST_CASE("batches partition the time axis exactly") {
  const Index n = 10;
  const Dataset ds = make_dataset(1, n, 1);
  for (Index t : {1, 3, 4, 7, 10}) {
    std::vector<int> covered(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < batch_count(n, t); ++i) {
      const BatchView batch = ds.slice_batch(i, t);
      for (Index s = 0; s < batch.length(); ++s) {
        ++covered[static_cast<std::size_t>(batch.start_time + s)];
      }
    }
    for (int c : covered) {
      CHECK(c == 1);
    }
  }
}

TEST_CASE("batch slices agree with slice_time_point") {
  std::vector<Eigen::MatrixXd> slices;
  for (Index n = 0; n < 7; ++n) {
    slices.push_back(Eigen::MatrixXd::Constant(2, 3, static_cast<double>(n)));
  }
  const Dataset ds{std::move(slices)};
  const Index t = 3;
  for (Index i = 0; i < batch_count(ds.length(), t); ++i) {
    const BatchView batch = ds.slice_batch(i, t);
    for (Index s = 0; s < batch.length(); ++s) {
      CHECK(batch.time_slices[static_cast<std::size_t>(s)] ==
            ds.slice_time_point(i * t + s).matrix);
    }
  }
}

TEST_CASE("validate_config names the violated constraint") {
  RunConfig cfg;
  cfg.components = 99;
  cfg.time_batch = 4;
  try {
    validate_config(cfg, 3, 10);
    FAIL("expected BadDimensionsError");
  } catch (const BadDimensionsError& e) {
    CHECK(std::string(e.what()).find("K <= d") != std::string::npos);
  }

  cfg.components = 2;
  cfg.time_batch = 11;
  CHECK_THROWS_AS(validate_config(cfg, 3, 10), BadDimensionsError);

  cfg.time_batch = 4;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(validate_config(cfg, 3, 10), InputError);

  cfg.tol = 1e-6;
  cfg.max_inner_iters = 0;
  CHECK_THROWS_AS(validate_config(cfg, 3, 10), InputError);
}
