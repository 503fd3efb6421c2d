#include "tspca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "tspca/io.hpp"
#include "tspca/oracle.hpp"
#include "tspca/streaming_pca.hpp"

namespace tspca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_spec(const SyntheticSpec& spec) {
  if (spec.instances < 1 || spec.length < 1 || spec.variables < 1) {
    throw InputError("synthetic spec needs instances, length, variables >= 1");
  }
  if (spec.covariance_eigenvalues.size() != spec.variables) {
    throw InputError("synthetic spec needs one covariance eigenvalue per variable (got " +
                     std::to_string(spec.covariance_eigenvalues.size()) + " for d = " +
                     std::to_string(spec.variables) + ")");
  }
  for (Index i = 0; i < spec.covariance_eigenvalues.size(); ++i) {
    if (!(spec.covariance_eigenvalues[i] > 0.0)) {
      throw InputError("covariance eigenvalues must be strictly positive");
    }
    if (i > 0 && spec.covariance_eigenvalues[i] > spec.covariance_eigenvalues[i - 1]) {
      throw InputError("covariance eigenvalues must be in descending order");
    }
  }
  if (spec.drift && (spec.drift->change_point <= 0 || spec.drift->change_point >= spec.length)) {
    throw InputError("drift change point must lie strictly inside (0, length)");
  }
  if (spec.classes && (spec.classes->mean0.size() != spec.variables ||
                       spec.classes->mean1.size() != spec.variables)) {
    throw InputError("class mean offsets must have one entry per variable");
  }
}

// CSV field quoting for the error column.
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

SweepCell run_cell(const Dataset& ds, Index t, Index k, const RunConfig& base) {
  SweepCell cell;
  cell.time_batch = t;
  cell.components = k;
  cell.accuracy = std::numeric_limits<double>::quiet_NaN();
  cell.reconstruction_error = std::numeric_limits<double>::quiet_NaN();
  cell.converged_fraction = std::numeric_limits<double>::quiet_NaN();

  RunConfig cfg = base;
  cfg.time_batch = t;
  cfg.components = k;
  const auto start = Clock::now();
  try {
    CompactRepresentation rep = compress(ds, cfg);
    cell.wall_time_s = seconds_since(start);

    Index points = 0;
    Index converged = 0;
    for (const BatchReports& br : rep.reports) {
      for (const InnerIterationReport& r : br.points) {
        ++points;
        converged += r.converged ? 1 : 0;
      }
    }
    cell.converged_fraction =
        points == 0 ? 1.0 : static_cast<double>(converged) / static_cast<double>(points);
    bool finite = true;
    for (const Eigen::MatrixXd& slice : rep.values) {
      if (!slice.allFinite()) {
        finite = false;
        break;
      }
    }
    cell.unstable = converged != points || !finite;
    cell.reconstruction_error = reconstruction_error(ds, rep.final_basis);

    if (rep.labels) {
      const auto [train, test] = split_train_test(flatten(rep));
      if (train.features.rows() > 0 && test.features.rows() > 0) {
        cell.accuracy = knn_accuracy(train, test, 1);
      }
    }
  } catch (const RankDeficientError& e) {
    cell.wall_time_s = seconds_since(start);
    cell.unstable = true;
    cell.error = e.what();
  } catch (const Error& e) {
    cell.wall_time_s = seconds_since(start);
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

Dataset generate(const SyntheticSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  const Index d = spec.variables;
  const Eigen::MatrixXd basis_pre = random_orthonormal(d, d, spec.rotation_seed);
  const Eigen::MatrixXd basis_post =
      spec.drift ? random_orthonormal(d, d, spec.drift->basis_seed) : basis_pre;
  const Eigen::VectorXd scale = spec.covariance_eigenvalues.cwiseSqrt();
  const Eigen::MatrixXd shape_pre = basis_pre * scale.asDiagonal();
  const Eigen::MatrixXd shape_post = basis_post * scale.asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> slices;
  slices.reserve(static_cast<std::size_t>(spec.length));
  Eigen::VectorXd z(d);
  for (Index n = 0; n < spec.length; ++n) {
    const bool drifted = spec.drift && n >= spec.drift->change_point;
    const Eigen::MatrixXd& shape = drifted ? shape_post : shape_pre;
    Eigen::MatrixXd slice(spec.instances, d);
    for (Index b = 0; b < spec.instances; ++b) {
      for (Index v = 0; v < d; ++v) {
        z[v] = normal(rng);
      }
      Eigen::VectorXd x = shape * z;
      if (spec.classes) {
        x += (b % 2 == 0) ? spec.classes->mean0 : spec.classes->mean1;
      }
      slice.row(b) = x.transpose();
    }
    slices.push_back(std::move(slice));
  }
  std::optional<std::vector<long>> labels;
  if (spec.classes) {
    std::vector<long> l(static_cast<std::size_t>(spec.instances));
    for (Index b = 0; b < spec.instances; ++b) {
      l[static_cast<std::size_t>(b)] = b % 2;
    }
    labels = std::move(l);
  }
  return Dataset(std::move(slices), std::move(labels));
}

FlatLabeled flatten(const Dataset& ds) {
  if (!ds.labels()) {
    throw UnlabeledError("dataset carries no labels");
  }
  FlatLabeled out;
  out.features.resize(ds.instances(), ds.length() * ds.variables());
  for (Index b = 0; b < ds.instances(); ++b) {
    for (Index n = 0; n < ds.length(); ++n) {
      for (Index v = 0; v < ds.variables(); ++v) {
        out.features(b, n * ds.variables() + v) = ds.at(b, n, v);
      }
    }
  }
  out.labels = *ds.labels();
  return out;
}

FlatLabeled flatten(const CompactRepresentation& rep) {
  if (!rep.labels) {
    throw UnlabeledError("compact representation carries no labels");
  }
  FlatLabeled out;
  out.features.resize(rep.instances(), rep.length() * rep.components());
  for (Index b = 0; b < rep.instances(); ++b) {
    for (Index n = 0; n < rep.length(); ++n) {
      const Eigen::MatrixXd& slice = rep.values[static_cast<std::size_t>(n)];
      for (Index c = 0; c < rep.components(); ++c) {
        out.features(b, n * rep.components() + c) = slice(b, c);
      }
    }
  }
  out.labels = *rep.labels;
  return out;
}

double knn_accuracy(const FlatLabeled& train, const FlatLabeled& test, int k_neighbors) {
  if (train.features.cols() != test.features.cols()) {
    throw DimensionMismatchError("train has " + std::to_string(train.features.cols()) +
                                 " features, test has " +
                                 std::to_string(test.features.cols()));
  }
  const Index n_train = train.features.rows();
  const Index n_test = test.features.rows();
  if (n_train < 1 || n_test < 1) {
    throw InputError("neighbor classifier needs nonempty train and test sets");
  }
  if (static_cast<Index>(train.labels.size()) != n_train ||
      static_cast<Index>(test.labels.size()) != n_test) {
    throw UnlabeledError("label count does not match row count");
  }
  if (k_neighbors < 1) {
    throw InputError("k_neighbors must be >= 1");
  }
  const Index k = std::min<Index>(k_neighbors, n_train);

  Index correct = 0;
  std::vector<Index> order(static_cast<std::size_t>(n_train));
  for (Index t = 0; t < n_test; ++t) {
    const Eigen::VectorXd dists =
        (train.features.rowwise() - test.features.row(t)).rowwise().squaredNorm();
    long predicted = 0;
    if (k == 1) {
      Index best = 0;
      for (Index r = 1; r < n_train; ++r) {
        if (dists[r] < dists[best]) {  // strict: ties keep the lowest index
          best = r;
        }
      }
      predicted = train.labels[static_cast<std::size_t>(best)];
    } else {
      for (Index r = 0; r < n_train; ++r) {
        order[static_cast<std::size_t>(r)] = r;
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](Index a, Index b) { return dists[a] < dists[b]; });
      std::vector<std::pair<long, int>> votes;
      for (Index i = 0; i < k; ++i) {
        const long lbl = train.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        auto it = std::find_if(votes.begin(), votes.end(),
                               [&](const auto& p) { return p.first == lbl; });
        if (it == votes.end()) {
          votes.emplace_back(lbl, 1);
        } else {
          ++it->second;
        }
      }
      int best_count = 0;
      for (const auto& [lbl, count] : votes) {
        if (count > best_count) {
          best_count = count;
        }
      }
      // Tie-break toward the class of the nearest tied neighbor.
      for (Index i = 0; i < k; ++i) {
        const long lbl = train.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        const auto it = std::find_if(votes.begin(), votes.end(),
                                     [&](const auto& p) { return p.first == lbl; });
        if (it->second == best_count) {
          predicted = lbl;
          break;
        }
      }
    }
    if (predicted == test.labels[static_cast<std::size_t>(t)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n_test);
}

std::pair<FlatLabeled, FlatLabeled> split_train_test(const FlatLabeled& all) {
  const Index rows = all.features.rows();
  const Index n_train = (rows + 1) / 2;
  FlatLabeled train;
  FlatLabeled test;
  train.features = all.features.topRows(n_train);
  test.features = all.features.bottomRows(rows - n_train);
  train.labels.assign(all.labels.begin(), all.labels.begin() + n_train);
  test.labels.assign(all.labels.begin() + n_train, all.labels.end());
  return {std::move(train), std::move(test)};
}

SweepResult sweep(const Dataset& ds, const std::vector<Index>& t_values,
                  const std::vector<Index>& k_values, const RunConfig& base, int jobs) {
  SweepResult result;
  std::vector<std::pair<Index, Index>> grid;
  for (Index t : t_values) {
    for (Index k : k_values) {
      grid.emplace_back(t, k);
    }
  }
  result.cells.resize(grid.size());
  if (grid.empty()) {
    return result;
  }

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      result.cells[i] = run_cell(ds, grid[i].first, grid[i].second, base);
    }
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= grid.size()) {
          return;
        }
        result.cells[i] = run_cell(ds, grid[i].first, grid[i].second, base);
      }
    });
  }
  for (std::thread& th : pool) {
    th.join();
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "time_batch,components,accuracy,reconstruction_error,wall_time_s,"
      "converged_fraction,unstable,error\n";
  for (const SweepCell& c : result.cells) {
    out += std::to_string(c.time_batch);
    out += ',';
    out += std::to_string(c.components);
    out += ',';
    out += format_double(c.accuracy);
    out += ',';
    out += format_double(c.reconstruction_error);
    out += ',';
    out += format_double(c.wall_time_s);
    out += ',';
    out += format_double(c.converged_fraction);
    out += ',';
    out += c.unstable ? "1" : "0";
    out += ',';
    out += csv_quote(c.error);
    out += '\n';
  }
  return out;
}

std::vector<BenchRow> bench_scaling(const SyntheticSpec& base,
                                    const std::vector<Index>& lengths,
                                    const RunConfig& cfg, int repeats) {
  const int reps = std::max(repeats, 3);
  std::vector<Dataset> data;
  data.reserve(lengths.size());
  for (Index n : lengths) {
    SyntheticSpec spec = base;
    spec.length = n;
    if (spec.drift && spec.drift->change_point >= n) {
      spec.drift.reset();
    }
    data.push_back(generate(spec, cfg.seed));
  }
  // One untimed pass warms caches and clock scaling before any measurement.
  for (const Dataset& ds : data) {
    static_cast<void>(compress(ds, cfg));
  }
  // Repetitions are interleaved across lengths so a slow stretch of the
  // machine penalizes every length alike instead of one block.
  std::vector<std::vector<double>> times(data.size());
  for (int r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto start = Clock::now();
      static_cast<void>(compress(data[i], cfg));
      times[i].push_back(seconds_since(start));
    }
  }
  std::vector<BenchRow> rows;
  rows.reserve(lengths.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::sort(times[i].begin(), times[i].end());
    const std::size_t mid = times[i].size() / 2;
    const double median = times[i].size() % 2 == 1
                              ? times[i][mid]
                              : 0.5 * (times[i][mid - 1] + times[i][mid]);
    rows.push_back(BenchRow{lengths[i], median});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "length,median_seconds\n";
  for (const BenchRow& r : rows) {
    out += std::to_string(r.length);
    out += ',';
    out += format_double(r.median_seconds);
    out += '\n';
  }
  return out;
}

}  // namespace tspca
