// Command-line front end: generate / compress / validate / sweep / bench.
//
// Exit codes: 0 success, 1 input or parse problem, 2 numerical failure,
// 3 validation threshold not met.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tspca/harness.hpp"
#include "tspca/io.hpp"
#include "tspca/oracle.hpp"
#include "tspca/streaming_pca.hpp"

namespace {

using tspca::Index;

struct ConfigFlags {
  long time_batch = 8;
  long components = 2;
  double tol = 1e-6;
  long max_inner_iters = 100;
  std::uint64_t seed = 0;
  std::string pooling = "none";
  std::string counter = "global";
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("-T,--time-batch", f.time_batch, "Time points per batch")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-K,--components", f.components, "Retained principal components")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Inner-loop convergence tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-inner-iters", f.max_inner_iters,
                  "Cap on power-iteration sweeps per time point")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Seed for the starting basis");
  cmd->add_option("--pooling", f.pooling, "Temporal pooling of each batch's output")
      ->check(CLI::IsMember({"none", "mean"}));
  cmd->add_option("--counter", f.counter, "Weight counter scope")
      ->check(CLI::IsMember({"global", "per-batch"}));
}

tspca::RunConfig to_config(const ConfigFlags& f) {
  tspca::RunConfig cfg;
  cfg.time_batch = f.time_batch;
  cfg.components = f.components;
  cfg.tol = f.tol;
  cfg.max_inner_iters = f.max_inner_iters;
  cfg.seed = f.seed;
  cfg.pooling = f.pooling == "mean" ? tspca::Pooling::mean_over_batch : tspca::Pooling::none;
  cfg.counter =
      f.counter == "per-batch" ? tspca::CounterMode::per_batch : tspca::CounterMode::global;
  return cfg;
}

tspca::Dataset load_input(const std::string& path, const std::string& format) {
  std::string fmt = format;
  if (fmt == "auto") {
    fmt = std::filesystem::path(path).extension() == ".ts" ? "ts" : "csv";
  }
  tspca::Dataset ds = fmt == "ts" ? tspca::read_ts(path) : tspca::read_csv(path);
  tspca::validate_dataset(ds);
  return ds;
}

std::vector<Index> parse_index_list(const std::string& csv, const char* what) {
  std::vector<Index> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t pos = csv.find(',', start);
    const std::string tok = csv.substr(start, pos == std::string::npos ? std::string::npos
                                                                       : pos - start);
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 1) {
        throw std::invalid_argument(tok);
      }
      out.push_back(v);
    } catch (const std::exception&) {
      throw tspca::InputError(std::string(what) + " list expects positive integers, got '" +
                              tok + "'");
    }
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

Eigen::VectorXd parse_eigenvalue_list(const std::string& csv) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t pos = csv.find(',', start);
    const std::string tok = csv.substr(start, pos == std::string::npos ? std::string::npos
                                                                       : pos - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) {
        throw std::invalid_argument(tok);
      }
      vals.push_back(v);
    } catch (const std::exception&) {
      throw tspca::InputError("eigenvalue list expects numbers, got '" + tok + "'");
    }
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 1;
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

Eigen::VectorXd geometric_eigenvalues(Index d) {
  Eigen::VectorXd eig(d);
  double v = 5.0;
  for (Index i = 0; i < d; ++i) {
    eig[i] = v;
    v *= 0.55;
  }
  return eig;
}

double converged_fraction(const tspca::CompactRepresentation& rep) {
  long points = 0;
  long converged = 0;
  for (const auto& br : rep.reports) {
    for (const auto& r : br.points) {
      ++points;
      converged += r.converged ? 1 : 0;
    }
  }
  return points == 0 ? 1.0 : static_cast<double>(converged) / static_cast<double>(points);
}

// ---- subcommand bodies -----------------------------------------------------

struct GenerateArgs {
  std::string preset = "stationary";
  long instances = 0;  // 0 = preset default
  long length = 0;
  long variables = 0;
  std::string eigenvalues;
  double offset = 2.5;
  long drift_at = 0;
  std::uint64_t rotation_seed = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  tspca::SyntheticSpec spec;
  if (a.preset == "stationary") {
    spec.instances = 64;
    spec.length = 200;
    spec.variables = 6;
    spec.covariance_eigenvalues = parse_eigenvalue_list("5,3,1,0.5,0.2,0.1");
  } else if (a.preset == "stationary-2class") {
    spec.instances = 64;
    spec.length = 96;
    spec.variables = 8;
    spec.covariance_eigenvalues = parse_eigenvalue_list("5,3,0.4,0.3,0.2,0.15,0.1,0.05");
  } else {  // drift
    spec.instances = 64;
    spec.length = 200;
    spec.variables = 6;
    spec.covariance_eigenvalues = parse_eigenvalue_list("5,3,1,0.5,0.2,0.1");
    spec.drift = tspca::DriftSpec{100, a.rotation_seed + 17};
  }
  spec.rotation_seed = a.rotation_seed;
  if (a.instances > 0) spec.instances = a.instances;
  if (a.length > 0) spec.length = a.length;
  if (a.variables > 0) spec.variables = a.variables;
  if (!a.eigenvalues.empty()) {
    spec.covariance_eigenvalues = parse_eigenvalue_list(a.eigenvalues);
  } else if (a.variables > 0 && spec.covariance_eigenvalues.size() != spec.variables) {
    spec.covariance_eigenvalues = geometric_eigenvalues(spec.variables);
  }
  if (a.drift_at > 0) {
    spec.drift = tspca::DriftSpec{a.drift_at, a.rotation_seed + 17};
  }
  if (a.preset == "stationary-2class") {
    const Index d = spec.variables;
    const Eigen::VectorXd direction = Eigen::VectorXd::Ones(d) / std::sqrt(double(d));
    spec.classes = tspca::TwoClassSpec{-a.offset * direction, a.offset * direction};
  }

  const tspca::Dataset ds = tspca::generate(spec, a.seed);
  tspca::write_csv(ds, a.out);
  std::printf("generate: B=%ld N=%ld d=%ld labels=%s -> %s\n", long(ds.instances()),
              long(ds.length()), long(ds.variables()), ds.labels() ? "yes" : "no",
              a.out.c_str());
  return 0;
}

struct CompressArgs {
  std::string input;
  std::string format = "auto";
  ConfigFlags cfg;
  std::string out;
};

int run_compress(const CompressArgs& a) {
  const tspca::Dataset ds = load_input(a.input, a.format);
  const tspca::RunConfig cfg = to_config(a.cfg);
  const auto start = std::chrono::steady_clock::now();
  const tspca::CompactRepresentation rep = tspca::compress(ds, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  tspca::write_compact(rep, a.out);
  std::printf(
      "compress: B=%ld N=%ld d=%ld -> k=%ld N_out=%ld batches=%zu converged=%.1f%% "
      "time=%.3fs out=%s\n",
      long(ds.instances()), long(ds.length()), long(ds.variables()), long(rep.components()),
      long(rep.length()), rep.eigen_trajectory.size(), 100.0 * converged_fraction(rep), wall,
      a.out.c_str());
  return 0;
}

struct ValidateArgs {
  std::string input;
  std::string format = "auto";
  ConfigFlags cfg;
  double max_distance = 0.15;
};

int run_validate(const ValidateArgs& a) {
  const tspca::Dataset ds = load_input(a.input, a.format);
  const tspca::RunConfig cfg = to_config(a.cfg);
  const tspca::CompactRepresentation rep = tspca::compress(ds, cfg);

  const Eigen::MatrixXd cov = tspca::pooled_covariance(ds);
  const tspca::EigenSolution sol = tspca::batch_pca(cov);
  const Eigen::MatrixXd top = sol.eigenvectors.leftCols(cfg.components);

  const double dist = tspca::subspace_distance(rep.final_basis, top);
  const double err_streaming = tspca::reconstruction_error(ds, rep.final_basis);
  const double err_oracle = tspca::reconstruction_error(ds, top);

  std::printf("subspace_distance=%.6f\n", dist);
  std::printf("reconstruction_error_streaming=%.6f\n", err_streaming);
  std::printf("reconstruction_error_oracle=%.6f\n", err_oracle);
  if (dist <= a.max_distance) {
    std::printf("PASS (max distance %.6f)\n", a.max_distance);
    return 0;
  }
  std::printf("FAIL (max distance %.6f)\n", a.max_distance);
  return 3;
}

struct SweepArgs {
  std::string input;
  std::string format = "auto";
  std::string t_list;
  std::string k_list;
  ConfigFlags cfg;
  int jobs = 1;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  const tspca::Dataset ds = load_input(a.input, a.format);
  const std::vector<Index> ts = parse_index_list(a.t_list, "T");
  const std::vector<Index> ks = parse_index_list(a.k_list, "K");
  const tspca::SweepResult result = tspca::sweep(ds, ts, ks, to_config(a.cfg), a.jobs);
  tspca::atomic_write(a.out, tspca::sweep_csv(result));
  std::printf("sweep: %zu cells -> %s\n", result.cells.size(), a.out.c_str());
  return 0;
}

struct BenchArgs {
  std::string n_list;
  long instances = 16;
  long variables = 8;
  std::string eigenvalues;
  ConfigFlags cfg;
  int repeats = 3;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  tspca::SyntheticSpec spec;
  spec.instances = a.instances;
  spec.variables = a.variables;
  spec.covariance_eigenvalues = a.eigenvalues.empty()
                                    ? geometric_eigenvalues(a.variables)
                                    : parse_eigenvalue_list(a.eigenvalues);
  const std::vector<Index> lengths = parse_index_list(a.n_list, "N");
  const std::vector<tspca::BenchRow> rows =
      tspca::bench_scaling(spec, lengths, to_config(a.cfg), a.repeats);
  tspca::atomic_write(a.out, tspca::bench_csv(rows));
  for (const tspca::BenchRow& r : rows) {
    std::printf("bench: N=%ld median=%.4fs\n", long(r.length), r.median_seconds);
  }
  std::printf("bench: %zu rows -> %s\n", rows.size(), a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming temporal-batch PCA for multivariate time series"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_generate = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  cmd_generate->add_option("--preset", gen.preset, "Data recipe")
      ->check(CLI::IsMember({"stationary", "stationary-2class", "drift"}));
  cmd_generate->add_option("--instances", gen.instances, "Override instance count");
  cmd_generate->add_option("--length", gen.length, "Override sequence length");
  cmd_generate->add_option("--variables", gen.variables, "Override variable count");
  cmd_generate->add_option("--eigenvalues", gen.eigenvalues,
                           "Comma-separated covariance eigenvalues (descending)");
  cmd_generate->add_option("--offset", gen.offset, "Class mean offset (2-class preset)");
  cmd_generate->add_option("--drift-at", gen.drift_at, "Switch eigenbasis at this time index");
  cmd_generate->add_option("--rotation-seed", gen.rotation_seed, "Seed for the eigenbasis");
  cmd_generate->add_option("--seed", gen.seed, "Seed for the noise stream");
  cmd_generate->add_option("--out", gen.out, "Output CSV path")->required();

  CompressArgs comp;
  CLI::App* cmd_compress = app.add_subcommand("compress", "Project a dataset to K components");
  cmd_compress->add_option("--input", comp.input, "Input dataset")->required();
  cmd_compress->add_option("--format", comp.format, "Input format")
      ->check(CLI::IsMember({"auto", "csv", "ts"}));
  add_config_flags(cmd_compress, comp.cfg);
  cmd_compress->add_option("--out", comp.out, "Output CSV path (sidecar: <out>.meta.json)")
      ->required();

  ValidateArgs val;
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "Compare a streaming run against batch PCA");
  cmd_validate->add_option("--input", val.input, "Input dataset")->required();
  cmd_validate->add_option("--format", val.format, "Input format")
      ->check(CLI::IsMember({"auto", "csv", "ts"}));
  add_config_flags(cmd_validate, val.cfg);
  cmd_validate->add_option("--max-distance", val.max_distance,
                           "PASS threshold on the subspace distance");

  SweepArgs swp;
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Grid of runs over T and K values");
  cmd_sweep->add_option("--input", swp.input, "Input dataset")->required();
  cmd_sweep->add_option("--format", swp.format, "Input format")
      ->check(CLI::IsMember({"auto", "csv", "ts"}));
  cmd_sweep->add_option("--t", swp.t_list, "Comma-separated T values")->required();
  cmd_sweep->add_option("--k", swp.k_list, "Comma-separated K values")->required();
  add_config_flags(cmd_sweep, swp.cfg);
  cmd_sweep->add_option("--jobs", swp.jobs, "Worker threads for independent cells")
      ->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--out", swp.out, "Output CSV path")->required();

  BenchArgs ben;
  CLI::App* cmd_bench = app.add_subcommand("bench", "Wall-clock scaling over sequence lengths");
  cmd_bench->add_option("--n", ben.n_list, "Comma-separated sequence lengths")->required();
  cmd_bench->add_option("--instances", ben.instances, "Instance count");
  cmd_bench->add_option("--variables", ben.variables, "Variable count");
  cmd_bench->add_option("--eigenvalues", ben.eigenvalues,
                        "Comma-separated covariance eigenvalues (descending)");
  add_config_flags(cmd_bench, ben.cfg);
  cmd_bench->add_option("--repeats", ben.repeats, "Timed repetitions per length (min 3)")
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--out", ben.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_generate->parsed()) return run_generate(gen);
    if (cmd_compress->parsed()) return run_compress(comp);
    if (cmd_validate->parsed()) return run_validate(val);
    if (cmd_sweep->parsed()) return run_sweep(swp);
    if (cmd_bench->parsed()) return run_bench(ben);
  } catch (const tspca::NumericError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const tspca::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
