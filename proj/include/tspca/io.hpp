#pragma once

#include <filesystem>
#include <string>

#include "tspca/types.hpp"

namespace tspca {

// Long-form CSV reader. Expected header: instance,time,<name0>,...,<nameD-1>
// with an optional trailing `label` column; every (instance, time) pair must
// appear exactly once and cover dense index ranges.
Dataset read_csv(const std::filesystem::path& path);

// Minimal reader for the UEA .ts format: `#` comments, `@` metadata,
// `@data`, then one case per line with `:`-separated dimensions and
// comma-separated values. Only equal-length series are supported; class
// labels map to dense integers in order of first appearance.
Dataset read_ts(const std::filesystem::path& path);

// Writes the long-form CSV this library reads back. Values are serialized
// with shortest exact-round-trip formatting.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

// Writes the projected tensor as CSV (header instance,time,c0,...,ck-1) plus
// a JSON sidecar holding the run config, eigenvalue trajectory, and per-batch
// convergence reports.
void write_compact(const CompactRepresentation& rep,
                   const std::filesystem::path& path);

// Sidecar location for a compact CSV: path + ".meta.json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Writes to a temp file in the target directory, then renames, so a failed
// write never leaves a partial file at `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace tspca
