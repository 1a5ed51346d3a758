#pragma once

#include "kkm/config.hpp"
#include "kkm/kernel.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace kkm {

inline constexpr int kReportSchema = 1;

/// Stage names used for timings.
inline constexpr std::array<const char*, 3> kStages = {"Nystrom", "DR", "kmeans"};

/// Trace ratios need an n x n SVD per trial; skipped above this size.
inline constexpr Index kTraceRatioMaxN = 1000;

struct TrialRecord {
  Index trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> nmi;
  std::optional<double> objective_feature;
  std::optional<double> objective_column;
  std::optional<double> trace_ratio;
  bool degree_failure = false;
  Index ell_used = 0;
  bool ell_reduced = false;
  int iterations = 0;
  Index zero_embedding_rows = 0;  // spectral pipelines: rows left at zero
  std::vector<int> assignments;
  std::array<double, 3> seconds{};  // indexed like kStages
};

struct Summary {
  Index count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

/// Mean and sample standard deviation, summed in index order.
Summary summarize(const std::vector<double>& values);

struct Report {
  RunConfig config;
  Index n = 0;
  Index d = 0;
  double sigma = 0.0;
  std::vector<TrialRecord> trials;

  Index degree_failures() const;
  /// Aggregate of one metric over the trials without degree failure.
  Summary aggregate(std::optional<double> TrialRecord::*field) const;

  /// {schema, config, data, results, determinism_hash, timings}. The hash is
  /// FNV-1a over the serialized `results` section, which excludes timings.
  nlohmann::ordered_json to_json() const;
  /// One row per trial.
  std::string to_csv() const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Reads the configured dataset (file or `rings:<per ring>:<noise>`).
DataMatrix load_dataset(const RunConfig& config);

/// The RBF kernel of the config: explicit sigma, else the beta heuristic.
KernelSpec kernel_for(const RunConfig& config, const DataMatrix& data);

/// Seed of trial i: derive_seed(seed, trial stream + i).
std::uint64_t trial_seed(std::uint64_t seed, Index trial);

/// Runs config.trials independent trials (in parallel) on the given data.
Report run(const RunConfig& config, const DataMatrix& data);
Report run(const RunConfig& config);

struct PairedReport {
  Report a;
  Report b;
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Same data, k, trials and seed required. Degree-failure trials are dropped
/// from each side's aggregates and counted.
PairedReport compare(const RunConfig& a, const RunConfig& b, const DataMatrix& data);
PairedReport compare(const RunConfig& a, const RunConfig& b);

/// `key=v1,v2,...` grid, one run per value; rows carry the aggregates.
struct SweepGrid {
  std::string key;
  std::vector<std::string> values;
};
SweepGrid parse_grid(std::string_view text);

nlohmann::ordered_json sweep(const RunConfig& config, const SweepGrid& grid);

/// Built-in verification harnesses: "theorem1", "pcp", "kernel-trick".
/// Returns {name, passed, ...details}.
nlohmann::ordered_json verify(std::string_view name, std::uint64_t seed = 0);

}  // namespace kkm
