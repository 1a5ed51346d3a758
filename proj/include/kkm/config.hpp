#pragma once

#include "kkm/cluster.hpp"
#include "kkm/ingest.hpp"
#include "kkm/sketch.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace kkm {

enum class Pipeline {
  KkmeansNystrom,
  KkmeansPower,
  KkmeansKpca,
  KkmeansRff,
  SpectralNystrom,
  SpectralExact
};

std::string_view to_string(Pipeline pipeline);
Pipeline parse_pipeline(std::string_view name);
bool is_spectral(Pipeline pipeline);

/// Everything one experiment needs. `dataset` is a file path, or
/// `rings:<points per ring>:<noise>` for the built-in two-ring generator.
struct RunConfig {
  std::string command = "run";
  std::string dataset;
  DataFormat format = DataFormat::Csv;
  bool labeled = true;  // CSV only: last column holds the label
  double beta = 1.0;
  std::optional<double> sigma;  // overrides beta when set
  Pipeline pipeline = Pipeline::KkmeansNystrom;
  int k = 2;
  Index s = 0;
  Index c = 0;
  std::optional<Index> ell;  // ceil(c/2) when unset
  Index t = 1;
  SketchKind sketch = SketchKind::Uniform;
  std::uint64_t seed = 0;
  Index trials = 20;
  int max_iter = 100;
  ObjectiveMode objective = ObjectiveMode::Column;
  std::string output;
  int restarts = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  Index materialization_cap = 6000;

  Index ell_or_default() const;

  /// Parameter invariants that do not depend on the data (positivity, known
  /// names). Throws InvalidArgument.
  void validate() const;

  /// Ordering constraints against the dataset size, e.g. k <= s < ell <= c <= n
  /// for the Nystrom pipeline.
  void validate_for(Index n) const;

  nlohmann::ordered_json to_json() const;
};

/// JSON object when the text starts with '{', otherwise `key = value` lines
/// ('#' starts a comment). Unknown keys are rejected. KKM_SEED in the
/// environment overrides the seed.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Applies one `key=value` setting, as used by sweep grids.
void set_field(RunConfig& config, std::string_view key, std::string_view value);

}  // namespace kkm
