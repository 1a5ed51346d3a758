#pragma once

#include "kkm/matrix_core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kkm {

/// Sketching matrix families. `Selection` is a deterministic column selection
/// with unit scale over caller-supplied indices (landmarks, identity sketch).
enum class SketchKind { Uniform, Leverage, Gaussian, Srht, CountSketch, Selection };

std::string_view to_string(SketchKind kind);
SketchKind parse_sketch_kind(std::string_view name);

/// True for the kinds whose P has exactly one nonzero per column.
bool is_sampling(SketchKind kind);

struct SketchPlan {
  SketchKind kind = SketchKind::Uniform;
  Index n = 0;
  Index c = 0;
  std::uint64_t seed = 0;
  /// Sampling distribution over rows; Leverage only.
  std::optional<std::vector<double>> probabilities;
  /// Selected rows; Selection only (c must equal its length).
  std::optional<std::vector<Index>> indices;

  /// Throws InvalidArgument unless n, c >= 1 and the kind-specific fields hold.
  /// c may exceed n (SRHT: up to n rounded up to a power of two).
  void validate() const;

  static SketchPlan uniform(Index n, Index c, std::uint64_t seed);
  static SketchPlan gaussian(Index n, Index c, std::uint64_t seed);
  static SketchPlan srht(Index n, Index c, std::uint64_t seed);
  static SketchPlan countsketch(Index n, Index c, std::uint64_t seed);
  static SketchPlan leverage(std::vector<double> probabilities, Index c,
                             std::uint64_t seed);
  static SketchPlan selection(Index n, std::vector<Index> indices);
  /// Every column selected once, in order: P = I_n.
  static SketchPlan identity(Index n);
};

/// Sampling probabilities proportional to the row leverage scores of V_s,
/// the top-s eigenvectors of the SPSD matrix k.
std::vector<double> leverage_probabilities(const Matrix& k, Index s);

/// One nonzero per column: column j has value scales[j] at row rows[j].
struct SampledColumns {
  std::vector<Index> rows;
  std::vector<double> scales;
};

/// P = (1/sqrt(c)) * (D H S) restricted to the first n of `padded` rows, with
/// D random signs, H the unnormalized Walsh-Hadamard matrix and S a uniform
/// column subsample without replacement.
struct HadamardSketch {
  Index padded = 0;
  std::vector<double> signs;
  std::vector<Index> sampled;
};

/// Row i of P has a single +-1 at column buckets[i].
struct CountSketchHash {
  std::vector<Index> buckets;
  std::vector<double> signs;
};

using SketchRealization =
    std::variant<SampledColumns, Matrix, HadamardSketch, CountSketchHash>;

class SketchOperator {
 public:
  SketchOperator(SketchPlan plan, SketchRealization realization)
      : plan_(std::move(plan)), realization_(std::move(realization)) {}

  const SketchPlan& plan() const { return plan_; }
  const SketchRealization& realization() const { return realization_; }
  Index n() const { return plan_.n; }
  Index c() const { return plan_.c; }

  /// Explicit n x c matrix P.
  Matrix dense() const;

  /// A * P for A with n columns, in the operator's structured form.
  Matrix apply_right(const Matrix& a) const;

  /// P^T * X for X with n rows.
  Matrix apply_transpose_left(const Matrix& x) const;

  /// Sampling realization, when the kind is a sampling kind.
  const SampledColumns* sampled() const { return std::get_if<SampledColumns>(&realization_); }

 private:
  SketchPlan plan_;
  SketchRealization realization_;
};

/// Deterministic for a fixed plan. Sampling kinds draw rows i.i.d. with
/// replacement and scale by 1/sqrt(c p_i).
SketchOperator build_sketch(const SketchPlan& plan);

/// In-place unnormalized fast Walsh-Hadamard transform; size must be 2^m.
void fwht(std::span<double> values);

/// ||V^T P P^T V - I_s||_2 for V with orthonormal columns.
double embedding_score(const Matrix& v, const SketchOperator& sketch);

/// ||V^T P P^T Y - V^T Y||_F^2 / ||Y||_F^2 (0 when Y = 0).
double multiplication_score(const Matrix& v, const Matrix& y,
                            const SketchOperator& sketch);

}  // namespace kkm
