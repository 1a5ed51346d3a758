#pragma once

#include "kkm/approx.hpp"
#include "kkm/cluster.hpp"
#include "kkm/matrix_core.hpp"
#include "kkm/sketch.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kkm {

/// Normalized mutual information I(a;b) / sqrt(H(a) H(b)) with natural logs.
/// Returns 0 when either labeling has a single class. Exactly symmetric and
/// invariant to relabeling.
double nmi(std::span<const int> a, std::span<const int> b);

struct PcpReport {
  double alpha = 0.0;  // trace(K - B B^T)
  Index lower_violations = 0;
  Index upper_violations = 0;
  Index trials = 0;  // projections evaluated (frames + indicator projections)
  double epsilon_used = 0.0;
  double bound = 0.0;  // 1 + epsilon_used + k/s
  Index k = 0;
  Index s = 0;
  double max_lower_gap = 0.0;  // max of lhs - middle over projections
  double max_upper_gap = 0.0;  // max of middle - bound * lhs
};

inline constexpr int kPcpIndicatorPartitions = 10;

/// Checks ||(I-P)K^{1/2}||_F^2 <= ||(I-P)B||_F^2 + alpha
///                              <= (1 + eps + k/s) ||(I-P)K^{1/2}||_F^2
/// over `trials` random rank-k orthonormal frames plus the indicator
/// projections of 10 random k-partitions, at tolerance 1e-7 trace(K).
/// `epsilon` defaults to the measured trace ratio of B B^T minus one.
/// Throws NumericalError unless B B^T <= K within that tolerance.
PcpReport pcp_check(const Matrix& k, const Matrix& b, Index kclusters, Index trials,
                    std::uint64_t seed, std::optional<double> epsilon = std::nullopt);

struct BruteForceResult {
  double objective = 0.0;
  Clustering partition;
};

inline constexpr Index kBruteForceMaxN = 14;

/// Exact minimum of the linear k-means objective over all partitions of the
/// rows of B into exactly k nonempty blocks. Requires k <= n <= 14.
BruteForceResult brute_force_kmeans(const Matrix& b, int k);

/// Same enumeration, minimizing the feature-mode kernel objective of K.
BruteForceResult brute_force_kernel_kmeans(const Matrix& k, int kclusters);

/// Q diag(spectrum) Q^T with Q Haar-random under the seed.
Matrix synthetic_spsd(std::span<const double> spectrum, std::uint64_t seed);

/// lambda_i = i^{-power}, i = 1..n.
std::vector<double> power_law_spectrum(Index n, double power);

/// lambda_i = base^i, i = 1..n.
std::vector<double> geometric_spectrum(Index n, double base);

struct SweepCell {
  SketchKind kind = SketchKind::Uniform;
  Index c = 0;
  Index seeds = 0;
  std::vector<double> epsilons;
  std::vector<double> success_fraction;  // per epsilon: ratio <= 1 + eps
  double mean_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// Default epsilon grid for sweeps.
std::vector<double> default_epsilon_grid();

/// Trace-error ratios of (C W^+ C^T)_s over `seeds` independent sketches of a
/// fixed synthetic K, one cell per (kind, c). c values above n are clipped.
std::vector<SweepCell> theorem1_sweep(std::span<const double> spectrum, Index s,
                                      std::span<const SketchKind> kinds,
                                      std::span<const Index> c_grid, Index seeds,
                                      std::uint64_t base_seed);

/// Sweep over an explicit SPSD matrix instead of a generated one.
std::vector<SweepCell> theorem1_sweep(const Matrix& k, Index s,
                                      std::span<const SketchKind> kinds,
                                      std::span<const Index> c_grid, Index seeds,
                                      std::uint64_t base_seed);

/// Trace ratio of one sketch of K (kind, c, seed); leverage kinds use the
/// leverage scores of the top-s eigenvectors of K.
double trace_ratio_for_sketch(const Matrix& k, Index s, SketchKind kind, Index c,
                              std::uint64_t seed);

}  // namespace kkm
