#pragma once

#include "kkm/kernel.hpp"
#include "kkm/matrix_core.hpp"
#include "kkm/sketch.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace kkm {

/// C = K P (n x c) and W = P^T K P (c x c).
struct NystromFactors {
  Matrix C;
  Matrix W;
  SketchPlan plan;
};

enum class FeatureSource { Nystrom, Power, Kpca, Rff };

std::string_view to_string(FeatureSource source);

struct FeatureParams {
  Index s = 0;
  Index ell = 0;            // regularization rank actually used (Nystrom)
  Index ell_requested = 0;  // regularization rank asked for (Nystrom)
  Index c = 0;
  Index t = 0;              // power iterations
  bool ell_reduced = false;
};

/// n x s feature rows; columns ordered by nonincreasing singular value of the
/// factorization that produced them.
struct FeatureMatrix {
  Matrix B;
  FeatureSource source = FeatureSource::Nystrom;
  FeatureParams params;
};

/// Default cap on n for sketch kinds that need the full kernel matrix.
inline constexpr Index kDefaultMaterializationCap = 6000;

/// Sampling kinds form C with kernel_columns and never build K. Projection
/// kinds materialize K, which is refused above `materialization_cap`.
NystromFactors nystrom_factors(const DataMatrix& data, const KernelSpec& spec,
                               const SketchPlan& plan,
                               Index materialization_cap = kDefaultMaterializationCap);

/// Factors of an explicit SPSD matrix under an already-built sketch.
NystromFactors nystrom_factors(const Matrix& k, const SketchOperator& sketch);

struct RankRestrictedOptions {
  /// Error out instead of reducing ell when W has fewer than ell eigenvalues
  /// above 1e-12 * lambda_max(W).
  bool strict = false;
};

/// Default regularization rank: ceil(c / 2).
Index default_ell(Index c);

/// Nystrom features with the ell-regularized core: R = C U_{W,ell}
/// Lambda_{W,ell}^{-1/2}, then B = R V_s with V_s the top-s right singular
/// vectors of R, so B B^T = (C W_ell^{-1} C^T)_s. Requires 1 <= s <= ell <= c.
/// When ell is reduced below s, B is padded with zero columns.
FeatureMatrix rank_restricted_features(const NystromFactors& f, Index ell, Index s,
                                       RankRestrictedOptions opts = {});

/// B (n x s) with B B^T = (C W^+ C^T)_s, via the truncated SVD of
/// (W^+)^{1/2} C^T. `rel_tol` is the pseudo-inverse cutoff.
Matrix rank_restricted_factor(const Matrix& c, const Matrix& w, Index s,
                              std::optional<double> rel_tol = std::nullopt);

/// Explicit (C W^+ C^T)_s, the rank-s Nystrom approximation.
Matrix rank_restricted_approx(const NystromFactors& f, Index s,
                              std::optional<double> rel_tol = std::nullopt);

/// ||K - approx||_* / ||K - K_s||_*. Returns 1 when both are zero (relative
/// to ||K||_*, tolerance 1e-10) and +inf when only the denominator is.
double trace_error_ratio(const Matrix& k, const Matrix& approx, Index s);

/// The same ratio from precomputed trace norms (error, tail, ||K||_*).
double trace_error_ratio_from_norms(double error, double tail, double k_trace);

/// ||K - K_s||_*: sum of the singular values of K beyond the s largest.
double tail_trace_norm(const Matrix& k, Index s);

/// Subspace-iteration Nystrom features. The Gaussian start block is
/// re-orthonormalized after every multiplication by K; the span is the same as
/// orthonormalizing K^t P once, without losing the trailing directions to
/// rounding.
FeatureMatrix power_method_features(const Matrix& k, Index s, Index c, Index t,
                                    std::uint64_t seed);

/// ceil(log(n / eps) / log(gap_ratio)), at least 1.
Index power_iterations(Index n, double eps, double gap_ratio);

/// sigma_s / sigma_{s+1} estimated from the spectrum of the Nystrom core W.
/// Returns +inf when sigma_{s+1} is (numerically) zero.
double estimate_gap_ratio(const NystromFactors& f, Index s);

/// B = V_s Lambda_s^{1/2} from the exact eigendecomposition of K.
FeatureMatrix kpca_features(const Matrix& k, Index s);

/// Random Fourier features z(a) = sqrt(2/c) cos(Omega^T a + b), Omega columns
/// ~ N(0, sigma^-2 I), b ~ U[0, 2 pi). E[z(a) . z(a')] equals the RBF kernel.
FeatureMatrix rff_features(const DataMatrix& data, double sigma, Index c,
                           std::uint64_t seed);

/// Dimensionality-reduction step shared by every pipeline: R V_s where V_s
/// holds the dominant s right singular vectors of R.
Matrix reduce_dimension(const Matrix& r, Index s);

}  // namespace kkm
