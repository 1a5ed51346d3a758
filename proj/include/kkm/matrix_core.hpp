#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace kkm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical property the caller promised does not hold
/// (e.g. a "SPSD" matrix with a significantly negative eigenvalue).
class NumericalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Throws InvalidArgument unless every entry of `m` is finite.
void require_finite(const Matrix& m, const char* what);

/// Reduced eigendecomposition M = V diag(values) V^T, values nonincreasing.
struct EigDecomposition {
  Matrix vectors;
  Vector values;
};

/// Rank-s factors of a truncated SVD, A_s = U diag(sigma) V^T.
struct TruncatedSvd {
  Matrix U;
  Vector sigma;
  Matrix V;
};

struct LeverageProfile {
  Vector scores;
  double coherence = 0.0;
  Index rank = 0;
};

enum class NormKind { Frobenius, Spectral, Trace };

/// Full symmetric eigendecomposition with eigenvalues sorted descending.
/// Rejects non-square input and asymmetry above 1e-8 relative (Frobenius).
EigDecomposition sym_evd(const Matrix& m);

/// Best rank-s approximation factors. Each right singular vector is signed so
/// its first non-negligible entry is positive; U is flipped to match.
TruncatedSvd truncated_svd(const Matrix& a, Index s);

/// Default relative cutoff for pseudo-inverses: max(rows, cols) * machine eps.
double default_pinv_tol(const Matrix& m);

/// Moore-Penrose inverse; singular values below rel_tol * sigma_max are zeroed.
Matrix pinv(const Matrix& m, std::optional<double> rel_tol = std::nullopt);

double norm(const Matrix& a, NormKind kind);

/// Singular values in nonincreasing order.
Vector singular_values(const Matrix& a);

/// Row leverage scores and coherence of A. Rank is the number of singular
/// values above default_pinv_tol * sigma_max.
LeverageProfile leverage_profile(const Matrix& a);

/// Symmetric PSD square root. Eigenvalues in [-1e-8 * sigma_max, 0) are
/// clamped to zero; anything more negative is a NumericalError.
Matrix psd_sqrt(const Matrix& k);

/// Smallest eigenvalue of the symmetric part of m.
double min_eigenvalue(const Matrix& m);

/// Thin orthonormal basis for the columns of m (Householder QR), same width.
Matrix orthonormalize(const Matrix& m);

/// ||Q^T Q - I||_F.
double orthonormality_residual(const Matrix& q);

/// Relative asymmetry ||M - M^T||_F / ||M||_F (0 for the zero matrix).
double asymmetry(const Matrix& m);

}  // namespace kkm
