#include "kkm/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace kkm {

namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kClampTol = 1e-8;

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument(std::string(what) + ": matrix must be square, got " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

// First entry whose magnitude is above a small fraction of the column's max.
double leading_sign(const Eigen::Ref<const Vector>& v) {
  const double cutoff = 1e-10 * v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > cutoff) return v(i) < 0 ? -1.0 : 1.0;
  }
  return 1.0;
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + ": matrix has non-finite entries");
  }
}

double asymmetry(const Matrix& m) {
  const double f = m.norm();
  if (f == 0.0) return 0.0;
  return (m - m.transpose()).norm() / f;
}

EigDecomposition sym_evd(const Matrix& m) {
  require_square(m, "sym_evd");
  require_finite(m, "sym_evd");
  if (asymmetry(m) > kSymmetryTol) {
    throw InvalidArgument("sym_evd: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_evd: eigensolver did not converge");
  }
  // Eigen returns ascending order.
  EigDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

TruncatedSvd truncated_svd(const Matrix& a, Index s) {
  const Index r = std::min(a.rows(), a.cols());
  if (s < 1 || s > r) {
    throw InvalidArgument("truncated_svd: s=" + std::to_string(s) +
                          " outside [1, " + std::to_string(r) + "]");
  }
  require_finite(a, "truncated_svd");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.U = svd.matrixU().leftCols(s);
  out.sigma = svd.singularValues().head(s);
  out.V = svd.matrixV().leftCols(s);
  for (Index j = 0; j < s; ++j) {
    if (leading_sign(out.V.col(j)) < 0) {
      out.V.col(j) *= -1.0;
      out.U.col(j) *= -1.0;
    }
  }
  return out;
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  if (a.rows() == a.cols() && asymmetry(a) <= 1e-12) {
    // Symmetric: singular values are |eigenvalues|.
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    Vector sv = solver.eigenvalues().cwiseAbs();
    std::sort(sv.data(), sv.data() + sv.size(), std::greater<>());
    return sv;
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

double default_pinv_tol(const Matrix& m) {
  return static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon();
}

Matrix pinv(const Matrix& m, std::optional<double> rel_tol) {
  require_finite(m, "pinv");
  const double tol = rel_tol.value_or(default_pinv_tol(m));
  if (tol < 0) throw InvalidArgument("pinv: rel_tol must be nonnegative");
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = tol * (sv.size() ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double norm(const Matrix& a, NormKind kind) {
  switch (kind) {
    case NormKind::Frobenius:
      return a.norm();
    case NormKind::Spectral: {
      const Vector sv = singular_values(a);
      return sv.size() ? sv(0) : 0.0;
    }
    case NormKind::Trace:
      return singular_values(a).sum();
  }
  return 0.0;
}

LeverageProfile leverage_profile(const Matrix& a) {
  require_finite(a, "leverage_profile");
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    throw InvalidArgument("leverage_profile: matrix is zero");
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = default_pinv_tol(a) * sv(0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;

  LeverageProfile out;
  out.rank = rank;
  out.scores = svd.matrixU().leftCols(rank).rowwise().squaredNorm();
  out.coherence = static_cast<double>(a.rows()) / static_cast<double>(rank) *
                  out.scores.maxCoeff();
  return out;
}

Matrix psd_sqrt(const Matrix& k) {
  const EigDecomposition evd = sym_evd(k);
  const double scale = evd.values.cwiseAbs().maxCoeff();
  Vector root(evd.values.size());
  for (Index i = 0; i < root.size(); ++i) {
    const double v = evd.values(i);
    if (v < -kClampTol * scale) {
      throw NumericalError("psd_sqrt: eigenvalue " + std::to_string(v) +
                           " is significantly negative");
    }
    root(i) = std::sqrt(std::max(v, 0.0));
  }
  Matrix s = evd.vectors * root.asDiagonal() * evd.vectors.transpose();
  return 0.5 * (s + s.transpose());
}

double min_eigenvalue(const Matrix& m) {
  require_square(m, "min_eigenvalue");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

double orthonormality_residual(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

}  // namespace kkm
