#include "kkm/spectral.hpp"

#include "kkm/random.hpp"

#include <cmath>

namespace kkm {

namespace {

void normalize_rows(Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double r = m.row(i).norm();
    if (r > 0.0) m.row(i) /= r;
  }
}

// Symmetric square root of the pseudo-inverse, default cutoff.
Matrix pinv_sqrt(const Matrix& w) {
  const EigDecomposition evd = sym_evd(w);
  const double top = std::max(evd.values(0), 0.0);
  const double tol = default_pinv_tol(w) * top;
  Vector root = Vector::Zero(evd.values.size());
  for (Index i = 0; i < root.size(); ++i) {
    if (evd.values(i) > tol && evd.values(i) > 0.0) root(i) = 1.0 / std::sqrt(evd.values(i));
  }
  return evd.vectors * root.asDiagonal() * evd.vectors.transpose();
}

}  // namespace

Matrix spectral_embedding_exact(const Matrix& k, int kclusters) {
  const Index n = k.rows();
  if (k.cols() != n) throw InvalidArgument("spectral_exact: affinity must be square");
  if (kclusters < 1 || kclusters > n) throw InvalidArgument("spectral_exact: need 1 <= k <= n");
  if (k.minCoeff() < 0.0) throw InvalidArgument("spectral_exact: affinity has a negative entry");
  const Vector deg = k.rowwise().sum();
  for (Index i = 0; i < n; ++i) {
    if (!(deg(i) > 0.0)) {
      throw InvalidArgument("spectral_exact: point " + std::to_string(i) + " has zero degree");
    }
  }
  const Vector inv_root = deg.cwiseSqrt().cwiseInverse();
  const Matrix normalized = inv_root.asDiagonal() * k * inv_root.asDiagonal();
  Matrix emb = sym_evd(normalized).vectors.leftCols(kclusters);
  normalize_rows(emb);
  return emb;
}

Vector nystrom_degrees(const NystromFactors& f) {
  const Vector ones = Vector::Ones(f.C.rows());
  const Vector ct1 = f.C.transpose() * ones;
  return f.C * (pinv(f.W) * ct1);
}

std::variant<Matrix, DegreeFailure> spectral_embedding_nystrom(const NystromFactors& f,
                                                               int kclusters) {
  const Index n = f.C.rows();
  const Index c = f.C.cols();
  if (kclusters < 1 || kclusters > c) {
    throw InvalidArgument("spectral_nystrom: need 1 <= k <= c");
  }
  const Vector deg = nystrom_degrees(f);
  DegreeFailure failure;
  for (Index i = 0; i < n; ++i) {
    if (!(deg(i) > 0.0)) {
      failure.indices.push_back(i);
      failure.degrees.push_back(deg(i));
    }
  }
  if (!failure.indices.empty()) return failure;

  // G = D^{-1/2} C (W^+)^{1/2}; the approximate normalized affinity is G G^T.
  const Matrix g = deg.cwiseSqrt().cwiseInverse().asDiagonal() * f.C * pinv_sqrt(f.W);
  Matrix gram = g.transpose() * g;
  gram = 0.5 * (gram + gram.transpose());
  const EigDecomposition evd = sym_evd(gram);
  const double cutoff = default_pinv_tol(gram) * std::max(evd.values(0), 0.0);
  Matrix emb = Matrix::Zero(n, kclusters);
  for (Index j = 0; j < kclusters; ++j) {
    const double lam = evd.values(j);
    if (lam > cutoff && lam > 0.0) emb.col(j) = g * evd.vectors.col(j) / std::sqrt(lam);
  }
  normalize_rows(emb);
  return emb;
}

Clustering spectral_exact(const Matrix& k, int kclusters, std::uint64_t seed, LloydOptions opts) {
  return kmeans(spectral_embedding_exact(k, kclusters), kclusters, seed, opts);
}

SpectralOutcome spectral_nystrom(const NystromFactors& f, int kclusters, std::uint64_t seed,
                                 LloydOptions opts) {
  auto emb = spectral_embedding_nystrom(f, kclusters);
  if (auto* failure = std::get_if<DegreeFailure>(&emb)) return std::move(*failure);
  return kmeans(std::get<Matrix>(emb), kclusters, seed, opts);
}

SpectralOutcome spectral_nystrom(const DataMatrix& data, const KernelSpec& spec, Index c,
                                 int kclusters, std::uint64_t seed, LloydOptions opts) {
  if (c < 1 || c > data.n()) throw InvalidArgument("spectral_nystrom: need 1 <= c <= n");
  const NystromFactors f = nystrom_factors(
      data, spec, SketchPlan::uniform(data.n(), c, derive_seed(seed, streams::kSketch)));
  return spectral_nystrom(f, kclusters, seed, opts);
}

}  // namespace kkm
