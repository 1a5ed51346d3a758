#include "kkm/approx.hpp"

#include "kkm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kkm {

namespace {

constexpr double kEllCutoff = 1e-12;
constexpr double kZeroRatioTol = 1e-10;

// (W^+)^{1/2} for symmetric W; eigenvalues at or below rel_tol * lambda_max
// (including negative rounding noise) are dropped.
Matrix pinv_sqrt_sym(const Matrix& w, std::optional<double> rel_tol) {
  const EigDecomposition evd = sym_evd(w);
  const double tol = rel_tol.value_or(default_pinv_tol(w));
  const double top = evd.values.size() ? std::max(evd.values(0), 0.0) : 0.0;
  Vector root = Vector::Zero(evd.values.size());
  for (Index i = 0; i < root.size(); ++i) {
    const double v = evd.values(i);
    if (v > tol * top && v > 0.0) root(i) = 1.0 / std::sqrt(v);
  }
  return evd.vectors * root.asDiagonal() * evd.vectors.transpose();
}

Matrix pad_columns(const Matrix& b, Index s) {
  if (b.cols() >= s) return b;
  Matrix out = Matrix::Zero(b.rows(), s);
  out.leftCols(b.cols()) = b;
  return out;
}

}  // namespace

std::string_view to_string(FeatureSource source) {
  switch (source) {
    case FeatureSource::Nystrom: return "nystrom";
    case FeatureSource::Power: return "power";
    case FeatureSource::Kpca: return "kpca";
    case FeatureSource::Rff: return "rff";
  }
  return "?";
}

NystromFactors nystrom_factors(const DataMatrix& data, const KernelSpec& spec,
                               const SketchPlan& plan, Index materialization_cap) {
  if (plan.n != data.n()) {
    throw InvalidArgument("nystrom_factors: plan.n=" + std::to_string(plan.n) +
                          " but data has n=" + std::to_string(data.n()));
  }
  const SketchOperator sketch = build_sketch(plan);
  if (const SampledColumns* cols = sketch.sampled()) {
    Matrix c = kernel_columns(data, cols->rows, spec);
    for (Index j = 0; j < c.cols(); ++j) c.col(j) *= cols->scales[static_cast<std::size_t>(j)];
    Matrix w = sketch.apply_transpose_left(c);
    return {std::move(c), std::move(w), plan};
  }
  if (data.n() > materialization_cap) {
    throw InvalidArgument("nystrom_factors: " + std::string(to_string(plan.kind)) +
                          " sketch needs the full kernel matrix and n=" +
                          std::to_string(data.n()) + " exceeds the cap " +
                          std::to_string(materialization_cap));
  }
  return nystrom_factors(kernel_matrix(data, spec), sketch);
}

NystromFactors nystrom_factors(const Matrix& k, const SketchOperator& sketch) {
  if (k.rows() != k.cols() || k.rows() != sketch.n()) {
    throw InvalidArgument("nystrom_factors: K must be n x n with n = sketch.n");
  }
  Matrix c = sketch.apply_right(k);
  Matrix w = sketch.apply_transpose_left(c);
  return {std::move(c), std::move(w), sketch.plan()};
}

Index default_ell(Index c) { return (c + 1) / 2; }

FeatureMatrix rank_restricted_features(const NystromFactors& f, Index ell, Index s,
                                       RankRestrictedOptions opts) {
  const Index c = f.W.rows();
  if (s < 1 || s > ell || ell > c) {
    throw InvalidArgument("rank_restricted_features: need 1 <= s <= ell <= c, got s=" +
                          std::to_string(s) + ", ell=" + std::to_string(ell) +
                          ", c=" + std::to_string(c));
  }
  const EigDecomposition evd = sym_evd(f.W);
  const double top = evd.values(0);
  Index usable = 0;
  while (usable < ell && evd.values(usable) > kEllCutoff * top && evd.values(usable) > 0.0) {
    ++usable;
  }
  if (usable == 0) throw NumericalError("rank_restricted_features: W has no positive spectrum");
  if (usable < ell && opts.strict) {
    throw NumericalError("rank_restricted_features: only " + std::to_string(usable) +
                         " eigenvalues of W exceed the cutoff, ell=" + std::to_string(ell));
  }

  const Vector inv_root = evd.values.head(usable).cwiseSqrt().cwiseInverse();
  const Matrix r = f.C * evd.vectors.leftCols(usable) * inv_root.asDiagonal();
  const Index kept = std::min(s, usable);

  FeatureMatrix out;
  out.B = pad_columns(reduce_dimension(r, kept), s);
  out.source = FeatureSource::Nystrom;
  out.params.s = s;
  out.params.ell = usable;
  out.params.ell_requested = ell;
  out.params.c = c;
  out.params.ell_reduced = usable < ell;
  return out;
}

Matrix reduce_dimension(const Matrix& r, Index s) {
  const TruncatedSvd svd = truncated_svd(r, s);
  return r * svd.V;
}

Matrix rank_restricted_factor(const Matrix& c, const Matrix& w, Index s,
                              std::optional<double> rel_tol) {
  if (w.rows() != w.cols() || c.cols() != w.rows()) {
    throw InvalidArgument("rank_restricted_factor: C is n x c and W must be c x c");
  }
  if (s < 1 || s > w.rows()) {
    throw InvalidArgument("rank_restricted_factor: need 1 <= s <= c, got s=" + std::to_string(s));
  }
  const Matrix y = pinv_sqrt_sym(w, rel_tol) * c.transpose();
  const Index kept = std::min(s, std::min(y.rows(), y.cols()));
  const TruncatedSvd svd = truncated_svd(y, kept);
  // (C W^+ C^T)_s = V_s Sigma_s^2 V_s^T, so B = V_s Sigma_s.
  return pad_columns(svd.V * svd.sigma.asDiagonal(), s);
}

Matrix rank_restricted_approx(const NystromFactors& f, Index s, std::optional<double> rel_tol) {
  if (s > f.W.rows()) {
    throw InvalidArgument("rank_restricted_approx: s=" + std::to_string(s) +
                          " exceeds c=" + std::to_string(f.W.rows()));
  }
  const Matrix b = rank_restricted_factor(f.C, f.W, s, rel_tol);
  return b * b.transpose();
}

double tail_trace_norm(const Matrix& k, Index s) {
  const Vector sv = singular_values(k);
  if (s >= sv.size()) return 0.0;
  return sv.tail(sv.size() - s).sum();
}

double trace_error_ratio(const Matrix& k, const Matrix& approx, Index s) {
  if (k.rows() != approx.rows() || k.cols() != approx.cols()) {
    throw InvalidArgument("trace_error_ratio: dimension mismatch");
  }
  return trace_error_ratio_from_norms(norm(k - approx, NormKind::Trace), tail_trace_norm(k, s),
                                      norm(k, NormKind::Trace));
}

double trace_error_ratio_from_norms(double error, double tail, double k_trace) {
  const double scale = std::max(k_trace, std::numeric_limits<double>::min());
  const bool num_zero = error <= kZeroRatioTol * scale;
  const bool den_zero = tail <= kZeroRatioTol * scale;
  if (den_zero) return num_zero ? 1.0 : std::numeric_limits<double>::infinity();
  return error / tail;
}

Index power_iterations(Index n, double eps, double gap_ratio) {
  if (!(eps > 0.0)) throw InvalidArgument("power_iterations: eps must be positive");
  if (!(gap_ratio > 1.0)) throw InvalidArgument("power_iterations: gap ratio must exceed 1");
  if (std::isinf(gap_ratio)) return 1;
  const double t = std::log(static_cast<double>(n) / eps) / std::log(gap_ratio);
  return std::max<Index>(1, static_cast<Index>(std::ceil(t)));
}

double estimate_gap_ratio(const NystromFactors& f, Index s) {
  const EigDecomposition evd = sym_evd(f.W);
  if (s < 1 || s >= evd.values.size()) {
    throw InvalidArgument("estimate_gap_ratio: need 1 <= s < c");
  }
  const double lo = evd.values(s);
  const double cutoff = default_pinv_tol(f.W) * std::abs(evd.values(0));
  if (lo <= cutoff) return std::numeric_limits<double>::infinity();
  return evd.values(s - 1) / lo;
}

FeatureMatrix power_method_features(const Matrix& k, Index s, Index c, Index t,
                                    std::uint64_t seed) {
  const Index n = k.rows();
  if (k.cols() != n) throw InvalidArgument("power_method_features: K must be square");
  if (s < 1 || c < s || c > n) {
    throw InvalidArgument("power_method_features: need 1 <= s <= c <= n, got s=" +
                          std::to_string(s) + ", c=" + std::to_string(c));
  }
  if (t < 1) throw InvalidArgument("power_method_features: t must be >= 1");
  Rng rng(derive_seed(seed, streams::kPower));
  Matrix u = orthonormalize(gaussian_matrix(n, c, rng));
  for (Index it = 0; it < t; ++it) u = orthonormalize(k * u);
  const Matrix cmat = k * u;
  Matrix w = u.transpose() * cmat;
  w = 0.5 * (w + w.transpose());

  FeatureMatrix out;
  out.B = rank_restricted_factor(cmat, w, s);
  out.source = FeatureSource::Power;
  out.params.s = s;
  out.params.c = c;
  out.params.t = t;
  return out;
}

FeatureMatrix kpca_features(const Matrix& k, Index s) {
  if (s < 1 || s > k.rows()) {
    throw InvalidArgument("kpca_features: need 1 <= s <= n, got s=" + std::to_string(s));
  }
  const EigDecomposition evd = sym_evd(k);
  Matrix v = evd.vectors.leftCols(s);
  for (Index j = 0; j < s; ++j) {
    const double cutoff = 1e-10 * v.col(j).cwiseAbs().maxCoeff();
    for (Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > cutoff) {
        if (v(i, j) < 0) v.col(j) *= -1.0;
        break;
      }
    }
  }
  const Vector root = evd.values.head(s).cwiseMax(0.0).cwiseSqrt();
  FeatureMatrix out;
  out.B = v * root.asDiagonal();
  out.source = FeatureSource::Kpca;
  out.params.s = s;
  return out;
}

FeatureMatrix rff_features(const DataMatrix& data, double sigma, Index c, std::uint64_t seed) {
  if (c < 1) throw InvalidArgument("rff_features: c must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("rff_features: sigma must be positive");
  Rng rng(derive_seed(seed, streams::kRff));
  const Matrix omega = gaussian_matrix(data.d(), c, rng) / sigma;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Eigen::RowVectorXd offset(c);
  for (Index j = 0; j < c; ++j) offset(j) = phase(rng);

  Matrix z = (data.points() * omega).rowwise() + offset;
  z = z.array().cos() * std::sqrt(2.0 / static_cast<double>(c));
  FeatureMatrix out;
  out.B = std::move(z);
  out.source = FeatureSource::Rff;
  out.params.s = c;
  out.params.c = c;
  return out;
}

}  // namespace kkm
