#include "kkm/sketch.hpp"

#include "kkm/random.hpp"

#include <bit>
#include <cmath>
#include <numeric>

namespace kkm {

namespace {

std::uint64_t stream_for(SketchKind kind) {
  switch (kind) {
    case SketchKind::Uniform: return streams::kUniform;
    case SketchKind::Leverage: return streams::kLeverage;
    case SketchKind::Gaussian: return streams::kGaussian;
    case SketchKind::Srht: return streams::kSrht;
    case SketchKind::CountSketch: return streams::kCountSketch;
    case SketchKind::Selection: return 0;
  }
  return 0;
}

double hadamard_entry(Index i, Index k) {
  return (std::popcount(static_cast<std::uint64_t>(i & k)) & 1) ? -1.0 : 1.0;
}

SampledColumns sample_rows(const std::vector<double>& probs, Index c, Rng& rng) {
  std::discrete_distribution<Index> pick(probs.begin(), probs.end());
  SampledColumns out;
  out.rows.reserve(static_cast<std::size_t>(c));
  out.scales.reserve(static_cast<std::size_t>(c));
  for (Index j = 0; j < c; ++j) {
    const Index i = pick(rng);
    out.rows.push_back(i);
    out.scales.push_back(1.0 / std::sqrt(static_cast<double>(c) * probs[static_cast<std::size_t>(i)]));
  }
  return out;
}

}  // namespace

std::string_view to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::Uniform: return "uniform";
    case SketchKind::Leverage: return "leverage";
    case SketchKind::Gaussian: return "gaussian";
    case SketchKind::Srht: return "srht";
    case SketchKind::CountSketch: return "countsketch";
    case SketchKind::Selection: return "selection";
  }
  return "?";
}

SketchKind parse_sketch_kind(std::string_view name) {
  for (auto k : {SketchKind::Uniform, SketchKind::Leverage, SketchKind::Gaussian,
                 SketchKind::Srht, SketchKind::CountSketch, SketchKind::Selection}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown sketch kind '" + std::string(name) + "'");
}

bool is_sampling(SketchKind kind) {
  return kind == SketchKind::Uniform || kind == SketchKind::Leverage ||
         kind == SketchKind::Selection;
}

void SketchPlan::validate() const {
  if (n < 1 || c < 1) {
    throw InvalidArgument("SketchPlan: need n >= 1 and c >= 1, got c=" + std::to_string(c) +
                          ", n=" + std::to_string(n));
  }
  if (kind == SketchKind::Srht) {
    const auto padded = static_cast<Index>(std::bit_ceil(static_cast<std::uint64_t>(n)));
    if (c > padded) {
      throw InvalidArgument("SketchPlan: srht needs c <= " + std::to_string(padded) +
                            " (n padded to a power of two), got c=" + std::to_string(c));
    }
  }
  if (kind == SketchKind::Leverage) {
    if (!probabilities) throw InvalidArgument("SketchPlan: leverage sketch needs probabilities");
    if (static_cast<Index>(probabilities->size()) != n) {
      throw InvalidArgument("SketchPlan: probabilities must have length n");
    }
    double total = 0.0;
    for (double p : *probabilities) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InvalidArgument("SketchPlan: probabilities must be nonnegative");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-8) {
      throw InvalidArgument("SketchPlan: probabilities must sum to 1");
    }
  } else if (probabilities) {
    throw InvalidArgument("SketchPlan: probabilities only apply to leverage sketches");
  }
  if (kind == SketchKind::Selection) {
    if (!indices || static_cast<Index>(indices->size()) != c) {
      throw InvalidArgument("SketchPlan: selection sketch needs exactly c indices");
    }
    for (Index i : *indices) {
      if (i < 0 || i >= n) throw InvalidArgument("SketchPlan: selection index out of range");
    }
  }
}

SketchPlan SketchPlan::uniform(Index n, Index c, std::uint64_t seed) {
  return {SketchKind::Uniform, n, c, seed, std::nullopt, std::nullopt};
}
SketchPlan SketchPlan::gaussian(Index n, Index c, std::uint64_t seed) {
  return {SketchKind::Gaussian, n, c, seed, std::nullopt, std::nullopt};
}
SketchPlan SketchPlan::srht(Index n, Index c, std::uint64_t seed) {
  return {SketchKind::Srht, n, c, seed, std::nullopt, std::nullopt};
}
SketchPlan SketchPlan::countsketch(Index n, Index c, std::uint64_t seed) {
  return {SketchKind::CountSketch, n, c, seed, std::nullopt, std::nullopt};
}
SketchPlan SketchPlan::leverage(std::vector<double> probabilities, Index c,
                                std::uint64_t seed) {
  const auto n = static_cast<Index>(probabilities.size());
  return {SketchKind::Leverage, n, c, seed, std::move(probabilities), std::nullopt};
}
SketchPlan SketchPlan::selection(Index n, std::vector<Index> indices) {
  const auto c = static_cast<Index>(indices.size());
  return {SketchKind::Selection, n, c, 0, std::nullopt, std::move(indices)};
}
SketchPlan SketchPlan::identity(Index n) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  return selection(n, std::move(all));
}

std::vector<double> leverage_probabilities(const Matrix& k, Index s) {
  const EigDecomposition evd = sym_evd(k);
  if (s < 1 || s > k.rows()) throw InvalidArgument("leverage_probabilities: bad s");
  const LeverageProfile prof = leverage_profile(evd.vectors.leftCols(s));
  const double total = prof.scores.sum();
  std::vector<double> p(static_cast<std::size_t>(k.rows()));
  for (Index i = 0; i < k.rows(); ++i) p[static_cast<std::size_t>(i)] = prof.scores(i) / total;
  return p;
}

SketchOperator build_sketch(const SketchPlan& plan) {
  plan.validate();
  Rng rng(derive_seed(plan.seed, stream_for(plan.kind)));
  const Index n = plan.n;
  const Index c = plan.c;
  switch (plan.kind) {
    case SketchKind::Uniform: {
      const std::vector<double> probs(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
      return SketchOperator(plan, sample_rows(probs, c, rng));
    }
    case SketchKind::Leverage:
      return SketchOperator(plan, sample_rows(*plan.probabilities, c, rng));
    case SketchKind::Selection: {
      SampledColumns sel{*plan.indices, std::vector<double>(static_cast<std::size_t>(c), 1.0)};
      return SketchOperator(plan, std::move(sel));
    }
    case SketchKind::Gaussian: {
      Matrix p = gaussian_matrix(n, c, rng) / std::sqrt(static_cast<double>(c));
      return SketchOperator(plan, std::move(p));
    }
    case SketchKind::Srht: {
      HadamardSketch h;
      h.padded = static_cast<Index>(std::bit_ceil(static_cast<std::uint64_t>(n)));
      std::uniform_int_distribution<int> coin(0, 1);
      h.signs.resize(static_cast<std::size_t>(h.padded));
      for (auto& s : h.signs) s = coin(rng) ? 1.0 : -1.0;
      std::vector<Index> perm(static_cast<std::size_t>(h.padded));
      std::iota(perm.begin(), perm.end(), Index{0});
      // Partial Fisher-Yates: first c entries are a uniform sample without replacement.
      for (Index j = 0; j < c; ++j) {
        std::uniform_int_distribution<Index> pick(j, h.padded - 1);
        std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick(rng))]);
      }
      h.sampled.assign(perm.begin(), perm.begin() + c);
      return SketchOperator(plan, std::move(h));
    }
    case SketchKind::CountSketch: {
      CountSketchHash cs;
      std::uniform_int_distribution<Index> bucket(0, c - 1);
      std::uniform_int_distribution<int> coin(0, 1);
      cs.buckets.resize(static_cast<std::size_t>(n));
      cs.signs.resize(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        cs.buckets[static_cast<std::size_t>(i)] = bucket(rng);
        cs.signs[static_cast<std::size_t>(i)] = coin(rng) ? 1.0 : -1.0;
      }
      return SketchOperator(plan, std::move(cs));
    }
  }
  throw InvalidArgument("build_sketch: unknown kind");
}

void fwht(std::span<double> values) {
  const std::size_t n = values.size();
  if (!std::has_single_bit(n)) throw InvalidArgument("fwht: size must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = values[j];
        const double y = values[j + h];
        values[j] = x + y;
        values[j + h] = x - y;
      }
    }
  }
}

Matrix SketchOperator::dense() const {
  const Index n = plan_.n;
  const Index c = plan_.c;
  Matrix p = Matrix::Zero(n, c);
  if (const auto* s = std::get_if<SampledColumns>(&realization_)) {
    for (Index j = 0; j < c; ++j)
      p(s->rows[static_cast<std::size_t>(j)], j) = s->scales[static_cast<std::size_t>(j)];
  } else if (const auto* g = std::get_if<Matrix>(&realization_)) {
    p = *g;
  } else if (const auto* h = std::get_if<HadamardSketch>(&realization_)) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(c));
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < n; ++i)
        p(i, j) = scale * h->signs[static_cast<std::size_t>(i)] *
                  hadamard_entry(i, h->sampled[static_cast<std::size_t>(j)]);
  } else if (const auto* cs = std::get_if<CountSketchHash>(&realization_)) {
    for (Index i = 0; i < n; ++i)
      p(i, cs->buckets[static_cast<std::size_t>(i)]) = cs->signs[static_cast<std::size_t>(i)];
  }
  return p;
}

Matrix SketchOperator::apply_right(const Matrix& a) const {
  const Index n = plan_.n;
  const Index c = plan_.c;
  if (a.cols() != n) {
    throw InvalidArgument("apply_right: A has " + std::to_string(a.cols()) +
                          " columns, sketch expects " + std::to_string(n));
  }
  const Index m = a.rows();
  if (const auto* s = std::get_if<SampledColumns>(&realization_)) {
    Matrix out(m, c);
    for (Index j = 0; j < c; ++j)
      out.col(j) = a.col(s->rows[static_cast<std::size_t>(j)]) * s->scales[static_cast<std::size_t>(j)];
    return out;
  }
  if (const auto* g = std::get_if<Matrix>(&realization_)) {
    return a * (*g);
  }
  if (const auto* h = std::get_if<HadamardSketch>(&realization_)) {
    // Transform each row of A: pad to 2^m, flip signs, FWHT, subsample.
    Matrix work = Matrix::Zero(h->padded, m);
    for (Index i = 0; i < n; ++i)
      work.row(i) = a.col(i).transpose() * h->signs[static_cast<std::size_t>(i)];
    for (Index r = 0; r < m; ++r)
      fwht(std::span<double>(work.col(r).data(), static_cast<std::size_t>(h->padded)));
    const double scale = 1.0 / std::sqrt(static_cast<double>(c));
    Matrix out(m, c);
    for (Index j = 0; j < c; ++j)
      out.col(j) = work.row(h->sampled[static_cast<std::size_t>(j)]).transpose() * scale;
    return out;
  }
  const auto& cs = std::get<CountSketchHash>(realization_);
  Matrix out = Matrix::Zero(m, c);
  for (Index i = 0; i < n; ++i)
    out.col(cs.buckets[static_cast<std::size_t>(i)]) += cs.signs[static_cast<std::size_t>(i)] * a.col(i);
  return out;
}

Matrix SketchOperator::apply_transpose_left(const Matrix& x) const {
  if (x.rows() != plan_.n) {
    throw InvalidArgument("apply_transpose_left: X has " + std::to_string(x.rows()) +
                          " rows, sketch expects " + std::to_string(plan_.n));
  }
  return apply_right(x.transpose()).transpose();
}

double embedding_score(const Matrix& v, const SketchOperator& sketch) {
  if (orthonormality_residual(v) > 1e-8) {
    throw InvalidArgument("embedding_score: V must have orthonormal columns");
  }
  const Matrix vp = sketch.apply_right(v.transpose());
  const Matrix gram = vp * vp.transpose() - Matrix::Identity(v.cols(), v.cols());
  return norm(gram, NormKind::Spectral);
}

double multiplication_score(const Matrix& v, const Matrix& y, const SketchOperator& sketch) {
  if (v.rows() != y.rows() || v.rows() != sketch.n()) {
    throw InvalidArgument("multiplication_score: dimension mismatch");
  }
  const double denom = y.squaredNorm();
  if (denom == 0.0) return 0.0;
  const Matrix vp = sketch.apply_right(v.transpose());
  const Matrix yp = sketch.apply_right(y.transpose());
  return (vp * yp.transpose() - v.transpose() * y).squaredNorm() / denom;
}

}  // namespace kkm
