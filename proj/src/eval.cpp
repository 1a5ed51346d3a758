#include "kkm/eval.hpp"

#include "kkm/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace kkm {

namespace {

// Sorting the terms first makes the sum independent of label order.
double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

double entropy(const std::map<int, Index>& counts, double n) {
  std::vector<double> terms;
  terms.reserve(counts.size());
  for (const auto& [label, count] : counts) {
    const double p = static_cast<double>(count) / n;
    terms.push_back(-p * std::log(p));
  }
  return sorted_sum(std::move(terms));
}

// Enumerates restricted growth strings with exactly k blocks.
void enumerate_partitions(Index n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::function<void(Index, int)> rec = [&](Index i, int used) {
    const Index remaining = n - i;
    if (used + remaining < k) return;
    if (i == n) {
      if (used == k) visit(labels);
      return;
    }
    const int limit = std::min(used + 1, k);
    for (int b = 0; b < limit; ++b) {
      labels[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
}

BruteForceResult brute_force(Index n, int k, const std::function<double(const Clustering&)>& cost) {
  if (n > kBruteForceMaxN) {
    throw InvalidArgument("brute_force_kmeans: n=" + std::to_string(n) + " exceeds " +
                          std::to_string(kBruteForceMaxN));
  }
  if (k < 1 || k > n) throw InvalidArgument("brute_force_kmeans: need 1 <= k <= n");
  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  Clustering scratch;
  scratch.k = k;
  enumerate_partitions(n, k, [&](const std::vector<int>& labels) {
    scratch.assignments = labels;
    const double v = cost(scratch);
    if (v < best.objective) {
      best.objective = v;
      best.partition = scratch;
    }
  });
  return best;
}

Clustering random_partition(Index n, Index k, Rng& rng) {
  // Every cluster receives one point from a random permutation first.
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(k) - 1);
  for (Index i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        i < k ? static_cast<int>(i) : pick(rng);
  }
  return Clustering::from_assignments(std::move(labels), static_cast<int>(k));
}

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("nmi: label sequences differ in length (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw InvalidArgument("nmi: empty label sequences");
  const double n = static_cast<double>(a.size());
  std::map<int, Index> ca, cb;
  std::map<std::pair<int, int>, Index> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++joint[{a[i], b[i]}];
  }
  const double ha = entropy(ca, n);
  const double hb = entropy(cb, n);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;

  std::vector<double> terms;
  terms.reserve(joint.size());
  for (const auto& [key, count] : joint) {
    const double pij = static_cast<double>(count) / n;
    const double pa = static_cast<double>(ca[key.first]) / n;
    const double pb = static_cast<double>(cb[key.second]) / n;
    // pa * pb is commutative, so swapping the arguments gives identical terms.
    terms.push_back(pij * std::log(pij / (pa * pb)));
  }
  const double mi = sorted_sum(std::move(terms));
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

PcpReport pcp_check(const Matrix& k, const Matrix& b, Index kclusters, Index trials,
                    std::uint64_t seed, std::optional<double> epsilon) {
  const Index n = k.rows();
  if (k.cols() != n || b.rows() != n) throw InvalidArgument("pcp_check: dimension mismatch");
  if (kclusters < 1 || kclusters > n) throw InvalidArgument("pcp_check: need 1 <= k <= n");
  if (trials < 0) throw InvalidArgument("pcp_check: trials must be nonnegative");
  const Index s = b.cols();
  const double trace_k = k.trace();
  const double tol = 1e-7 * std::abs(trace_k);

  const Matrix bbt = b * b.transpose();
  if (min_eigenvalue(k - bbt) < -tol) {
    throw NumericalError("pcp_check: B B^T is not dominated by K");
  }

  PcpReport report;
  report.k = kclusters;
  report.s = s;
  report.alpha = trace_k - b.squaredNorm();
  report.epsilon_used = epsilon ? *epsilon : trace_error_ratio(k, bbt, s) - 1.0;
  report.bound = 1.0 + report.epsilon_used + static_cast<double>(kclusters) / static_cast<double>(s);
  report.max_lower_gap = -std::numeric_limits<double>::infinity();
  report.max_upper_gap = -std::numeric_limits<double>::infinity();

  const double b_sq = b.squaredNorm();
  // With P = Q Q^T: ||(I-P)K^{1/2}||_F^2 = tr K - tr(Q^T K Q) and
  // ||(I-P)B||_F^2 = ||B||_F^2 - ||Q^T B||_F^2.
  auto evaluate = [&](const Matrix& q) {
    const double lhs = trace_k - (q.transpose() * k * q).trace();
    const double mid = b_sq - (q.transpose() * b).squaredNorm() + report.alpha;
    const double lower_gap = lhs - mid;
    const double upper_gap = mid - report.bound * lhs;
    report.max_lower_gap = std::max(report.max_lower_gap, lower_gap);
    report.max_upper_gap = std::max(report.max_upper_gap, upper_gap);
    if (lower_gap > tol) ++report.lower_violations;
    if (upper_gap > tol) ++report.upper_violations;
    ++report.trials;
  };

  Rng rng(derive_seed(seed, streams::kPcp));
  for (Index t = 0; t < trials; ++t) evaluate(orthonormalize(gaussian_matrix(n, kclusters, rng)));
  for (int t = 0; t < kPcpIndicatorPartitions; ++t) {
    evaluate(indicator_matrix(random_partition(n, kclusters, rng)));
  }
  return report;
}

BruteForceResult brute_force_kmeans(const Matrix& b, int k) {
  return brute_force(b.rows(), k, [&](const Clustering& c) { return linear_objective(b, c); });
}

BruteForceResult brute_force_kernel_kmeans(const Matrix& k, int kclusters) {
  if (k.rows() != k.cols()) throw InvalidArgument("brute_force_kernel_kmeans: K must be square");
  return brute_force(k.rows(), kclusters, [&](const Clustering& c) {
    return kernel_objective(k, c, ObjectiveMode::Feature);
  });
}

Matrix synthetic_spsd(std::span<const double> spectrum, std::uint64_t seed) {
  const auto n = static_cast<Index>(spectrum.size());
  if (n < 1) throw InvalidArgument("synthetic_spsd: empty spectrum");
  Vector lam(n);
  for (Index i = 0; i < n; ++i) {
    lam(i) = spectrum[static_cast<std::size_t>(i)];
    if (lam(i) < 0) throw InvalidArgument("synthetic_spsd: negative eigenvalue");
  }
  Rng rng(derive_seed(seed, streams::kSynthetic));
  const Matrix q = random_orthogonal(n, rng);
  Matrix k = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (k + k.transpose());
}

std::vector<double> power_law_spectrum(Index n, double power) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(i + 1), -power);
  return out;
}

std::vector<double> geometric_spectrum(Index n, double base) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(base, static_cast<double>(i + 1));
  return out;
}

std::vector<double> default_epsilon_grid() { return {0.1, 0.25, 0.5, 1.0}; }

namespace {

struct SweepContext {
  const Matrix& k;
  Index s;
  double tail;
  double k_trace;
  std::optional<std::vector<double>> leverage;
};

double ratio_for(const SweepContext& ctx, SketchKind kind, Index c, std::uint64_t seed) {
  const Index n = ctx.k.rows();
  SketchPlan plan;
  switch (kind) {
    case SketchKind::Leverage:
      plan = SketchPlan::leverage(*ctx.leverage, c, seed);
      break;
    case SketchKind::Selection:
      throw InvalidArgument("theorem1_sweep: selection sketches are deterministic; use identity");
    default:
      plan = SketchPlan{kind, n, c, seed, std::nullopt, std::nullopt};
  }
  const NystromFactors f = nystrom_factors(ctx.k, build_sketch(plan));
  const Matrix approx = rank_restricted_approx(f, std::min(ctx.s, c));
  return trace_error_ratio_from_norms(norm(ctx.k - approx, NormKind::Trace), ctx.tail, ctx.k_trace);
}

SweepContext make_context(const Matrix& k, Index s, std::span<const SketchKind> kinds) {
  SweepContext ctx{k, s, tail_trace_norm(k, s), norm(k, NormKind::Trace), std::nullopt};
  if (std::find(kinds.begin(), kinds.end(), SketchKind::Leverage) != kinds.end()) {
    ctx.leverage = leverage_probabilities(k, s);
  }
  return ctx;
}

}  // namespace

double trace_ratio_for_sketch(const Matrix& k, Index s, SketchKind kind, Index c,
                              std::uint64_t seed) {
  const SketchKind kinds[] = {kind};
  return ratio_for(make_context(k, s, kinds), kind, c, seed);
}

std::vector<SweepCell> theorem1_sweep(const Matrix& k, Index s,
                                      std::span<const SketchKind> kinds,
                                      std::span<const Index> c_grid, Index seeds,
                                      std::uint64_t base_seed) {
  if (seeds < 1) throw InvalidArgument("theorem1_sweep: seeds must be >= 1");
  const SweepContext ctx = make_context(k, s, kinds);
  const std::vector<double> eps = default_epsilon_grid();
  std::vector<SweepCell> cells;
  for (const SketchKind kind : kinds) {
    for (const Index c_req : c_grid) {
      SweepCell cell;
      cell.kind = kind;
      cell.c = std::min(c_req, k.rows());
      cell.seeds = seeds;
      cell.epsilons = eps;
      cell.success_fraction.assign(eps.size(), 0.0);
      cell.min_ratio = std::numeric_limits<double>::infinity();
      cell.max_ratio = -std::numeric_limits<double>::infinity();
      double total = 0.0;
      for (Index t = 0; t < seeds; ++t) {
        const double r = ratio_for(ctx, kind, cell.c, derive_seed(base_seed, static_cast<std::uint64_t>(t)));
        total += r;
        cell.min_ratio = std::min(cell.min_ratio, r);
        cell.max_ratio = std::max(cell.max_ratio, r);
        for (std::size_t e = 0; e < eps.size(); ++e) {
          if (r <= 1.0 + eps[e]) cell.success_fraction[e] += 1.0;
        }
      }
      cell.mean_ratio = total / static_cast<double>(seeds);
      for (auto& f : cell.success_fraction) f /= static_cast<double>(seeds);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<SweepCell> theorem1_sweep(std::span<const double> spectrum, Index s,
                                      std::span<const SketchKind> kinds,
                                      std::span<const Index> c_grid, Index seeds,
                                      std::uint64_t base_seed) {
  const Matrix k = synthetic_spsd(spectrum, base_seed);
  return theorem1_sweep(k, s, kinds, c_grid, seeds, base_seed);
}

}  // namespace kkm
