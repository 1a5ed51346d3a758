#include "kkm/cluster.hpp"

#include "kkm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace kkm {

namespace {

double squared_distance(const Matrix& b, Index i, const Matrix& centroids, Index j) {
  double acc = 0.0;
  for (Index t = 0; t < b.cols(); ++t) {
    const double diff = b(i, t) - centroids(j, t);
    acc += diff * diff;
  }
  return acc;
}

// Nearest centroid per row (lowest index on ties) and its squared distance.
void assign_rows(const Matrix& b, const Matrix& centroids, Index begin, Index end,
                 std::vector<int>& labels, std::vector<double>& dist) {
  for (Index i = begin; i < end; ++i) {
    int best = 0;
    double best_d = squared_distance(b, i, centroids, 0);
    for (Index j = 1; j < centroids.rows(); ++j) {
      const double d = squared_distance(b, i, centroids, j);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = best_d;
  }
}

void assign_all(const Matrix& b, const Matrix& centroids, unsigned threads,
                std::vector<int>& labels, std::vector<double>& dist) {
  const Index n = b.rows();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const Index workers = std::min<Index>(threads, n);
  if (workers <= 1) {
    assign_rows(b, centroids, 0, n, labels, dist);
    return;
  }
  std::vector<std::thread> pool;
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(assign_rows, std::cref(b), std::cref(centroids), begin, end,
                      std::ref(labels), std::ref(dist));
  }
  for (auto& t : pool) t.join();
}

// Cluster means accumulated in row order.
Matrix cluster_means(const Matrix& b, const std::vector<int>& labels, int k,
                     std::vector<Index>& counts) {
  Matrix means = Matrix::Zero(k, b.cols());
  counts.assign(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < b.rows(); ++i) {
    const int j = labels[static_cast<std::size_t>(i)];
    means.row(j) += b.row(i);
    ++counts[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) {
      means.row(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
    }
  }
  return means;
}

void require_rows(const Matrix& b, const Clustering& c, const char* what) {
  if (b.rows() != c.n()) {
    throw InvalidArgument(std::string(what) + ": matrix has " + std::to_string(b.rows()) +
                          " rows but clustering has " + std::to_string(c.n()) + " points");
  }
}

}  // namespace

std::vector<Index> Clustering::cluster_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

bool Clustering::all_clusters_nonempty() const {
  const auto sizes = cluster_sizes();
  return std::all_of(sizes.begin(), sizes.end(), [](Index s) { return s > 0; });
}

Clustering Clustering::from_assignments(std::vector<int> assignments, int k) {
  if (k < 1) throw InvalidArgument("Clustering: k must be >= 1");
  for (int a : assignments) {
    if (a < 0 || a >= k) {
      throw InvalidArgument("Clustering: id " + std::to_string(a) + " outside [0, " +
                            std::to_string(k) + ")");
    }
  }
  Clustering c;
  c.assignments = std::move(assignments);
  c.k = k;
  return c;
}

Matrix kmeans_pp_init(const Matrix& b, int k, std::uint64_t seed) {
  const Index n = b.rows();
  if (k < 1 || k > n) {
    throw InvalidArgument("kmeans_pp_init: need 1 <= k <= n, got k=" + std::to_string(k));
  }
  Rng rng(derive_seed(seed, streams::kKmeans));
  Matrix centroids(k, b.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centroids.row(0) = b.row(first(rng));

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(b, i, centroids, 0);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      throw InvalidArgument("kmeans_pp_init: fewer than k=" + std::to_string(k) +
                            " distinct rows");
    }
    std::discrete_distribution<Index> pick(d2.begin(), d2.end());
    const Index chosen = pick(rng);
    centroids.row(j) = b.row(chosen);
    for (Index i = 0; i < n; ++i) {
      auto& cur = d2[static_cast<std::size_t>(i)];
      cur = std::min(cur, squared_distance(b, i, centroids, j));
    }
  }
  return centroids;
}

Clustering lloyd(const Matrix& b, int k, const Matrix& init, LloydOptions opts) {
  const Index n = b.rows();
  if (k < 1 || k > n) throw InvalidArgument("lloyd: need 1 <= k <= n, got k=" + std::to_string(k));
  if (opts.max_iter < 1) throw InvalidArgument("lloyd: max_iter must be >= 1");
  if (init.rows() != k || init.cols() != b.cols()) {
    throw InvalidArgument("lloyd: init must be k x s");
  }
  Matrix centroids = init;
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<Index> counts;

  Clustering out;
  out.k = k;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    assign_all(b, centroids, opts.threads, next, dist);

    counts.assign(static_cast<std::size_t>(k), 0);
    for (int a : next) ++counts[static_cast<std::size_t>(a)];
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) continue;
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (counts[static_cast<std::size_t>(next[ui])] < 2) continue;
        if (far < 0 || dist[ui] > dist[static_cast<std::size_t>(far)]) far = i;
      }
      const auto uf = static_cast<std::size_t>(far);
      --counts[static_cast<std::size_t>(next[uf])];
      next[uf] = j;
      ++counts[static_cast<std::size_t>(j)];
      dist[uf] = 0.0;
      centroids.row(j) = b.row(far);
    }

    const bool changed = next != labels;
    labels = next;
    centroids = cluster_means(b, labels, k, counts);

    double obj = 0.0;
    for (Index i = 0; i < n; ++i) obj += squared_distance(b, i, centroids, labels[static_cast<std::size_t>(i)]);
    obj /= static_cast<double>(n);
    out.objective_trace.push_back(obj);
    out.iterations_run = iter;

    if (!changed || obj <= 0.0) {
      out.converged = true;
      break;
    }
    if (out.objective_trace.size() >= 2) {
      const double prev = out.objective_trace[out.objective_trace.size() - 2];
      if (prev - obj <= opts.tol * prev) {
        out.converged = true;
        break;
      }
    }
  }
  out.assignments = std::move(labels);
  return out;
}

Clustering kmeans(const Matrix& b, int k, std::uint64_t seed, LloydOptions opts, int restarts) {
  if (restarts < 1) throw InvalidArgument("kmeans: restarts must be >= 1");
  Clustering best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    const std::uint64_t run_seed = r == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(r));
    Clustering c = lloyd(b, k, kmeans_pp_init(b, k, run_seed), opts);
    const double obj = c.objective_trace.back();
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(c);
    }
  }
  return best;
}

Matrix indicator_matrix(const Clustering& clustering) {
  const auto sizes = clustering.cluster_sizes();
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] == 0) throw InvalidArgument("indicator_matrix: cluster " + std::to_string(j) + " is empty");
  }
  Matrix x = Matrix::Zero(clustering.n(), clustering.k);
  for (Index i = 0; i < clustering.n(); ++i) {
    const int j = clustering.assignments[static_cast<std::size_t>(i)];
    x(i, j) = 1.0 / std::sqrt(static_cast<double>(sizes[static_cast<std::size_t>(j)]));
  }
  return x;
}

double linear_objective(const Matrix& b, const Clustering& clustering) {
  require_rows(b, clustering, "linear_objective");
  std::vector<Index> counts;
  const Matrix means = cluster_means(b, clustering.assignments, clustering.k, counts);
  double total = 0.0;
  for (Index i = 0; i < b.rows(); ++i) {
    total += squared_distance(b, i, means, clustering.assignments[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(b.rows());
}

double linear_objective_via_indicator(const Matrix& b, const Clustering& clustering) {
  require_rows(b, clustering, "linear_objective_via_indicator");
  const Matrix x = indicator_matrix(clustering);
  return (b - x * (x.transpose() * b)).squaredNorm() / static_cast<double>(b.rows());
}

std::string_view to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::Feature ? "feature" : "column";
}

ObjectiveMode parse_objective_mode(std::string_view name) {
  if (name == "feature") return ObjectiveMode::Feature;
  if (name == "column") return ObjectiveMode::Column;
  throw InvalidArgument("unknown objective mode '" + std::string(name) + "'");
}

double kernel_objective(const Matrix& k, const Clustering& clustering, ObjectiveMode mode) {
  if (k.rows() != k.cols()) throw InvalidArgument("kernel_objective: K must be square");
  require_rows(k, clustering, "kernel_objective");
  if (mode == ObjectiveMode::Column) return linear_objective(k.transpose(), clustering);

  // Per cluster: sum_j K_jj - (1/|J|) sum_{l,l' in J} K_ll'.
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(clustering.k));
  for (Index i = 0; i < clustering.n(); ++i) {
    members[static_cast<std::size_t>(clustering.assignments[static_cast<std::size_t>(i)])].push_back(i);
  }
  double total = 0.0;
  for (const auto& m : members) {
    if (m.empty()) continue;
    double diag = 0.0;
    double block = 0.0;
    for (Index a : m) {
      diag += k(a, a);
      for (Index c : m) block += k(a, c);
    }
    total += diag - block / static_cast<double>(m.size());
  }
  return total / static_cast<double>(clustering.n());
}

}  // namespace kkm
