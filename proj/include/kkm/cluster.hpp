#pragma once

#include "kkm/matrix_core.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace kkm {

/// A k-partition of [n] as one cluster id per point.
struct Clustering {
  std::vector<int> assignments;
  int k = 0;
  int iterations_run = 0;
  bool converged = false;
  /// Linear objective after each Lloyd iteration (empty when not from Lloyd).
  std::vector<double> objective_trace;

  Index n() const { return static_cast<Index>(assignments.size()); }
  std::vector<Index> cluster_sizes() const;
  /// True when every id in [0, k) is used.
  bool all_clusters_nonempty() const;

  /// Validates ids in [0, k); empty clusters are allowed here.
  static Clustering from_assignments(std::vector<int> assignments, int k);
};

struct LloydOptions {
  int max_iter = 100;
  double tol = 1e-9;
  /// Threads for the assignment step; 0 means hardware concurrency. Results
  /// do not depend on this value.
  unsigned threads = 1;
};

/// k-means++ (D^2) seeding: k x s matrix of distinct rows of B.
Matrix kmeans_pp_init(const Matrix& b, int k, std::uint64_t seed);

/// Lloyd iterations from the given centroids. Ties go to the lowest centroid
/// index; an empty cluster takes the point farthest from its centroid.
Clustering lloyd(const Matrix& b, int k, const Matrix& init, LloydOptions opts = {});

/// k-means++ then Lloyd, keeping the lowest objective over `restarts` runs.
Clustering kmeans(const Matrix& b, int k, std::uint64_t seed, LloydOptions opts = {},
                  int restarts = 1);

/// n x k orthonormal indicator: x_ij = 1/sqrt(|J_j|) when i is in J_j.
Matrix indicator_matrix(const Clustering& clustering);

/// (1/n) sum_i sum_{j in J_i} ||b_j - mean(J_i)||^2 (empty clusters skipped).
double linear_objective(const Matrix& b, const Clustering& clustering);

/// (1/n) ||B - X X^T B||_F^2; requires every cluster nonempty.
double linear_objective_via_indicator(const Matrix& b, const Clustering& clustering);

enum class ObjectiveMode { Feature, Column };

std::string_view to_string(ObjectiveMode mode);
ObjectiveMode parse_objective_mode(std::string_view name);

/// Feature mode: the kernel k-means objective evaluated from K entries only.
/// Column mode: the linear objective over the columns of K as feature vectors.
double kernel_objective(const Matrix& k, const Clustering& clustering, ObjectiveMode mode);

}  // namespace kkm
