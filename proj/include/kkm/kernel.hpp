#pragma once

#include "kkm/matrix_core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace kkm {

enum class KernelFamily { Rbf };

/// Kernel function parameters. Only the RBF family
/// k(a, a') = exp(-||a - a'||^2 / (2 sigma^2)) exists today.
class KernelSpec {
 public:
  /// Throws InvalidArgument unless sigma is finite and positive.
  static KernelSpec rbf(double sigma, std::optional<double> beta = std::nullopt);

  KernelFamily family() const { return family_; }
  double sigma() const { return sigma_; }
  /// Width multiplier the sigma came from, when it came from the heuristic.
  std::optional<double> beta() const { return beta_; }

  double operator()(std::span<const double> a, std::span<const double> b) const;

 private:
  KernelSpec(KernelFamily family, double sigma, std::optional<double> beta)
      : family_(family), sigma_(sigma), beta_(beta) {}

  KernelFamily family_;
  double sigma_;
  std::optional<double> beta_;
};

/// n points in R^d stored one per row, with optional integer class labels.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix points,
                      std::optional<std::vector<int>> labels = std::nullopt);

  Index n() const { return points_.rows(); }
  Index d() const { return points_.cols(); }
  const Matrix& points() const { return points_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

  /// Row i as a contiguous span (rows are copied out of column-major storage).
  std::vector<double> row(Index i) const;

  DataMatrix subset(std::span<const Index> rows) const;

 private:
  Matrix points_;
  std::optional<std::vector<int>> labels_;
};

/// beta * sqrt(mean over all ordered pairs of ||a_i - a_j||^2), evaluated as
/// beta * sqrt(2/n sum ||a_i||^2 - 2/n^2 ||sum a_i||^2) in O(nd). Points are
/// centered first, which leaves the value unchanged and avoids cancellation.
double sigma_heuristic(const DataMatrix& data, double beta);

/// Convenience: KernelSpec::rbf(sigma_heuristic(data, beta), beta).
KernelSpec rbf_from_heuristic(const DataMatrix& data, double beta);

/// Full n x n kernel matrix (symmetric, unit diagonal for RBF).
Matrix kernel_matrix(const DataMatrix& data, const KernelSpec& spec);

/// Columns of the kernel matrix for the given landmark rows, without forming
/// the full matrix. Bitwise equal to the matching columns of kernel_matrix.
Matrix kernel_columns(const DataMatrix& data, std::span<const Index> landmarks,
                      const KernelSpec& spec);

}  // namespace kkm
