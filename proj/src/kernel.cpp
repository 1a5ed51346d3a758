#include "kkm/kernel.hpp"

#include <cmath>

namespace kkm {

namespace {

// Squared distance between columns i and j of a d x n point matrix. The
// summation order is fixed so results are independent of the caller.
double squared_distance(const Matrix& pts_t, Index i, Index j) {
  const double* a = pts_t.col(i).data();
  const double* b = pts_t.col(j).data();
  double acc = 0.0;
  for (Index t = 0; t < pts_t.rows(); ++t) {
    const double diff = a[t] - b[t];
    acc += diff * diff;
  }
  return acc;
}

double rbf_from_distance(double dist2, double sigma) {
  return std::exp(-dist2 / (2.0 * sigma * sigma));
}

}  // namespace

KernelSpec KernelSpec::rbf(double sigma, std::optional<double> beta) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw InvalidArgument("KernelSpec: sigma must be positive, got " +
                          std::to_string(sigma));
  }
  if (beta && (!std::isfinite(*beta) || *beta <= 0.0)) {
    throw InvalidArgument("KernelSpec: beta must be positive");
  }
  return KernelSpec(KernelFamily::Rbf, sigma, beta);
}

double KernelSpec::operator()(std::span<const double> a,
                              std::span<const double> b) const {
  if (a.size() != b.size()) throw InvalidArgument("kernel: dimension mismatch");
  double acc = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double diff = a[t] - b[t];
    acc += diff * diff;
  }
  return rbf_from_distance(acc, sigma_);
}

DataMatrix::DataMatrix(Matrix points, std::optional<std::vector<int>> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw InvalidArgument("DataMatrix: need n >= 1 and d >= 1");
  }
  require_finite(points_, "DataMatrix");
  if (labels_ && static_cast<Index>(labels_->size()) != points_.rows()) {
    throw InvalidArgument("DataMatrix: label count " +
                          std::to_string(labels_->size()) + " != n " +
                          std::to_string(points_.rows()));
  }
}

std::vector<double> DataMatrix::row(Index i) const {
  std::vector<double> out(static_cast<std::size_t>(d()));
  for (Index t = 0; t < d(); ++t) out[static_cast<std::size_t>(t)] = points_(i, t);
  return out;
}

DataMatrix DataMatrix::subset(std::span<const Index> rows) const {
  Matrix pts(static_cast<Index>(rows.size()), d());
  std::optional<std::vector<int>> lab;
  if (labels_) lab.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= n()) throw InvalidArgument("subset: index out of range");
    pts.row(static_cast<Index>(r)) = points_.row(rows[r]);
    if (lab) lab->push_back((*labels_)[static_cast<std::size_t>(rows[r])]);
  }
  return DataMatrix(std::move(pts), std::move(lab));
}

double sigma_heuristic(const DataMatrix& data, double beta) {
  if (data.n() < 2) throw InvalidArgument("sigma_heuristic: need n >= 2");
  if (!(beta > 0.0)) throw InvalidArgument("sigma_heuristic: beta must be positive");
  const double n = static_cast<double>(data.n());
  const Eigen::RowVectorXd mean = data.points().colwise().mean();
  const Matrix centered = data.points().rowwise() - mean;
  const double sum_sq = centered.squaredNorm();
  const double sum_norm = centered.colwise().sum().squaredNorm();
  const double pair_sum = 2.0 * n * sum_sq - 2.0 * sum_norm;
  return beta * std::sqrt(std::max(pair_sum, 0.0) / (n * n));
}

KernelSpec rbf_from_heuristic(const DataMatrix& data, double beta) {
  return KernelSpec::rbf(sigma_heuristic(data, beta), beta);
}

Matrix kernel_matrix(const DataMatrix& data, const KernelSpec& spec) {
  const Index n = data.n();
  const Matrix pts_t = data.points().transpose();
  Matrix k(n, n);
  for (Index j = 0; j < n; ++j) {
    k(j, j) = rbf_from_distance(0.0, spec.sigma());
    for (Index i = j + 1; i < n; ++i) {
      const double v = rbf_from_distance(squared_distance(pts_t, i, j), spec.sigma());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Matrix kernel_columns(const DataMatrix& data, std::span<const Index> landmarks,
                      const KernelSpec& spec) {
  const Index n = data.n();
  for (const Index l : landmarks) {
    if (l < 0 || l >= n) {
      throw InvalidArgument("kernel_columns: landmark " + std::to_string(l) +
                            " outside [0, " + std::to_string(n) + ")");
    }
  }
  const Matrix pts_t = data.points().transpose();
  Matrix c(n, static_cast<Index>(landmarks.size()));
  for (Index j = 0; j < c.cols(); ++j) {
    const Index l = landmarks[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      c(i, j) = i == l ? rbf_from_distance(0.0, spec.sigma())
                       : rbf_from_distance(squared_distance(pts_t, i, l), spec.sigma());
    }
  }
  return c;
}

}  // namespace kkm
