#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kkm/kernel.hpp"
#include "kkm/random.hpp"
#include "oracles.hpp"

#include <numeric>

using namespace kkm;

TEST_CASE("KernelSpec validation") {
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::rbf(-1.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::rbf(std::numeric_limits<double>::infinity()), InvalidArgument);
  CHECK(KernelSpec::rbf(2.0).sigma() == 2.0);
}

TEST_CASE("DataMatrix validation") {
  CHECK_THROWS_AS(DataMatrix(Matrix(0, 2)), InvalidArgument);
  CHECK_THROWS_AS(DataMatrix(Matrix::Zero(3, 2), std::vector<int>{1, 2}), InvalidArgument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(DataMatrix{bad}, InvalidArgument);
}

TEST_CASE("sigma heuristic") {
  Matrix p(2, 1);
  p << 0, 2;
  CHECK(sigma_heuristic(DataMatrix(p), 1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sigma_heuristic(DataMatrix(Matrix::Ones(5, 3)), 1.0) == 0.0);
  CHECK_THROWS_AS(rbf_from_heuristic(DataMatrix(Matrix::Ones(5, 3)), 1.0), InvalidArgument);

  Rng rng(1);
  const Matrix pts = gaussian_matrix(40, 3, rng);
  for (double beta : {0.2, 1.0, 5.0}) {
    CHECK(sigma_heuristic(DataMatrix(pts), beta) ==
          doctest::Approx(oracle::sigma_pairs(pts, beta)).epsilon(1e-12));
  }
  Matrix shifted = pts;
  shifted.rowwise() += Eigen::RowVector3d(1e3, -2e3, 5e2);
  CHECK(sigma_heuristic(DataMatrix(shifted), 1.0) ==
        doctest::Approx(sigma_heuristic(DataMatrix(pts), 1.0)).epsilon(1e-10));
}

TEST_CASE("kernel_matrix small cases") {
  CHECK(kernel_matrix(DataMatrix(Matrix::Ones(1, 2)), KernelSpec::rbf(1.0))(0, 0) == 1.0);
  const Matrix same = kernel_matrix(DataMatrix(Matrix::Ones(2, 3)), KernelSpec::rbf(0.5));
  CHECK((same - Matrix::Ones(2, 2)).norm() == 0.0);
  const double sigma = 0.7;
  Matrix p(2, 1);
  p << 0, sigma * std::sqrt(2.0);
  const Matrix k = kernel_matrix(DataMatrix(p), KernelSpec::rbf(sigma));
  CHECK(k(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("kernel_matrix matches entrywise oracle and is PSD") {
  Rng rng(2);
  const Matrix pts = gaussian_matrix(30, 4, rng);
  const KernelSpec spec = KernelSpec::rbf(1.3);
  const Matrix k = kernel_matrix(DataMatrix(pts), spec);
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 30; ++j)
      CHECK(k(i, j) == doctest::Approx(oracle::rbf(pts.row(i).transpose(), pts.row(j).transpose(), 1.3)).epsilon(1e-12));
  CHECK((k - k.transpose()).norm() == 0.0);
  CHECK(min_eigenvalue(k) >= -1e-8);
}

TEST_CASE("kernel_columns slices kernel_matrix bitwise") {
  Rng rng(3);
  const DataMatrix data(gaussian_matrix(30, 3, rng));
  const KernelSpec spec = KernelSpec::rbf(0.9);
  const Matrix k = kernel_matrix(data, spec);

  std::vector<Index> all(30);
  std::iota(all.begin(), all.end(), 0);
  CHECK((kernel_columns(data, all, spec).array() == k.array()).all());

  const std::vector<Index> one{7};
  const Matrix col = kernel_columns(data, one, spec);
  CHECK(col(7, 0) == 1.0);

  const std::vector<Index> some{4, 0, 29, 4, 13};
  const Matrix c = kernel_columns(data, some, spec);
  for (std::size_t j = 0; j < some.size(); ++j)
    CHECK((c.col(static_cast<Index>(j)).array() == k.col(some[j]).array()).all());

  const std::vector<Index> bad{30};
  CHECK_THROWS_AS(kernel_columns(data, bad, spec), InvalidArgument);
}
