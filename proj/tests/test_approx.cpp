#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kkm/approx.hpp"
#include "kkm/eval.hpp"
#include "kkm/random.hpp"
#include "oracles.hpp"

using namespace kkm;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

}  // namespace

TEST_CASE("nystrom_factors basics") {
  const DataMatrix one(Matrix::Ones(1, 3));
  const NystromFactors f = nystrom_factors(one, KernelSpec::rbf(1.0), SketchPlan::uniform(1, 1, 0));
  CHECK(f.C(0, 0) == 1.0);
  CHECK(f.W(0, 0) == 1.0);

  Rng rng(1);
  const DataMatrix data(gaussian_matrix(50, 3, rng));
  const KernelSpec spec = KernelSpec::rbf(1.5);
  const Matrix k = kernel_matrix(data, spec);
  for (const SketchPlan& plan : {SketchPlan::uniform(50, 10, 3), SketchPlan::uniform(50, 50, 4),
                                 SketchPlan::gaussian(50, 10, 5), SketchPlan::srht(50, 10, 6),
                                 SketchPlan::countsketch(50, 10, 7)}) {
    const NystromFactors g = nystrom_factors(data, spec, plan);
    const Matrix p = build_sketch(plan).dense();
    CHECK((g.C - k * p).norm() <= 1e-10 * k.norm());
    CHECK((g.W - p.transpose() * k * p).norm() <= 1e-10 * std::max(1.0, g.W.norm()));
  }
  CHECK_THROWS_AS(nystrom_factors(data, spec, SketchPlan::gaussian(50, 10, 1), 40), InvalidArgument);
  CHECK_NOTHROW(nystrom_factors(data, spec, SketchPlan::uniform(50, 10, 1), 40));
  CHECK_THROWS_AS(nystrom_factors(data, spec, SketchPlan::uniform(49, 10, 1)), InvalidArgument);
}

TEST_CASE("rank_restricted_features: full sketch on a rank-r matrix is exact") {
  std::mt19937_64 rng(2);
  const Index n = 30, r = 6;
  const Matrix k = oracle::random_gram(n, r, rng);
  const NystromFactors f = nystrom_factors(k, build_sketch(SketchPlan::identity(n)));
  const FeatureMatrix fm = rank_restricted_features(f, r, r);
  CHECK((fm.B * fm.B.transpose() - k).norm() <= 1e-7 * k.norm());
  CHECK(fm.params.ell == r);
  CHECK_FALSE(fm.params.ell_reduced);
}

TEST_CASE("rank_restricted_features: diag(4,1,0) with landmarks {0,1}") {
  const Matrix k = diag({4, 1, 0});
  const NystromFactors f = nystrom_factors(k, build_sketch(SketchPlan::selection(3, {0, 1})));
  const FeatureMatrix fm = rank_restricted_features(f, 2, 1);
  CHECK((fm.B * fm.B.transpose() - diag({4, 0, 0})).norm() <= 1e-12);
}

TEST_CASE("rank_restricted_features reduces ell on a singular core") {
  std::mt19937_64 rng(3);
  const Matrix k = oracle::random_gram(20, 3, rng);
  const NystromFactors f = nystrom_factors(k, build_sketch(SketchPlan::uniform(20, 10, 1)));
  const FeatureMatrix fm = rank_restricted_features(f, 6, 4);
  CHECK(fm.params.ell_reduced);
  CHECK(fm.params.ell == 3);
  CHECK(fm.params.ell_requested == 6);
  CHECK(fm.B.cols() == 4);
  CHECK(fm.B.col(3).norm() == 0.0);
  RankRestrictedOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(rank_restricted_features(f, 6, 4, strict), NumericalError);
  CHECK_THROWS_AS(rank_restricted_features(f, 3, 4), InvalidArgument);
  CHECK_THROWS_AS(rank_restricted_features(f, 11, 4), InvalidArgument);
}

TEST_CASE("rank_restricted_approx") {
  std::mt19937_64 rng(4);
  const Matrix k5 = oracle::random_gram(15, 5, rng);
  const NystromFactors full = nystrom_factors(k5, build_sketch(SketchPlan::identity(15)));
  CHECK((rank_restricted_approx(full, 5) - k5).norm() <= 1e-7 * k5.norm());

  const NystromFactors d = nystrom_factors(diag({4, 1}), build_sketch(SketchPlan::identity(2)));
  CHECK((rank_restricted_approx(d, 1) - diag({4, 0})).norm() <= 1e-12);
  CHECK_THROWS_AS(rank_restricted_approx(d, 0), InvalidArgument);

  const Matrix k = oracle::random_gram(60, 60, rng);
  const NystromFactors f = nystrom_factors(k, build_sketch(SketchPlan::uniform(60, 30, 9)));
  const Matrix approx = rank_restricted_approx(f, 5);
  const Matrix ref = oracle::nystrom_rank_restricted(f.C, f.W, 5);
  CHECK(oracle::trace_norm(k - approx) == doctest::Approx(oracle::trace_norm(k - ref)).epsilon(1e-8));
}

TEST_CASE("PSD ordering, consistency and monotonicity in s") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 6; ++rep) {
    const Index n = 40;
    const Matrix k = oracle::random_gram(n, 25, rng);
    const double smax = norm(k, NormKind::Spectral);
    const SketchPlan plans[] = {SketchPlan::uniform(n, 20, rep), SketchPlan::gaussian(n, 20, rep),
                                SketchPlan::srht(n, 20, rep), SketchPlan::countsketch(n, 20, rep)};
    for (const SketchPlan& plan : plans) {
      const NystromFactors f = nystrom_factors(k, build_sketch(plan));
      double prev = std::numeric_limits<double>::infinity();
      for (Index s = 1; s <= 15; s += 2) {
        const Matrix a = rank_restricted_approx(f, s);
        CHECK(min_eigenvalue(k - a) >= -1e-7 * smax);
        const double err = norm(k - a, NormKind::Trace);
        CHECK(err <= prev * (1 + 1e-10));
        prev = err;
      }
      const FeatureMatrix fm = rank_restricted_features(f, 20, 6);
      if (!fm.params.ell_reduced) {
        CHECK((fm.B * fm.B.transpose() - rank_restricted_approx(f, 6)).norm() <= 1e-7 * smax);
      }
    }
  }
}

TEST_CASE("trace_error_ratio conventions") {
  std::mt19937_64 rng(6);
  const Matrix k = oracle::random_gram(20, 20, rng);
  CHECK(trace_error_ratio(k, oracle::best_rank(k, 4), 4) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(trace_error_ratio(k, k, 4) == 0.0);
  const Matrix low = oracle::random_gram(20, 3, rng);
  CHECK(trace_error_ratio(low, low, 3) == 1.0);
  CHECK(std::isinf(trace_error_ratio(low, Matrix::Zero(20, 20), 3)));
  for (Index s : {1, 3, 7}) {
    const Matrix any = oracle::best_rank(oracle::random_gram(20, 20, rng), s);
    CHECK(trace_error_ratio(k, any, s) >= 1.0 - 1e-8);
  }
}

TEST_CASE("power method features") {
  std::mt19937_64 rng(7);
  const Matrix k = oracle::random_gram(25, 25, rng);
  for (Index t : {1, 3}) {
    const FeatureMatrix fm = power_method_features(k, 5, 25, t, 11);
    CHECK((fm.B * fm.B.transpose() - oracle::best_rank(k, 5)).norm() <= 1e-7 * k.norm());
  }
  const FeatureMatrix d = power_method_features(diag({4, 1}), 1, 1, 60, 3);
  CHECK(std::abs(d.B(0, 0)) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(d.B(1, 0)) <= 1e-8);
  CHECK_THROWS_AS(power_method_features(k, 5, 4, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(power_method_features(k, 5, 6, 0, 0), InvalidArgument);

  CHECK(power_iterations(200, 0.5, 1.0 / 0.7) ==
        static_cast<Index>(std::ceil(std::log(400.0) / std::log(1.0 / 0.7))));
  CHECK(power_iterations(10, 0.5, std::numeric_limits<double>::infinity()) == 1);
  CHECK_THROWS_AS(power_iterations(10, 0.5, 1.0), InvalidArgument);
}

TEST_CASE("power method trace ratio at the prescribed t") {
  const Index n = 200, s = 10, c = s + 10;
  const double eps = 0.5;
  const std::vector<double> spec = geometric_spectrum(n, 0.7);
  const Matrix k = synthetic_spsd(spec, 21);
  const Index t = power_iterations(n, eps, spec[s - 1] / spec[s]);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FeatureMatrix fm = power_method_features(k, s, c, t, seed);
    if (trace_error_ratio(k, fm.B * fm.B.transpose(), s) <= 1.0 + eps) ++ok;
  }
  CHECK(ok >= 26);
}

TEST_CASE("estimate_gap_ratio from the core") {
  const Matrix k = diag({8, 4, 1, 0.5});
  const NystromFactors f = nystrom_factors(k, build_sketch(SketchPlan::identity(4)));
  CHECK(estimate_gap_ratio(f, 1) == doctest::Approx(2.0));
  CHECK(estimate_gap_ratio(f, 2) == doctest::Approx(4.0));
  const NystromFactors g = nystrom_factors(diag({3, 1, 0}), build_sketch(SketchPlan::identity(3)));
  CHECK(std::isinf(estimate_gap_ratio(g, 2)));
}

TEST_CASE("kpca features") {
  const FeatureMatrix id = kpca_features(Matrix::Identity(3, 3), 3);
  CHECK((id.B * id.B.transpose() - Matrix::Identity(3, 3)).norm() <= 1e-12);
  const FeatureMatrix d = kpca_features(diag({4, 1}), 1);
  CHECK(std::abs(d.B(0, 0)) == doctest::Approx(2.0));
  CHECK(d.B(1, 0) == doctest::Approx(0.0));

  std::mt19937_64 rng(8);
  const Matrix k = oracle::random_gram(40, 40, rng);
  const FeatureMatrix fm = kpca_features(k, 5);
  const Vector sv = oracle::singular_values(k);
  CHECK(oracle::trace_norm(k - fm.B * fm.B.transpose()) == doctest::Approx(sv.tail(35).sum()).epsilon(1e-8));
}

TEST_CASE("random Fourier features approximate the RBF kernel") {
  Matrix one(1, 2);
  one << 0.3, -0.2;
  const FeatureMatrix c1 = rff_features(DataMatrix(one), 1.0, 1, 3);
  CHECK(std::abs(c1.B(0, 0)) <= std::sqrt(2.0) + 1e-15);

  const double sigma = 1.0;
  Matrix pts(21, 1);
  for (Index i = 0; i <= 20; ++i) pts(i, 0) = 0.15 * static_cast<double>(i);
  const DataMatrix data(pts);
  Vector mean = Vector::Zero(21);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix z = rff_features(data, sigma, 512, seed).B;
    for (Index i = 0; i <= 20; ++i) mean(i) += z.row(0).dot(z.row(i)) / 50.0;
  }
  CHECK(std::abs(mean(0) - 1.0) <= 0.1);
  for (Index i = 1; i <= 20; ++i) {
    const double expect = std::exp(-pts(i, 0) * pts(i, 0) / (2 * sigma * sigma));
    CHECK(std::abs(mean(i) - expect) <= 0.1);
  }
}
