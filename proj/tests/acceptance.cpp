// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when a hard criterion fails; criterion 10 is soft (reported, never fatal).
#include "kkm/approx.hpp"
#include "kkm/cluster.hpp"
#include "kkm/eval.hpp"
#include "kkm/ingest.hpp"
#include "kkm/random.hpp"
#include "kkm/runner.hpp"
#include "kkm/spectral.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

using namespace kkm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  bool soft;
  double budget_seconds;  // 0 = no runtime requirement
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome theorem1_desk() {
  const Index n = 300, s = 10, seeds = 100;
  const double eps = 0.5;
  const Matrix k = synthetic_spsd(power_law_spectrum(n, 2.0), 2024);
  const Index c_gauss = static_cast<Index>(std::ceil(4.0 * s / eps));
  const Matrix vs = sym_evd(k).vectors.leftCols(s);
  const double mu = static_cast<double>(n) / s * vs.rowwise().squaredNorm().maxCoeff();
  const Index c_unif = std::min(n, static_cast<Index>(std::ceil(4.0 * mu * s / eps)));
  int ok_g = 0, ok_u = 0;
  for (Index t = 0; t < seeds; ++t) {
    const std::uint64_t seed = derive_seed(7, static_cast<std::uint64_t>(t));
    if (trace_ratio_for_sketch(k, s, SketchKind::Gaussian, c_gauss, seed) <= 1.0 + eps) ++ok_g;
    if (trace_ratio_for_sketch(k, s, SketchKind::Uniform, c_unif, seed) <= 1.0 + eps) ++ok_u;
  }
  return {ok_g >= 85 && ok_u >= 85,
          fmt("gaussian c=%ld: %d/100 <= 1.5; uniform c=%ld (mu=%.2f): %d/100", (long)c_gauss, ok_g,
              (long)c_unif, mu, ok_u)};
}

Outcome exactness() {
  const Index n = 100;
  std::mt19937_64 rng(1);
  std::vector<double> spec(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) spec[static_cast<std::size_t>(i)] = 1.0 / (1.0 + static_cast<double>(i));
  const Matrix k = oracle::random_spsd(spec, rng);
  const NystromFactors f = nystrom_factors(k, build_sketch(SketchPlan::identity(n)));
  double worst = 0.0;
  for (Index s : {1, 5, 10}) {
    const double err = norm(k - rank_restricted_approx(f, s), NormKind::Trace);
    double tail = 0.0;
    for (Index i = s; i < n; ++i) tail += spec[static_cast<std::size_t>(i)];
    worst = std::max(worst, std::abs(err - tail) / tail);
  }
  return {worst <= 1e-8, fmt("max relative gap %.2e over s in {1,5,10}", worst)};
}

Outcome psd_ordering() {
  std::mt19937_64 rng(2);
  const SketchKind kinds[] = {SketchKind::Uniform, SketchKind::Leverage, SketchKind::Gaussian,
                              SketchKind::Srht, SketchKind::CountSketch};
  double worst = 0.0;
  int bad = 0;
  for (int cfg = 0; cfg < 50; ++cfg) {
    const Index n = 20 + static_cast<Index>(rng() % 131);
    std::vector<double> spec(static_cast<std::size_t>(n));
    const double p = 0.5 + static_cast<double>(rng() % 30) / 10.0;
    const Index rank = cfg % 3 == 0 ? n / 3 : n;
    for (Index i = 0; i < n; ++i) spec[static_cast<std::size_t>(i)] = i < rank ? std::pow(1.0 + i, -p) : 0.0;
    const Matrix k = synthetic_spsd(spec, rng());
    const Index c = 2 + static_cast<Index>(rng() % static_cast<unsigned>(n - 1));
    const Index s = 1 + static_cast<Index>(rng() % static_cast<unsigned>(c));
    const SketchKind kind = kinds[cfg % 5];
    const std::uint64_t seed = rng();
    SketchPlan plan;
    switch (kind) {
      case SketchKind::Uniform: plan = SketchPlan::uniform(n, c, seed); break;
      case SketchKind::Leverage: plan = SketchPlan::leverage(leverage_probabilities(k, std::min(s, rank)), c, seed); break;
      case SketchKind::Gaussian: plan = SketchPlan::gaussian(n, c, seed); break;
      case SketchKind::Srht: plan = SketchPlan::srht(n, c, seed); break;
      default: plan = SketchPlan::countsketch(n, c, seed); break;
    }
    const NystromFactors f = nystrom_factors(k, build_sketch(plan));
    const double smax = spec[0];
    const double m = min_eigenvalue(k - rank_restricted_approx(f, s)) / smax;
    worst = std::min(worst, m);
    if (m < -1e-7) ++bad;
  }
  return {bad == 0, fmt("50 configs, worst min-eig/sigma_max %.2e, violations %d", worst, bad)};
}

Outcome kernel_trick() {
  const auto j = verify("kernel-trick", 4);
  return {j["passed"].get<bool>(),
          fmt("100 cases n=50, max relative gap %.2e", j["max_relative_difference"].get<double>())};
}

Outcome indicator_identity() {
  std::mt19937_64 rng(5);
  Rng grng(6);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 5 + static_cast<Index>(rng() % 60);
    const Index d = 1 + static_cast<Index>(rng() % 8);
    const int k = 1 + static_cast<int>(rng() % std::min<Index>(n, 6));
    const Matrix b = gaussian_matrix(n, d, grng);
    const Clustering c = Clustering::from_assignments(oracle::random_partition(static_cast<std::size_t>(n), k, rng), k);
    const double direct = linear_objective(b, c);
    const double via = linear_objective_via_indicator(b, c);
    worst = std::max(worst, std::abs(direct - via) / std::max(direct, 1e-300));
  }
  return {worst <= 1e-10, fmt("100 cases, max relative gap %.2e", worst)};
}

Outcome pcp_sandwich() {
  const auto j = verify("pcp", 6);
  return {j["passed"].get<bool>(),
          fmt("%ld projections, lower %ld upper %ld, eps_used %.3f, bound %.3f",
              (long)j["projections"].get<Index>(), (long)j["lower_violations"].get<Index>(),
              (long)j["upper_violations"].get<Index>(), j["epsilon_used"].get<double>(),
              j["bound"].get<double>())};
}

Outcome end_to_end_ratio() {
  const Index n = 12, s = 4, ell = 6, c = 12;
  const int k = 2;
  int ok = 0;
  double worst = 0.0;
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DataMatrix data(oracle::planted(n, 3, 3.0, rng));
    const Matrix kmat = kernel_matrix(data, rbf_from_heuristic(data, 1.0));
    const NystromFactors f = nystrom_factors(kmat, build_sketch(SketchPlan::identity(c)));
    const FeatureMatrix fm = rank_restricted_features(f, ell, s);
    const Clustering cl = kmeans(fm.B, k, seed);
    const double obj = kernel_objective(kmat, cl, ObjectiveMode::Feature);
    const double opt = brute_force_kernel_kmeans(kmat, k).objective;
    const double eps = trace_error_ratio(kmat, fm.B * fm.B.transpose(), s) - 1.0;
    const double bound = 1.0 + eps + static_cast<double>(k) / static_cast<double>(s);
    worst = std::max(worst, obj / opt);
    if (obj <= bound * opt * (1 + 1e-12)) ++ok;
  }
  return {ok >= 90, fmt("%d/100 within (1+eps+k/s) of the optimum, worst ratio %.3f", ok, worst)};
}

Outcome power_method() {
  const Index n = 200, s = 10, c = s + 10;
  const double eps = 0.5;
  const std::vector<double> spec = geometric_spectrum(n, 0.7);
  const Matrix k = synthetic_spsd(spec, 8);
  const Index t = power_iterations(n, eps, spec[s - 1] / spec[s]);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FeatureMatrix fm = power_method_features(k, s, c, t, derive_seed(8, seed));
    if (trace_error_ratio(k, fm.B * fm.B.transpose(), s) <= 1.0 + eps) ++ok;
  }
  return {ok >= 85, fmt("t=%ld, %d/100 <= 1.5", (long)t, ok)};
}

Outcome ring_separation() {
  const KernelSpec spec = KernelSpec::rbf(0.3);
  double kk_total = 0.0, kk_min = 1.0, lin_total = 0.0, lin_max = 0.0;
  const int seeds = 20;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(seeds); ++seed) {
    const DataMatrix rings = two_rings(200, 1.0, 3.0, 0.05, seed);
    const Index n = rings.n(), c = 100, ell = 50, s = 20;
    const NystromFactors f = nystrom_factors(rings, spec, SketchPlan::uniform(n, c, derive_seed(seed, streams::kSketch)));
    const FeatureMatrix fm = rank_restricted_features(f, ell, s);
    const double kk = nmi(*rings.labels(), kmeans(fm.B, 2, seed).assignments);
    const double lin = nmi(*rings.labels(), kmeans(rings.points(), 2, seed).assignments);
    kk_total += kk;
    kk_min = std::min(kk_min, kk);
    lin_total += lin;
    lin_max = std::max(lin_max, lin);
  }
  const double kk_mean = kk_total / seeds, lin_mean = lin_total / seeds;
  return {kk_mean >= 0.95 && lin_mean <= 0.5,
          fmt("kernel pipeline NMI mean %.3f (min %.3f); linear NMI mean %.3f (max %.3f)", kk_mean,
              kk_min, lin_mean, lin_max)};
}

std::string digits_path() {
  if (const char* p = std::getenv("KKM_PENDIGITS")) return p;
  return KKM_DATA_DIR "/digits.csv";
}

Outcome kk_vs_sc() {
  const std::string path = digits_path();
  const bool libsvm = path.ends_with(".libsvm") || path.ends_with(".svm") || path.find("pendigits") != std::string::npos;
  DataMatrix data = ingest(path, libsvm ? DataFormat::Libsvm : DataFormat::Csv, true);
  if (data.n() > 2000) {
    std::vector<Index> rows;
    Rng rng(10);
    std::vector<Index> all(static_cast<std::size_t>(data.n()));
    std::iota(all.begin(), all.end(), Index{0});
    std::shuffle(all.begin(), all.end(), rng);
    rows.assign(all.begin(), all.begin() + 2000);
    data = data.subset(rows);
  }
  const int k = 10;
  std::ostringstream detail;
  detail << "n=" << data.n() << ";";
  bool pass = true;
  for (Index mult : {5, 20, 50}) {
    RunConfig kk;
    kk.dataset = path;
    kk.k = k;
    kk.c = mult * k;
    kk.s = k;
    kk.beta = 1.0;
    kk.trials = 20;
    kk.seed = 10;
    RunConfig sc = kk;
    sc.pipeline = Pipeline::SpectralNystrom;
    // Degree-failure trials are discarded; run extra trials until 20 valid.
    Report rs = run(sc, data);
    while (static_cast<Index>(rs.trials.size()) - rs.degree_failures() < 20 && sc.trials < 200) {
      sc.trials += rs.degree_failures();
      kk.trials = sc.trials;
      rs = run(sc, data);
    }
    const Report rk = run(kk, data);
    const double a = rk.aggregate(&TrialRecord::nmi).mean;
    const double b = rs.aggregate(&TrialRecord::nmi).mean;
    pass = pass && a >= b;
    detail << fmt(" c=%ld KK %.3f SC %.3f (SC failures %ld);", (long)kk.c, a, b, (long)rs.degree_failures());
  }
  return {pass, detail.str()};
}

Outcome lloyd_properties() {
  Rng rng(11);
  std::mt19937_64 r(11);
  const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
  int mono_bad = 0, det_bad = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 50 + static_cast<Index>(r() % 400);
    const Index d = 1 + static_cast<Index>(r() % 10);
    const int k = 2 + static_cast<int>(r() % 8);
    const Matrix b = gaussian_matrix(n, d, rng);
    const Matrix init = kmeans_pp_init(b, k, r());
    LloydOptions one;
    LloydOptions many;
    many.threads = hw;
    const Clustering a = lloyd(b, k, init, one);
    const Clustering c = lloyd(b, k, init, many);
    for (std::size_t i = 1; i < a.objective_trace.size(); ++i)
      if (a.objective_trace[i] > a.objective_trace[i - 1] + 1e-12) ++mono_bad;
    if (a.assignments != c.assignments) ++det_bad;
  }
  return {mono_bad == 0 && det_bad == 0,
          fmt("50 instances, monotonicity breaks %d, 1 vs %u thread mismatches %d", mono_bad, hw, det_bad)};
}

Outcome nmi_properties() {
  std::mt19937_64 rng(12);
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + rng() % 100;
    const unsigned ka = 2 + rng() % 6, kb = 1 + rng() % 6;
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = i < ka ? static_cast<int>(i) : static_cast<int>(rng() % ka);
      b[i] = static_cast<int>(rng() % kb);
    }
    std::vector<int> perm(ka);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> relabeled(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[i] = perm[static_cast<std::size_t>(a[i])] + 100;
    if (std::abs(nmi(a, a) - 1.0) > 1e-12) ++bad;
    if (nmi(a, b) != nmi(b, a)) ++bad;
    if (nmi(relabeled, b) != nmi(a, b)) ++bad;
    if (std::abs(nmi(relabeled, a) - 1.0) > 1e-12) ++bad;
  }
  if (std::abs(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1})) > 1e-15) ++bad;
  return {bad == 0, fmt("200 generated cases + independence example, failures %d", bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "trace-error bound at desk scale", false, 60, theorem1_desk},
      {2, "exactness with the identity sketch", false, 0, exactness},
      {3, "PSD ordering", false, 0, psd_ordering},
      {4, "kernel-trick identity", false, 0, kernel_trick},
      {5, "indicator identity", false, 0, indicator_identity},
      {6, "projection-cost preservation sandwich", false, 0, pcp_sandwich},
      {7, "end-to-end approximation ratio", false, 30, end_to_end_ratio},
      {8, "power method trace ratio", false, 0, power_method},
      {9, "nonlinear separation on two rings", false, 0, ring_separation},
      {10, "kernel k-means vs spectral clustering (soft)", true, 600, kk_vs_sc},
      {11, "Lloyd monotonicity and determinism", false, 0, lloyd_properties},
      {12, "NMI properties", false, 0, nmi_properties},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int hard_failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over budget %.0fs]", c.budget_seconds);
    }
    const char* tag = o.pass ? "PASS" : (c.soft ? "SOFT-FAIL" : "FAIL");
    std::cout << fmt("[%s] %2d %s: %s (%.1fs)", tag, c.id, c.name, o.detail.c_str(), secs) << std::endl;
    if (!o.pass && !c.soft) ++hard_failures;
  }
  std::cout << (hard_failures ? "acceptance: FAILED " : "acceptance: all hard criteria passed ")
            << "(" << hard_failures << " hard failures)" << std::endl;
  return hard_failures ? 1 : 0;
}
