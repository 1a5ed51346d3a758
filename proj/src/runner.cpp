#include "kkm/runner.hpp"

#include "kkm/approx.hpp"
#include "kkm/eval.hpp"
#include "kkm/random.hpp"
#include "kkm/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace kkm {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Json optional_json(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return Json(nullptr);
  return Json(*v);
}

Json summary_json(const Summary& s) {
  Json j;
  j["count"] = s.count;
  j["mean"] = s.count ? Json(s.mean) : Json(nullptr);
  j["std"] = s.count ? Json(s.std) : Json(nullptr);
  return j;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "";
  std::ostringstream out;
  out << std::setprecision(17) << *v;
  return out.str();
}

// State shared by all trials of one run.
struct RunContext {
  const RunConfig& config;
  const DataMatrix& data;
  KernelSpec spec;
  std::optional<Matrix> k;  // materialized kernel, when n is within the cap
  std::optional<std::vector<double>> leverage;
};

Matrix features_for_trial(const RunContext& ctx, std::uint64_t seed, TrialRecord& rec) {
  const RunConfig& cfg = ctx.config;
  const Index n = ctx.data.n();
  auto start = Clock::now();
  switch (cfg.pipeline) {
    case Pipeline::KkmeansNystrom: {
      const std::uint64_t sketch_seed = derive_seed(seed, streams::kSketch);
      SketchPlan plan;
      switch (cfg.sketch) {
        case SketchKind::Uniform: plan = SketchPlan::uniform(n, cfg.c, sketch_seed); break;
        case SketchKind::Gaussian: plan = SketchPlan::gaussian(n, cfg.c, sketch_seed); break;
        case SketchKind::Srht: plan = SketchPlan::srht(n, cfg.c, sketch_seed); break;
        case SketchKind::CountSketch: plan = SketchPlan::countsketch(n, cfg.c, sketch_seed); break;
        case SketchKind::Leverage: plan = SketchPlan::leverage(*ctx.leverage, cfg.c, sketch_seed); break;
        case SketchKind::Selection: throw InvalidArgument("run: selection sketch not supported");
      }
      const NystromFactors f = ctx.k ? nystrom_factors(*ctx.k, build_sketch(plan))
                                     : nystrom_factors(ctx.data, ctx.spec, plan,
                                                       cfg.materialization_cap);
      rec.seconds[0] = seconds_since(start);
      start = Clock::now();
      const FeatureMatrix fm = rank_restricted_features(f, cfg.ell_or_default(), cfg.s);
      rec.seconds[1] = seconds_since(start);
      rec.ell_used = fm.params.ell;
      rec.ell_reduced = fm.params.ell_reduced;
      return fm.B;
    }
    case Pipeline::KkmeansPower: {
      const FeatureMatrix fm = power_method_features(*ctx.k, cfg.s, cfg.c, cfg.t, seed);
      rec.seconds[0] = seconds_since(start);
      return fm.B;
    }
    case Pipeline::KkmeansKpca: {
      const FeatureMatrix fm = kpca_features(*ctx.k, cfg.s);
      rec.seconds[1] = seconds_since(start);
      return fm.B;
    }
    case Pipeline::KkmeansRff: {
      const FeatureMatrix fm = rff_features(ctx.data, ctx.spec.sigma(), cfg.c, seed);
      rec.seconds[0] = seconds_since(start);
      start = Clock::now();
      Matrix b = cfg.s < cfg.c ? reduce_dimension(fm.B, cfg.s) : fm.B;
      rec.seconds[1] = seconds_since(start);
      return b;
    }
    case Pipeline::SpectralNystrom: {
      const NystromFactors f =
          ctx.k ? nystrom_factors(*ctx.k, build_sketch(SketchPlan::uniform(
                                              n, cfg.c, derive_seed(seed, streams::kSketch))))
                : nystrom_factors(ctx.data, ctx.spec,
                                  SketchPlan::uniform(n, cfg.c, derive_seed(seed, streams::kSketch)));
      rec.seconds[0] = seconds_since(start);
      start = Clock::now();
      auto emb = spectral_embedding_nystrom(f, cfg.k);
      rec.seconds[1] = seconds_since(start);
      if (std::holds_alternative<DegreeFailure>(emb)) {
        rec.degree_failure = true;
        return Matrix();
      }
      Matrix out = std::get<Matrix>(std::move(emb));
      rec.zero_embedding_rows = (out.rowwise().squaredNorm().array() == 0.0).count();
      return out;
    }
    case Pipeline::SpectralExact: {
      Matrix emb = spectral_embedding_exact(*ctx.k, cfg.k);
      rec.seconds[1] = seconds_since(start);
      rec.zero_embedding_rows = (emb.rowwise().squaredNorm().array() == 0.0).count();
      return emb;
    }
  }
  return Matrix();
}

TrialRecord run_trial(const RunContext& ctx, Index trial) {
  const RunConfig& cfg = ctx.config;
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, trial);
  const Matrix b = features_for_trial(ctx, rec.seed, rec);
  if (rec.degree_failure) return rec;

  LloydOptions opts;
  opts.max_iter = cfg.max_iter;
  const auto start = Clock::now();
  const Clustering clustering = kmeans(b, cfg.k, rec.seed, opts, cfg.restarts);
  rec.seconds[2] = seconds_since(start);
  rec.iterations = clustering.iterations_run;
  rec.assignments = clustering.assignments;

  if (const auto& labels = ctx.data.labels()) rec.nmi = nmi(*labels, clustering.assignments);
  if (ctx.k) {
    rec.objective_feature = kernel_objective(*ctx.k, clustering, ObjectiveMode::Feature);
    rec.objective_column = kernel_objective(*ctx.k, clustering, ObjectiveMode::Column);
    const bool has_ratio = cfg.pipeline == Pipeline::KkmeansNystrom ||
                           cfg.pipeline == Pipeline::KkmeansPower ||
                           cfg.pipeline == Pipeline::KkmeansKpca;
    if (has_ratio && ctx.data.n() <= kTraceRatioMaxN) {
      rec.trace_ratio = trace_error_ratio(*ctx.k, b * b.transpose(), cfg.s);
    }
  }
  return rec;
}

bool needs_kernel(const RunConfig& cfg) {
  return cfg.pipeline == Pipeline::KkmeansPower || cfg.pipeline == Pipeline::KkmeansKpca ||
         cfg.pipeline == Pipeline::SpectralExact || cfg.sketch == SketchKind::Leverage ||
         (cfg.pipeline == Pipeline::KkmeansNystrom && !is_sampling(cfg.sketch));
}

Json cell_json(const SweepCell& cell) {
  Json j;
  j["kind"] = std::string(to_string(cell.kind));
  j["c"] = cell.c;
  j["seeds"] = cell.seeds;
  j["epsilons"] = cell.epsilons;
  j["success_fraction"] = cell.success_fraction;
  j["mean_ratio"] = cell.mean_ratio;
  j["min_ratio"] = cell.min_ratio;
  j["max_ratio"] = cell.max_ratio;
  return j;
}

double success_at(const SweepCell& cell, double eps) {
  for (std::size_t i = 0; i < cell.epsilons.size(); ++i) {
    if (cell.epsilons[i] == eps) return cell.success_fraction[i];
  }
  throw InvalidArgument("epsilon not in grid");
}

Json verify_theorem1(std::uint64_t seed) {
  const Index n = 300, s = 10, seeds = 100;
  const double eps = 0.5;
  const std::vector<double> spectrum = power_law_spectrum(n, 2.0);
  const Matrix k = synthetic_spsd(spectrum, seed);
  const Index c_gauss = static_cast<Index>(std::ceil(4.0 * s / eps));
  const Matrix vs = sym_evd(k).vectors.leftCols(s);
  const double mu = static_cast<double>(n) / s * vs.rowwise().squaredNorm().maxCoeff();
  const Index c_unif = static_cast<Index>(std::ceil(4.0 * mu * s / eps));

  const SketchKind gauss[] = {SketchKind::Gaussian};
  const SketchKind unif[] = {SketchKind::Uniform};
  const Index cg[] = {c_gauss};
  const Index cu[] = {c_unif};
  const SweepCell g = theorem1_sweep(k, s, gauss, cg, seeds, seed).front();
  const SweepCell u = theorem1_sweep(k, s, unif, cu, seeds, seed).front();
  const double threshold = 0.85;

  Json j;
  j["name"] = "theorem1";
  j["n"] = n;
  j["s"] = s;
  j["epsilon"] = eps;
  j["coherence"] = mu;
  j["threshold"] = threshold;
  j["gaussian"] = cell_json(g);
  j["uniform"] = cell_json(u);
  j["passed"] = success_at(g, eps) >= threshold && success_at(u, eps) >= threshold;
  return j;
}

Json verify_pcp(std::uint64_t seed) {
  const Index n = 120, c = 60, ell = 30, s = 20, kclusters = 4, frames = 190;
  Rng rng(derive_seed(seed, streams::kSynthetic));
  const Matrix g = gaussian_matrix(n, n, rng);
  const Matrix k = g * g.transpose() / static_cast<double>(n);
  const NystromFactors f = nystrom_factors(
      k, build_sketch(SketchPlan::uniform(n, c, derive_seed(seed, streams::kSketch))));
  const FeatureMatrix fm = rank_restricted_features(f, ell, s);
  const PcpReport r = pcp_check(k, fm.B, kclusters, frames, seed);

  Json j;
  j["name"] = "pcp";
  j["n"] = n;
  j["c"] = c;
  j["ell"] = ell;
  j["s"] = s;
  j["k"] = kclusters;
  j["projections"] = r.trials;
  j["alpha"] = r.alpha;
  j["epsilon_used"] = r.epsilon_used;
  j["bound"] = r.bound;
  j["lower_violations"] = r.lower_violations;
  j["upper_violations"] = r.upper_violations;
  j["max_lower_gap"] = r.max_lower_gap;
  j["max_upper_gap"] = r.max_upper_gap;
  j["passed"] = r.lower_violations == 0 && r.upper_violations == 0;
  return j;
}

Json verify_kernel_trick(std::uint64_t seed) {
  const Index n = 50, cases = 100;
  Rng rng(derive_seed(seed, streams::kSynthetic));
  double worst = 0.0;
  Index failures = 0;
  for (Index t = 0; t < cases; ++t) {
    const Index rank = 1 + static_cast<Index>(rng() % n);
    const Matrix g = gaussian_matrix(n, rank, rng);
    Matrix k = g * g.transpose();
    k = 0.5 * (k + k.transpose());
    const int kc = 2 + static_cast<int>(rng() % 5);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = i < kc ? static_cast<int>(i) : static_cast<int>(rng() % kc);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const Clustering part = Clustering::from_assignments(labels, kc);
    const double direct = kernel_objective(k, part, ObjectiveMode::Feature);
    const double via = linear_objective(kpca_features(k, n).B, part);
    const double rel = std::abs(direct - via) / std::max(std::abs(direct), 1e-300);
    worst = std::max(worst, rel);
    if (rel > 1e-8) ++failures;
  }
  Json j;
  j["name"] = "kernel-trick";
  j["cases"] = cases;
  j["n"] = n;
  j["max_relative_difference"] = worst;
  j["failures"] = failures;
  j["passed"] = failures == 0;
  return j;
}

}  // namespace

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = static_cast<Index>(values.size());
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

Index Report::degree_failures() const {
  return static_cast<Index>(
      std::count_if(trials.begin(), trials.end(), [](const TrialRecord& r) { return r.degree_failure; }));
}

Summary Report::aggregate(std::optional<double> TrialRecord::*field) const {
  std::vector<double> values;
  for (const TrialRecord& r : trials) {
    const auto& v = r.*field;
    if (!r.degree_failure && v && std::isfinite(*v)) values.push_back(*v);
  }
  return summarize(values);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json Report::to_json() const {
  Json results;
  Json rows = Json::array();
  for (const TrialRecord& r : trials) {
    Json row;
    row["trial"] = r.trial;
    row["seed"] = r.seed;
    row["nmi"] = optional_json(r.nmi);
    row["objective_feature"] = optional_json(r.objective_feature);
    row["objective_column"] = optional_json(r.objective_column);
    row["trace_ratio"] = optional_json(r.trace_ratio);
    row["degree_failure"] = r.degree_failure;
    row["ell_used"] = r.ell_used;
    row["ell_reduced"] = r.ell_reduced;
    row["iterations"] = r.iterations;
    row["zero_embedding_rows"] = r.zero_embedding_rows;
    rows.push_back(std::move(row));
  }
  results["trials"] = std::move(rows);
  Json agg;
  agg["nmi"] = summary_json(aggregate(&TrialRecord::nmi));
  agg["objective_feature"] = summary_json(aggregate(&TrialRecord::objective_feature));
  agg["objective_column"] = summary_json(aggregate(&TrialRecord::objective_column));
  agg["trace_ratio"] = summary_json(aggregate(&TrialRecord::trace_ratio));
  agg["degree_failures"] = degree_failures();
  agg["objective_reported"] = std::string(to_string(config.objective));
  results["aggregate"] = std::move(agg);

  Json j;
  j["schema"] = kReportSchema;
  j["config"] = config.to_json();
  Json data;
  data["n"] = n;
  data["d"] = d;
  data["sigma"] = sigma;
  data["nmi_convention"] = "geometric mean; 0 when either labeling has one class";
  j["data"] = std::move(data);
  j["results"] = results;
  j["determinism_hash"] = hex64(fnv1a(results.dump()));
  Json timings;
  for (std::size_t st = 0; st < kStages.size(); ++st) {
    Json per = Json::array();
    for (const TrialRecord& r : trials) per.push_back(r.seconds[st]);
    timings[kStages[st]] = std::move(per);
  }
  j["timings"] = std::move(timings);
  return j;
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "trial,seed,nmi,objective_feature,objective_column,trace_ratio,degree_failure,"
         "ell_used,ell_reduced,iterations,t_nystrom,t_dr,t_kmeans\n";
  for (const TrialRecord& r : trials) {
    out << r.trial << ',' << r.seed << ',' << csv_cell(r.nmi) << ','
        << csv_cell(r.objective_feature) << ',' << csv_cell(r.objective_column) << ','
        << csv_cell(r.trace_ratio) << ',' << (r.degree_failure ? 1 : 0) << ',' << r.ell_used
        << ',' << (r.ell_reduced ? 1 : 0) << ',' << r.iterations << ',' << r.seconds[0] << ','
        << r.seconds[1] << ',' << r.seconds[2] << '\n';
  }
  return out.str();
}

DataMatrix load_dataset(const RunConfig& config) {
  std::string_view ds = config.dataset;
  if (ds.starts_with("rings:")) {
    ds.remove_prefix(6);
    const auto colon = ds.find(':');
    if (colon == std::string_view::npos) {
      throw InvalidArgument("dataset: expected rings:<points per ring>:<noise>");
    }
    const Index per = std::stol(std::string(ds.substr(0, colon)));
    const double noise = std::stod(std::string(ds.substr(colon + 1)));
    return two_rings(per, 1.0, 3.0, noise, config.seed);
  }
  return ingest(config.dataset, config.format, config.labeled);
}

KernelSpec kernel_for(const RunConfig& config, const DataMatrix& data) {
  if (config.sigma) return KernelSpec::rbf(*config.sigma);
  return rbf_from_heuristic(data, config.beta);
}

std::uint64_t trial_seed(std::uint64_t seed, Index trial) {
  return derive_seed(seed, streams::kTrial + static_cast<std::uint64_t>(trial));
}

Report run(const RunConfig& config, const DataMatrix& data) {
  config.validate_for(data.n());
  RunContext ctx{config, data, kernel_for(config, data), std::nullopt, std::nullopt};
  if (data.n() <= config.materialization_cap) {
    ctx.k = kernel_matrix(data, ctx.spec);
  } else if (needs_kernel(config)) {
    throw InvalidArgument("run: " + std::string(to_string(config.pipeline)) +
                          " needs the full kernel matrix and n=" + std::to_string(data.n()) +
                          " exceeds materialization_cap");
  }
  if (config.pipeline == Pipeline::KkmeansNystrom && config.sketch == SketchKind::Leverage) {
    ctx.leverage = leverage_probabilities(*ctx.k, config.s);
  }

  Report report;
  report.config = config;
  report.n = data.n();
  report.d = data.d();
  report.sigma = ctx.spec.sigma();
  report.trials.resize(static_cast<std::size_t>(config.trials));

  unsigned workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.trials)));
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (Index t = next++; t < config.trials; t = next++) {
      try {
        report.trials[static_cast<std::size_t>(t)] = run_trial(ctx, t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return report;
}

Report run(const RunConfig& config) {
  config.validate();
  return run(config, load_dataset(config));
}

Json PairedReport::to_json() const {
  Json j;
  j["schema"] = kReportSchema;
  j["config_a"] = a.config.to_json();
  j["config_b"] = b.config.to_json();
  Json rows = Json::array();
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    const TrialRecord& ra = a.trials[i];
    const TrialRecord& rb = b.trials[i];
    Json row;
    row["trial"] = ra.trial;
    row["seed"] = ra.seed;
    row["nmi_a"] = optional_json(ra.nmi);
    row["nmi_b"] = optional_json(rb.nmi);
    row["objective_column_a"] = optional_json(ra.objective_column);
    row["objective_column_b"] = optional_json(rb.objective_column);
    row["degree_failure_a"] = ra.degree_failure;
    row["degree_failure_b"] = rb.degree_failure;
    rows.push_back(std::move(row));
  }
  Json results;
  results["pairs"] = std::move(rows);
  Json agg;
  agg["nmi_a"] = summary_json(a.aggregate(&TrialRecord::nmi));
  agg["nmi_b"] = summary_json(b.aggregate(&TrialRecord::nmi));
  agg["objective_column_a"] = summary_json(a.aggregate(&TrialRecord::objective_column));
  agg["objective_column_b"] = summary_json(b.aggregate(&TrialRecord::objective_column));
  agg["degree_failures_a"] = a.degree_failures();
  agg["degree_failures_b"] = b.degree_failures();
  results["aggregate"] = std::move(agg);
  j["results"] = results;
  j["determinism_hash"] = hex64(fnv1a(results.dump()));
  Json timings;
  timings["a"] = a.to_json()["timings"];
  timings["b"] = b.to_json()["timings"];
  j["timings"] = std::move(timings);
  return j;
}

std::string PairedReport::to_csv() const {
  std::ostringstream out;
  out << "trial,seed,nmi_a,nmi_b,objective_column_a,objective_column_b,degree_failure_a,"
         "degree_failure_b\n";
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    const TrialRecord& ra = a.trials[i];
    const TrialRecord& rb = b.trials[i];
    out << ra.trial << ',' << ra.seed << ',' << csv_cell(ra.nmi) << ',' << csv_cell(rb.nmi) << ','
        << csv_cell(ra.objective_column) << ',' << csv_cell(rb.objective_column) << ','
        << (ra.degree_failure ? 1 : 0) << ',' << (rb.degree_failure ? 1 : 0) << '\n';
  }
  return out.str();
}

PairedReport compare(const RunConfig& a, const RunConfig& b, const DataMatrix& data) {
  if (a.k != b.k || a.trials != b.trials || a.seed != b.seed) {
    throw InvalidArgument("compare: configs must share k, trials and seed");
  }
  return {run(a, data), run(b, data)};
}

PairedReport compare(const RunConfig& a, const RunConfig& b) {
  a.validate();
  b.validate();
  if (a.dataset != b.dataset || a.format != b.format || a.labeled != b.labeled) {
    throw InvalidArgument("compare: configs refer to different datasets");
  }
  return compare(a, b, load_dataset(a));
}

SweepGrid parse_grid(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidArgument("grid: expected key=v1,v2,...");
  }
  SweepGrid grid;
  grid.key = std::string(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view v = rest.substr(0, comma);
    if (v.empty()) throw InvalidArgument("grid: empty value");
    grid.values.emplace_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (grid.values.empty()) throw InvalidArgument("grid: no values");
  return grid;
}

Json sweep(const RunConfig& config, const SweepGrid& grid) {
  config.validate();
  const DataMatrix data = load_dataset(config);
  Json rows = Json::array();
  for (const std::string& value : grid.values) {
    RunConfig cell = config;
    set_field(cell, grid.key, value);
    const Report r = run(cell, data);
    const Json rj = r.to_json();
    Json row;
    row[grid.key] = value;
    row["aggregate"] = rj["results"]["aggregate"];
    rows.push_back(std::move(row));
  }
  Json j;
  j["schema"] = kReportSchema;
  j["config"] = config.to_json();
  j["grid_key"] = grid.key;
  j["rows"] = std::move(rows);
  return j;
}

Json verify(std::string_view name, std::uint64_t seed) {
  if (name == "theorem1") return verify_theorem1(seed);
  if (name == "pcp") return verify_pcp(seed);
  if (name == "kernel-trick") return verify_kernel_trick(seed);
  throw InvalidArgument("verify: unknown harness '" + std::string(name) +
                        "' (theorem1, pcp, kernel-trick)");
}

}  // namespace kkm
