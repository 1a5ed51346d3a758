#include "kkm/config.hpp"

#include "kkm/approx.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kkm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("config: " + std::string(key) + " expects an integer, got '" +
                          std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("config: " + std::string(key) + " expects a number, got '" +
                          std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidArgument("config: " + std::string(key) + " expects true/false");
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned() || v.is_number_float()) return v.dump();
  throw InvalidArgument("config: values must be scalars");
}

}  // namespace

std::string_view to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::KkmeansNystrom: return "kkmeans-nystrom";
    case Pipeline::KkmeansPower: return "kkmeans-power";
    case Pipeline::KkmeansKpca: return "kkmeans-kpca";
    case Pipeline::KkmeansRff: return "kkmeans-rff";
    case Pipeline::SpectralNystrom: return "spectral-nystrom";
    case Pipeline::SpectralExact: return "spectral-exact";
  }
  return "?";
}

Pipeline parse_pipeline(std::string_view name) {
  for (Pipeline p : {Pipeline::KkmeansNystrom, Pipeline::KkmeansPower, Pipeline::KkmeansKpca,
                     Pipeline::KkmeansRff, Pipeline::SpectralNystrom, Pipeline::SpectralExact}) {
    if (to_string(p) == name) return p;
  }
  throw InvalidArgument("unknown pipeline '" + std::string(name) + "'");
}

bool is_spectral(Pipeline pipeline) {
  return pipeline == Pipeline::SpectralNystrom || pipeline == Pipeline::SpectralExact;
}

Index RunConfig::ell_or_default() const { return ell ? *ell : default_ell(c); }

void RunConfig::validate() const {
  if (dataset.empty()) throw InvalidArgument("config: dataset is required");
  if (k < 1) throw InvalidArgument("config: k must be >= 1");
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  if (max_iter < 1) throw InvalidArgument("config: max_iter must be >= 1");
  if (restarts < 1) throw InvalidArgument("config: restarts must be >= 1");
  if (t < 1) throw InvalidArgument("config: t must be >= 1");
  if (!(beta > 0.0)) throw InvalidArgument("config: beta must be positive");
  if (sigma && !(*sigma > 0.0)) throw InvalidArgument("config: sigma must be positive");
  if (sketch == SketchKind::Selection) {
    throw InvalidArgument("config: sketch=selection is not available from a config");
  }
}

void RunConfig::validate_for(Index n) const {
  validate();
  const auto fail = [&](const std::string& what) {
    throw InvalidArgument("config: " + std::string(to_string(pipeline)) + " requires " + what +
                          " (k=" + std::to_string(k) + ", s=" + std::to_string(s) +
                          ", ell=" + std::to_string(ell_or_default()) +
                          ", c=" + std::to_string(c) + ", n=" + std::to_string(n) + ")");
  };
  const Index kk = k;
  switch (pipeline) {
    case Pipeline::KkmeansNystrom: {
      const Index l = ell_or_default();
      if (!(kk <= s && s < l && l <= c && c <= n)) fail("k <= s < ell <= c <= n");
      break;
    }
    case Pipeline::KkmeansPower:
      if (!(kk <= s && s <= c && c <= n)) fail("k <= s <= c <= n");
      break;
    case Pipeline::KkmeansKpca:
      if (!(kk <= s && s <= n)) fail("k <= s <= n");
      break;
    case Pipeline::KkmeansRff:
      if (!(kk <= s && s <= c)) fail("k <= s <= c");
      if (kk > n) fail("k <= n");
      break;
    case Pipeline::SpectralNystrom:
      if (!(kk <= c && c <= n)) fail("k <= c <= n");
      break;
    case Pipeline::SpectralExact:
      if (kk > n) fail("k <= n");
      break;
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["dataset"] = dataset;
  j["format"] = std::string(to_string(format));
  j["labeled"] = labeled;
  j["kernel"] = "rbf";
  j["beta"] = beta;
  j["sigma"] = sigma ? nlohmann::ordered_json(*sigma) : nlohmann::ordered_json(nullptr);
  j["pipeline"] = std::string(to_string(pipeline));
  j["k"] = k;
  j["s"] = s;
  j["c"] = c;
  j["ell"] = ell_or_default();
  j["t"] = t;
  j["sketch"] = std::string(to_string(sketch));
  j["seed"] = seed;
  j["trials"] = trials;
  j["max_iter"] = max_iter;
  j["objective"] = std::string(to_string(objective));
  j["output"] = output;
  j["restarts"] = restarts;
  j["materialization_cap"] = materialization_cap;
  return j;
}

void set_field(RunConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "command") config.command = value;
  else if (key == "dataset") config.dataset = value;
  else if (key == "format") config.format = parse_data_format(value);
  else if (key == "labeled") config.labeled = parse_bool(key, value);
  else if (key == "kernel") {
    if (value != "rbf") throw InvalidArgument("config: only the rbf kernel is available");
  } else if (key == "beta") config.beta = parse_real(key, value);
  else if (key == "sigma") {
    if (value.empty() || value == "null") config.sigma.reset();
    else config.sigma = parse_real(key, value);
  } else if (key == "pipeline") config.pipeline = parse_pipeline(value);
  else if (key == "k") config.k = parse_integer<int>(key, value);
  else if (key == "s") config.s = parse_integer<Index>(key, value);
  else if (key == "c") config.c = parse_integer<Index>(key, value);
  else if (key == "ell") {
    if (value.empty() || value == "null") config.ell.reset();
    else config.ell = parse_integer<Index>(key, value);
  } else if (key == "t") config.t = parse_integer<Index>(key, value);
  else if (key == "sketch") config.sketch = parse_sketch_kind(value);
  else if (key == "seed") config.seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "trials") config.trials = parse_integer<Index>(key, value);
  else if (key == "max_iter") config.max_iter = parse_integer<int>(key, value);
  else if (key == "objective") config.objective = parse_objective_mode(value);
  else if (key == "output") config.output = value;
  else if (key == "restarts") config.restarts = parse_integer<int>(key, value);
  else if (key == "threads") config.threads = parse_integer<unsigned>(key, value);
  else if (key == "materialization_cap") {
    config.materialization_cap = parse_integer<Index>(key, value);
  } else {
    throw InvalidArgument("config: unknown key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  const std::string_view body = trim(text);
  if (body.starts_with("{")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (value.is_null()) set_field(config, key, "null");
      else set_field(config, key, scalar_text(value));
    }
  } else {
    std::istringstream in{std::string(body)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      std::string_view view = line;
      view = trim(view.substr(0, view.find('#')));
      if (view.empty()) continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) {
        throw InvalidArgument("config: line " + std::to_string(number) + ": expected key=value");
      }
      set_field(config, view.substr(0, eq), view.substr(eq + 1));
    }
  }
  if (const char* env = std::getenv("KKM_SEED"); env && *env) {
    config.seed = parse_integer<std::uint64_t>("KKM_SEED", trim(env));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace kkm
