#include "kkm/ingest.hpp"

#include "kkm/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

namespace kkm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    throw ParseError(where(line) + "bad number '" + std::string(token) + "'", line);
  }
  return value;
}

int parse_label(std::string_view token, std::size_t line) {
  const double v = parse_double(token, line);
  if (v != std::floor(v) || std::abs(v) > 2e9) {
    throw ParseError(where(line) + "label '" + std::string(trim(token)) + "' is not an integer",
                     line);
  }
  return static_cast<int>(v);
}

DataMatrix assemble(const std::vector<std::vector<double>>& rows, Index d,
                    std::vector<int> labels, bool labeled) {
  Matrix points = Matrix::Zero(static_cast<Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      points(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  if (!labeled) return DataMatrix(std::move(points));
  return DataMatrix(std::move(points), std::move(labels));
}

}  // namespace

std::string_view to_string(DataFormat format) {
  return format == DataFormat::Csv ? "csv" : "libsvm";
}

DataFormat parse_data_format(std::string_view name) {
  if (name == "csv") return DataFormat::Csv;
  if (name == "libsvm") return DataFormat::Libsvm;
  throw InvalidArgument("unknown data format '" + std::string(name) + "'");
}

DataMatrix read_csv(std::istream& in, bool labeled) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string text;
  std::size_t line = 0;
  std::size_t width = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = trim(text);
    if (line == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      fields.push_back(view.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = fields.size();
      if (labeled && width < 2) {
        throw ParseError(where(line) + "labeled CSV needs at least one feature column", line);
      }
    } else if (fields.size() != width) {
      throw ParseError(where(line) + "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line);
    }
    const std::size_t nfeat = labeled ? width - 1 : width;
    std::vector<double> row(nfeat);
    for (std::size_t j = 0; j < nfeat; ++j) row[j] = parse_double(fields[j], line);
    if (labeled) labels.push_back(parse_label(fields.back(), line));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty input: no data rows", 0);
  return assemble(rows, static_cast<Index>(labeled ? width - 1 : width), std::move(labels),
                  labeled);
}

DataMatrix read_libsvm(std::istream& in) {
  std::vector<std::vector<std::pair<Index, double>>> sparse;
  std::vector<int> labels;
  std::string text;
  std::size_t line = 0;
  Index d = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto hash = text.find('#');
    std::string_view view = trim(std::string_view(text).substr(0, hash));
    if (view.empty()) continue;
    std::istringstream tokens{std::string(view)};
    std::string token;
    tokens >> token;
    labels.push_back(parse_label(token, line));
    std::vector<std::pair<Index, double>> entries;
    Index prev = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError(where(line) + "expected idx:val, got '" + token + "'", line);
      }
      const std::string_view idx_text = std::string_view(token).substr(0, colon);
      long long idx = 0;
      const auto [ptr, ec] =
          std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || idx < 1) {
        throw ParseError(where(line) + "bad feature index '" + std::string(idx_text) + "'", line);
      }
      if (idx <= prev) {
        throw ParseError(where(line) + "feature indices must be increasing", line);
      }
      prev = static_cast<Index>(idx);
      entries.emplace_back(prev - 1, parse_double(std::string_view(token).substr(colon + 1), line));
      d = std::max(d, prev);
    }
    sparse.push_back(std::move(entries));
  }
  if (sparse.empty()) throw ParseError("empty input: no data rows", 0);
  if (d == 0) throw ParseError("input has no feature entries", 0);
  Matrix points = Matrix::Zero(static_cast<Index>(sparse.size()), d);
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    for (const auto& [j, v] : sparse[i]) points(static_cast<Index>(i), j) = v;
  }
  return DataMatrix(std::move(points), std::move(labels));
}

DataMatrix ingest(const std::string& path, DataFormat format, bool labeled) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return format == DataFormat::Csv ? read_csv(in, labeled) : read_libsvm(in);
}

DataMatrix two_rings(Index per_ring, double inner_radius, double outer_radius, double noise,
                     std::uint64_t seed) {
  if (per_ring < 1) throw InvalidArgument("two_rings: per_ring must be >= 1");
  if (noise < 0.0) throw InvalidArgument("two_rings: noise must be nonnegative");
  Rng rng(derive_seed(seed, streams::kSynthetic));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 1.0);
  Matrix points(2 * per_ring, 2);
  std::vector<int> labels(static_cast<std::size_t>(2 * per_ring));
  for (Index i = 0; i < 2 * per_ring; ++i) {
    const bool outer = i >= per_ring;
    const double r = outer ? outer_radius : inner_radius;
    const double a = angle(rng);
    points(i, 0) = r * std::cos(a) + noise * jitter(rng);
    points(i, 1) = r * std::sin(a) + noise * jitter(rng);
    labels[static_cast<std::size_t>(i)] = outer ? 1 : 0;
  }
  return DataMatrix(std::move(points), std::move(labels));
}

}  // namespace kkm
