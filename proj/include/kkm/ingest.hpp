#pragma once

#include "kkm/kernel.hpp"

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kkm {

enum class DataFormat { Csv, Libsvm };

std::string_view to_string(DataFormat format);
DataFormat parse_data_format(std::string_view name);

/// Malformed input; line() is 1-based, 0 when the problem is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// CSV: one point per row, ',' separated; with `labeled` the last field is an
/// integer label. Blank lines are skipped.
DataMatrix read_csv(std::istream& in, bool labeled);

/// LIBSVM: `label idx:val ...` with 1-based indices; d is the largest index
/// seen anywhere in the input, missing entries are zero.
DataMatrix read_libsvm(std::istream& in);

/// Opens `path` and dispatches on `format`. `labeled` only affects CSV.
DataMatrix ingest(const std::string& path, DataFormat format, bool labeled = false);

/// Two noisy concentric circles, `per_ring` points each, labels 0 (inner) and 1.
/// Angles are uniform; each coordinate gets N(0, noise^2) jitter.
DataMatrix two_rings(Index per_ring, double inner_radius, double outer_radius, double noise,
                     std::uint64_t seed);

}  // namespace kkm
