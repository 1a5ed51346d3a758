#pragma once

#include "kkm/matrix_core.hpp"

#include <cstdint>
#include <random>

namespace kkm {

using Rng = std::mt19937_64;

/// Independent child seed for `stream` derived from `seed` (splitmix64 mix of
/// seed + golden-ratio offset * (stream + 1)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Stream ids reserved per consumer so that no two consumers share randomness.
namespace streams {
inline constexpr std::uint64_t kUniform = 0x11;
inline constexpr std::uint64_t kLeverage = 0x12;
inline constexpr std::uint64_t kGaussian = 0x13;
inline constexpr std::uint64_t kSrht = 0x14;
inline constexpr std::uint64_t kCountSketch = 0x15;
inline constexpr std::uint64_t kPower = 0x21;
inline constexpr std::uint64_t kRff = 0x22;
inline constexpr std::uint64_t kKmeans = 0x31;
inline constexpr std::uint64_t kSketch = 0x41;
inline constexpr std::uint64_t kPcp = 0x51;
inline constexpr std::uint64_t kSynthetic = 0x61;
inline constexpr std::uint64_t kTrial = 0x71;
}  // namespace streams

/// n x m matrix of i.i.d. N(0, 1) draws, filled column by column.
Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// Haar-distributed n x n orthogonal matrix.
Matrix random_orthogonal(Index n, Rng& rng);

}  // namespace kkm
