#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "distplan/linalg.hpp"

namespace distplan {

using Rng = std::mt19937_64;

// Mixes a master seed with a path of stream indices (iteration, sample, ...)
// into an independent 64-bit seed. Same inputs always give the same seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

Vector standard_normal(Eigen::Index n, Rng& rng);

// Stream tags so derived seeds for different purposes never collide.
namespace stream {
inline constexpr std::uint64_t kCemSample = 0x43454d53;  // "CEMS"
inline constexpr std::uint64_t kCemFit = 0x43454d46;     // "CEMF"
inline constexpr std::uint64_t kMpcPlan = 0x4d504350;    // "MPCP"
inline constexpr std::uint64_t kMpcNoise = 0x4d50434e;   // "MPCN"
inline constexpr std::uint64_t kQuadrature = 0x51554144;  // "QUAD"
}  // namespace stream

}  // namespace distplan
