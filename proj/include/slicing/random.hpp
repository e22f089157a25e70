#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace slicing {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates sequential stream ids.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of an independent child stream. Same (parent, stream) always gives the
// same child, regardless of which thread asks for it.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(parent) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t parent, std::uint64_t stream) {
  return Rng(derive_seed(parent, stream));
}

// Draw a fresh 64-bit seed from a generator (for handing a stream to a kernel).
inline std::uint64_t next_seed(Rng& rng) { return rng(); }

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
  return g;
}

}  // namespace slicing
