#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

// Seeded randomness. Every consumer gets its own engine derived from
// (seed, purpose, index) through the SplitMix64 finalizer, so e.g. the
// environment draws of round t under seed s are the same for every
// algorithm evaluated on that seed.
namespace clubcascade::rng {

using Engine = std::mt19937_64;

enum class Purpose : std::uint64_t {
  clusters = 1,
  items = 2,
  round = 3,
  graph = 4,
  replay_users = 5,
  replay_items = 6,
  split = 7,
  matrix = 8,
  trial = 9,
};

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, Purpose purpose,
                               std::uint64_t index = 0) noexcept {
  return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(purpose)) ^ index);
}

inline Engine stream(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0) {
  return Engine(derive(seed, purpose, index));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Engine& gen, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
}

inline double normal(Engine& gen) { return std::normal_distribution<double>(0.0, 1.0)(gen); }

inline bool bernoulli(Engine& gen, double p) { return uniform01(gen) < p; }

}  // namespace clubcascade::rng
