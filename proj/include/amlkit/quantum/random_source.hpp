#pragma once

#include "amlkit/types.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace amlkit {

/// Pluggable randomness source. The seeded kind wraps a fixed-algorithm PRNG
/// (std::mt19937_64, bit-exact across platforms); the entropy-file kind
/// consumes externally captured random bytes exactly once, MSB first, and
/// throws EntropyExhausted when the pool runs dry.
class RandomSource {
 public:
  enum class Kind { SeededDeterministic, EntropyFile };

  static RandomSource seeded(std::uint64_t seed) {
    RandomSource r;
    r.kind_ = Kind::SeededDeterministic;
    r.prng_.seed(seed);
    return r;
  }

  static RandomSource from_entropy_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open entropy file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return from_entropy_bytes(std::move(bytes));
  }

  static RandomSource from_entropy_bytes(std::vector<std::uint8_t> bytes) {
    RandomSource r;
    r.kind_ = Kind::EntropyFile;
    r.pool_ = std::move(bytes);
    return r;
  }

  Kind kind() const { return kind_; }

  /// n (<= 64) fresh random bits, right-aligned.
  std::uint64_t bits(int n) {
    if (kind_ == Kind::SeededDeterministic) {
      return n == 64 ? prng_() : (prng_() >> (64 - n));
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const std::size_t byte = bit_cursor_ >> 3;
      if (byte >= pool_.size()) throw EntropyExhausted("entropy file exhausted");
      const int bit = 7 - static_cast<int>(bit_cursor_ & 7);
      v = (v << 1) | ((pool_[byte] >> bit) & 1u);
      ++bit_cursor_;
    }
    return v;
  }

  /// Uniform draw in [0,1): 53 fresh bits mapped to k/2^53.
  double uniform() {
    return static_cast<double>(bits(53)) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index in [0,n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Standard normal via Box-Muller on the uniform stream (two draws each).
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[uniform_index(i)]);
    }
  }

 private:
  RandomSource() = default;

  Kind kind_ = Kind::SeededDeterministic;
  std::mt19937_64 prng_;
  std::vector<std::uint8_t> pool_;
  std::size_t bit_cursor_ = 0;
};

/// Stable 64-bit FNV-1a, used to derive per-stage seeds and config hashes.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Deterministic per-stage sub-seed: mixes the run seed with a stage tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t z = seed ^ fnv1a64(tag);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace amlkit
