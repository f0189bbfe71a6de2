#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace angleqa {

/// Folds a list of integers into one 64-bit seed (splitmix64 chaining).
/// Used to derive per-item seeds so item N never depends on items 0..N-1.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// FNV-1a; stable across runs and platforms (unlike std::hash).
std::uint64_t hash_string(std::string_view s) noexcept;

/// Portable seeded generator. std::mt19937_64's output sequence is fixed by
/// the standard, but the std distributions are not, so bounded draws and
/// shuffles are implemented here to keep outputs identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform01();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace angleqa
