#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace inkpark {

/// SplitMix64 finalizer. Used for every seed derivation in the pipeline so
/// that sub-seeds depend only on (parent seed, key), never on call order.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a sequence of integer keys.
/// derive_seed(s, {a, b}) == derive_seed(derive_seed(s, {a}), {b}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

/// FNV-1a over the bytes of a string; stable key for string identifiers.
std::uint64_t hash_key(std::string_view s);

// Random stream with platform-independent draws. std::mt19937_64 output is
// fixed by the standard; the std distributions are not, so the mapping to
// reals lives here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, both draws consumed every call).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// exp(uniform(log lo, log hi))
  double log_uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace inkpark
