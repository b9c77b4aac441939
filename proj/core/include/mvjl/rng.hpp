#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mvjl {

/// Seeded 64-bit Mersenne Twister with the scalar variates every sampler in
/// the library is built on. Single owner: not safe to share across threads.
///
/// Parallel streams are derived by seed splitting: chain (or replication) c of
/// a run seeded with s uses Rng(s + c), see split().
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  Rng split(std::uint64_t index) const { return Rng(seed_ + index); }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Gamma(shape, rate = 1) by Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mvjl
