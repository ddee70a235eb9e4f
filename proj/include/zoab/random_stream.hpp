#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace zoab {

/// A single, sequentially consumed source of randomness owned by one run.
///
/// Wraps a 64-bit Mersenne Twister and exposes the handful of variates the
/// outcome models and estimators need. Two streams built from the same seed
/// produce bit-identical sequences.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_positive();
  double normal();
  double student_t(double dof);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of stream `stream_id` under `master_seed`:
///   mix64(mix64(master_seed) ^ (stream_id * 0x9E3779B97F4A7C15)).
/// Depends only on the pair, never on scheduling.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id);

}  // namespace zoab
