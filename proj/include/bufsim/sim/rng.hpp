#pragma once

#include <cstdint>
#include <random>

namespace bufsim::sim {

std::uint64_t splitmix64(std::uint64_t x);

/// Seedable random stream. The engine is std::mt19937_64, whose output is
/// fixed by the standard; the distributions below are written out by hand
/// because the std:: distributions are implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }
  double exponential(double mean);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace bufsim::sim
