#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace qct {

/// splitmix64 step; used to derive independent stream seeds from a base seed.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic seed for a sub-stream, e.g. (run seed, setting index) or
/// (run seed, replica index, setting index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Seedable random stream. All distributions are implemented on top of the
/// raw mt19937_64 output so that results are bit-identical across platforms
/// (the std::*_distribution classes are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos();

  /// Standard normal via Box-Muller.
  double gaussian();

  /// Complex with independent standard normal real and imaginary parts.
  std::complex<double> complex_gaussian();

  /// Uniform integer in [0, bound); rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound);

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace qct
