#ifndef RWMLAB_RNG_HPP
#define RWMLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace rwmlab {

/// Deterministic random stream. Every chain, pilot, and resample owns one,
/// seeded independently, so that runs replay bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// U[0, 1)
  double uniform() { return unif_(gen_); }

  /// Standard normal.
  double normal() { return normal_(gen_); }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Mixes a base seed with a stream id (splitmix64 finalizer) so derived
/// streams are decorrelated.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace rwmlab

#endif  // RWMLAB_RNG_HPP
