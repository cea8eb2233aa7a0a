#pragma once

#include <cstdint>
#include <random>

namespace congame {

/// splitmix64 step; used to derive independent per-run seeds from a base
/// seed without correlated low bits.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the `index`-th run of an experiment keyed by `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Deterministic random stream. Gaussian variates use an explicit
/// Box-Muller transform instead of std::normal_distribution, whose output
/// sequence is implementation-defined; this keeps trajectories
/// bit-reproducible across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// uniform on [0,1) with 53 random bits
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace congame
