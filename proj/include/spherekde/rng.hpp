#pragma once

#include <cstdint>
#include <random>

namespace spherekde {

/// Seeded uniform generator. The mapping from raw 64-bit output to doubles is
/// spelled out here instead of going through std::uniform_real_distribution,
/// whose exact output sequence is implementation-defined; reports promise
/// bit-identical replay for a given seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1), 53 bits of precision.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace spherekde
