#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "cfisac/types.hpp"

namespace cfisac {

/// Deterministic per-purpose random substreams.
///
/// Every random draw in the simulator comes from an engine keyed by
/// (master seed, purpose tag, entity indices). Adding a UE or an AP therefore
/// never perturbs the draws of any other entity.
class Substream {
 public:
  Substream(std::uint64_t seed, std::string_view tag, std::uint64_t i = 0,
            std::uint64_t j = 0);

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  cx complex_normal(double variance = 1.0);  // CN(0, variance)

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t derive_key(std::uint64_t seed, std::string_view tag,
                                  std::uint64_t i, std::uint64_t j);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace cfisac
