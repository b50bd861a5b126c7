#pragma once

#include <cstdint>
#include <random>

namespace qavg {

/// SplitMix64 finalizer over (seed, index). Child streams for chunked or
/// parallel generation are derived through this so results do not depend on
/// worker count or scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Deterministic random stream over mt19937_64. Normal deviates use an
/// explicit Box-Muller transform; std::normal_distribution is
/// implementation-defined and would not honor the bit-for-bit seed contract.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  double normal();
  double uniform01();  // in [0, 1)

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qavg
