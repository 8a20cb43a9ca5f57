#pragma once

#include <cstdint>
#include <random>

namespace spforest {

using Engine = std::mt19937_64;

/// (master seed, stream) pair. Equal pairs give identical draws; distinct
/// streams are decorrelated through a splitmix64 mix of both words.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Independent sub-stream, e.g. one per tree or per replication.
  RngSeed child(std::uint64_t index) const;

  Engine engine() const;

  bool operator==(const RngSeed&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace spforest
