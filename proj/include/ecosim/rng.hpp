#pragma once

#include <array>
#include <cstdint>

namespace ecosim {

/// Purpose tags that keep random streams for different phases disjoint.
enum class Stream : std::uint32_t {
  Terrain = 1,
  Resources = 2,
  Placement = 3,
  PolicyInit = 4,
  Action = 5,
  Mutation = 6,
  Fuzz = 7,
};

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based generator keyed by (seed, step, stream, index). Two
/// generators built from the same key produce the same sequence no matter
/// which thread or in what order they are used.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t step, Stream stream, std::uint32_t index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (polar method).
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ecosim
