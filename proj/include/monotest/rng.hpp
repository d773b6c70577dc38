#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace monotest {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based generator. The 64-bit seed is the Philox key; the counter
/// holds (draw index, stream id), so every (seed, stream) pair is an
/// independent sequence that can be reproduced without replaying others.
///
/// Stream layout used by the library:
///   test seed        -> stream r      : bootstrap replication r
///   master seed      -> derive_seed(master, kRepetitionTag, i) : Monte Carlo repetition i
///   repetition seed  -> stream kDataStream : that repetition's simulated data
///   repetition seed  -> derive_seed(rep, kTestTag, 0) : seed handed to the test
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n) by multiply-shift.
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

inline constexpr std::uint64_t kRepetitionTag = 0x5245'5045'5449'5449ULL;
inline constexpr std::uint64_t kTestTag = 0x5445'5354'0000'0001ULL;
inline constexpr std::uint64_t kDataStream = 0xDA7A'0000'0000'0000ULL;

/// Child seed for (tag, index), one Philox block keyed by the parent seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag, std::uint64_t index);

}  // namespace monotest
