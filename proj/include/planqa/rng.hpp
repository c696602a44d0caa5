#pragma once

#include <cstdint>
#include <string_view>

namespace planqa {

/// SplitMix64 (Steele, Lea, Vigna). One 64-bit word of state, portable
/// and bit-identical on every platform, which is what makes reports
/// reproducible across machines and thread schedules. Substreams are
/// derived by hashing a master seed with salt words, never by sharing
/// generator state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n). Modulo bias is negligible for the tiny
  /// pool sizes used here (n <= 20).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// FNV-1a, used to fold strings (task ids, policy names) into seeds.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  return g.next_u64();
}

/// Cell seed for (master, task, policy). Derivation is pure arithmetic on
/// the inputs, so any worker computing a trial gets the same stream no
/// matter the schedule.
inline std::uint64_t cell_seed(std::uint64_t master, std::string_view task,
                               std::string_view policy) {
  return mix_seed(mix_seed(master, fnv1a64(task)), fnv1a64(policy));
}

inline std::uint64_t trial_seed(std::uint64_t cell, std::uint64_t trial) {
  return mix_seed(cell, trial);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view task,
                                    std::string_view policy, std::uint64_t trial) {
  return trial_seed(cell_seed(master, task, policy), trial);
}

}  // namespace planqa
