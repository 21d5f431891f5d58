#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace perslab {

// Philox4x32-10 counter-based generator.
// A pure function of (counter, key): any block can be computed directly,
// which is what lets Monte Carlo sample i own its own stream regardless of
// which worker runs it.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent random stream identified by (seed, job, index).
///
/// `job` separates logically different experiments under one seed (grid
/// points, the two halves of a two-sample test); `index` is the sample
/// number. Streams are cheap to construct and must not be shared between
/// workers.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t job, std::uint64_t index) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(job + 0x632be59bd9b4e019ull));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(index),
            static_cast<std::uint32_t>(index >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  /// Uniform on (0, 1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard exponential.
  double exponential() { return -std::log(uniform()); }

  /// Standard normal (Box-Muller, one variate per call).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * 3.14159265358979323846 * uniform());
  }

 private:
  void refill() {
    const auto out = Philox4x32::generate(ctr_, key_);
    buf_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buf_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  Philox4x32::Counter ctr_{};
  Philox4x32::Key key_{};
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

}  // namespace perslab
