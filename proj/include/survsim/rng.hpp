#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. A stream's identity is a 64-bit value mixed
// from (master_seed, scenario_id, replicate) with the splitmix64 finalizer;
// each draw hashes the next point of a Weyl sequence, so streams never share
// mutable state and results are independent of thread count and call
// interleaving across replicates.

namespace survsim {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

}  // namespace detail

class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t stream_id) : base_(stream_id), state_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1): 53 random mantissa bits.
  double u01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; log() of the result is always finite.
  double u01_pos() { return 1.0 - u01(); }

  // Unit exponential by inverse transform.
  double exponential() { return -std::log(u01_pos()); }

  // Standard normal, Marsaglia polar method with one cached mate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * u01() - 1.0;
      v = 2.0 * u01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Uniform integer in [0, bound), bound >= 1. Rejection keeps it unbiased.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % bound;
  }

  // Child stream keyed on the parent's identity, not its position: forking
  // with the same tag always yields the same stream no matter how many draws
  // the parent has made.
  RandomStream fork(std::uint64_t tag) const {
    return RandomStream(detail::hash_combine(base_, tag));
  }

  std::uint64_t id() const { return base_; }

 private:
  std::uint64_t base_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t scenario_id,
                                  std::uint64_t replicate) {
  std::uint64_t h = detail::mix64(master_seed);
  h = detail::hash_combine(h, scenario_id);
  h = detail::hash_combine(h, replicate);
  return RandomStream(h);
}

}  // namespace survsim
