#pragma once

#include <cmath>
#include <cstdint>

namespace ateband {

// Counter-based generator: every output is a pure function of
// (seed, stream, counter), so replicate b always sees the same draws no
// matter how many workers run or in which order replicates finish.
namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(detail::mix64(seed) ^ (stream * 0xda942042e4dd58b5ULL))) {}

  std::uint64_t next_u64() {
    return detail::mix64(key_ ^ detail::mix64(counter_++ * 0xd6e8feb86659fd93ULL));
  }

  // Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; platform-independent by construction.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Unit-mean Poisson draw by sequential inversion.
  int poisson_unit() {
    const double u = uniform();
    double p = std::exp(-1.0);
    double cum = p;
    int k = 0;
    while (u > cum && k < 64) {
      ++k;
      p /= static_cast<double>(k);
      cum += p;
    }
    return k;
  }

  // Index in {0, ..., n-1}, uniform.
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ateband
