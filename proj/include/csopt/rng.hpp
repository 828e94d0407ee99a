#ifndef CSOPT_RNG_HPP
#define CSOPT_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace csopt {

// Counter-style PRNG used everywhere so that traces are reproducible
// bit-for-bit across runs and platforms. std::mt19937 plus the standard
// distributions would leave the stream implementation-defined.
class splitmix64 {
 public:
  explicit splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in {0, 1, ..., n-1}
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // standard normal via Box-Muller (cosine branch only)
  double next_gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

// Stateless seed mixer: one canonical way to derive substream seeds from
// (run seed, index) pairs, e.g. the per-iteration sample tags.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  splitmix64 g(seed ^ (0x517cc1b727220a95ULL * (index + 1)));
  g.next();
  return g.next();
}

// Draws k distinct indices from {0,...,n-1} (Floyd's algorithm), returned
// sorted so downstream arithmetic has a deterministic summation order.
inline std::vector<std::size_t> sample_distinct(splitmix64& rng,
                                                std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample_distinct: k > n");
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = static_cast<std::size_t>(rng.next_below(j + 1));
    bool seen = false;
    for (std::size_t v : out) {
      if (v == t) {
        seen = true;
        break;
      }
    }
    out.push_back(seen ? j : t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace csopt

#endif  // CSOPT_RNG_HPP
