#ifndef LSIC_RNG_HPP_
#define LSIC_RNG_HPP_

#include "lsic/common.hpp"

#include <random>
#include <string>
#include <vector>

namespace lsic {

// Deterministic random source. All draws are hand-rolled on top of the raw
// mt19937_64 stream so that identical seeds give identical sequences on any
// standard library (std::uniform_*_distribution output is
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), gen_(seed) {}

  static const char* algorithm() { return "mt19937_64"; }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  real uniform() {
    return real(gen_() >> 11) * real(1.0 / 9007199254740992.0);
  }

  // Uniform in [low, high).
  real uniform(real low, real high) { return low + (high - low) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling, bias-free.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_index: n == 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  int uniform_int(int n) { return static_cast<int>(uniform_index(static_cast<std::uint64_t>(n))); }

  // Standard normal via Box-Muller.
  real gaussian() {
    real u1 = uniform();
    while (u1 <= real(1e-300)) u1 = uniform();
    const real u2 = uniform();
    return std::sqrt(real(-2) * std::log(u1)) *
           std::cos(real(2) * real(M_PI) * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Sample k distinct indices from [0, n), ascending.
  std::vector<int> sample_without_replacement(int n, int k);

  std::string state() const;
  void restore(const std::string& s);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace lsic

#endif  // LSIC_RNG_HPP_
