#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace egocf::numkit {

// Seeded pseudo-random source. The engine (mt19937_64) has a standardized
// output sequence and all conversions below are done by hand, so streams are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent seed from a master seed and a stream path, e.g.
  // derive_seed(seed, {epoch, sample_index}).
  static std::uint64_t derive_seed(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be > 0.
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace egocf::numkit
