#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "crisislens/diffcore/tensor.hpp"

namespace crisislens {

// Seeded generator with portable derived distributions. std::mt19937_64 is
// fully specified by the standard; the <random> distribution classes are not,
// so uniform/normal/index are computed here from raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::size_t index(std::size_t n);  // [0, n)
  bool bernoulli(double p) { return uniform() < p; }
  int sign() { return (next() >> 63) ? 1 : -1; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Mixes a base seed with a stream tag so subsystems draw independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

diff::Tensor xavier_uniform(Rng& rng, diff::Shape shape, std::size_t fan_in, std::size_t fan_out);

}  // namespace crisislens
