#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "eelstm/tensor.hpp"

namespace eelstm {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of master seed `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Portable deterministic generator. Distributions are implemented here rather
/// than through <random> so the streams agree across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  Tensor uniform_tensor(const Shape& shape, double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

/// rows x cols (rows >= cols) matrix with orthonormal columns, drawn from
/// uniform noise and orthonormalized by modified Gram-Schmidt.
Tensor random_orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace eelstm
