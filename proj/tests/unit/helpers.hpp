#pragma once

#include <cmath>

#include "eelstm/rng.hpp"
#include "eelstm/tensor.hpp"

namespace eelstm::test {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return rng.uniform_tensor(shape, lo, hi);
}

inline double rel_diff(const Tensor& a, const Tensor& b) {
  const double n = std::max(frobenius_norm(a), frobenius_norm(b));
  return n == 0.0 ? 0.0 : frobenius_norm(a - b) / n;
}

}  // namespace eelstm::test
