#include "eelstm/rng.hpp"

#include <cmath>

#include "eelstm/errors.hpp"

namespace eelstm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03ULL));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

Tensor Rng::uniform_tensor(const Shape& shape, double lo, double hi) {
  Tensor t(shape);
  for (auto& x : t.data()) x = uniform(lo, hi);
  return t;
}

Tensor random_orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols > rows) throw ShapeError("random_orthonormal_columns: cols exceeds rows");
  std::vector<std::vector<double>> q;
  while (q.size() < cols) {
    std::vector<double> v(rows);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : q) {
        double d = 0.0;
        for (std::size_t i = 0; i < rows; ++i) d += b[i] * v[i];
        for (std::size_t i = 0; i < rows; ++i) v[i] -= d * b[i];
      }
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (auto& x : v) x /= n;
    q.push_back(std::move(v));
  }
  Tensor out(Shape{rows, cols});
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) out(i, j) = q[j][i];
  }
  return out;
}

}  // namespace eelstm
