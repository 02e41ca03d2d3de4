#pragma once

// Data-parallel inner loops behind tensor arithmetic and autodiff.
//
// Every kernel has a scalar reference and optional AVX2 / NEON variants,
// picked at runtime. The variants are bit-identical to the reference:
// elementwise kernels do the same IEEE operations per element, products are
// never fused, and reductions use the same fixed 4-lane striped order
// ((l0 + l1) + (l2 + l3), then the tail) on every backend.

#include <cstddef>
#include <span>
#include <string_view>

namespace eelstm::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend b);

bool backend_supported(Backend b);

/// Currently selected backend. Defaults to the best supported one unless the
/// EELSTM_KERNELS environment variable names another (scalar|avx2|neon).
Backend active_backend();

/// Override the backend; throws ConfigError when unsupported on this host.
void set_backend(Backend b);

/// RAII backend override, restored on scope exit.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// out = x + y, out = x - y, out = x * y (elementwise); out may alias x or y.
void add(std::span<const double> x, std::span<const double> y, std::span<double> out);
void sub(std::span<const double> x, std::span<const double> y, std::span<double> out);
void mul(std::span<const double> x, std::span<const double> y, std::span<double> out);
// out = a * x
void scale(double a, std::span<const double> x, std::span<double> out);
// y += x
void accumulate(std::span<const double> x, std::span<double> y);

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

/// C (m x n) = A (m x k) * B (k x n), all row-major and contiguous.
/// With accumulate, C += A * B. Each C entry sums over k in increasing order.
void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
          std::span<const double> b, std::span<double> c, bool accumulate);

namespace detail {

struct KernelTable {
  Backend backend;
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*gemm)(std::size_t, std::size_t, std::size_t, const double*, const double*,
               double*, bool);
};

const KernelTable& scalar_table();
#if defined(EELSTM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(EELSTM_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace detail

}  // namespace eelstm::kernels
