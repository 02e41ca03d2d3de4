#include "eelstm/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "eelstm/errors.hpp"

namespace eelstm::kernels {
namespace {

const detail::KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &detail::scalar_table();
    case Backend::Avx2:
#if defined(EELSTM_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2")) return &detail::avx2_table();
#endif
      return nullptr;
    case Backend::Neon:
#if defined(EELSTM_HAVE_NEON)
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const detail::KernelTable* default_table() {
  if (const char* env = std::getenv("EELSTM_KERNELS")) {
    const std::string name(env);
    if (name == "scalar") return table_for(Backend::Scalar);
    if (name == "avx2" && table_for(Backend::Avx2)) return table_for(Backend::Avx2);
    if (name == "neon" && table_for(Backend::Neon)) return table_for(Backend::Neon);
  }
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (const auto* t = table_for(b)) return t;
  }
  return table_for(Backend::Scalar);
}

std::atomic<const detail::KernelTable*>& active_slot() {
  static std::atomic<const detail::KernelTable*> slot{default_table()};
  return slot;
}

inline const detail::KernelTable& table() {
  return *active_slot().load(std::memory_order_relaxed);
}

void require_same(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ShapeError("kernel operand length mismatch: " + std::to_string(a) + " vs " +
                     std::to_string(b));
  }
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) { return table_for(b) != nullptr; }

Backend active_backend() { return table().backend; }

void set_backend(Backend b) {
  const auto* t = table_for(b);
  if (t == nullptr) {
    throw ConfigError("kernel backend '" + std::string(backend_name(b)) +
                      "' is not available on this host");
  }
  active_slot().store(t, std::memory_order_relaxed);
}

ScopedBackend::ScopedBackend(Backend b) : previous_(active_backend()) { set_backend(b); }
ScopedBackend::~ScopedBackend() { set_backend(previous_); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size());
  table().axpy(a, x.data(), y.data(), x.size());
}

void add(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  require_same(x.size(), y.size());
  require_same(x.size(), out.size());
  table().add(x.data(), y.data(), out.data(), x.size());
}

void sub(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  require_same(x.size(), y.size());
  require_same(x.size(), out.size());
  table().sub(x.data(), y.data(), out.data(), x.size());
}

void mul(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  require_same(x.size(), y.size());
  require_same(x.size(), out.size());
  table().mul(x.data(), y.data(), out.data(), x.size());
}

void scale(double a, std::span<const double> x, std::span<double> out) {
  require_same(x.size(), out.size());
  table().scale(a, x.data(), out.data(), x.size());
}

void accumulate(std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size());
  table().add(y.data(), x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return table().sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size());
  return table().dot(x.data(), y.data(), x.size());
}

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
          std::span<const double> b, std::span<double> c, bool accumulate) {
  require_same(a.size(), m * k);
  require_same(b.size(), k * n);
  require_same(c.size(), m * n);
  table().gemm(m, n, k, a.data(), b.data(), c.data(), accumulate);
}

}  // namespace eelstm::kernels
