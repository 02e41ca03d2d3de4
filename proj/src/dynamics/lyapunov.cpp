#include <algorithm>
#include <cmath>
#include <functional>

#include "eelstm/dynamics.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

using Jacobian = std::function<void(double t, std::span<const double> y, std::vector<double>& jac)>;

// Modified Gram-Schmidt on the columns of the row-major n x n matrix q;
// adds log column norms to sums.
void orthonormalize(std::vector<double>& q, std::size_t n, std::vector<double>& sums) {
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += q[r * n + c] * q[r * n + p];
      for (std::size_t r = 0; r < n; ++r) q[r * n + c] -= dot * q[r * n + p];
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += q[r * n + c] * q[r * n + c];
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("lyapunov: degenerate tangent space");
    for (std::size_t r = 0; r < n; ++r) q[r * n + c] /= norm;
    sums[c] += std::log(norm);
  }
}

void check_finite(std::span<const double> y, const char* what) {
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericError(std::string("lyapunov: divergent orbit (") + what + ")");
  }
}

std::vector<double> map_spectrum(const SystemDef& sys, std::span<const double> ic, const LyapunovOptions& opt) {
  std::vector<double> y(ic.begin(), ic.end());
  if (sys.second_order) std::swap(y[0], y[1]);  // state is (x_n, x_{n-1})
  for (std::size_t i = 0; i < opt.burn_in; ++i) {
    y = map_step(sys, y);
    check_finite(y, "burn-in");
  }

  if (sys.state_size == 1) {
    double sum = 0.0;
    for (std::size_t i = 0; i < opt.n; ++i) {
      const double x = y[0];
      double deriv = 0.0;
      if (sys.name == SystemName::Logistic) {
        deriv = sys.param("r") * (1.0 - 2.0 * x);
      } else {
        const double a = sys.param("alpha");
        deriv = -2.0 * a * x * std::exp(-a * x * x);
      }
      sum += std::log(std::max(std::abs(deriv), 1e-300));
      y = map_step(sys, y);
      check_finite(y, "iteration");
    }
    return {sum / static_cast<double>(opt.n)};
  }

  const std::size_t n = 2;
  std::vector<double> q{1.0, 0.0, 0.0, 1.0}, jac(4), next(4), sums(n, 0.0);
  for (std::size_t i = 0; i < opt.n; ++i) {
    if (sys.name == SystemName::Henon) {
      jac = {-2.0 * sys.param("a") * y[0], sys.param("b"), 1.0, 0.0};
    } else {
      const double kc = sys.param("K") * std::cos(y[1]);
      jac = {1.0, kc, 1.0, 1.0 + kc};
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) next[r * n + c] = jac[r * n] * q[c] + jac[r * n + 1] * q[n + c];
    }
    q.swap(next);
    orthonormalize(q, n, sums);
    y = map_step(sys, y);
    check_finite(y, "iteration");
  }
  for (double& s : sums) s /= static_cast<double>(opt.n);
  return sums;
}

Jacobian flow_jacobian(const SystemDef& sys) {
  switch (sys.name) {
    case SystemName::Lorenz: {
      const double s = sys.param("sigma"), r = sys.param("rho"), b = sys.param("beta");
      return [=](double, std::span<const double> y, std::vector<double>& j) {
        j = {-s, s, 0.0, r - y[2], -1.0, -y[0], y[1], y[0], -b};
      };
    }
    case SystemName::Thomas: {
      const double b = sys.param("b");
      return [=](double, std::span<const double> y, std::vector<double>& j) {
        j = {-b, std::cos(y[1]), 0.0, 0.0, -b, std::cos(y[2]), std::cos(y[0]), 0.0, -b};
      };
    }
    case SystemName::Rossler: {
      const double a = sys.param("a"), c = sys.param("c");
      return [=](double, std::span<const double> y, std::vector<double>& j) {
        j = {0.0, -1.0, -1.0, 1.0, a, 0.0, y[2], 0.0, y[0] - c};
      };
    }
    case SystemName::Duffing: {
      const double al = sys.param("alpha"), be = sys.param("beta"), de = sys.param("delta");
      return [=](double, std::span<const double> y, std::vector<double>& j) {
        j = {0.0, 1.0, -al - 3.0 * be * y[0] * y[0], -de};
      };
    }
    default:
      throw ConfigError("lyapunov: not a flow");
  }
}

std::vector<double> flow_spectrum(const SystemDef& sys, std::span<const double> ic, const LyapunovOptions& opt) {
  const std::size_t n = sys.state_size;
  const Rhs f = flow_rhs(sys);
  const Jacobian jf = flow_jacobian(sys);
  const auto [sub, h] = rk4_substeps(opt.renorm_interval);

  // Augmented state: y followed by the row-major tangent matrix Q.
  const Rhs aug = [&](double t, std::span<const double> z, std::span<double> dz) {
    thread_local std::vector<double> jac;
    f(t, z.first(n), dz.first(n));
    jf(t, z.first(n), jac);
    const double* q = z.data() + n;
    double* dq = dz.data() + n;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += jac[r * n + k] * q[k * n + c];
        dq[r * n + c] = acc;
      }
    }
  };

  std::vector<double> y(ic.begin(), ic.end());
  double t = 0.0;
  const auto [burn_sub, burn_h] = rk4_substeps(1.0);
  for (std::size_t i = 0; i < opt.burn_in; ++i) {
    for (std::size_t k = 0; k < burn_sub; ++k) {
      rk4_step(f, t, burn_h, y);
      t += burn_h;
    }
    check_finite(y, "burn-in");
  }

  std::vector<double> z(n + n * n, 0.0), sums(n, 0.0);
  std::copy(y.begin(), y.end(), z.begin());
  for (std::size_t i = 0; i < n; ++i) z[n + i * n + i] = 1.0;
  const auto intervals = static_cast<std::size_t>(std::llround(static_cast<double>(opt.n) / opt.renorm_interval));
  for (std::size_t i = 0; i < intervals; ++i) {
    for (std::size_t k = 0; k < sub; ++k) {
      rk4_step(aug, t, h, z);
      t += h;
    }
    check_finite(z, "integration");
    std::vector<double> q(z.begin() + static_cast<std::ptrdiff_t>(n), z.end());
    orthonormalize(q, n, sums);
    std::copy(q.begin(), q.end(), z.begin() + static_cast<std::ptrdiff_t>(n));
  }
  const double total = static_cast<double>(intervals) * opt.renorm_interval;
  for (double& s : sums) s /= total;
  return sums;
}

}  // namespace

std::vector<double> lyapunov(const SystemDef& sys, std::span<const double> ic, const LyapunovOptions& opt) {
  if (opt.n < 10000) throw ConfigError("lyapunov: n must be >= 10000");
  if (opt.burn_in < 1000) throw ConfigError("lyapunov: burn_in must be >= 1000");
  if (!(opt.renorm_interval > 0.0)) throw ConfigError("lyapunov: renorm_interval must be > 0");
  if (ic.size() != sys.state_size) throw ShapeError("lyapunov: initial condition size mismatch");
  auto spec = sys.kind == SystemKind::Map ? map_spectrum(sys, ic, opt) : flow_spectrum(sys, ic, opt);
  std::sort(spec.begin(), spec.end(), std::greater<>());
  return spec;
}

}  // namespace eelstm
