#include <algorithm>
#include <cmath>
#include <numeric>

#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"

namespace eelstm {

namespace {

constexpr double kOffTolerance = 1e-14;
constexpr int kMaxSweeps = 80;

// One-sided Jacobi on the columns of a (rows x cols, rows >= cols), stored
// column-major in `cols` vectors. Rotations are accumulated into v (cols x cols,
// column-major as well).
void jacobi_columns(std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& v) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& ap = a[p];
        auto& aq = a[q];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < ap.size(); ++i) {
          alpha += ap[i] * ap[i];
          beta += aq[i] * aq[i];
          gamma += ap[i] * aq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= kOffTolerance * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < ap.size(); ++i) {
          const double x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        auto& vp = v[p];
        auto& vq = v[q];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) return;
  }
}

// Fill the listed columns of u (column-major, length m each) with unit vectors
// orthogonal to all other columns.
void complete_basis(std::vector<std::vector<double>>& u, const std::vector<bool>& valid) {
  const std::size_t m = u.empty() ? 0 : u[0].size();
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (valid[j]) continue;
    for (; candidate < m; ++candidate) {
      std::vector<double> e(m, 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < u.size(); ++k) {
          if (k == j || (!valid[k] && k > j)) continue;
          double d = 0.0;
          for (std::size_t i = 0; i < m; ++i) d += u[k][i] * e[i];
          for (std::size_t i = 0; i < m; ++i) e[i] -= d * u[k][i];
        }
      }
      double norm = 0.0;
      for (double x : e) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (auto& x : e) x /= norm;
        u[j] = std::move(e);
        ++candidate;
        break;
      }
    }
  }
}

// Thin SVD of a tall (m >= n) row-major matrix.
SvdResult svd_tall(std::size_t m, std::size_t n, std::span<const double> data) {
  std::vector<std::vector<double>> a(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[j][i] = data[i * n + j];
  }
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  jacobi_columns(a, v);

  std::vector<double> sigma(n);
  double smax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (double x : a[j]) s += x * x;
    sigma[j] = std::sqrt(s);
    smax = std::max(smax, sigma[j]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  std::vector<std::vector<double>> u(n), vcols(n);
  std::vector<double> sv(n);
  std::vector<bool> valid(n, false);
  const double floor = smax * 1e-15 * static_cast<double>(std::max(m, n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t j = order[r];
    sv[r] = sigma[j];
    vcols[r] = v[j];
    u[r].assign(m, 0.0);
    if (sigma[j] > floor && sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) u[r][i] = a[j][i] / sigma[j];
      valid[r] = true;
    }
  }
  complete_basis(u, valid);

  SvdResult out{Tensor(Shape{m, n}), std::move(sv), Tensor(Shape{n, n})};
  for (std::size_t r = 0; r < n; ++r) {
    double sign = 1.0;
    for (double x : u[r]) {
      if (x != 0.0) {
        sign = x < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < m; ++i) out.u(i, r) = sign * u[r][i];
    for (std::size_t i = 0; i < n; ++i) out.vt(r, i) = sign * vcols[r][i];
  }
  return out;
}

}  // namespace

SvdResult svd(const Tensor& m) {
  if (m.rank() != 2) throw ShapeError("svd: rank-2 tensor required, got " + shape_string(m.shape()));
  if (!m.all_finite()) throw NumericError("svd: non-finite entries");
  const std::size_t rows = m.extent(0), cols = m.extent(1);
  if (rows >= cols) return svd_tall(rows, cols, m.data());

  // Wide: decompose the transpose and swap factors back.
  const Tensor mt = transpose(m);
  SvdResult t = svd_tall(cols, rows, mt.data());
  SvdResult out{transpose(t.vt), std::move(t.singular_values), transpose(t.u)};
  for (std::size_t r = 0; r < rows; ++r) {
    double sign = 1.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (out.u(i, r) != 0.0) {
        sign = out.u(i, r) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    if (sign < 0.0) {
      for (std::size_t i = 0; i < rows; ++i) out.u(i, r) = -out.u(i, r);
      for (std::size_t i = 0; i < cols; ++i) out.vt(r, i) = -out.vt(r, i);
    }
  }
  return out;
}

std::vector<double> singular_values(const Tensor& m) { return svd(m).singular_values; }

}  // namespace eelstm
