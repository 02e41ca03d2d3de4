#include "eelstm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eelstm/errors.hpp"
#include "eelstm/kernels.hpp"

namespace eelstm {

namespace detail {

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

namespace {

bool is_identity(std::span<const std::size_t> perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != i) return false;
  }
  return true;
}

void check_axes(const Shape& shape, std::span<const std::size_t> axes, const char* who) {
  std::vector<bool> seen(shape.size(), false);
  for (std::size_t ax : axes) {
    if (ax >= shape.size()) {
      throw RangeError(std::string(who) + ": axis " + std::to_string(ax) +
                       " out of range for shape " + shape_string(shape));
    }
    if (seen[ax]) throw ShapeError(std::string(who) + ": duplicate axis " + std::to_string(ax));
    seen[ax] = true;
  }
}

}  // namespace

ContractPlan plan_contract(const Shape& sa, const Shape& sb, std::span<const AxisPair> pairs,
                           std::span<const AxisPair> batch) {
  std::vector<std::size_t> used_a, used_b;
  for (const auto& p : batch) {
    used_a.push_back(p.a);
    used_b.push_back(p.b);
  }
  for (const auto& p : pairs) {
    used_a.push_back(p.a);
    used_b.push_back(p.b);
  }
  check_axes(sa, used_a, "contract");
  check_axes(sb, used_b, "contract");

  ContractPlan plan;
  std::vector<bool> in_a(sa.size(), false), in_b(sb.size(), false);
  for (const auto& p : batch) {
    if (sa[p.a] != sb[p.b]) {
      throw ShapeError("contract: batch extent mismatch " + shape_string(sa) + " vs " +
                       shape_string(sb));
    }
    plan.perm_a.push_back(p.a);
    plan.perm_b.push_back(p.b);
    plan.batch *= sa[p.a];
    plan.out_shape.push_back(sa[p.a]);
    in_a[p.a] = in_b[p.b] = true;
  }
  for (const auto& p : pairs) {
    if (sa[p.a] != sb[p.b]) {
      throw ShapeError("contract: extent mismatch on axes (" + std::to_string(p.a) + "," +
                       std::to_string(p.b) + ") of " + shape_string(sa) + " and " +
                       shape_string(sb));
    }
    in_a[p.a] = in_b[p.b] = true;
  }
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (!in_a[i]) {
      plan.perm_a.push_back(i);
      plan.m *= sa[i];
      plan.out_shape.push_back(sa[i]);
    }
  }
  for (const auto& p : pairs) {
    plan.perm_a.push_back(p.a);
    plan.perm_b.push_back(p.b);
    plan.k *= sa[p.a];
  }
  for (std::size_t i = 0; i < sb.size(); ++i) {
    if (!in_b[i]) {
      plan.perm_b.push_back(i);
      plan.n *= sb[i];
      plan.out_shape.push_back(sb[i]);
    }
  }
  plan.a_identity = is_identity(plan.perm_a);
  plan.b_identity = is_identity(plan.perm_b);
  return plan;
}

Tensor execute_contract(const Tensor& a, const Tensor& b, const ContractPlan& plan) {
  const Tensor pa = plan.a_identity ? Tensor() : permute(a, plan.perm_a);
  const Tensor pb = plan.b_identity ? Tensor() : permute(b, plan.perm_b);
  const auto da = plan.a_identity ? a.data() : pa.data();
  const auto db = plan.b_identity ? b.data() : pb.data();

  Tensor out(plan.out_shape);
  auto dc = out.data();
  const std::size_t sa = plan.m * plan.k, sb = plan.k * plan.n, sc = plan.m * plan.n;
  for (std::size_t t = 0; t < plan.batch; ++t) {
    kernels::gemm(plan.m, plan.n, plan.k, da.subspan(t * sa, sa), db.subspan(t * sb, sb),
                  dc.subspan(t * sc, sc), false);
  }
  return out;
}

}  // namespace detail

Tensor permute(const Tensor& t, std::span<const std::size_t> perm) {
  const std::size_t r = t.rank();
  if (perm.size() != r) throw ShapeError("permute: permutation rank mismatch");
  {
    std::vector<bool> seen(r, false);
    for (std::size_t p : perm) {
      if (p >= r || seen[p]) throw ShapeError("permute: not a permutation");
      seen[p] = true;
    }
  }
  if (detail::is_identity(perm)) return t;

  const auto in_strides = row_major_strides(t.shape());
  Shape out_shape(r);
  std::vector<std::size_t> stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = t.shape()[perm[i]];
    stride[i] = in_strides[perm[i]];
  }
  Tensor out(out_shape);
  const double* src = t.data().data();
  double* dst = out.data().data();

  const std::size_t inner = out_shape[r - 1];
  const std::size_t inner_stride = stride[r - 1];
  const std::size_t outer = out.size() / inner;
  std::vector<std::size_t> counter(r, 0);
  std::size_t offset = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    const double* s = src + offset;
    for (std::size_t j = 0; j < inner; ++j) dst[j] = s[j * inner_stride];
    dst += inner;
    // advance the multi-index over axes [0, r-1)
    for (std::size_t ax = r - 1; ax-- > 0;) {
      ++counter[ax];
      offset += stride[ax];
      if (counter[ax] < out_shape[ax]) break;
      offset -= stride[ax] * out_shape[ax];
      counter[ax] = 0;
    }
  }
  return out;
}

Tensor matricize(const Tensor& t, std::size_t cut) {
  if (t.rank() < 2 || cut < 1 || cut >= t.rank()) {
    throw RangeError("matricize: cut " + std::to_string(cut) + " out of range for rank " +
                     std::to_string(t.rank()));
  }
  std::size_t rows = 1;
  for (std::size_t i = 0; i < cut; ++i) rows *= t.shape()[i];
  return t.reshaped(Shape{rows, t.size() / rows});
}

Tensor contract(const Tensor& a, std::span<const std::size_t> axes_a, const Tensor& b,
                std::span<const std::size_t> axes_b) {
  if (axes_a.size() != axes_b.size()) throw ShapeError("contract: axis list length mismatch");
  std::vector<AxisPair> pairs;
  for (std::size_t i = 0; i < axes_a.size(); ++i) pairs.push_back({axes_a[i], axes_b[i]});
  return contract(a, b, pairs);
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs,
                std::span<const AxisPair> batch) {
  const auto plan = detail::plan_contract(a.shape(), b.shape(), pairs, batch);
  return detail::execute_contract(a, b, plan);
}

Tensor tensor_product(const Tensor& a, const Tensor& b) { return contract(a, b, {}); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw ShapeError("matmul: rank-2 operands required");
  const AxisPair p{1, 0};
  return contract(a, b, std::span<const AxisPair>(&p, 1));
}

Tensor transpose(const Tensor& m) {
  if (m.rank() != 2) throw ShapeError("transpose: rank-2 operand required");
  const std::size_t perm[2] = {1, 0};
  return permute(m, perm);
}

double p_norm(const Tensor& t, double p) {
  if (!(p >= 1.0)) throw DomainError("p_norm: p must be >= 1");
  if (p == 2.0) return frobenius_norm(t);
  if (p == 1.0) {
    double s = 0.0;
    for (double v : t.data()) s += std::abs(v);
    return s;
  }
  double s = 0.0;
  for (double v : t.data()) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

double schatten_p_norm(std::span<const double> sv, double p) {
  if (!(p >= 1.0)) throw DomainError("schatten_p_norm: p must be >= 1");
  double s = 0.0;
  for (double v : sv) s += std::pow(v, p);
  return std::pow(s, 1.0 / p);
}

double schatten_p_norm(const Tensor& m, double p) {
  if (!(p >= 1.0)) throw DomainError("schatten_p_norm: p must be >= 1");
  return schatten_p_norm(singular_values(m), p);
}

}  // namespace eelstm
