#include <algorithm>
#include <cmath>
#include <string>

#include "eelstm/autodiff.hpp"
#include "eelstm/errors.hpp"
#include "eelstm/kernels.hpp"

namespace eelstm {

namespace {

std::size_t prod(const Shape& s, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t i = from; i < to; ++i) p *= s[i];
  return p;
}

Tensor slice_tensor(const Tensor& t, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = t.shape();
  const std::size_t outer = prod(s, 0, axis), inner = prod(s, axis + 1, s.size());
  Shape os = s;
  os[axis] = end - begin;
  Tensor out(os);
  const double* src = t.data().data();
  double* dst = out.data().data();
  const std::size_t run = (end - begin) * inner;
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(src + (o * s[axis] + begin) * inner, run, dst + o * run);
  }
  return out;
}

// Adds `part` into the [begin, begin + extent) window of `dst` along axis.
void add_into_window(Tensor& dst, const Tensor& part, std::size_t axis, std::size_t begin) {
  const Shape& s = dst.shape();
  const std::size_t outer = prod(s, 0, axis), inner = prod(s, axis + 1, s.size());
  const std::size_t run = part.shape()[axis] * inner;
  auto d = dst.data();
  auto p = part.data();
  for (std::size_t o = 0; o < outer; ++o) {
    kernels::accumulate(p.subspan(o * run, run), d.subspan((o * s[axis] + begin) * inner, run));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

std::vector<std::size_t> free_axes(std::size_t rank, std::span<const AxisPair> pairs,
                                   std::span<const AxisPair> batch, bool first) {
  std::vector<bool> used(rank, false);
  for (const auto& p : pairs) used[first ? p.a : p.b] = true;
  for (const auto& p : batch) used[first ? p.a : p.b] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rank; ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

const Tensor& Gradients::wrt(Var v) const {
  if (!has(v)) throw RangeError("Gradients::wrt: no gradient recorded for variable");
  return grads_[v.id];
}

void Tape::check(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw RangeError("Tape: invalid variable handle");
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return values_[v.id];
}

Var Tape::push(Node node, Tensor value) {
  if (node.kind != OpKind::Leaf) {
    for (auto in : node.inputs) node.needs_grad = node.needs_grad || nodes_[in].needs_grad;
  }
  nodes_.push_back(std::move(node));
  values_.push_back(std::move(value));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.kind = OpKind::Leaf;
  n.needs_grad = true;
  return push(std::move(n), std::move(value));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.kind = OpKind::Constant;
  return push(std::move(n), std::move(value));
}

Tensor Tape::forward(const Node& n) const {
  auto in = [&](std::size_t i) -> const Tensor& { return values_[n.inputs[i]]; };
  switch (n.kind) {
    case OpKind::Leaf:
    case OpKind::Constant:
      throw RangeError("Tape::forward: inputs have no forward rule");
    case OpKind::Add: {
      Tensor out(in(0).shape());
      kernels::add(in(0).data(), in(1).data(), out.data());
      return out;
    }
    case OpKind::Sub: {
      Tensor out(in(0).shape());
      kernels::sub(in(0).data(), in(1).data(), out.data());
      return out;
    }
    case OpKind::Mul: {
      Tensor out(in(0).shape());
      kernels::mul(in(0).data(), in(1).data(), out.data());
      return out;
    }
    case OpKind::Scale: {
      Tensor out(in(0).shape());
      kernels::scale(n.scalar, in(0).data(), out.data());
      return out;
    }
    case OpKind::AddBroadcast: {
      Tensor out = in(0);
      const std::size_t inner = in(1).size();
      auto d = out.data();
      for (std::size_t o = 0; o < out.size(); o += inner) kernels::accumulate(in(1).data(), d.subspan(o, inner));
      return out;
    }
    case OpKind::Tanh: {
      Tensor out(in(0).shape());
      auto x = in(0).data();
      auto y = out.data();
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
      return out;
    }
    case OpKind::Sigmoid: {
      Tensor out(in(0).shape());
      auto x = in(0).data();
      auto y = out.data();
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
      return out;
    }
    case OpKind::Contract:
      return detail::execute_contract(in(0), in(1), n.plan);
    case OpKind::Concat: {
      Shape s = in(0).shape();
      s[n.axis] = 0;
      for (std::size_t i = 0; i < n.inputs.size(); ++i) s[n.axis] += in(i).shape()[n.axis];
      Tensor out(s);
      std::size_t offset = 0;
      for (std::size_t i = 0; i < n.inputs.size(); ++i) {
        add_into_window(out, in(i), n.axis, offset);
        offset += in(i).shape()[n.axis];
      }
      return out;
    }
    case OpKind::Slice:
      return slice_tensor(in(0), n.axis, n.begin, n.end);
    case OpKind::Reshape:
      return in(0).reshaped(Shape(n.perm.begin(), n.perm.end()));
    case OpKind::Permute:
      return eelstm::permute(in(0), n.perm);
    case OpKind::Normalize: {
      const Tensor& x = in(0);
      const std::size_t outer = prod(x.shape(), 0, n.axis);
      const std::size_t inner = x.size() / outer;
      Tensor out(x.shape());
      for (std::size_t o = 0; o < outer; ++o) {
        auto xs = x.data().subspan(o * inner, inner);
        const double norm = std::sqrt(kernels::dot(xs, xs));
        kernels::scale(1.0 / (norm + n.scalar), xs, out.data().subspan(o * inner, inner));
      }
      return out;
    }
    case OpKind::Sum:
      return Tensor::scalar(kernels::sum(in(0).data()));
  }
  throw RangeError("Tape::forward: unknown op");
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  require_same_shape(values_[a.id], values_[b.id], "add");
  Node n;
  n.kind = OpKind::Add;
  n.inputs = {a.id, b.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  require_same_shape(values_[a.id], values_[b.id], "sub");
  Node n;
  n.kind = OpKind::Sub;
  n.inputs = {a.id, b.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  require_same_shape(values_[a.id], values_[b.id], "mul");
  Node n;
  n.kind = OpKind::Mul;
  n.inputs = {a.id, b.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::scale(Var a, double s) {
  check(a);
  Node n;
  n.kind = OpKind::Scale;
  n.inputs = {a.id};
  n.scalar = s;
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::add_broadcast(Var x, Var bias) {
  check(x);
  check(bias);
  const Shape& sx = values_[x.id].shape();
  const Shape& sb = values_[bias.id].shape();
  if (sb.size() > sx.size() || !std::equal(sb.begin(), sb.end(), sx.end() - sb.size())) {
    throw ShapeError("add_broadcast: bias " + shape_string(sb) + " is not a trailing shape of " +
                     shape_string(sx));
  }
  Node n;
  n.kind = OpKind::AddBroadcast;
  n.inputs = {x.id, bias.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::tanh(Var a) {
  check(a);
  Node n;
  n.kind = OpKind::Tanh;
  n.inputs = {a.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::sigmoid(Var a) {
  check(a);
  Node n;
  n.kind = OpKind::Sigmoid;
  n.inputs = {a.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::contract(Var a, Var b, std::vector<AxisPair> pairs, std::vector<AxisPair> batch) {
  check(a);
  check(b);
  Node n;
  n.kind = OpKind::Contract;
  n.inputs = {a.id, b.id};
  n.plan = detail::plan_contract(values_[a.id].shape(), values_[b.id].shape(), pairs, batch);
  n.pairs = std::move(pairs);
  n.batch = std::move(batch);
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Node n;
  n.kind = OpKind::Concat;
  n.axis = axis;
  const Shape& s0 = value(parts[0]).shape();
  if (axis >= s0.size()) throw RangeError("concat: axis out of range");
  for (Var p : parts) {
    const Shape& s = value(p).shape();
    bool ok = s.size() == s0.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == s0[i];
    if (!ok) throw ShapeError("concat: incompatible shapes " + shape_string(s0) + " and " + shape_string(s));
    n.inputs.push_back(p.id);
  }
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = value(a).shape();
  if (axis >= s.size() || begin >= end || end > s[axis]) {
    throw RangeError("slice: bad range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") on axis " + std::to_string(axis) + " of " + shape_string(s));
  }
  Node n;
  n.kind = OpKind::Slice;
  n.inputs = {a.id};
  n.axis = axis;
  n.begin = begin;
  n.end = end;
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::reshape(Var a, Shape shape) {
  if (shape_volume(shape) != value(a).size()) {
    throw ShapeError("reshape: volume mismatch " + shape_string(value(a).shape()) + " -> " +
                     shape_string(shape));
  }
  Node n;
  n.kind = OpKind::Reshape;
  n.inputs = {a.id};
  n.perm.assign(shape.begin(), shape.end());
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::permute(Var a, std::vector<std::size_t> perm) {
  check(a);
  Node n;
  n.kind = OpKind::Permute;
  n.inputs = {a.id};
  n.perm = std::move(perm);
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::normalize(Var a, std::size_t batch_axes, double eps) {
  if (batch_axes >= value(a).rank() && value(a).rank() > 0) {
    throw RangeError("normalize: batch_axes must leave at least one axis");
  }
  Node n;
  n.kind = OpKind::Normalize;
  n.inputs = {a.id};
  n.axis = batch_axes;
  n.scalar = eps;
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

Var Tape::sum(Var a) {
  check(a);
  Node n;
  n.kind = OpKind::Sum;
  n.inputs = {a.id};
  Tensor v = forward(n);
  return push(std::move(n), std::move(v));
}

bool Tape::replay_matches() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.kind == OpKind::Leaf || n.kind == OpKind::Constant) continue;
    if (!(forward(n) == values_[i])) return false;
  }
  return true;
}

Gradients Tape::backward(Var output) const {
  check(output);
  if (values_[output.id].size() != 1) {
    throw ShapeError("backward: output must be a single element, got " +
                     shape_string(values_[output.id].shape()));
  }
  const std::size_t count = output.id + 1;
  std::vector<Tensor> g(count);
  std::vector<bool> have(count, false);

  auto accumulate = [&](std::uint32_t id, Tensor&& t) {
    if (!nodes_[id].needs_grad) return;
    if (!have[id]) {
      g[id] = std::move(t);
      have[id] = true;
    } else {
      kernels::accumulate(t.data(), g[id].data());
    }
  };

  g[output.id] = Tensor(values_[output.id].shape(), 1.0);
  have[output.id] = true;

  for (std::size_t idx = count; idx-- > 0;) {
    if (!have[idx]) continue;
    const Node& n = nodes_[idx];
    if (n.kind == OpKind::Leaf || n.kind == OpKind::Constant) continue;
    const Tensor& gy = g[idx];
    auto in = [&](std::size_t i) -> const Tensor& { return values_[n.inputs[i]]; };
    auto wants = [&](std::size_t i) { return nodes_[n.inputs[i]].needs_grad; };

    switch (n.kind) {
      case OpKind::Add:
        if (wants(0)) accumulate(n.inputs[0], Tensor(gy));
        if (wants(1)) accumulate(n.inputs[1], Tensor(gy));
        break;
      case OpKind::Sub:
        if (wants(0)) accumulate(n.inputs[0], Tensor(gy));
        if (wants(1)) accumulate(n.inputs[1], -1.0 * gy);
        break;
      case OpKind::Mul:
        for (std::size_t i = 0; i < 2; ++i) {
          if (!wants(i)) continue;
          Tensor t(gy.shape());
          kernels::mul(gy.data(), in(1 - i).data(), t.data());
          accumulate(n.inputs[i], std::move(t));
        }
        break;
      case OpKind::Scale:
        if (wants(0)) accumulate(n.inputs[0], n.scalar * gy);
        break;
      case OpKind::AddBroadcast:
        if (wants(0)) accumulate(n.inputs[0], Tensor(gy));
        if (wants(1)) {
          Tensor gb(in(1).shape());
          const std::size_t inner = gb.size();
          for (std::size_t o = 0; o < gy.size(); o += inner) {
            kernels::accumulate(gy.data().subspan(o, inner), gb.data());
          }
          accumulate(n.inputs[1], std::move(gb));
        }
        break;
      case OpKind::Tanh: {
        if (!wants(0)) break;
        const auto y = values_[idx].data();
        Tensor t(gy.shape());
        auto d = t.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = gy[i] * (1.0 - y[i] * y[i]);
        accumulate(n.inputs[0], std::move(t));
        break;
      }
      case OpKind::Sigmoid: {
        if (!wants(0)) break;
        const auto y = values_[idx].data();
        Tensor t(gy.shape());
        auto d = t.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = gy[i] * (y[i] * (1.0 - y[i]));
        accumulate(n.inputs[0], std::move(t));
        break;
      }
      case OpKind::Contract: {
        const Tensor& a = in(0);
        const Tensor& b = in(1);
        const std::size_t nb = n.batch.size();
        const auto a_free = free_axes(a.rank(), n.pairs, n.batch, true);
        const auto b_free = free_axes(b.rank(), n.pairs, n.batch, false);
        const std::size_t fa = a_free.size();
        if (wants(0)) {
          std::vector<AxisPair> pairs, batch;
          for (std::size_t i = 0; i < b_free.size(); ++i) pairs.push_back({nb + fa + i, b_free[i]});
          for (std::size_t j = 0; j < nb; ++j) batch.push_back({j, n.batch[j].b});
          Tensor r = eelstm::contract(gy, b, pairs, batch);
          std::vector<std::size_t> r_to_a;
          for (std::size_t j = 0; j < nb; ++j) r_to_a.push_back(n.batch[j].a);
          for (std::size_t ax : a_free) r_to_a.push_back(ax);
          for (std::size_t ax = 0; ax < b.rank(); ++ax) {
            for (const auto& p : n.pairs) {
              if (p.b == ax) r_to_a.push_back(p.a);
            }
          }
          accumulate(n.inputs[0], eelstm::permute(r, detail::invert_permutation(r_to_a)));
        }
        if (wants(1)) {
          std::vector<AxisPair> pairs, batch;
          for (std::size_t i = 0; i < fa; ++i) pairs.push_back({a_free[i], nb + i});
          for (std::size_t j = 0; j < nb; ++j) batch.push_back({n.batch[j].a, j});
          Tensor r = eelstm::contract(a, gy, pairs, batch);
          std::vector<std::size_t> r_to_b;
          for (std::size_t j = 0; j < nb; ++j) r_to_b.push_back(n.batch[j].b);
          for (std::size_t ax = 0; ax < a.rank(); ++ax) {
            for (const auto& p : n.pairs) {
              if (p.a == ax) r_to_b.push_back(p.b);
            }
          }
          for (std::size_t ax : b_free) r_to_b.push_back(ax);
          accumulate(n.inputs[1], eelstm::permute(r, detail::invert_permutation(r_to_b)));
        }
        break;
      }
      case OpKind::Concat: {
        std::size_t offset = 0;
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          const std::size_t ext = in(i).shape()[n.axis];
          if (wants(i)) accumulate(n.inputs[i], slice_tensor(gy, n.axis, offset, offset + ext));
          offset += ext;
        }
        break;
      }
      case OpKind::Slice: {
        if (!wants(0)) break;
        Tensor t(in(0).shape());
        add_into_window(t, gy, n.axis, n.begin);
        accumulate(n.inputs[0], std::move(t));
        break;
      }
      case OpKind::Reshape:
        if (wants(0)) accumulate(n.inputs[0], gy.reshaped(in(0).shape()));
        break;
      case OpKind::Permute:
        if (wants(0)) accumulate(n.inputs[0], eelstm::permute(gy, detail::invert_permutation(n.perm)));
        break;
      case OpKind::Normalize: {
        if (!wants(0)) break;
        const Tensor& x = in(0);
        const std::size_t outer = prod(x.shape(), 0, n.axis);
        const std::size_t inner = x.size() / outer;
        Tensor t(x.shape());
        for (std::size_t o = 0; o < outer; ++o) {
          auto xs = x.data().subspan(o * inner, inner);
          auto gs = gy.data().subspan(o * inner, inner);
          auto ts = t.data().subspan(o * inner, inner);
          const double norm = std::sqrt(kernels::dot(xs, xs));
          const double denom = norm + n.scalar;
          kernels::scale(1.0 / denom, gs, ts);
          if (norm > 0.0) {
            const double coef = kernels::dot(gs, xs) / (denom * denom * norm);
            kernels::axpy(-coef, xs, ts);
          }
        }
        accumulate(n.inputs[0], std::move(t));
        break;
      }
      case OpKind::Sum:
        if (wants(0)) accumulate(n.inputs[0], Tensor(in(0).shape(), gy.item()));
        break;
      case OpKind::Leaf:
      case OpKind::Constant:
        break;
    }
  }

  std::vector<Tensor> out(nodes_.size());
  std::vector<bool> present(nodes_.size(), false);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind != OpKind::Leaf) continue;
    present[i] = true;
    out[i] = i < count && have[i] ? std::move(g[i]) : Tensor(values_[i].shape());
  }
  return Gradients(std::move(out), std::move(present));
}

}  // namespace eelstm
