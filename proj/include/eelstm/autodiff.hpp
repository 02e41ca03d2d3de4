#pragma once

// Define-by-run reverse-mode differentiation over Tensor operations.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "eelstm/linalg.hpp"
#include "eelstm/tensor.hpp"

namespace eelstm {

/// Handle into the Tape that issued it.
struct Var {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::uint32_t id = kNone;
  bool valid() const noexcept { return id != kNone; }
};

enum class OpKind : std::uint8_t {
  Leaf,
  Constant,
  Add,
  Sub,
  Mul,
  Scale,
  AddBroadcast,
  Tanh,
  Sigmoid,
  Contract,
  Concat,
  Slice,
  Reshape,
  Permute,
  Normalize,
  Sum,
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<Tensor> by_id, std::vector<bool> present)
      : grads_(std::move(by_id)), present_(std::move(present)) {}

  bool has(Var v) const { return v.id < present_.size() && present_[v.id]; }

  /// Gradient for a leaf; zero tensor of the leaf's shape if it had no path
  /// to the output.
  const Tensor& wrt(Var v) const;

 private:
  std::vector<Tensor> grads_;
  std::vector<bool> present_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input.
  Var leaf(Tensor value);
  /// Non-differentiable input.
  Var constant(Tensor value);

  const Tensor& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  /// x + bias, bias broadcast over the leading axes of x.
  Var add_broadcast(Var x, Var bias);
  Var tanh(Var a);
  Var sigmoid(Var a);

  /// Batched contraction; result axes are [batch, free(a), free(b)].
  Var contract(Var a, Var b, std::vector<AxisPair> pairs, std::vector<AxisPair> batch = {});
  Var tensor_product(Var a, Var b) { return contract(a, b, {}); }

  Var concat(std::span<const Var> parts, std::size_t axis);
  Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
  Var reshape(Var a, Shape shape);
  Var permute(Var a, std::vector<std::size_t> perm);

  /// x / (||x||_2 + eps) over the trailing axes, separately for every index
  /// of the first `batch_axes` axes.
  Var normalize(Var a, std::size_t batch_axes, double eps = 1e-8);

  /// Sum of all entries (rank-0 result).
  Var sum(Var a);

  /// Reverse sweep from a single-element output.
  Gradients backward(Var output) const;

  /// Recomputes every non-input node from the stored inputs and reports
  /// whether all values are reproduced bit-for-bit.
  bool replay_matches() const;

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    std::vector<std::uint32_t> inputs;
    bool needs_grad = false;
    double scalar = 0.0;
    std::size_t axis = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::vector<std::size_t> perm;
    std::vector<AxisPair> pairs;
    std::vector<AxisPair> batch;
    detail::ContractPlan plan;
  };

  Var push(Node node, Tensor value);
  Tensor forward(const Node& node) const;
  void check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> values_;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = true;
};

using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

/// Central-difference check of every coordinate of every parameter.
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckReport grad_check(const LossBuilder& f, const std::vector<Tensor>& params,
                           double step, double tol);

}  // namespace eelstm
