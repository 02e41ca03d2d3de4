#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eelstm/tensor.hpp"

namespace eelstm {

/// One contracted (or batch-aligned) axis pair: axis `a` of the first operand
/// against axis `b` of the second.
struct AxisPair {
  std::size_t a;
  std::size_t b;
};

/// Reorders axes: result axis i is input axis perm[i].
Tensor permute(const Tensor& t, std::span<const std::size_t> perm);

/// Groups the first `cut` indices against the rest. Pure index regrouping.
Tensor matricize(const Tensor& t, std::size_t cut);

/// Sum over paired axes. Surviving axes are ordered a-then-b.
Tensor contract(const Tensor& a, std::span<const std::size_t> axes_a, const Tensor& b,
                std::span<const std::size_t> axes_b);

/// General form with batch axes. Batch pairs are aligned, not summed, and lead
/// the result: [batch..., free(a)..., free(b)...].
Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs,
                std::span<const AxisPair> batch = {});

/// Outer product; shape is concat(shape(a), shape(b)).
Tensor tensor_product(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);

struct SvdResult {
  Tensor u;                             // m x k
  std::vector<double> singular_values;  // k, non-increasing, non-negative
  Tensor vt;                            // k x n
};

/// Thin SVD by one-sided Jacobi with a fixed cyclic sweep order. The first
/// nonzero entry of every left singular vector is made non-negative.
SvdResult svd(const Tensor& m);

/// Singular values only (same algorithm, same order).
std::vector<double> singular_values(const Tensor& m);

/// Elementwise p-norm, p >= 1.
double p_norm(const Tensor& t, double p);

/// Schatten p-norm of a matrix: (sum sigma_i^p)^(1/p), p >= 1.
double schatten_p_norm(const Tensor& m, double p);
double schatten_p_norm(std::span<const double> singular_values, double p);

namespace detail {

/// Precomputed layout for a batched contraction, shared by the plain function
/// and the autodiff tape.
struct ContractPlan {
  std::vector<std::size_t> perm_a;  // to [batch, free_a, contracted]
  std::vector<std::size_t> perm_b;  // to [batch, contracted, free_b]
  bool a_identity = false;
  bool b_identity = false;
  std::size_t batch = 1;
  std::size_t m = 1;
  std::size_t k = 1;
  std::size_t n = 1;
  Shape out_shape;
};

ContractPlan plan_contract(const Shape& a, const Shape& b, std::span<const AxisPair> pairs,
                           std::span<const AxisPair> batch);

Tensor execute_contract(const Tensor& a, const Tensor& b, const ContractPlan& plan);

/// Inverse permutation.
std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm);

}  // namespace detail

}  // namespace eelstm
