#include <numeric>
#include <string>

#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm {

namespace {

void guard(const Shape& s, const char* what) {
  std::size_t v = 1;
  for (std::size_t e : s) {
    if (v > kFullTensorLimit / e) {
      throw CapacityError(std::string(what) + ": explicit tensor exceeds the 2^20 entry guard");
    }
    v *= e;
  }
}

Tensor assemble_mps(const TensorizerSpec& spec, const ParamSet& params, const std::string& prefix) {
  const Tensor& w0 = params[prefix + "mps.w0"];
  const std::size_t h = w0.extent(0);
  Shape target{h};
  target.insert(target.end(), spec.L, spec.P);
  guard(target, "assemble_wt");

  // chain [Dl, P, ..., P, Dr]
  Tensor t = params[prefix + "mps.core0"];
  for (std::size_t l = 1; l < spec.L; ++l) {
    const std::size_t last = t.rank() - 1;
    const std::size_t ax[1] = {last}, bx[1] = {0};
    t = contract(t, ax, params[prefix + "mps.core" + std::to_string(l)], bx);
  }
  const std::size_t r = t.rank();
  if (spec.mps_boundary == MpsBoundary::Open) {
    // [1, P.., D] x [h, D] -> [1, P.., h]
    const std::size_t ax[1] = {r - 1}, bx[1] = {1};
    Tensor c = contract(t, ax, w0, bx);
    std::vector<std::size_t> perm{c.rank() - 1};
    for (std::size_t i = 1; i + 1 < c.rank(); ++i) perm.push_back(i);
    perm.push_back(0);
    return permute(c, perm).reshaped(target);
  }
  // ring: [D0, P.., DL] x w0[h, DL, D0]
  const std::size_t ax[2] = {0, r - 1}, bx[2] = {2, 1};
  Tensor c = contract(t, ax, w0, bx);  // [P.., h]
  std::vector<std::size_t> perm{c.rank() - 1};
  for (std::size_t i = 0; i + 1 < c.rank(); ++i) perm.push_back(i);
  return permute(c, perm);
}

Tensor assemble_mera(const TensorizerSpec& spec, const ParamSet& params, const std::string& prefix) {
  Tensor t = params[prefix + "top"];  // [h, k]
  const std::size_t h = t.extent(0);
  const std::size_t levels = spec.mera_levels();
  for (std::size_t k = levels; k >= 1; --k) {
    const std::size_t n = spec.L >> (k - 1);
    const std::size_t m = n / 2;
    const std::size_t dk = spec.dims[k - 1];
    Shape fine{h};
    fine.insert(fine.end(), n, dk);
    guard(fine, "assemble_wt");

    // expand coarse site j into fine sites (2j-1, 2j)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t ax[1] = {1}, bx[1] = {0};
      t = contract(t, ax, params[mera_w_name(spec, k, j, prefix)], bx);
    }
    // axis order now: h, x_{n-1}, x_0, x_1, ..., x_{n-2}
    std::vector<std::size_t> perm{0};
    for (std::size_t i = 0; i + 1 < n; ++i) perm.push_back(2 + i);
    perm.push_back(1);
    t = permute(t, perm);

    // undo the disentanglers on pairs (2i, 2i+1)
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t ax[2] = {1, 2}, bx[2] = {0, 1};
      t = contract(t, ax, params[mera_u_name(spec, k, i, prefix)], bx);
    }
  }
  return t;
}

}  // namespace

Tensor assemble_wt(const TensorizerSpec& spec, const ParamSet& params, const std::string& prefix) {
  spec.validate();
  switch (spec.kind) {
    case TnKind::Full:
      return params[prefix + "full"];
    case TnKind::Mps:
      return assemble_mps(spec, params, prefix);
    case TnKind::Mera:
      return assemble_mera(spec, params, prefix);
  }
  throw ConfigError("assemble_wt: unknown kind");
}

}  // namespace eelstm
