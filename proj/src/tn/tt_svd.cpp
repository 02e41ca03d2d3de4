#include <algorithm>

#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm {

TtChain tt_svd(const Tensor& t, std::size_t max_bond) {
  if (t.rank() < 2) throw RangeError("tt_svd: rank >= 2 required");
  if (max_bond < 1) throw RangeError("tt_svd: max_bond must be >= 1");
  const Shape& s = t.shape();
  TtChain chain;
  std::size_t r_prev = 1;
  Tensor rest = t.reshaped(Shape{1, t.size()});
  for (std::size_t l = 0; l + 1 < s.size(); ++l) {
    const std::size_t rows = r_prev * s[l];
    const Tensor m = rest.reshaped(Shape{rows, rest.size() / rows});
    const SvdResult d = svd(m);
    const std::size_t k = d.singular_values.size();
    const std::size_t r = std::min(max_bond, k);

    Tensor core(Shape{r_prev, s[l], r});
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < r; ++j) core[i * r + j] = d.u(i, j);
    }
    chain.cores.push_back(std::move(core));
    chain.discarded.emplace_back(d.singular_values.begin() + r, d.singular_values.end());

    const std::size_t cols = m.extent(1);
    Tensor next(Shape{r, cols});
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < cols; ++j) next(i, j) = d.singular_values[i] * d.vt(i, j);
    }
    rest = std::move(next);
    r_prev = r;
  }
  chain.cores.push_back(rest.reshaped(Shape{r_prev, s.back(), 1}));
  return chain;
}

Tensor tt_reconstruct(const TtChain& chain) {
  if (chain.cores.empty()) throw RangeError("tt_reconstruct: empty chain");
  Tensor t = chain.cores[0];
  for (std::size_t l = 1; l < chain.cores.size(); ++l) {
    const std::size_t ax[1] = {t.rank() - 1}, bx[1] = {0};
    t = contract(t, ax, chain.cores[l], bx);
  }
  Shape s(t.shape().begin() + 1, t.shape().end() - 1);
  return t.reshaped(s);
}

}  // namespace eelstm
