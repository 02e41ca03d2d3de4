#include "support.hpp"

#include "eelstm/training.hpp"

namespace eelstm::test {

GradCheckReport cell_grad_check(const CellSpec& spec, std::uint64_t seed, std::size_t steps, double step,
                                double tol) {
  Rng rng(seed);
  const ParamSet ps = init_cell_params(spec, rng);
  std::vector<Tensor> values;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Tensor v = ps.value(i);
    // move off the structured initial point
    for (double& x : v.data()) x += rng.uniform(-0.5, 0.5);
    values.push_back(std::move(v));
  }
  const std::size_t batch = 2;
  Batch b;
  for (std::size_t k = 0; k < steps; ++k) b.inputs.push_back(rng.uniform_tensor({batch, spec.d}, -1.0, 1.0));
  b.target = rng.uniform_tensor({batch, spec.d}, -1.0, 1.0);
  const Model model{spec, ps};
  return grad_check(
      [&](Tape& tape, std::span<const Var> vars) {
        const BoundParams bp(ps, std::vector<Var>(vars.begin(), vars.end()));
        return batch_loss(tape, model, bp, b);
      },
      values, step, tol);
}

CellSpec vanilla(std::size_t h, std::size_t d) {
  CellSpec s;
  s.h = h;
  s.d = d;
  return s;
}

CellSpec tensorized(std::size_t h, std::size_t d, TnKind kind, std::size_t L, std::size_t P,
                    std::vector<std::size_t> dims) {
  CellSpec s = vanilla(h, d);
  s.kind = CellKind::Tensorized;
  s.tn.kind = kind;
  s.tn.L = L;
  s.tn.P = P;
  s.tn.dims = std::move(dims);
  return s;
}

}  // namespace eelstm::test
