#include <cmath>

#include "eelstm/errors.hpp"
#include "eelstm/training.hpp"

namespace eelstm {

OptimizerState adam_init(const ParamSet& params) {
  OptimizerState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.emplace_back(params.value(i).shape());
    s.v.emplace_back(params.value(i).shape());
  }
  return s;
}

void adam_step(ParamSet& params, std::span<const Tensor> grads, OptimizerState& state,
               const AdamConfig& c) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw ShapeError("adam_step: parameter / gradient count mismatch");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = params.value(i);
    const Tensor& g = grads[i];
    if (g.shape() != w.shape()) throw ShapeError("adam_step: gradient shape mismatch for " + params.name(i));
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    auto wd = w.data();
    for (std::size_t k = 0; k < wd.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mh = m[k] / corr1;
      const double vh = v[k] / corr2;
      wd[k] -= c.learning_rate * mh / (std::sqrt(vh) + c.epsilon);
    }
  }
}

}  // namespace eelstm
