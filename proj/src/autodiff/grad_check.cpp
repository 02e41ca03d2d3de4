#include <algorithm>
#include <cmath>

#include "eelstm/autodiff.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

double evaluate(const LossBuilder& f, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.leaf(p));
  return tape.value(f(tape, vars)).item();
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& f, const std::vector<Tensor>& params, double step,
                           double tol) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& p : params) vars.push_back(tape.leaf(p));
  const Var loss = f(tape, vars);
  const Gradients grads = tape.backward(loss);

  GradCheckReport report;
  std::vector<Tensor> probe = params;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor& analytic = grads.wrt(vars[pi]);
    for (std::size_t i = 0; i < params[pi].size(); ++i) {
      const double x0 = params[pi][i];
      probe[pi][i] = x0 + step;
      const double up = evaluate(f, probe);
      probe[pi][i] = x0 - step;
      const double down = evaluate(f, probe);
      probe[pi][i] = x0;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (!(rel <= report.max_rel_error)) {
        report.max_rel_error = rel;
        report.worst_param = pi;
        report.worst_index = i;
      }
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace eelstm
