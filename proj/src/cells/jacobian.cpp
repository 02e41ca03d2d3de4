#include <algorithm>
#include <cmath>

#include "eelstm/cells.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

constexpr double kStep = 1e-6;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// act(W . (1, z)) for a row-major W [rows, 1 + |z|].
std::vector<double> affine(const Tensor& w, const std::vector<double>& z, int act) {
  const std::size_t rows = w.extent(0), cols = w.extent(1);
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = w(r, 0);
    for (std::size_t j = 1; j < cols; ++j) acc += w(r, j) * z[j - 1];
    out[r] = act == 0 ? acc : act == 1 ? std::tanh(acc) : sigmoid(acc);
  }
  return out;
}

// Finite-difference operator infinity-norm of z -> act(W . (1, z)).
double fd_norm(const Tensor& w, std::vector<double> z, int act) {
  const std::size_t rows = w.extent(0);
  std::vector<double> row_sums(rows, 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double z0 = z[j];
    z[j] = z0 + kStep;
    const auto up = affine(w, z, act);
    z[j] = z0 - kStep;
    const auto down = affine(w, z, act);
    z[j] = z0;
    for (std::size_t r = 0; r < rows; ++r) row_sums[r] += std::abs((up[r] - down[r]) / (2.0 * kStep));
  }
  return row_sums.empty() ? 0.0 : *std::max_element(row_sums.begin(), row_sums.end());
}

}  // namespace

double operator_inf_norm(const Tensor& m) {
  if (m.rank() != 2) throw ShapeError("operator_inf_norm: matrix required");
  double best = 0.0;
  for (std::size_t r = 0; r < m.extent(0); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.extent(1); ++j) s += std::abs(m(r, j));
    best = std::max(best, s);
  }
  return best;
}

JacobianReport jacobian_bound_check(const CellSpec& spec, const ParamSet& params, const Tensor& s,
                                    const Tensor& x, double tol) {
  spec.validate();
  if (spec.kind == CellKind::Stacked || spec.kind == CellKind::HOT ||
      (spec.kind == CellKind::Tensorized && spec.site == Site::C)) {
    throw ConfigError("jacobian_bound_check: gates must act on (1, x, s)");
  }
  if (s.size() != spec.h || x.size() != spec.d) throw ShapeError("jacobian_bound_check: size mismatch");

  JacobianReport report;
  auto record = [&](std::string name, double norm, double bound) {
    JacobianEntry e{std::move(name), norm, bound, norm <= bound + tol};
    report.holds = report.holds && e.holds;
    report.entries.push_back(std::move(e));
  };

  const Tensor& wx = params["out"];
  const int out_act = spec.output == OutputActivation::Tanh ? 1 : 0;
  record("out", fd_norm(wx, std::vector<double>(s.data().begin(), s.data().end()), out_act),
         operator_inf_norm(wx));

  std::vector<double> z(x.data().begin(), x.data().end());
  z.insert(z.end(), s.data().begin(), s.data().end());
  const Tensor& wi = params["gate.i"];
  z.resize(wi.extent(1) - 1, 0.0);  // older history entries are zero
  for (const char* g : kGateNames) {
    const Tensor& w = params[std::string("gate.") + g];
    const bool is_tanh = std::string(g) == "m";
    const double factor = is_tanh ? 1.0 : 0.25;
    record(std::string("gate.") + g, fd_norm(w, z, is_tanh ? 1 : 2), factor * operator_inf_norm(w));
  }
  return report;
}

}  // namespace eelstm
