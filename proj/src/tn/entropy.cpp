#include <algorithm>
#include <cmath>

#include "eelstm/errors.hpp"
#include "eelstm/linalg.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm {

namespace {

constexpr double kShannonThreshold = 1e-9;

// e^{((1-p)/p) S_p(X)} ||X||_1, which is 0 for the zero matrix.
double weighted_trace_norm(const std::vector<double>& sv, double p) {
  double total = 0.0;
  for (double s : sv) total += s;
  if (total == 0.0) return 0.0;
  return std::exp((1.0 - p) / p * renyi_from_singular_values(sv, p)) * total;
}

}  // namespace

double renyi_from_singular_values(const std::vector<double>& sv, double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("renyi entropy: alpha must be >= 1");
  double total = 0.0;
  for (double s : sv) total += s;
  if (!(total > 0.0)) throw DomainError("renyi entropy: zero tensor");
  if (std::abs(alpha - 1.0) < kShannonThreshold) {
    double h = 0.0;
    for (double s : sv) {
      const double q = s / total;
      if (q > 0.0) h -= q * std::log(q);
    }
    return h;
  }
  double acc = 0.0;
  for (double s : sv) acc += std::pow(s / total, alpha);
  return std::log(acc) / (1.0 - alpha);
}

double renyi_entropy(const Tensor& t, std::size_t cut, double alpha) {
  return renyi_from_singular_values(singular_values(matricize(t, cut)), alpha);
}

std::vector<std::pair<std::size_t, double>> ee_scaling_profile(const TensorizerSpec& spec,
                                                               const ParamSet& params,
                                                               double alpha,
                                                               const std::string& prefix) {
  const Tensor w = assemble_wt(spec, params, prefix);
  const std::size_t h = w.extent(0);
  const std::size_t row = w.size() / h;
  const Shape row_shape(w.shape().begin() + 1, w.shape().end());

  std::vector<std::pair<std::size_t, double>> out;
  if (spec.L < 2) return out;
  for (std::size_t l = 1; l < spec.L; ++l) out.emplace_back(l, 0.0);
  bool any = false;
  for (std::size_t r = 0; r < h; ++r) {
    std::vector<double> v(w.data().begin() + r * row, w.data().begin() + (r + 1) * row);
    const Tensor t(row_shape, std::move(v));
    if (frobenius_norm(t) == 0.0) continue;
    any = true;
    for (std::size_t l = 1; l < spec.L; ++l) {
      out[l - 1].second = std::max(out[l - 1].second, renyi_entropy(t, l, alpha));
    }
  }
  if (!any) throw DomainError("ee_scaling_profile: assembled tensor is zero");
  return out;
}

LogFit fit_log_scaling(const std::vector<std::pair<std::size_t, double>>& profile) {
  if (profile.size() < 2) throw DomainError("fit_log_scaling: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(profile.size());
  for (const auto& [l, s] : profile) {
    const double x = std::log(static_cast<double>(l));
    sx += x;
    sy += s;
    sxx += x * x;
    sxy += x * s;
  }
  const double den = n * sxx - sx * sx;
  LogFit fit;
  fit.c_prime = den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
  fit.c = (sy - fit.c_prime * sx) / n;
  return fit;
}

BoundCheck worst_case_bound_check(const Tensor& w, const Tensor& w_approx, std::size_t cut,
                                  double p) {
  if (!(p >= 1.0)) throw DomainError("worst_case_bound_check: p must be >= 1");
  if (w.shape() != w_approx.shape()) throw ShapeError("worst_case_bound_check: shape mismatch");
  const Tensor a = matricize(w, cut);
  const Tensor b = matricize(w_approx, cut);
  BoundCheck r;
  r.lhs = schatten_p_norm(a - b, p);
  r.rhs = std::abs(weighted_trace_norm(singular_values(a), p) -
                   weighted_trace_norm(singular_values(b), p));
  r.holds = r.lhs >= r.rhs - 1e-9;
  return r;
}

}  // namespace eelstm
