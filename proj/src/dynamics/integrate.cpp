#include <cmath>
#include <sstream>

#include "eelstm/dynamics.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

constexpr double kMaxSubstep = 0.01;

}  // namespace

std::pair<std::size_t, double> rk4_substeps(double dt_sample) {
  if (!(dt_sample > 0.0) || !std::isfinite(dt_sample)) throw RangeError("integrate: dt must be > 0");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(dt_sample / kMaxSubstep - 1e-9)));
  return {n, dt_sample / static_cast<double>(n)};
}

void rk4_step(const Rhs& f, double t, double h, std::vector<double>& y) {
  const std::size_t n = y.size();
  thread_local std::vector<double> k1, k2, k3, k4, tmp;
  k1.resize(n), k2.resize(n), k3.resize(n), k4.resize(n), tmp.resize(n);
  f(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  f(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  f(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  f(t + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

Tensor integrate_rhs(const Rhs& f, std::span<const double> ic, double dt_sample, std::size_t n_steps) {
  const auto [sub, h] = rk4_substeps(dt_sample);
  const std::size_t d = ic.size();
  Tensor out(Shape{n_steps + 1, d});
  std::vector<double> y(ic.begin(), ic.end());
  for (std::size_t j = 0; j < d; ++j) out(0, j) = y[j];
  for (std::size_t s = 1; s <= n_steps; ++s) {
    const double t0 = static_cast<double>(s - 1) * dt_sample;
    for (std::size_t k = 0; k < sub; ++k) rk4_step(f, t0 + static_cast<double>(k) * h, h, y);
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(y[j])) {
        std::ostringstream msg;
        msg << "integrate: non-finite state at t=" << static_cast<double>(s) * dt_sample;
        throw NumericError(msg.str());
      }
      out(s, j) = y[j];
    }
  }
  return out;
}

RawSeries integrate(const SystemDef& sys, std::span<const double> ic, double dt_sample,
                    std::size_t n_steps) {
  if (sys.kind != SystemKind::Flow) throw ConfigError("integrate: " + to_string(sys.name) + " is a map");
  if (ic.size() != sys.state_size) throw ShapeError("integrate: initial condition size mismatch");
  Tensor full = integrate_rhs(flow_rhs(sys), ic, dt_sample, n_steps);
  RawSeries out;
  out.dt = dt_sample;
  out.origin = to_string(sys.name) + " dt=" + std::to_string(dt_sample);
  if (sys.dimension == sys.state_size) {
    out.data = std::move(full);
  } else {
    // observed coordinates are the leading ones (Duffing: x)
    out.data = Tensor(Shape{n_steps + 1, sys.dimension});
    for (std::size_t t = 0; t <= n_steps; ++t) {
      for (std::size_t j = 0; j < sys.dimension; ++j) out.data(t, j) = full(t, j);
    }
  }
  return out;
}

RawSeries resample(const RawSeries& series, std::size_t stride) {
  if (stride < 1) throw RangeError("resample: stride must be >= 1");
  const std::size_t T = series.length(), d = series.dim();
  const std::size_t n = T == 0 ? 0 : (T - 1) / stride + 1;
  RawSeries out{Tensor(Shape{n, d}), series.dt * static_cast<double>(stride), series.origin};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out.data(i, j) = series.data(i * stride, j);
  }
  if (stride > 1) out.origin += " stride=" + std::to_string(stride);
  return out;
}

std::pair<RawSeries, Standardization> standardize(const RawSeries& series) {
  const std::size_t T = series.length(), d = series.dim();
  if (T < 2) throw RangeError("standardize: need at least 2 rows");
  Standardization st{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += series.data(t, j);
    mean /= static_cast<double>(T);
    double ss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double e = series.data(t, j) - mean;
      ss += e * e;
    }
    const double sd = std::sqrt(ss / static_cast<double>(T - 1));
    if (!(sd > 0.0)) throw DomainError("standardize: zero variance in dimension " + std::to_string(j));
    st.mean[j] = mean;
    st.std[j] = sd;
  }
  RawSeries out{Tensor(Shape{T, d}), series.dt, series.origin};
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < d; ++j) out.data(t, j) = (series.data(t, j) - st.mean[j]) / st.std[j];
  }
  return {std::move(out), std::move(st)};
}

}  // namespace eelstm
