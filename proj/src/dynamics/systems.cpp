#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "eelstm/dynamics.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double v) {
  double r = std::fmod(v, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace

const std::vector<std::string>& system_names() {
  static const std::vector<std::string> names{"logistic", "gauss",   "henon",   "chirikov",
                                              "lorenz",   "thomas",  "rossler", "duffing"};
  return names;
}

std::string to_string(SystemName n) { return system_names()[static_cast<std::size_t>(n)]; }

SystemName parse_system_name(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto& names = system_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == lower) return static_cast<SystemName>(i);
  }
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : "|") + n;
  throw ConfigError("unknown system '" + s + "' (expected " + valid + ")");
}

double SystemDef::param(const std::string& key) const {
  auto it = parameters.find(key);
  if (it == parameters.end()) throw ConfigError(to_string(name) + ": no parameter '" + key + "'");
  return it->second;
}

SystemDef make_system(SystemName name, const std::map<std::string, double>& overrides) {
  SystemDef s;
  s.name = name;
  switch (name) {
    case SystemName::Logistic:
      s.parameters = {{"r", 4.0}};
      s.train_ic = {0.61};
      s.test_ic = {0.11};
      break;
    case SystemName::Gauss:
      s.parameters = {{"alpha", 6.2}, {"beta", -0.55}};
      s.train_ic = {0.31};
      s.test_ic = {0.91};
      break;
    case SystemName::Henon:
      s.parameters = {{"a", 1.4}, {"b", 0.3}};
      s.second_order = true;
      s.state_size = 2;
      s.train_ic = {0.2, 0.3};
      s.test_ic = {0.5, 0.6};
      break;
    case SystemName::Chirikov:
      s.parameters = {{"K", 2.0}};
      s.dimension = s.state_size = 2;
      s.train_ic = {0.777, 0.555};
      s.test_ic = {0.333, 0.999};
      break;
    case SystemName::Lorenz:
      s.kind = SystemKind::Flow;
      s.parameters = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
      s.dimension = s.state_size = 3;
      s.train_ic = {0.0, 1.0, 0.0};
      s.t_max = 2500.0;
      break;
    case SystemName::Thomas:
      s.kind = SystemKind::Flow;
      s.parameters = {{"b", 0.1}};
      s.dimension = s.state_size = 3;
      s.train_ic = {0.0, 1.0, 0.0};
      s.t_max = 5000.0;
      break;
    case SystemName::Rossler:
      s.kind = SystemKind::Flow;
      s.parameters = {{"a", 0.1}, {"b", 0.1}, {"c", 14.0}};
      s.dimension = s.state_size = 3;
      s.train_ic = {0.0, 1.0, 0.0};
      s.t_max = 100000.0;
      break;
    case SystemName::Duffing:
      s.kind = SystemKind::Flow;
      s.parameters = {{"alpha", 1.0}, {"beta", 5.0}, {"delta", 0.02}, {"gamma", 8.0}, {"omega", 0.5}};
      s.second_order = true;
      s.state_size = 2;
      s.train_ic = {0.0, 1.0};
      s.t_max = 50000.0;
      break;
  }
  for (const auto& [k, v] : overrides) {
    if (!s.parameters.count(k)) throw ConfigError(to_string(name) + ": unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw ConfigError(to_string(name) + ": parameter '" + k + "' not finite");
    s.parameters[k] = v;
  }
  return s;
}

std::vector<double> map_step(const SystemDef& sys, std::span<const double> x) {
  if (x.size() != sys.state_size) throw ShapeError("map_step: state size mismatch");
  switch (sys.name) {
    case SystemName::Logistic: {
      const double r = sys.param("r");
      return {r * x[0] * (1.0 - x[0])};
    }
    case SystemName::Gauss:
      return {std::exp(-sys.param("alpha") * x[0] * x[0]) + sys.param("beta")};
    case SystemName::Henon:
      // state (x_n, x_{n-1})
      return {1.0 - sys.param("a") * x[0] * x[0] + sys.param("b") * x[1], x[0]};
    case SystemName::Chirikov: {
      const double p = wrap(x[0] + sys.param("K") * std::sin(x[1]));
      return {p, wrap(x[1] + p)};
    }
    default:
      throw ConfigError("map_step: " + to_string(sys.name) + " is a flow");
  }
}

RawSeries iterate_map(const SystemDef& sys, std::span<const double> ic, std::size_t n) {
  if (sys.kind != SystemKind::Map) throw ConfigError("iterate_map: " + to_string(sys.name) + " is a flow");
  if (ic.size() != sys.state_size) throw ShapeError("iterate_map: initial condition size mismatch");
  const std::size_t d = sys.dimension;
  Tensor out(Shape{n + 1, d});

  std::vector<double> state;
  std::size_t first = 0;
  if (sys.second_order) {
    if (n < 1) throw RangeError("iterate_map: Henon needs n >= 1");
    out(0, 0) = ic[0];
    out(1, 0) = ic[1];
    state = {ic[1], ic[0]};
    first = 2;
  } else {
    state.assign(ic.begin(), ic.end());
    for (std::size_t j = 0; j < d; ++j) out(0, j) = state[j];
    first = 1;
  }
  for (std::size_t t = first; t <= n; ++t) {
    state = map_step(sys, state);
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(state[j])) {
        throw NumericError("iterate_map: non-finite value at step " + std::to_string(t));
      }
      out(t, j) = state[j];
    }
  }
  std::string origin = to_string(sys.name) + " ic=(";
  for (std::size_t i = 0; i < ic.size(); ++i) origin += (i ? "," : "") + std::to_string(ic[i]);
  return {std::move(out), 1.0, origin + ")"};
}

Rhs flow_rhs(const SystemDef& sys) {
  switch (sys.name) {
    case SystemName::Lorenz: {
      const double s = sys.param("sigma"), r = sys.param("rho"), b = sys.param("beta");
      return [=](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = s * (y[1] - y[0]);
        dy[1] = y[0] * (r - y[2]) - y[1];
        dy[2] = y[0] * y[1] - b * y[2];
      };
    }
    case SystemName::Thomas: {
      const double b = sys.param("b");
      return [=](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = std::sin(y[1]) - b * y[0];
        dy[1] = std::sin(y[2]) - b * y[1];
        dy[2] = std::sin(y[0]) - b * y[2];
      };
    }
    case SystemName::Rossler: {
      const double a = sys.param("a"), b = sys.param("b"), c = sys.param("c");
      return [=](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = -y[1] - y[2];
        dy[1] = y[0] + a * y[1];
        dy[2] = b + y[2] * (y[0] - c);
      };
    }
    case SystemName::Duffing: {
      const double al = sys.param("alpha"), be = sys.param("beta"), de = sys.param("delta");
      const double ga = sys.param("gamma"), om = sys.param("omega");
      return [=](double t, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = ga * std::cos(om * t) - de * y[1] - al * y[0] - be * y[0] * y[0] * y[0];
      };
    }
    default:
      throw ConfigError("flow_rhs: " + to_string(sys.name) + " is a map");
  }
}

std::vector<double> ode_rhs(const SystemDef& sys, std::span<const double> y, double t) {
  if (y.size() != sys.state_size) throw ShapeError("ode_rhs: state size mismatch");
  std::vector<double> dy(y.size());
  flow_rhs(sys)(t, y, dy);
  return dy;
}

}  // namespace eelstm
