#include "eelstm/params.hpp"

#include "eelstm/errors.hpp"

namespace eelstm {

void ParamSet::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ConfigError("ParamSet: duplicate parameter '" + name + "'");
  index_.emplace(name, values_.size());
  names_.push_back(name);
  values_.push_back(std::move(value));
}

std::size_t ParamSet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw RangeError("ParamSet: unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

BoundParams::BoundParams(Tape& tape, const ParamSet& params, bool differentiable)
    : params_(&params) {
  vars_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    vars_.push_back(differentiable ? tape.leaf(params.value(i)) : tape.constant(params.value(i)));
  }
}

BoundParams::BoundParams(const ParamSet& params, std::vector<Var> vars) : params_(&params), vars_(std::move(vars)) {
  if (vars_.size() != params.size()) {
    throw ShapeError("BoundParams: " + std::to_string(vars_.size()) + " variables for " +
                     std::to_string(params.size()) + " parameters");
  }
}

}  // namespace eelstm
