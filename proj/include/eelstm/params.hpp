#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "eelstm/autodiff.hpp"
#include "eelstm/tensor.hpp"

namespace eelstm {

/// Named learnable tensors in insertion order.
class ParamSet {
 public:
  void add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  const Tensor& operator[](const std::string& name) const { return values_[index_of(name)]; }
  Tensor& operator[](const std::string& name) { return values_[index_of(name)]; }

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Tensor& value(std::size_t i) const { return values_.at(i); }
  Tensor& value(std::size_t i) { return values_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Total number of learnable scalars.
  std::size_t scalar_count() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A ParamSet recorded onto a tape, either as leaves or as constants.
class BoundParams {
 public:
  BoundParams(Tape& tape, const ParamSet& params, bool differentiable = true);
  /// Binds variables already on a tape, one per entry of `params`, in order.
  BoundParams(const ParamSet& params, std::vector<Var> vars);

  Var operator[](const std::string& name) const { return vars_[params_->index_of(name)]; }
  Var at(std::size_t i) const { return vars_.at(i); }
  const std::vector<Var>& vars() const noexcept { return vars_; }
  const ParamSet& params() const noexcept { return *params_; }

 private:
  const ParamSet* params_;
  std::vector<Var> vars_;
};

}  // namespace eelstm
