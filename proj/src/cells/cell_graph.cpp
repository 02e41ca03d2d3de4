#include <string>

#include "eelstm/cells.hpp"
#include "eelstm/errors.hpp"

namespace eelstm {

namespace {

std::size_t layer_count(const CellSpec& s) { return s.kind == CellKind::Stacked ? s.depth : 1; }

bool has_history(const CellSpec& s) { return s.kind == CellKind::HO || s.kind == CellKind::HOT; }

bool tensorized_at(const CellSpec& s, Site site) {
  return s.kind == CellKind::Tensorized && s.site == site;
}

}  // namespace

CellRunner::CellRunner(const CellSpec& spec, Tape& tape, const BoundParams& params,
                       std::size_t batch)
    : spec_(spec), tape_(tape), p_(params), batch_(batch) {
  spec_.validate();
  ones_ = tape_.constant(Tensor(Shape{batch, 1}, 1.0));
  const Var zero = tape_.constant(Tensor(Shape{batch, spec.h}));
  s_.assign(layer_count(spec), zero);
  c_.assign(layer_count(spec), zero);
  if (has_history(spec)) history_.assign(spec.order, zero);
}

void CellRunner::load_state(const CellState& st) {
  if (batch_ != 1) throw ShapeError("CellRunner::load_state: batch must be 1");
  auto as_row = [&](const Tensor& v) {
    if (v.size() != spec_.h) throw ShapeError("CellRunner::load_state: state size mismatch");
    return tape_.constant(v.reshaped(Shape{1, spec_.h}));
  };
  if (st.s.size() != s_.size() || st.c.size() != c_.size() || st.history.size() != history_.size()) {
    throw ShapeError("CellRunner::load_state: layer or history count mismatch");
  }
  for (std::size_t i = 0; i < s_.size(); ++i) {
    s_[i] = as_row(st.s[i]);
    c_[i] = as_row(st.c[i]);
  }
  for (std::size_t i = 0; i < history_.size(); ++i) history_[i] = as_row(st.history[i]);
}

CellState CellRunner::snapshot() const {
  CellState st;
  auto flat = [&](Var v) { return tape_.value(v).reshaped(Shape{tape_.value(v).size()}); };
  for (Var v : s_) st.s.push_back(flat(v));
  for (Var v : c_) st.c.push_back(flat(v));
  for (Var v : history_) st.history.push_back(flat(v));
  return st;
}

Var CellRunner::affine_gates(const std::string& prefix, Var input, std::size_t gate) const {
  return tape_.contract(input, p_[prefix + "gate." + kGateNames[gate]], {{1, 1}});
}

Var CellRunner::hot_gate(std::size_t gate, Var x, Var v) const {
  const std::string base = std::string("gate.") + kGateNames[gate];
  Var env = tape_.contract(v, p_[base + ".core0"], {{1, 1}});  // [B,D,D]
  for (std::size_t k = 1; k < spec_.power; ++k) {
    const Var m = tape_.contract(v, p_[base + ".core" + std::to_string(k)], {{1, 1}});
    env = tape_.contract(env, m, {{2, 1}}, {{0, 0}});
  }
  const Var tt = tape_.contract(env, p_[base + ".w0"], {{1, 2}, {2, 1}});
  return tape_.add(tape_.contract(x, p_[base + ".x"], {{1, 1}}), tt);
}

Var CellRunner::lstm_layer(const std::string& prefix, Var input, std::size_t layer) {
  const Var s_prev = s_[layer];
  const Var c_prev = c_[layer];

  Var pre[4];
  if (spec_.kind == CellKind::HOT) {
    std::vector<Var> parts{ones_};
    parts.insert(parts.end(), history_.begin(), history_.end());
    const Var v = tape_.concat(parts, 1);
    for (std::size_t g = 0; g < 4; ++g) pre[g] = hot_gate(g, input, v);
  } else {
    std::vector<Var> parts{ones_, input};
    if (spec_.kind == CellKind::HO) {
      parts.insert(parts.end(), history_.begin(), history_.end());
    } else if (tensorized_at(spec_, Site::C)) {
      parts.push_back(tn_chain(tape_, p_, spec_.tn, s_prev));
    } else {
      parts.push_back(s_prev);
    }
    const Var z = tape_.concat(parts, 1);
    for (std::size_t g = 0; g < 4; ++g) pre[g] = affine_gates(prefix, z, g);
  }

  const Var gi = tape_.sigmoid(pre[0]);
  const Var gm = tape_.tanh(pre[1]);
  const Var gf = tape_.sigmoid(pre[2]);
  const Var go = tape_.sigmoid(pre[3]);

  const Var carry = tensorized_at(spec_, Site::B) ? tn_chain(tape_, p_, spec_.tn, c_prev) : c_prev;
  const Var c = tape_.add(tape_.mul(gf, carry), tape_.mul(gi, gm));
  const Var squashed = tensorized_at(spec_, Site::A) ? tn_chain(tape_, p_, spec_.tn, c) : tape_.tanh(c);
  const Var s = tape_.mul(go, squashed);

  s_[layer] = s;
  c_[layer] = c;
  if (!history_.empty()) {
    history_.pop_back();
    history_.insert(history_.begin(), s);
  }
  return s;
}

Var CellRunner::step(Var x_prev) {
  const Shape& xs = tape_.shape(x_prev);
  if (xs.size() != 2 || xs[0] != batch_ || xs[1] != spec_.d) {
    throw ShapeError("CellRunner::step: expected input [" + std::to_string(batch_) + "," +
                     std::to_string(spec_.d) + "], got " + shape_string(xs));
  }
  Var input = x_prev;
  for (std::size_t l = 0; l < s_.size(); ++l) {
    const std::string prefix = spec_.kind == CellKind::Stacked ? "l" + std::to_string(l) + "." : "";
    input = lstm_layer(prefix, input, l);
  }
  Var top = s_.back();
  if (tensorized_at(spec_, Site::D)) top = tn_chain(tape_, p_, spec_.tn, top);
  const Var parts[2] = {ones_, top};
  Var x = tape_.contract(tape_.concat(parts, 1), p_["out"], {{1, 1}});
  if (spec_.output == OutputActivation::Tanh) x = tape_.tanh(x);
  return x;
}

CellState initial_state(const CellSpec& spec) {
  spec.validate();
  CellState st;
  st.s.assign(layer_count(spec), Tensor(Shape{spec.h}));
  st.c.assign(layer_count(spec), Tensor(Shape{spec.h}));
  if (has_history(spec)) st.history.assign(spec.order, Tensor(Shape{spec.h}));
  return st;
}

StepResult cell_step(const CellSpec& spec, const ParamSet& params, const CellState& state,
                     const Tensor& x_prev) {
  if (x_prev.size() != spec.d) throw ShapeError("cell_step: input size mismatch");
  Tape tape;
  const BoundParams bp(tape, params, false);
  CellRunner runner(spec, tape, bp, 1);
  runner.load_state(state);
  const Var x = runner.step(tape.constant(x_prev.reshaped(Shape{1, spec.d})));
  return {runner.snapshot(), tape.value(x).reshaped(Shape{spec.d})};
}

}  // namespace eelstm
