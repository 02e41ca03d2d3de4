#pragma once

// Recurrent cells: vanilla LSTM, tensorized LSTM (sites A-D), stacked LSTM,
// and the higher-order HO / HOT baselines.

#include <cstddef>
#include <string>
#include <vector>

#include "eelstm/autodiff.hpp"
#include "eelstm/params.hpp"
#include "eelstm/rng.hpp"
#include "eelstm/tensor_network.hpp"

namespace eelstm {

enum class CellKind { Vanilla, Tensorized, Stacked, HO, HOT };
enum class Site { A, B, C, D };
enum class OutputActivation { Identity, Tanh };

std::string to_string(CellKind k);
CellKind parse_cell_kind(const std::string& s);
std::string to_string(Site s);
Site parse_site(const std::string& s);
std::string to_string(OutputActivation a);
OutputActivation parse_output_activation(const std::string& s);

struct CellSpec {
  CellKind kind = CellKind::Vanilla;
  std::size_t h = 2;
  std::size_t d = 1;
  Site site = Site::A;
  TensorizerSpec tn;
  std::size_t depth = 2;  // Stacked
  std::size_t order = 1;  // HO / HOT history length L_h
  std::size_t power = 2;  // HOT tensor power P_h
  std::size_t bond = 2;   // HOT tensor-train rank
  OutputActivation output = OutputActivation::Identity;
  bool zero_gate_bias = false;  // i, m, o biases start at 0

  void validate() const;
};

/// Exact number of learnable scalars.
std::size_t count_parameters(const CellSpec& spec);

/// Fresh parameters: U(+-1/sqrt(fan_in)) affine maps, forget bias +1.
ParamSet init_cell_params(const CellSpec& spec, Rng& rng);

/// Gate name suffixes in storage order.
inline constexpr const char* kGateNames[4] = {"i", "m", "f", "o"};

struct CellState {
  std::vector<Tensor> s;        // per layer, h-vectors
  std::vector<Tensor> c;        // per layer
  std::vector<Tensor> history;  // HO/HOT: s_{t-1}, ..., s_{t-L_h}
};

/// Batched unrolling of one cell over a tape. State starts at zero.
class CellRunner {
 public:
  CellRunner(const CellSpec& spec, Tape& tape, const BoundParams& params, std::size_t batch);

  /// Consumes x_{t-1} [B,d], returns the prediction x_t [B,d].
  Var step(Var x_prev);

  /// Top-layer state and cell state.
  Var state() const { return s_.back(); }
  Var cell() const { return c_.back(); }

  /// Single-sample state exchange (batch 1).
  void load_state(const CellState& state);
  CellState snapshot() const;

 private:
  Var affine_gates(const std::string& prefix, Var input, std::size_t gate) const;
  Var hot_gate(std::size_t gate, Var x, Var v) const;
  Var lstm_layer(const std::string& prefix, Var input, std::size_t layer);

  const CellSpec& spec_;
  Tape& tape_;
  const BoundParams& p_;
  std::size_t batch_;
  Var ones_;
  std::vector<Var> s_;
  std::vector<Var> c_;
  std::vector<Var> history_;  // s_{t-1}, s_{t-2}, ... for HO/HOT
};

// ---- single-sample API ----

CellState initial_state(const CellSpec& spec);

struct StepResult {
  CellState state;
  Tensor x_pred;
};

/// One recurrent step for any cell kind.
StepResult cell_step(const CellSpec& spec, const ParamSet& params, const CellState& state,
                     const Tensor& x_prev);

// ---- Jacobian bound check ----

struct JacobianEntry {
  std::string name;
  double jacobian_norm = 0.0;  // operator infinity-norm, finite differences
  double bound = 0.0;
  bool holds = true;
};

struct JacobianReport {
  std::vector<JacobianEntry> entries;
  bool holds = true;
};

/// Finite-difference Jacobians of the output map w.r.t. s and of every gate
/// w.r.t. (x, s), checked against ||W||_inf (tanh / identity) or ||W||_inf / 4
/// (sigmoid). Vanilla and HO layouts.
JacobianReport jacobian_bound_check(const CellSpec& spec, const ParamSet& params,
                                    const Tensor& s, const Tensor& x, double tol = 1e-6);

/// Operator infinity-norm (max absolute row sum) of a matrix.
double operator_inf_norm(const Tensor& m);

}  // namespace eelstm
