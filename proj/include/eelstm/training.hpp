#pragma once

// ADAM, mini-batch training with best-validation selection, evaluation,
// autoregressive rollout and checkpoints.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eelstm/cells.hpp"
#include "eelstm/dynamics.hpp"
#include "eelstm/params.hpp"

namespace eelstm {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-5;
};

struct OptimizerState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
};

OptimizerState adam_init(const ParamSet& params);

/// Bias-corrected ADAM update of every parameter, in place.
void adam_step(ParamSet& params, std::span<const Tensor> grads, OptimizerState& state,
               const AdamConfig& config);

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 64;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
  CellSpec cell;

  void validate() const;
};

struct Model {
  CellSpec spec;
  ParamSet params;
};

/// Fresh model for a seed.
Model init_model(const CellSpec& spec, std::uint64_t seed);

/// Batched one-step prediction [B,d] from zero state.
Tensor predict(const Model& model, std::span<const Tensor> inputs);

/// Mean squared error on the tape; returns the loss variable.
Var batch_loss(Tape& tape, const Model& model, const BoundParams& p, const Batch& batch);

/// One-step RMSE over windows (zero state per window).
double evaluate(const Model& model, const WindowedDataset& ds, std::span<const Window> windows);

/// Feeds predictions back: n_ahead predictions after consuming the inputs.
std::vector<Tensor> rollout(const Model& model, const Tensor& inputs, std::size_t n_ahead);

struct RolloutPredictions {
  std::vector<Window> windows;  // those extending to the horizon
  std::vector<Tensor> steps;    // steps[k] is [windows, d], k + 1 steps ahead
};

RolloutPredictions rollout_predictions(const Model& model, const WindowedDataset& ds,
                                       std::span<const Window> windows, std::size_t max_h);

/// RMSE of the k-th rollout prediction for every k in horizons, over the
/// windows whose orbit extends to the largest horizon.
std::vector<double> rollout_rmse(const Model& model, const WindowedDataset& ds,
                                 std::span<const Window> windows, std::span<const std::size_t> horizons);

struct CurvePoint {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // MSE
  double val_loss = 0.0;    // MSE
  double val_rmse = 0.0;
};

struct TrainResult {
  Model best;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<CurvePoint> curve;
};

TrainResult train(const TrainConfig& config, const WindowedDataset& ds);

// ---- checkpoints ----

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  Model model;
  Standardization standardization;
  std::size_t epoch = 0;
  double val_loss = 0.0;
  std::uint64_t seed = 0;
};

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

bool operator==(const CellSpec& a, const CellSpec& b);
bool operator==(const Checkpoint& a, const Checkpoint& b);

}  // namespace eelstm
