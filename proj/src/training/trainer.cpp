#include <cmath>
#include <limits>

#include "eelstm/errors.hpp"
#include "eelstm/training.hpp"

namespace eelstm {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("train: beta1 and beta2 must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("train: epsilon must be > 0");
  if (clip_norm < 0.0) throw ConfigError("train: clip_norm must be >= 0");
  cell.validate();
}

namespace {

double mse_of(const Model& model, const WindowedDataset& ds, std::span<const Window> windows) {
  const double r = evaluate(model, ds, windows);
  return r * r;
}

void clip(std::vector<Tensor>& grads, double max_norm) {
  double ss = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.data()) ss += v * v;
  }
  const double norm = std::sqrt(ss);
  if (norm <= max_norm) return;
  const double s = max_norm / norm;
  for (Tensor& g : grads) {
    for (double& v : g.data()) v *= s;
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const WindowedDataset& ds) {
  config.validate();
  if (ds.train.empty() || ds.validation.empty()) throw ConfigError("train: empty train or validation split");
  if (ds.dim() != config.cell.d) {
    throw ShapeError("train: cell d=" + std::to_string(config.cell.d) + " but data has " +
                     std::to_string(ds.dim()) + " dimensions");
  }

  Model model = init_model(config.cell, config.seed);
  OptimizerState opt = adam_init(model.params);
  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<Window> order = ds.train;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 1000 + epoch));
    rng.shuffle(order);
    double weighted = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::span<const Window> chunk(order.data() + b, std::min(config.batch_size, order.size() - b));
      const Batch batch = make_batch(ds, chunk);
      Tape tape;
      const BoundParams bp(tape, model.params);
      const Var loss = batch_loss(tape, model, bp, batch);
      const double value = tape.value(loss).item();
      if (!std::isfinite(value)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b / config.batch_size + 1));
      }
      const Gradients g = tape.backward(loss);
      std::vector<Tensor> grads;
      grads.reserve(bp.vars().size());
      for (Var v : bp.vars()) grads.push_back(g.wrt(v));
      if (config.clip_norm > 0.0) clip(grads, config.clip_norm);
      adam_step(model.params, grads, opt, config.adam);
      weighted += value * static_cast<double>(chunk.size());
    }
    CurvePoint pt;
    pt.epoch = epoch;
    pt.train_loss = weighted / static_cast<double>(order.size());
    pt.val_loss = mse_of(model, ds, ds.validation);
    pt.val_rmse = std::sqrt(pt.val_loss);
    if (!std::isfinite(pt.val_loss)) {
      throw NumericError("train: non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.curve.push_back(pt);
    if (pt.val_loss < result.best_val_loss) {
      result.best_val_loss = pt.val_loss;
      result.best_epoch = epoch;
      result.best = model;
    }
  }
  return result;
}

}  // namespace eelstm
