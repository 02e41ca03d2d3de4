#include <algorithm>
#include <cmath>

#include "eelstm/errors.hpp"
#include "eelstm/training.hpp"

namespace eelstm {

namespace {

constexpr std::size_t kEvalChunk = 256;

Var run_inputs(Tape& tape, CellRunner& runner, std::span<const Tensor> inputs) {
  if (inputs.empty()) throw ConfigError("model: at least one input step required");
  Var x{};
  for (const Tensor& in : inputs) x = runner.step(tape.constant(in));
  return x;
}

}  // namespace

Model init_model(const CellSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  return {spec, init_cell_params(spec, rng)};
}

Tensor predict(const Model& model, std::span<const Tensor> inputs) {
  if (inputs.empty()) throw ConfigError("predict: at least one input step required");
  Tape tape;
  const BoundParams bp(tape, model.params, false);
  CellRunner runner(model.spec, tape, bp, inputs.front().extent(0));
  return tape.value(run_inputs(tape, runner, inputs));
}

Var batch_loss(Tape& tape, const Model& model, const BoundParams& p, const Batch& batch) {
  CellRunner runner(model.spec, tape, p, batch.target.extent(0));
  const Var pred = run_inputs(tape, runner, batch.inputs);
  const Var diff = tape.sub(pred, tape.constant(batch.target));
  return tape.scale(tape.sum(tape.mul(diff, diff)), 1.0 / static_cast<double>(batch.target.size()));
}

double evaluate(const Model& model, const WindowedDataset& ds, std::span<const Window> windows) {
  if (windows.empty()) throw ConfigError("evaluate: empty window set");
  if (ds.dim() != model.spec.d) throw ShapeError("evaluate: model and data dimensions differ");
  double sse = 0.0;
  for (std::size_t b = 0; b < windows.size(); b += kEvalChunk) {
    const auto chunk = windows.subspan(b, std::min(kEvalChunk, windows.size() - b));
    const Batch batch = make_batch(ds, chunk);
    const Tensor pred = predict(model, batch.inputs);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double e = (pred[i] - batch.target[i]) * ds.error_scale(i % ds.dim());
      sse += e * e;
    }
  }
  return std::sqrt(sse / static_cast<double>(windows.size() * ds.dim()));
}

std::vector<Tensor> rollout(const Model& model, const Tensor& inputs, std::size_t n_ahead) {
  if (n_ahead < 1) throw ConfigError("rollout: n_ahead must be >= 1");
  if (inputs.rank() != 2 || inputs.extent(1) != model.spec.d) throw ShapeError("rollout: inputs must be [steps, d]");
  const std::size_t d = model.spec.d;
  std::vector<Tensor> steps;
  for (std::size_t k = 0; k < inputs.extent(0); ++k) {
    Tensor row(Shape{1, d});
    for (std::size_t j = 0; j < d; ++j) row[j] = inputs(k, j);
    steps.push_back(std::move(row));
  }
  Tape tape;
  const BoundParams bp(tape, model.params, false);
  CellRunner runner(model.spec, tape, bp, 1);
  Var x = run_inputs(tape, runner, steps);
  std::vector<Tensor> out{tape.value(x).reshaped(Shape{d})};
  while (out.size() < n_ahead) {
    x = runner.step(x);
    out.push_back(tape.value(x).reshaped(Shape{d}));
  }
  return out;
}

RolloutPredictions rollout_predictions(const Model& model, const WindowedDataset& ds,
                                       std::span<const Window> windows, std::size_t max_h) {
  if (max_h < 1) throw ConfigError("rollout: horizon must be >= 1");
  if (ds.dim() != model.spec.d) throw ShapeError("rollout: model and data dimensions differ");
  RolloutPredictions out;
  for (const Window& w : windows) {
    if (ds.has_future(w, max_h - 1)) out.windows.push_back(w);
  }
  if (out.windows.empty()) throw ConfigError("rollout: no window extends to horizon " + std::to_string(max_h));

  const std::size_t d = ds.dim(), n = out.windows.size();
  out.steps.assign(max_h, Tensor(Shape{n, d}));
  for (std::size_t b = 0; b < n; b += kEvalChunk) {
    const std::span<const Window> chunk(out.windows.data() + b, std::min(kEvalChunk, n - b));
    const Batch batch = make_batch(ds, chunk);
    Tape tape;
    const BoundParams bp(tape, model.params, false);
    CellRunner runner(model.spec, tape, bp, chunk.size());
    Var x = run_inputs(tape, runner, batch.inputs);
    for (std::size_t k = 0; k < max_h; ++k) {
      if (k > 0) x = runner.step(x);
      const Tensor& pred = tape.value(x);
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) out.steps[k](b + i, j) = pred(i, j);
      }
    }
  }
  return out;
}

std::vector<double> rollout_rmse(const Model& model, const WindowedDataset& ds,
                                 std::span<const Window> windows, std::span<const std::size_t> horizons) {
  if (horizons.empty()) throw ConfigError("rollout_rmse: empty horizon list");
  for (std::size_t h : horizons) {
    if (h < 1) throw ConfigError("rollout_rmse: horizons must be >= 1");
  }
  const std::size_t max_h = *std::max_element(horizons.begin(), horizons.end());
  const RolloutPredictions rp = rollout_predictions(model, ds, windows, max_h);
  const std::size_t d = ds.dim();
  std::vector<double> out;
  for (std::size_t h : horizons) {
    double sse = 0.0;
    for (std::size_t i = 0; i < rp.windows.size(); ++i) {
      const Tensor target = ds.target(rp.windows[i], h - 1);
      for (std::size_t j = 0; j < d; ++j) {
        const double e = (rp.steps[h - 1](i, j) - target[j]) * ds.error_scale(j);
        sse += e * e;
      }
    }
    out.push_back(std::sqrt(sse / static_cast<double>(rp.windows.size() * d)));
  }
  return out;
}

}  // namespace eelstm
