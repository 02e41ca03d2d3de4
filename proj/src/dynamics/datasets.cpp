#include <cmath>
#include <numeric>

#include "eelstm/dynamics.hpp"
#include "eelstm/errors.hpp"
#include "eelstm/rng.hpp"

namespace eelstm {

namespace {

// Split the shuffled pool into 80% train and 20% validation.
void split_pool(std::vector<Window> pool, Rng& rng, WindowedDataset& ds) {
  rng.shuffle(pool);
  const std::size_t n_val = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(pool.size())));
  ds.validation.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
  ds.train.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());
}

}  // namespace

Tensor WindowedDataset::input(const Window& w) const {
  const Tensor& o = orbits.at(w.orbit);
  const std::size_t d = o.extent(1);
  Tensor out(Shape{input_steps, d});
  for (std::size_t k = 0; k < input_steps; ++k) {
    for (std::size_t j = 0; j < d; ++j) out(k, j) = o(w.start + k, j);
  }
  return out;
}

bool WindowedDataset::has_future(const Window& w, std::size_t ahead) const {
  return w.start + input_steps + ahead < orbits.at(w.orbit).extent(0);
}

Tensor WindowedDataset::target(const Window& w, std::size_t ahead) const {
  if (!has_future(w, ahead)) throw RangeError("WindowedDataset::target: beyond the end of the orbit");
  const Tensor& o = orbits.at(w.orbit);
  const std::size_t d = o.extent(1), row = w.start + input_steps + ahead;
  Tensor out(Shape{d});
  for (std::size_t j = 0; j < d; ++j) out[j] = o(row, j);
  return out;
}

Batch make_batch(const WindowedDataset& ds, std::span<const Window> windows) {
  const std::size_t B = windows.size(), d = ds.dim();
  Batch b;
  b.inputs.assign(ds.input_steps, Tensor(Shape{B, d}));
  b.target = Tensor(Shape{B, d});
  for (std::size_t i = 0; i < B; ++i) {
    const Window& w = windows[i];
    const Tensor& o = ds.orbits.at(w.orbit);
    for (std::size_t k = 0; k <= ds.input_steps; ++k) {
      Tensor& dst = k < ds.input_steps ? b.inputs[k] : b.target;
      for (std::size_t j = 0; j < d; ++j) dst(i, j) = o(w.start + k, j);
    }
  }
  return b;
}

std::vector<Window> orbit_windows(const Tensor& orbit, std::uint32_t orbit_id, std::size_t input_steps) {
  if (input_steps < 1) throw ConfigError("windowing: input_steps must be >= 1");
  const std::size_t T = orbit.extent(0);
  if (T <= input_steps) {
    throw ConfigError("windowing: series of length " + std::to_string(T) + " too short for " +
                      std::to_string(input_steps) + " input steps");
  }
  std::vector<Window> out(T - input_steps);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = {orbit_id, static_cast<std::uint32_t>(s)};
  return out;
}

WindowedDataset window_discrete(const RawSeries& train_series, const RawSeries& test_series,
                                std::size_t input_steps, std::uint64_t seed) {
  if (train_series.dim() != test_series.dim()) throw ShapeError("window_discrete: dimension mismatch");
  WindowedDataset ds;
  ds.input_steps = input_steps;
  ds.orbits = {train_series.data, test_series.data};
  auto pool = orbit_windows(ds.orbits[0], 0, input_steps);
  ds.test = orbit_windows(ds.orbits[1], 1, input_steps);
  Rng rng(derive_seed(seed, 0x5e11));
  split_pool(std::move(pool), rng, ds);
  return ds;
}

WindowedDataset window_continuous(const RawSeries& series, std::size_t input_steps,
                                  const DatasetSizes& sizes, std::uint64_t seed) {
  const std::size_t pool_size = sizes.train + sizes.validation;
  if (pool_size == 0 || sizes.test == 0) throw ConfigError("window_continuous: sizes must be positive");
  if (static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(pool_size))) != sizes.validation) {
    throw ConfigError("window_continuous: validation must be 20% of train + validation");
  }
  WindowedDataset ds;
  ds.input_steps = input_steps;
  ds.orbits = {series.data};
  auto all = orbit_windows(ds.orbits[0], 0, input_steps);
  if (all.size() < sizes.total()) {
    throw ConfigError("window_continuous: requested " + std::to_string(sizes.total()) +
                      " windows but the series has " + std::to_string(all.size()));
  }
  Rng rng(derive_seed(seed, 0x5e12));
  rng.shuffle(all);
  ds.test.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(sizes.test));
  std::vector<Window> pool(all.begin() + static_cast<std::ptrdiff_t>(sizes.test),
                           all.begin() + static_cast<std::ptrdiff_t>(sizes.test + pool_size));
  ds.validation.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sizes.validation));
  ds.train.assign(pool.begin() + static_cast<std::ptrdiff_t>(sizes.validation), pool.end());
  return ds;
}

RawSeries regroup(const RawSeries& series, std::size_t w) {
  if (w < 1) throw RangeError("regroup: window length must be >= 1");
  if (series.dim() != 1) throw ShapeError("regroup: expected a one-dimensional series");
  const std::size_t rows = series.length() / w;
  RawSeries out{Tensor(Shape{rows, w}), series.dt * static_cast<double>(w), series.origin};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < w; ++j) out.data(r, j) = series.data(r * w + j, 0);
  }
  if (w > 1) out.origin += " regroup=" + std::to_string(w);
  return out;
}

}  // namespace eelstm
