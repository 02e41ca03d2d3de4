#pragma once

// Chaotic maps and flows, series preprocessing, windowing and Lyapunov
// spectra.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eelstm/tensor.hpp"

namespace eelstm {

enum class SystemName { Logistic, Gauss, Henon, Chirikov, Lorenz, Thomas, Rossler, Duffing };
enum class SystemKind { Map, Flow };

std::string to_string(SystemName n);
/// Case-insensitive; unknown names throw ConfigError listing the valid ones.
SystemName parse_system_name(const std::string& s);
const std::vector<std::string>& system_names();

struct SystemDef {
  SystemName name = SystemName::Logistic;
  std::map<std::string, double> parameters;
  std::size_t dimension = 1;   // observed series width
  std::size_t state_size = 1;  // integrated / iterated state
  SystemKind kind = SystemKind::Map;
  bool second_order = false;
  std::vector<double> train_ic;
  std::vector<double> test_ic;  // maps only
  double t_max = 0.0;           // flows only

  double param(const std::string& key) const;
};

/// Default parameters and initial conditions. Overrides must name existing
/// parameters.
SystemDef make_system(SystemName name, const std::map<std::string, double>& overrides = {});

struct RawSeries {
  Tensor data;  // [T, d]
  double dt = 1.0;
  std::string origin;

  std::size_t length() const { return data.rank() == 2 ? data.extent(0) : 0; }
  std::size_t dim() const { return data.rank() == 2 ? data.extent(1) : 0; }
};

/// One application of the map to the full state.
std::vector<double> map_step(const SystemDef& sys, std::span<const double> state);

/// Rows x_0 .. x_n. For Henon the IC supplies x_0 and x_1.
RawSeries iterate_map(const SystemDef& sys, std::span<const double> ic, std::size_t n);

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// Right-hand side; Duffing uses the state (x, dx/dt).
std::vector<double> ode_rhs(const SystemDef& sys, std::span<const double> state, double t);
Rhs flow_rhs(const SystemDef& sys);

/// Number of RK4 substeps per sample and the substep length.
std::pair<std::size_t, double> rk4_substeps(double dt_sample);

/// One classical RK4 step of length h, in place.
void rk4_step(const Rhs& f, double t, double h, std::vector<double>& y);

/// Samples y(0), y(dt), ..., y(n dt) as rows of a [n+1, |y|] tensor.
Tensor integrate_rhs(const Rhs& f, std::span<const double> ic, double dt_sample, std::size_t n_steps);

/// Observed coordinates of a flow sampled every dt_sample.
RawSeries integrate(const SystemDef& sys, std::span<const double> ic, double dt_sample,
                    std::size_t n_steps);

/// Keeps rows 0, k, 2k, ...
RawSeries resample(const RawSeries& series, std::size_t stride);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> std;
};

/// Per-dimension z-score with the sample (n-1) standard deviation.
std::pair<RawSeries, Standardization> standardize(const RawSeries& series);

/// A window is input_steps + 1 consecutive rows of one orbit.
struct Window {
  std::uint32_t orbit = 0;
  std::uint32_t start = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

struct DatasetSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  std::size_t total() const { return train + validation + test; }
};

struct WindowedDataset {
  std::vector<Tensor> orbits;  // each [T, d]
  std::size_t input_steps = 1;
  std::vector<Window> train;
  std::vector<Window> validation;
  std::vector<Window> test;
  Standardization standardization;  // empty when not standardized
  /// Errors are reported in the units of the unstandardized series.
  bool raw_unit_errors = false;

  std::size_t dim() const { return orbits.empty() ? 0 : orbits.front().extent(1); }
  /// Rows start .. start + input_steps - 1.
  Tensor input(const Window& w) const;
  /// Row start + input_steps + ahead.
  Tensor target(const Window& w, std::size_t ahead = 0) const;
  /// Whether the orbit extends `ahead` rows past the window.
  bool has_future(const Window& w, std::size_t ahead) const;
  /// Factor applied to prediction errors in dimension j.
  double error_scale(std::size_t j) const {
    return raw_unit_errors && j < standardization.std.size() ? standardization.std[j] : 1.0;
  }
};

/// Batched view: inputs[k] is [B, d] for step k, target is [B, d].
struct Batch {
  std::vector<Tensor> inputs;
  Tensor target;
};
Batch make_batch(const WindowedDataset& ds, std::span<const Window> windows);

/// Windows of one orbit, in order.
std::vector<Window> orbit_windows(const Tensor& orbit, std::uint32_t orbit_id, std::size_t input_steps);

/// Training windows from one orbit (split 80/20 by seeded shuffle), test
/// windows from another.
WindowedDataset window_discrete(const RawSeries& train_series, const RawSeries& test_series,
                                std::size_t input_steps, std::uint64_t seed);

/// All windows from one orbit, randomly partitioned into the requested sizes.
/// Validation must be 20% of train + validation.
WindowedDataset window_continuous(const RawSeries& series, std::size_t input_steps,
                                  const DatasetSizes& sizes, std::uint64_t seed);

/// Two-column timestamp,value CSV; empty values are filled by linear
/// interpolation.
RawSeries ingest_csv(const std::string& path);
RawSeries parse_csv_series(const std::string& text, const std::string& origin);

/// [T,1] -> [floor(T/w), w].
RawSeries regroup(const RawSeries& series, std::size_t w);

struct LyapunovOptions {
  std::size_t n = 100000;       // iterations (maps) or time units (flows)
  std::size_t burn_in = 1000;   // same units as n
  double renorm_interval = 1.0; // flows: time between orthonormalizations
};

/// Spectrum in descending order, per iteration (maps) or per time unit (flows).
std::vector<double> lyapunov(const SystemDef& sys, std::span<const double> ic,
                             const LyapunovOptions& opt = {});

}  // namespace eelstm
