#pragma once

// Declarative experiment configs and the generate / train / eval / entropy /
// lyapunov commands.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eelstm/cells.hpp"
#include "eelstm/dynamics.hpp"
#include "eelstm/training.hpp"

namespace eelstm::cli {

struct SystemBlock {
  std::string name;  // a system name, or "csv"
  std::map<std::string, double> parameters;
  std::optional<std::vector<double>> train_ic;
  std::optional<std::vector<double>> test_ic;
  double dt = 1.0;
  std::size_t stride = 1;
  std::string csv_path;
  std::size_t regroup = 1;
};

struct DatasetBlock {
  std::size_t input_steps = 1;
  DatasetSizes sizes;
  std::optional<bool> standardize;  // default: flows and CSV yes, maps no
};

struct NamedModel {
  std::string name;
  CellSpec spec;
};

struct TrainingBlock {
  AdamConfig adam;
  std::size_t batch_size = 64;
  std::size_t epochs = 1;
  double clip_norm = 0.0;
  std::size_t replicates = 1;
};

struct ExperimentConfig {
  std::optional<SystemBlock> system;
  std::string dataset_path;  // previously generated dataset directory
  DatasetBlock dataset;
  std::vector<NamedModel> models;
  TrainingBlock training;
  std::vector<std::size_t> horizons{1};
  std::vector<double> alphas{1.0, 2.0};
  std::uint64_t seed = 1;
  std::string output = "out";
};

/// Parses and validates; every problem is reported in one ConfigError.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text of the config (output directory excluded).
std::string canonical_config(const ExperimentConfig& c);
/// FNV-1a 64 of canonical_config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Dataset described by the config's system and dataset blocks.
WindowedDataset build_dataset(const ExperimentConfig& c);

/// Training seed of replicate r.
std::uint64_t replicate_seed(const ExperimentConfig& c, std::size_t r);

TrainConfig train_config(const ExperimentConfig& c, const CellSpec& spec, std::uint64_t seed);

/// Entry point: argv without the program name. Returns the exit code.
int run(const std::vector<std::string>& args);

/// Maps an exception onto 2 (config), 3 (numeric) or 4 (I/O).
int exit_code_for(const std::exception& e);

}  // namespace eelstm::cli
