#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ordenc/synthdata.hpp"

namespace ordenc::harness {

enum class Scheme { onehot, sord_linear, sord_circular, plsord, learned };

std::string scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

/// One experiment: a label-encoding scheme with its hyperparameters, the
/// synthetic data configuration, and the training protocol. Parsed from a
/// flat key = value text file; unknown keys are a hard error.
struct ExperimentConfig {
  Scheme scheme = Scheme::onehot;
  std::optional<double> scale;            // required for sord_* and plsord
  double target_mass = 0.855;             // learned scheme
  std::optional<std::vector<double>> positions;  // plsord candidate positions

  synth::SynthConfig synth;               // synth.seed is the data seed
  std::vector<std::size_t> train_sizes = {200, 400, 800, 1600, 3200};
  std::optional<std::size_t> train_size;  // single-run subcommand only
  std::size_t steps = 3000;
  std::size_t checkpoint_interval = 50;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;  // desk-scale default; see README
  std::vector<std::size_t> hidden_dims = {64, 64};
  std::size_t val_per_class = 250;
  std::size_t test_per_class = 1000;

  std::size_t num_classes() const { return synth.num_classes; }
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical serialization: every effective key in a fixed order. Parsing
/// the echo reproduces the config exactly.
std::string config_echo(const ExperimentConfig& config);

}  // namespace ordenc::harness
