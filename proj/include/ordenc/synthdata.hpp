#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ordenc/diffcore.hpp"
#include "ordenc/label_codec.hpp"

namespace ordenc::synth {

enum class NoiseStructure { symmetric_adjacent, forward_adjacent };

std::string noise_structure_name(NoiseStructure n);
NoiseStructure parse_noise_structure(std::string_view name);

struct SynthConfig {
  std::size_t num_classes = 4;
  std::size_t samples_per_class = 2050;
  double angle_stddev = 0.35;          // radians
  std::size_t distractor_dims = 24;
  double label_noise = 0.0;            // p in [0, 1)
  NoiseStructure noise_structure = NoiseStructure::forward_adjacent;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

/// Samples live on a noisy circle: class c draws an angle around its center
/// (a hidden random shuffling of K equally spaced angles, so class index
/// does not reveal angular order), giving features (cos, sin) plus
/// standard-normal distractor dimensions. Labels are corrupted at rate
/// label_noise toward an angular neighbor. Sample order is class-major.
struct Dataset {
  SynthConfig config;
  diff::Matrix features;                  // N x (2 + distractor_dims)
  std::vector<std::size_t> labels;        // emitted (possibly noisy)
  std::vector<std::size_t> clean_labels;  // pre-noise ground truth
  codec::RankAssignment true_ordering;    // center angle of each class

  std::size_t num_samples() const { return features.rows; }
  std::size_t feature_dim() const { return features.cols; }

  /// Class whose center is one step forward (counterclockwise) of `cls`.
  std::size_t angular_successor(std::size_t cls) const;
};

/// Deterministic per seed.
Dataset generate(const SynthConfig& config);

/// Error rate of the optimal classifier for the angular mixture against the
/// emitted labels (distractors carry no signal), computed by fine angular
/// quadrature; the degenerate stddev = 0 case is handled analytically.
double bayes_error(const SynthConfig& config);

/// Columnar text format: config echo header, then one sample per line
/// (features, emitted label, clean label).
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::string dataset_to_text(const Dataset& dataset);
Dataset dataset_from_text(const std::string& text);

}  // namespace ordenc::synth
