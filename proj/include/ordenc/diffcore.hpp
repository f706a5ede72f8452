#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ordenc/rng.hpp"

namespace ordenc::diff {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data).subspan(r * cols, cols);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

enum class Activation { relu, tanh };

std::string activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// Layer sizes from input dimension to class count, e.g. {10, 64, 64, 4},
/// plus the hidden activation. The final layer feeds a softmax.
struct ModelConfig {
  std::vector<std::size_t> layer_dims;
  Activation activation = Activation::relu;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  void validate() const;
};

struct Layer {
  Matrix weight;              // out x in
  std::vector<double> bias;   // out
};

/// Feed-forward classifier parameters. Weight layout per layer is row-major
/// out x in; flatten order is (weight, bias) per layer in layer order.
class ModelParams {
 public:
  ModelParams(ModelConfig config, std::vector<Layer> layers);

  /// Uniform fan-in init: weights and biases drawn from
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static ModelParams init(const ModelConfig& config, rng::Engine& engine);

  const ModelConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t param_count() const;
  void flatten(std::span<double> out) const;
  void unflatten(std::span<const double> in);

 private:
  ModelConfig config_;
  std::vector<Layer> layers_;
};

/// Per-layer intermediates kept for the backward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> pre_act;      // affine outputs
  Matrix probs;                     // softmax of the last pre-activation
};

/// Batched forward pass; rows of the result are softmax probabilities.
Matrix forward(const ModelParams& params, const Matrix& batch);
Matrix forward_cached(const ModelParams& params, const Matrix& batch,
                      ForwardCache& cache);

/// Mean over the batch of -sum_i y_i log(p_i + eps) with eps = 1e-12.
/// Both arguments must be row-stochastic within 1e-6 and non-negative.
double cross_entropy(const Matrix& prediction, const Matrix& target);

/// Exact gradient of cross_entropy with respect to the logits that produced
/// `probs` (batch-mean factor included).
Matrix cross_entropy_logit_grad(const Matrix& probs, const Matrix& target);

/// Gradient of cross_entropy with respect to the target distribution:
/// -log(p + eps) / B per entry.
Matrix cross_entropy_target_grad(const Matrix& probs);

struct ModelGrads {
  std::vector<Layer> layers;
  void flatten(std::span<double> out) const;
};

/// Backpropagates `dlogits` (gradient at the final pre-activation) through
/// the cached forward pass.
ModelGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const Matrix& dlogits);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam state over a flat parameter vector.
struct AdamState {
  AdamConfig config;
  std::size_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  AdamState(std::size_t param_count, AdamConfig cfg);
};

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  std::size_t coordinates_checked = 0;
};

/// Central-difference check of `analytic` against `loss` around `point`,
/// h = 1e-5, at most `max_coordinates` randomly sampled coordinates.
/// Throws on a non-finite loss value.
GradCheckResult grad_check(
    const std::function<double(std::span<const double>)>& loss,
    std::span<const double> point, std::span<const double> analytic,
    std::uint64_t seed, std::size_t max_coordinates = 200,
    double step_size = 1e-5);

/// Versioned plain-text tensor dump with a manifest line per layer.
void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams& params, std::uint64_t seed);
struct LoadedCheckpoint {
  ModelParams params;
  std::uint64_t seed;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ordenc::diff
