#include "ordenc/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ordenc/numeric.hpp"
#include "ordenc/textio.hpp"

namespace ordenc::diff {

namespace {

constexpr double kRowSumTolerance = 1e-6;

void check_probability_matrix(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double v = m(r, c);
      if (!(v >= 0.0)) {
        throw std::domain_error(std::string(what) +
                                ": entries must be non-negative and finite");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument(std::string(what) +
                                  ": row does not sum to 1");
    }
  }
}

double activate(Activation a, double z) {
  return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

double activate_grad(Activation a, double z) {
  if (a == Activation::relu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

}  // namespace

std::string activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation: '" + std::string(name) +
                              "'");
}

void ModelConfig::validate() const {
  if (layer_dims.size() < 2) {
    throw std::invalid_argument("ModelConfig: need input and output dims");
  }
  for (const std::size_t d : layer_dims) {
    if (d == 0) {
      throw std::invalid_argument("ModelConfig: zero layer dimension");
    }
  }
  if (layer_dims.back() < 2) {
    throw std::invalid_argument("ModelConfig: need at least 2 classes");
  }
}

ModelParams::ModelParams(ModelConfig config, std::vector<Layer> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() != config_.layer_dims.size() - 1) {
    throw std::invalid_argument("ModelParams: layer count mismatch");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::size_t in = config_.layer_dims[l];
    const std::size_t out = config_.layer_dims[l + 1];
    const Layer& layer = layers_[l];
    if (layer.weight.rows != out || layer.weight.cols != in ||
        layer.bias.size() != out) {
      throw std::invalid_argument("ModelParams: layer shape mismatch");
    }
    for (const double w : layer.weight.data) {
      if (!std::isfinite(w)) {
        throw std::invalid_argument("ModelParams: non-finite weight");
      }
    }
    for (const double b : layer.bias) {
      if (!std::isfinite(b)) {
        throw std::invalid_argument("ModelParams: non-finite bias");
      }
    }
  }
}

ModelParams ModelParams::init(const ModelConfig& config, rng::Engine& engine) {
  config.validate();
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < config.layer_dims.size(); ++l) {
    const std::size_t in = config.layer_dims[l];
    const std::size_t out = config.layer_dims[l + 1];
    // uniform fan-in init; larger scales make long Adam runs on soft
    // targets drift away from the early optimum
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    Layer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
    for (double& w : layer.weight.data) {
      w = (2.0 * engine.uniform01() - 1.0) * bound;
    }
    for (double& b : layer.bias) {
      b = (2.0 * engine.uniform01() - 1.0) * bound;
    }
    layers.push_back(std::move(layer));
  }
  return ModelParams(config, std::move(layers));
}

std::size_t ModelParams::param_count() const {
  std::size_t count = 0;
  for (const Layer& layer : layers_) {
    count += layer.weight.data.size() + layer.bias.size();
  }
  return count;
}

void ModelParams::flatten(std::span<double> out) const {
  if (out.size() != param_count()) {
    throw std::invalid_argument("flatten: output size mismatch");
  }
  std::size_t offset = 0;
  for (const Layer& layer : layers_) {
    std::copy(layer.weight.data.begin(), layer.weight.data.end(),
              out.begin() + offset);
    offset += layer.weight.data.size();
    std::copy(layer.bias.begin(), layer.bias.end(), out.begin() + offset);
    offset += layer.bias.size();
  }
}

void ModelParams::unflatten(std::span<const double> in) {
  if (in.size() != param_count()) {
    throw std::invalid_argument("unflatten: input size mismatch");
  }
  std::size_t offset = 0;
  for (Layer& layer : layers_) {
    std::copy(in.begin() + offset,
              in.begin() + offset + layer.weight.data.size(),
              layer.weight.data.begin());
    offset += layer.weight.data.size();
    std::copy(in.begin() + offset, in.begin() + offset + layer.bias.size(),
              layer.bias.begin());
    offset += layer.bias.size();
  }
}

Matrix forward_cached(const ModelParams& params, const Matrix& batch,
                      ForwardCache& cache) {
  const auto& dims = params.config().layer_dims;
  if (batch.cols != dims.front()) {
    throw std::invalid_argument("forward: batch feature dim mismatch");
  }
  const std::size_t num_layers = params.layers().size();
  cache.inputs.assign(num_layers, Matrix());
  cache.pre_act.assign(num_layers, Matrix());

  Matrix current = batch;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const Layer& layer = params.layers()[l];
    cache.inputs[l] = current;
    Matrix z(current.rows, layer.weight.rows);
    for (std::size_t r = 0; r < current.rows; ++r) {
      const auto x = current.row(r);
      for (std::size_t o = 0; o < layer.weight.rows; ++o) {
        const auto w = layer.weight.row(o);
        double acc = layer.bias[o];
        for (std::size_t c = 0; c < x.size(); ++c) {
          acc += w[c] * x[c];
        }
        z(r, o) = acc;
      }
    }
    cache.pre_act[l] = z;
    if (l + 1 < num_layers) {
      current = Matrix(z.rows, z.cols);
      for (std::size_t i = 0; i < z.data.size(); ++i) {
        current.data[i] = activate(params.config().activation, z.data[i]);
      }
    } else {
      current = std::move(z);
    }
  }

  Matrix probs(current.rows, current.cols);
  for (std::size_t r = 0; r < current.rows; ++r) {
    numeric::softmax(current.row(r), probs.row(r));
  }
  cache.probs = probs;
  return probs;
}

Matrix forward(const ModelParams& params, const Matrix& batch) {
  ForwardCache cache;
  return forward_cached(params, batch, cache);
}

double cross_entropy(const Matrix& prediction, const Matrix& target) {
  if (prediction.rows != target.rows || prediction.cols != target.cols ||
      prediction.rows == 0) {
    throw std::invalid_argument("cross_entropy: shape mismatch");
  }
  check_probability_matrix(prediction, "cross_entropy prediction");
  check_probability_matrix(target, "cross_entropy target");
  double total = 0.0;
  for (std::size_t r = 0; r < prediction.rows; ++r) {
    total += numeric::soft_cross_entropy(prediction.row(r), target.row(r));
  }
  return total / static_cast<double>(prediction.rows);
}

Matrix cross_entropy_logit_grad(const Matrix& probs, const Matrix& target) {
  if (probs.rows != target.rows || probs.cols != target.cols) {
    throw std::invalid_argument("cross_entropy_logit_grad: shape mismatch");
  }
  const double inv_batch = 1.0 / static_cast<double>(probs.rows);
  Matrix grad(probs.rows, probs.cols);
  for (std::size_t r = 0; r < probs.rows; ++r) {
    // exact derivative of the clamped log: d/dz_j = p_j * sum_i y_i*r_i - y_j*r_j
    // with r_i = p_i / (p_i + eps); r_i -> 1 as eps -> 0.
    double weighted = 0.0;
    for (std::size_t c = 0; c < probs.cols; ++c) {
      const double p = probs(r, c);
      weighted += target(r, c) * p / (p + numeric::kLogEpsilon);
    }
    for (std::size_t c = 0; c < probs.cols; ++c) {
      const double p = probs(r, c);
      const double ratio = p / (p + numeric::kLogEpsilon);
      grad(r, c) = (p * weighted - target(r, c) * ratio) * inv_batch;
    }
  }
  return grad;
}

Matrix cross_entropy_target_grad(const Matrix& probs) {
  const double inv_batch = 1.0 / static_cast<double>(probs.rows);
  Matrix grad(probs.rows, probs.cols);
  for (std::size_t i = 0; i < probs.data.size(); ++i) {
    grad.data[i] = -std::log(probs.data[i] + numeric::kLogEpsilon) * inv_batch;
  }
  return grad;
}

void ModelGrads::flatten(std::span<double> out) const {
  std::size_t offset = 0;
  for (const Layer& layer : layers) {
    std::copy(layer.weight.data.begin(), layer.weight.data.end(),
              out.begin() + offset);
    offset += layer.weight.data.size();
    std::copy(layer.bias.begin(), layer.bias.end(), out.begin() + offset);
    offset += layer.bias.size();
  }
  if (offset != out.size()) {
    throw std::invalid_argument("ModelGrads::flatten: size mismatch");
  }
}

ModelGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const Matrix& dlogits) {
  const std::size_t num_layers = params.layers().size();
  if (cache.inputs.size() != num_layers || cache.pre_act.size() != num_layers) {
    throw std::invalid_argument("backward: cache does not match model");
  }
  ModelGrads grads;
  grads.layers.resize(num_layers);

  Matrix delta = dlogits;  // gradient at the current layer's pre-activation
  for (std::size_t l = num_layers; l-- > 0;) {
    const Layer& layer = params.layers()[l];
    const Matrix& input = cache.inputs[l];
    Layer& g = grads.layers[l];
    g.weight = Matrix(layer.weight.rows, layer.weight.cols);
    g.bias.assign(layer.bias.size(), 0.0);

    for (std::size_t r = 0; r < delta.rows; ++r) {
      const auto d = delta.row(r);
      const auto x = input.row(r);
      for (std::size_t o = 0; o < d.size(); ++o) {
        g.bias[o] += d[o];
        auto wrow = g.weight.row(o);
        for (std::size_t c = 0; c < x.size(); ++c) {
          wrow[c] += d[o] * x[c];
        }
      }
    }

    if (l == 0) break;
    Matrix next(delta.rows, layer.weight.cols);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const auto d = delta.row(r);
      auto nd = next.row(r);
      for (std::size_t c = 0; c < layer.weight.cols; ++c) {
        double acc = 0.0;
        for (std::size_t o = 0; o < d.size(); ++o) {
          acc += d[o] * layer.weight(o, c);
        }
        nd[c] = acc * activate_grad(params.config().activation,
                                    cache.pre_act[l - 1](r, c));
      }
    }
    delta = std::move(next);
  }
  return grads;
}

AdamState::AdamState(std::size_t param_count, AdamConfig cfg)
    : config(cfg),
      first_moment(param_count, 0.0),
      second_moment(param_count, 0.0) {}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  const double b1 = state.config.beta1;
  const double b2 = state.config.beta2;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * grads[i];
    v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] -= state.config.learning_rate * m_hat /
                 (std::sqrt(v_hat) + state.config.epsilon);
  }
}

GradCheckResult grad_check(
    const std::function<double(std::span<const double>)>& loss,
    std::span<const double> point, std::span<const double> analytic,
    std::uint64_t seed, std::size_t max_coordinates, double step_size) {
  if (point.size() != analytic.size() || point.empty()) {
    throw std::invalid_argument("grad_check: size mismatch");
  }
  std::vector<std::size_t> coords(point.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > max_coordinates) {
    rng::Engine engine(seed);
    engine.shuffle(std::span<std::size_t>(coords));
    coords.resize(max_coordinates);
  }

  double scale = 1e-8;
  for (const double g : analytic) {
    scale = std::max(scale, std::abs(g));
  }

  std::vector<double> perturbed(point.begin(), point.end());
  GradCheckResult result;
  result.coordinates_checked = coords.size();
  for (const std::size_t i : coords) {
    const double original = perturbed[i];
    perturbed[i] = original + step_size;
    const double plus = loss(perturbed);
    perturbed[i] = original - step_size;
    const double minus = loss(perturbed);
    perturbed[i] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw std::runtime_error("grad_check: non-finite loss");
    }
    const double fd = (plus - minus) / (2.0 * step_size);
    const double denom =
        std::max({std::abs(fd) + std::abs(analytic[i]), 1e-4 * scale, 1e-12});
    const double rel = std::abs(fd - analytic[i]) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_coordinate = i;
    }
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams& params, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint file for writing: " +
                             path.string());
  }
  out << "ordenc-checkpoint v1\n";
  out << "seed " << seed << "\n";
  out << "activation " << activation_name(params.config().activation) << "\n";
  out << "dims";
  for (const std::size_t d : params.config().layer_dims) {
    out << ' ' << d;
  }
  out << "\n";
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    const Layer& layer = params.layers()[l];
    out << "layer " << l << ' ' << layer.weight.rows << ' '
        << layer.weight.cols << "\n";
    for (std::size_t r = 0; r < layer.weight.rows; ++r) {
      out << textio::join(layer.weight.row(r), ' ') << "\n";
    }
    out << textio::join(layer.bias, ' ') << "\n";
  }
  if (!out) {
    throw std::runtime_error("checkpoint write failed: " + path.string());
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint file: " + path.string());
  }
  std::string line;
  const auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw std::runtime_error("checkpoint truncated: " + path.string());
    }
    return line;
  };
  if (next_line() != "ordenc-checkpoint v1") {
    throw std::runtime_error("unsupported checkpoint format: " +
                             path.string());
  }
  const auto parse_values = [](std::string_view text) {
    std::vector<double> values;
    for (const auto tok : textio::split(text, ' ')) {
      values.push_back(textio::parse_double(tok));
    }
    return values;
  };

  auto seed_tokens = textio::split(next_line(), ' ');
  if (seed_tokens.size() != 2 || seed_tokens[0] != "seed") {
    throw std::runtime_error("checkpoint missing seed line");
  }
  const std::uint64_t seed = textio::parse_uint(seed_tokens[1]);

  auto act_tokens = textio::split(next_line(), ' ');
  if (act_tokens.size() != 2 || act_tokens[0] != "activation") {
    throw std::runtime_error("checkpoint missing activation line");
  }
  ModelConfig config;
  config.activation = parse_activation(act_tokens[1]);

  auto dim_tokens = textio::split(next_line(), ' ');
  if (dim_tokens.size() < 3 || dim_tokens[0] != "dims") {
    throw std::runtime_error("checkpoint missing dims line");
  }
  for (std::size_t i = 1; i < dim_tokens.size(); ++i) {
    config.layer_dims.push_back(
        static_cast<std::size_t>(textio::parse_uint(dim_tokens[i])));
  }
  config.validate();

  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < config.layer_dims.size(); ++l) {
    auto header = textio::split(next_line(), ' ');
    if (header.size() != 4 || header[0] != "layer") {
      throw std::runtime_error("checkpoint missing layer header");
    }
    const std::size_t out_dim =
        static_cast<std::size_t>(textio::parse_uint(header[2]));
    const std::size_t in_dim =
        static_cast<std::size_t>(textio::parse_uint(header[3]));
    Layer layer{Matrix(out_dim, in_dim), {}};
    for (std::size_t r = 0; r < out_dim; ++r) {
      const auto values = parse_values(next_line());
      if (values.size() != in_dim) {
        throw std::runtime_error("checkpoint weight row length mismatch");
      }
      std::copy(values.begin(), values.end(), layer.weight.row(r).begin());
    }
    layer.bias = parse_values(next_line());
    layers.push_back(std::move(layer));
  }
  return LoadedCheckpoint{ModelParams(std::move(config), std::move(layers)),
                          seed};
}

}  // namespace ordenc::diff
