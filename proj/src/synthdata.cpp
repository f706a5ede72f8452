#include "ordenc/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ordenc/rng.hpp"
#include "ordenc/textio.hpp"

namespace ordenc::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> class_centers(const SynthConfig& config,
                                  rng::Engine& engine) {
  const std::size_t k = config.num_classes;
  std::vector<double> angles(k);
  for (std::size_t j = 0; j < k; ++j) {
    angles[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(k);
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  engine.shuffle(std::span<std::size_t>(perm));
  std::vector<double> centers(k);
  for (std::size_t c = 0; c < k; ++c) {
    centers[c] = angles[perm[c]];
  }
  return centers;
}

// class index -> class one angular step forward / backward
struct Neighbors {
  std::vector<std::size_t> next;
  std::vector<std::size_t> prev;
};

Neighbors angular_neighbors(std::span<const double> centers) {
  const std::size_t k = centers.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  Neighbors n{std::vector<std::size_t>(k), std::vector<std::size_t>(k)};
  for (std::size_t pos = 0; pos < k; ++pos) {
    const std::size_t cls = order[pos];
    n.next[cls] = order[(pos + 1) % k];
    n.prev[cls] = order[(pos + k - 1) % k];
  }
  return n;
}

}  // namespace

std::string noise_structure_name(NoiseStructure n) {
  return n == NoiseStructure::forward_adjacent ? "forward-adjacent"
                                               : "symmetric-adjacent";
}

NoiseStructure parse_noise_structure(std::string_view name) {
  if (name == "forward-adjacent") return NoiseStructure::forward_adjacent;
  if (name == "symmetric-adjacent") return NoiseStructure::symmetric_adjacent;
  throw std::invalid_argument("unknown noise structure: '" +
                              std::string(name) + "'");
}

void SynthConfig::validate() const {
  if (num_classes < 3) {
    throw std::invalid_argument(
        "SynthConfig: need at least 3 classes for circular structure");
  }
  if (samples_per_class == 0) {
    throw std::invalid_argument("SynthConfig: samples_per_class must be > 0");
  }
  if (!(angle_stddev >= 0.0) || !std::isfinite(angle_stddev)) {
    throw std::invalid_argument("SynthConfig: angle_stddev must be >= 0");
  }
  if (!(label_noise >= 0.0 && label_noise < 1.0)) {
    throw std::invalid_argument("SynthConfig: label_noise must lie in [0, 1)");
  }
}

std::size_t Dataset::angular_successor(std::size_t cls) const {
  return angular_neighbors(true_ordering.ranks()).next.at(cls);
}

Dataset generate(const SynthConfig& config) {
  config.validate();
  rng::Engine engine(config.seed);
  const std::size_t k = config.num_classes;
  const std::size_t n = k * config.samples_per_class;
  const std::size_t dim = 2 + config.distractor_dims;

  const auto centers = class_centers(config, engine);
  const auto neighbors = angular_neighbors(centers);

  diff::Matrix features(n, dim);
  std::vector<std::size_t> labels(n);
  std::vector<std::size_t> clean(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t s = 0; s < config.samples_per_class; ++s, ++row) {
      const double theta = engine.normal(centers[c], config.angle_stddev);
      auto x = features.row(row);
      x[0] = std::cos(theta);
      x[1] = std::sin(theta);
      for (std::size_t d = 0; d < config.distractor_dims; ++d) {
        x[2 + d] = engine.normal();
      }
      clean[row] = c;
      // one uniform draw per sample keeps feature streams aligned across
      // different noise rates under the same seed
      const double u = engine.uniform01();
      std::size_t emitted = c;
      if (u < config.label_noise) {
        if (config.noise_structure == NoiseStructure::forward_adjacent) {
          emitted = neighbors.next[c];
        } else {
          emitted = (u < config.label_noise / 2.0) ? neighbors.prev[c]
                                                   : neighbors.next[c];
        }
      }
      labels[row] = emitted;
    }
  }
  return Dataset{config, std::move(features), std::move(labels),
                 std::move(clean),
                 codec::RankAssignment(centers, codec::Geometry::circular)};
}

double bayes_error(const SynthConfig& config) {
  config.validate();
  const std::size_t k = config.num_classes;
  const double p = config.label_noise;

  // emission[c][t] = P(emitted = t | clean = c); neighbors in angular order,
  // which is independent of the hidden shuffle for equally spaced centers
  std::vector<double> centers(k);
  for (std::size_t j = 0; j < k; ++j) {
    centers[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(k);
  }
  std::vector<std::vector<double>> emission(k, std::vector<double>(k, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    emission[c][c] = 1.0 - p;
    const std::size_t next = (c + 1) % k;
    const std::size_t prev = (c + k - 1) % k;
    if (config.noise_structure == NoiseStructure::forward_adjacent) {
      emission[c][next] += p;
    } else {
      emission[c][next] += p / 2.0;
      emission[c][prev] += p / 2.0;
    }
  }

  if (config.angle_stddev == 0.0) {
    // all mass of class c sits at its center; the optimal prediction there is
    // the most likely emitted label
    double correct = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      correct += *std::max_element(emission[c].begin(), emission[c].end());
    }
    return 1.0 - correct / static_cast<double>(k);
  }

  const double sigma = config.angle_stddev;
  const int wraps = std::max(2, static_cast<int>(std::ceil(
                                    (6.0 * sigma + kTwoPi) / kTwoPi)));
  const std::size_t grid = 100000;
  const double h = kTwoPi / static_cast<double>(grid);
  const double norm = 1.0 / (sigma * std::sqrt(kTwoPi));
  const double prior = 1.0 / static_cast<double>(k);

  std::vector<double> density(k);
  std::vector<double> posterior(k);
  double correct = 0.0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double theta = (static_cast<double>(g) + 0.5) * h;
    for (std::size_t c = 0; c < k; ++c) {
      double f = 0.0;
      for (int m = -wraps; m <= wraps; ++m) {
        const double x = theta - centers[c] + kTwoPi * m;
        f += norm * std::exp(-0.5 * x * x / (sigma * sigma));
      }
      density[c] = f;
    }
    for (std::size_t t = 0; t < k; ++t) {
      double q = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        q += emission[c][t] * density[c];
      }
      posterior[t] = q * prior;
    }
    correct += *std::max_element(posterior.begin(), posterior.end()) * h;
  }
  return 1.0 - correct;
}

std::string dataset_to_text(const Dataset& dataset) {
  const SynthConfig& cfg = dataset.config;
  std::string out;
  out += "ordenc-dataset v1\n";
  out += "num_classes = " + std::to_string(cfg.num_classes) + "\n";
  out += "samples_per_class = " + std::to_string(cfg.samples_per_class) + "\n";
  out += "angle_stddev = " + textio::fmt(cfg.angle_stddev) + "\n";
  out += "distractor_dims = " + std::to_string(cfg.distractor_dims) + "\n";
  out += "label_noise = " + textio::fmt(cfg.label_noise) + "\n";
  out += "noise_structure = " + noise_structure_name(cfg.noise_structure) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "true_ordering = " + textio::join(dataset.true_ordering.ranks(), ',') +
         "\n";
  out += "[samples]\n";
  for (std::size_t r = 0; r < dataset.num_samples(); ++r) {
    out += textio::join(dataset.features.row(r), ' ');
    out += ' ' + std::to_string(dataset.labels[r]);
    out += ' ' + std::to_string(dataset.clean_labels[r]);
    out += '\n';
  }
  return out;
}

Dataset dataset_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ordenc-dataset v1") {
    throw std::runtime_error("unsupported dataset format");
  }
  SynthConfig cfg;
  std::vector<double> ordering;
  while (std::getline(in, line)) {
    if (textio::trim(line) == "[samples]") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("malformed dataset header line: " + line);
    }
    const auto key = textio::trim(std::string_view(line).substr(0, eq));
    const auto value = textio::trim(std::string_view(line).substr(eq + 1));
    if (key == "num_classes") {
      cfg.num_classes = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "samples_per_class") {
      cfg.samples_per_class =
          static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "angle_stddev") {
      cfg.angle_stddev = textio::parse_double(value);
    } else if (key == "distractor_dims") {
      cfg.distractor_dims = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "label_noise") {
      cfg.label_noise = textio::parse_double(value);
    } else if (key == "noise_structure") {
      cfg.noise_structure = parse_noise_structure(value);
    } else if (key == "seed") {
      cfg.seed = textio::parse_uint(value);
    } else if (key == "true_ordering") {
      for (const auto tok : textio::split(value, ',')) {
        ordering.push_back(textio::parse_double(tok));
      }
    } else {
      throw std::runtime_error("unknown dataset header key: '" +
                               std::string(key) + "'");
    }
  }
  cfg.validate();
  if (ordering.size() != cfg.num_classes) {
    throw std::runtime_error("dataset true_ordering length mismatch");
  }

  const std::size_t n = cfg.num_classes * cfg.samples_per_class;
  const std::size_t dim = 2 + cfg.distractor_dims;
  diff::Matrix features(n, dim);
  std::vector<std::size_t> labels(n);
  std::vector<std::size_t> clean(n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto tokens = textio::split(textio::trim(line), ' ');
    if (tokens.empty()) continue;
    if (row >= n || tokens.size() != dim + 2) {
      throw std::runtime_error("dataset sample line mismatch");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      features(row, c) = textio::parse_double(tokens[c]);
    }
    labels[row] = static_cast<std::size_t>(textio::parse_uint(tokens[dim]));
    clean[row] = static_cast<std::size_t>(textio::parse_uint(tokens[dim + 1]));
    if (labels[row] >= cfg.num_classes || clean[row] >= cfg.num_classes) {
      throw std::runtime_error("dataset label out of range");
    }
    ++row;
  }
  if (row != n) {
    throw std::runtime_error("dataset sample count mismatch");
  }
  return Dataset{cfg, std::move(features), std::move(labels), std::move(clean),
                 codec::RankAssignment(ordering, codec::Geometry::circular)};
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open dataset file for writing: " +
                             path.string());
  }
  out << dataset_to_text(dataset);
  if (!out) {
    throw std::runtime_error("dataset write failed: " + path.string());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return dataset_from_text(buffer.str());
}

}  // namespace ordenc::synth
