#include "ordenc/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ordenc/textio.hpp"

namespace ordenc::harness {

namespace {

std::vector<std::size_t> parse_size_list(std::string_view value) {
  std::vector<std::size_t> out;
  for (const auto tok : textio::split(value, ',')) {
    out.push_back(static_cast<std::size_t>(textio::parse_uint(textio::trim(tok))));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view value) {
  std::vector<std::uint64_t> out;
  for (const auto tok : textio::split(value, ',')) {
    out.push_back(textio::parse_uint(textio::trim(tok)));
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view value) {
  std::vector<double> out;
  for (const auto tok : textio::split(value, ',')) {
    out.push_back(textio::parse_double(textio::trim(tok)));
  }
  return out;
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::onehot: return "onehot";
    case Scheme::sord_linear: return "sord_linear";
    case Scheme::sord_circular: return "sord_circular";
    case Scheme::plsord: return "plsord";
    case Scheme::learned: return "learned";
  }
  throw std::logic_error("unreachable scheme");
}

Scheme parse_scheme(std::string_view name) {
  if (name == "onehot") return Scheme::onehot;
  if (name == "sord_linear") return Scheme::sord_linear;
  if (name == "sord_circular") return Scheme::sord_circular;
  if (name == "plsord") return Scheme::plsord;
  if (name == "learned") return Scheme::learned;
  throw std::invalid_argument("unknown scheme: '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  synth.validate();
  const bool needs_scale = scheme == Scheme::sord_linear ||
                           scheme == Scheme::sord_circular ||
                           scheme == Scheme::plsord;
  if (needs_scale && !scale.has_value()) {
    throw std::invalid_argument("config: scheme '" + scheme_name(scheme) +
                                "' requires key 'scale'");
  }
  if (scale.has_value() && !(*scale > 0.0)) {
    throw std::invalid_argument("config: scale must be positive");
  }
  if (!(target_mass > 0.0 && target_mass < 1.0)) {
    throw std::invalid_argument("config: target_mass must lie in (0, 1)");
  }
  if (positions.has_value()) {
    if (positions->size() < num_classes()) {
      throw std::invalid_argument(
          "config: positions must provide at least num_classes values");
    }
    std::set<double> unique(positions->begin(), positions->end());
    if (unique.size() != positions->size()) {
      throw std::invalid_argument("config: positions must be distinct");
    }
    for (const double p : *positions) {
      if (!std::isfinite(p) || p < 0.0 || p >= 2.0 * std::numbers::pi) {
        throw std::invalid_argument(
            "config: positions must lie in [0, 2*pi)");
      }
    }
  }
  if (train_sizes.empty()) {
    throw std::invalid_argument("config: train_sizes must be non-empty");
  }
  for (std::size_t i = 0; i < train_sizes.size(); ++i) {
    if (train_sizes[i] == 0) {
      throw std::invalid_argument("config: train_sizes must be positive");
    }
    if (i > 0 && train_sizes[i] <= train_sizes[i - 1]) {
      throw std::invalid_argument("config: train_sizes must be ascending");
    }
  }
  if (train_size.has_value() && *train_size == 0) {
    throw std::invalid_argument("config: train_size must be positive");
  }
  if (checkpoint_interval == 0) {
    throw std::invalid_argument("config: checkpoint_interval must be >= 1");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("config: seeds must be non-empty");
  }
  if (batch_size < num_classes()) {
    throw std::invalid_argument(
        "config: batch_size must be at least num_classes for stratified "
        "batches");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("config: learning_rate must be positive");
  }
  if (val_per_class == 0 || test_per_class == 0) {
    throw std::invalid_argument(
        "config: val_per_class and test_per_class must be positive");
  }
  const std::size_t k = num_classes();
  std::size_t largest = train_sizes.back();
  if (train_size.has_value()) largest = std::max(largest, *train_size);
  const std::size_t pool_needed = (largest + k - 1) / k;
  const std::size_t needed = val_per_class + test_per_class + pool_needed;
  if (synth.samples_per_class < needed) {
    throw std::invalid_argument(
        "config: samples_per_class too small; need at least " +
        std::to_string(needed) +
        " (val_per_class + test_per_class + largest size / num_classes)");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool scheme_seen = false;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = textio::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key(textio::trim(line.substr(0, eq)));
    const std::string_view value = textio::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
    if (key == "scheme") {
      cfg.scheme = parse_scheme(value);
      scheme_seen = true;
    } else if (key == "scale") {
      cfg.scale = value == "inf" ? std::numeric_limits<double>::infinity()
                                 : textio::parse_double(value);
    } else if (key == "target_mass") {
      cfg.target_mass = textio::parse_double(value);
    } else if (key == "positions") {
      cfg.positions = parse_double_list(value);
    } else if (key == "num_classes") {
      cfg.synth.num_classes =
          static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "samples_per_class") {
      cfg.synth.samples_per_class =
          static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "angle_stddev") {
      cfg.synth.angle_stddev = textio::parse_double(value);
    } else if (key == "distractor_dims") {
      cfg.synth.distractor_dims =
          static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "label_noise") {
      cfg.synth.label_noise = textio::parse_double(value);
    } else if (key == "noise_structure") {
      cfg.synth.noise_structure = synth::parse_noise_structure(value);
    } else if (key == "data_seed") {
      cfg.synth.seed = textio::parse_uint(value);
    } else if (key == "train_sizes") {
      cfg.train_sizes = parse_size_list(value);
    } else if (key == "train_size") {
      cfg.train_size = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "steps") {
      cfg.steps = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "checkpoint_interval") {
      cfg.checkpoint_interval =
          static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "seeds") {
      cfg.seeds = parse_seed_list(value);
    } else if (key == "batch_size") {
      cfg.batch_size = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "learning_rate") {
      cfg.learning_rate = textio::parse_double(value);
    } else if (key == "hidden_dims") {
      cfg.hidden_dims = parse_size_list(value);
    } else if (key == "val_per_class") {
      cfg.val_per_class = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "test_per_class") {
      cfg.test_per_class = static_cast<std::size_t>(textio::parse_uint(value));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!scheme_seen) {
    throw std::invalid_argument("config: missing required key 'scheme'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_echo(const ExperimentConfig& c) {
  std::string out;
  out += "scheme = " + scheme_name(c.scheme) + "\n";
  if (c.scale.has_value()) {
    out += "scale = " +
           (std::isinf(*c.scale) ? std::string("inf") : textio::fmt(*c.scale)) +
           "\n";
  }
  out += "target_mass = " + textio::fmt(c.target_mass) + "\n";
  if (c.positions.has_value()) {
    out += "positions = " + textio::join(*c.positions, ',') + "\n";
  }
  out += "num_classes = " + std::to_string(c.synth.num_classes) + "\n";
  out += "samples_per_class = " + std::to_string(c.synth.samples_per_class) +
         "\n";
  out += "angle_stddev = " + textio::fmt(c.synth.angle_stddev) + "\n";
  out += "distractor_dims = " + std::to_string(c.synth.distractor_dims) + "\n";
  out += "label_noise = " + textio::fmt(c.synth.label_noise) + "\n";
  out += "noise_structure = " +
         synth::noise_structure_name(c.synth.noise_structure) + "\n";
  out += "data_seed = " + std::to_string(c.synth.seed) + "\n";
  out += "train_sizes = " + textio::join_size(c.train_sizes, ',') + "\n";
  if (c.train_size.has_value()) {
    out += "train_size = " + std::to_string(*c.train_size) + "\n";
  }
  out += "steps = " + std::to_string(c.steps) + "\n";
  out += "checkpoint_interval = " + std::to_string(c.checkpoint_interval) +
         "\n";
  out += "seeds = " + textio::join_uint(c.seeds, ',') + "\n";
  out += "batch_size = " + std::to_string(c.batch_size) + "\n";
  out += "learning_rate = " + textio::fmt(c.learning_rate) + "\n";
  out += "hidden_dims = " + textio::join_size(c.hidden_dims, ',') + "\n";
  out += "val_per_class = " + std::to_string(c.val_per_class) + "\n";
  out += "test_per_class = " + std::to_string(c.test_per_class) + "\n";
  return out;
}

}  // namespace ordenc::harness
