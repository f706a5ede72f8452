#include "ordenc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ordenc/diffcore.hpp"
#include "ordenc/learned_codec.hpp"
#include "ordenc/numeric.hpp"
#include "ordenc/ordering_search.hpp"
#include "ordenc/rng.hpp"
#include "ordenc/textio.hpp"

#include "json.hpp"

namespace ordenc::harness {

namespace {

// rng stream tags
constexpr std::uint64_t kSubsetStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kBatchStream = 3;

std::string fmt_scale_token(double scale) {
  return std::isinf(scale) ? std::string("inf") : textio::fmt(scale);
}

// Per-scheme training state beyond the model weights.
struct SchemeState {
  // fixed encodings (onehot, sord_linear, sord_circular)
  std::optional<codec::LabelMatrix> fixed_targets;

  // plsord
  std::optional<ordering::OrderingCandidateSet> candidates;
  std::vector<codec::LabelMatrix> candidate_targets;

  // learned
  std::optional<learned::EncodingParams> encoding;

  std::size_t extra_param_count = 0;  // ordering logits or encoding logits
};

// Ranks the classes by their generating angular order, which is the prior
// knowledge the fixed ordinal encodings assume.
codec::RankAssignment linear_ranks_from_ordering(
    const codec::RankAssignment& true_ordering) {
  const auto centers = true_ordering.ranks();
  const std::size_t k = centers.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centers[a] < centers[b];
  });
  std::vector<double> ranks(k);
  for (std::size_t pos = 0; pos < k; ++pos) {
    ranks[order[pos]] = static_cast<double>(pos);
  }
  return codec::RankAssignment(std::move(ranks), codec::Geometry::linear);
}

SchemeState make_scheme_state(const ExperimentConfig& config,
                              const synth::Dataset& dataset) {
  SchemeState state;
  const std::size_t k = config.num_classes();
  switch (config.scheme) {
    case Scheme::onehot:
      state.fixed_targets = codec::encode_onehot(k);
      break;
    case Scheme::sord_circular:
      state.fixed_targets = codec::encode_sord(
          dataset.true_ordering, codec::DistanceSpec::make_circular(*config.scale));
      break;
    case Scheme::sord_linear:
      state.fixed_targets = codec::encode_sord(
          linear_ranks_from_ordering(dataset.true_ordering),
          codec::DistanceSpec::make_linear(*config.scale));
      break;
    case Scheme::plsord: {
      std::vector<double> positions;
      if (config.positions.has_value()) {
        positions = *config.positions;
      } else {
        const auto spaced = codec::RankAssignment::equally_spaced(
            k, codec::Geometry::circular);
        positions.assign(spaced.ranks().begin(), spaced.ranks().end());
      }
      state.candidates = ordering::enumerate_orderings(
          k, std::move(positions), codec::Geometry::circular);
      const auto spec = codec::DistanceSpec::make_circular(*config.scale);
      for (const auto& candidate : state.candidates->candidates()) {
        state.candidate_targets.push_back(codec::encode_sord(candidate, spec));
      }
      state.extra_param_count = state.candidates->size();
      break;
    }
    case Scheme::learned:
      state.encoding = learned::EncodingParams(k, config.target_mass);
      state.extra_param_count = learned::EncodingParams::logit_count(k);
      break;
  }
  return state;
}

diff::Matrix gather_rows(const diff::Matrix& source,
                         std::span<const std::size_t> indices) {
  diff::Matrix out(indices.size(), source.cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = source.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

double accuracy(const diff::Matrix& probs,
                std::span<const std::size_t> labels) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < probs.rows; ++r) {
    if (numeric::argmax(probs.row(r)) == labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probs.rows);
}

}  // namespace

std::string cell_label(const ExperimentConfig& config) {
  switch (config.scheme) {
    case Scheme::onehot:
      return "onehot";
    case Scheme::sord_linear:
      return "sord_linear_s" + fmt_scale_token(*config.scale);
    case Scheme::sord_circular:
      return "sord_circular_s" + fmt_scale_token(*config.scale);
    case Scheme::plsord:
      return "plsord_s" + fmt_scale_token(*config.scale);
    case Scheme::learned:
      return "learned_m" + textio::fmt(config.target_mass);
  }
  throw std::logic_error("unreachable scheme");
}

DataSplit make_split(const ExperimentConfig& config,
                     const synth::Dataset& dataset, std::size_t train_size,
                     std::uint64_t run_seed) {
  if (!(dataset.config == config.synth)) {
    throw std::invalid_argument("make_split: dataset does not match config");
  }
  const std::size_t k = config.num_classes();
  const std::size_t spc = config.synth.samples_per_class;
  const std::size_t pool_per_class = spc - config.val_per_class -
                                     config.test_per_class;
  if (train_size > pool_per_class * k) {
    throw std::invalid_argument("make_split: train_size exceeds pool");
  }

  DataSplit split;
  rng::Engine subset_rng(rng::mix_seed(run_seed, kSubsetStream));
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t base = c * spc;
    for (std::size_t i = 0; i < config.val_per_class; ++i) {
      split.val.push_back(base + i);
    }
    for (std::size_t i = 0; i < config.test_per_class; ++i) {
      split.test.push_back(base + config.val_per_class + i);
    }
    // permute the class pool once, then take a prefix; the permutation does
    // not depend on train_size, so subsets nest across sizes
    std::vector<std::size_t> pool(pool_per_class);
    std::iota(pool.begin(), pool.end(),
              base + config.val_per_class + config.test_per_class);
    subset_rng.shuffle(std::span<std::size_t>(pool));
    const std::size_t quota = train_size / k + (c < train_size % k ? 1 : 0);
    for (std::size_t i = 0; i < quota; ++i) {
      split.train.push_back(pool[i]);
    }
  }
  return split;
}

RunReport run_single(const ExperimentConfig& config, std::size_t train_size,
                     std::uint64_t run_seed, diff::ModelParams* best_model) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t k = config.num_classes();

  const synth::Dataset dataset = synth::generate(config.synth);
  const DataSplit split = make_split(config, dataset, train_size, run_seed);
  SchemeState scheme = make_scheme_state(config, dataset);

  // per-class index lists of the training subset, for stratified batches
  std::vector<std::vector<std::size_t>> train_by_class(k);
  for (const std::size_t idx : split.train) {
    train_by_class[dataset.labels[idx]].push_back(idx);
  }
  // samples whose emitted label is missing from a small subset cannot fill
  // their batch slot; fall back to the whole subset for such classes
  for (auto& list : train_by_class) {
    if (list.empty()) list = split.train;
  }

  const diff::Matrix val_features = gather_rows(dataset.features, split.val);
  std::vector<std::size_t> val_labels(split.val.size());
  for (std::size_t i = 0; i < split.val.size(); ++i) {
    val_labels[i] = dataset.labels[split.val[i]];
  }

  diff::ModelConfig model_config;
  model_config.layer_dims.push_back(dataset.feature_dim());
  for (const std::size_t h : config.hidden_dims) {
    model_config.layer_dims.push_back(h);
  }
  model_config.layer_dims.push_back(k);
  model_config.activation = diff::Activation::relu;

  rng::Engine init_rng(rng::mix_seed(run_seed, kInitStream));
  diff::ModelParams model = diff::ModelParams::init(model_config, init_rng);
  const std::size_t model_params = model.param_count();
  const std::size_t total_params = model_params + scheme.extra_param_count;

  std::vector<double> params(total_params, 0.0);
  model.flatten(std::span<double>(params).subspan(0, model_params));
  std::vector<double> grads(total_params, 0.0);
  diff::AdamState adam(total_params,
                       diff::AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});

  RunReport report;
  report.config = config;
  report.train_size = train_size;
  report.run_seed = run_seed;
  report.true_ordering.assign(dataset.true_ordering.ranks().begin(),
                              dataset.true_ordering.ranks().end());

  std::vector<double> best_params = params;
  double best_val = -1.0;
  std::size_t best_step = 0;

  const auto extra_span = [&](std::span<double> vec) {
    return vec.subspan(model_params, scheme.extra_param_count);
  };

  const auto record_checkpoint = [&](std::size_t step) {
    model.unflatten(std::span<const double>(params).subspan(0, model_params));
    const diff::Matrix val_probs = diff::forward(model, val_features);
    Checkpoint cp;
    cp.step = step;
    cp.val_accuracy = accuracy(val_probs, val_labels);
    if (config.scheme == Scheme::plsord) {
      ordering::OrderingWeights w{std::vector<double>(
          extra_span(params).begin(), extra_span(params).end())};
      cp.ordering_weights = w.weights();
    } else if (config.scheme == Scheme::learned) {
      learned::EncodingParams enc(
          k,
          std::vector<double>(extra_span(params).begin(),
                              extra_span(params).end()),
          config.target_mass);
      const auto mat = learned::materialize(enc);
      cp.encoding.assign(mat.entries().begin(), mat.entries().end());
    }
    if (cp.val_accuracy > best_val) {
      best_val = cp.val_accuracy;
      best_step = step;
      best_params = params;
    }
    report.checkpoints.push_back(std::move(cp));
  };

  rng::Engine batch_rng(rng::mix_seed(run_seed, kBatchStream));
  const std::size_t batch = config.batch_size;
  diff::Matrix batch_features(batch, dataset.feature_dim());
  std::vector<std::size_t> batch_labels(batch);
  diff::Matrix batch_targets(batch, k);
  diff::ForwardCache cache;

  record_checkpoint(0);

  for (std::size_t step = 0; step < config.steps; ++step) {
    // stratified batch: equal representation per class, classes in index
    // order, sampled with replacement from the training subset
    std::size_t slot = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t quota = batch / k + (c < batch % k ? 1 : 0);
      const auto& list = train_by_class[c];
      for (std::size_t i = 0; i < quota; ++i, ++slot) {
        const std::size_t idx = list[batch_rng.uniform_index(list.size())];
        const auto src = dataset.features.row(idx);
        std::copy(src.begin(), src.end(), batch_features.row(slot).begin());
        batch_labels[slot] = dataset.labels[idx];
      }
    }

    bool failed = false;
    try {
      model.unflatten(std::span<const double>(params).subspan(0, model_params));
      const diff::Matrix probs = diff::forward_cached(model, batch_features, cache);

      double loss = 0.0;
      std::fill(grads.begin(), grads.end(), 0.0);
      diff::Matrix dlogits;

      if (scheme.fixed_targets.has_value()) {
        for (std::size_t b = 0; b < batch; ++b) {
          const auto row = scheme.fixed_targets->row(batch_labels[b]);
          std::copy(row.begin(), row.end(), batch_targets.row(b).begin());
        }
        loss = diff::cross_entropy(probs, batch_targets);
        dlogits = diff::cross_entropy_logit_grad(probs, batch_targets);
      } else if (config.scheme == Scheme::plsord) {
        const std::size_t n = scheme.candidates->size();
        ordering::OrderingWeights w{std::vector<double>(
            extra_span(params).begin(), extra_span(params).end())};
        const auto weights = w.weights();
        std::vector<double> losses(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t b = 0; b < batch; ++b) {
            losses[j] += numeric::soft_cross_entropy(
                probs.row(b), scheme.candidate_targets[j].row(batch_labels[b]));
          }
          losses[j] /= static_cast<double>(batch);
        }
        loss = ordering::weighted_total_loss(losses, w);
        // model gradient flows through the weight-averaged target row
        for (std::size_t b = 0; b < batch; ++b) {
          auto target = batch_targets.row(b);
          std::fill(target.begin(), target.end(), 0.0);
          for (std::size_t j = 0; j < n; ++j) {
            const auto row =
                scheme.candidate_targets[j].row(batch_labels[b]);
            for (std::size_t c = 0; c < k; ++c) {
              target[c] += weights[j] * row[c];
            }
          }
        }
        dlogits = diff::cross_entropy_logit_grad(probs, batch_targets);
        const auto logit_grad =
            ordering::weighted_total_loss_logit_grad(losses, w);
        std::copy(logit_grad.begin(), logit_grad.end(),
                  extra_span(std::span<double>(grads)).begin());
      } else {  // learned
        learned::EncodingParams enc(
            k,
            std::vector<double>(extra_span(params).begin(),
                                extra_span(params).end()),
            config.target_mass);
        const auto encoded = learned::materialize(enc);
        for (std::size_t b = 0; b < batch; ++b) {
          const auto row = encoded.row(batch_labels[b]);
          std::copy(row.begin(), row.end(), batch_targets.row(b).begin());
        }
        loss = diff::cross_entropy(probs, batch_targets);
        dlogits = diff::cross_entropy_logit_grad(probs, batch_targets);
        const diff::Matrix dtargets = diff::cross_entropy_target_grad(probs);
        auto alpha_grad = extra_span(std::span<double>(grads));
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t t = batch_labels[b];
          learned::accumulate_logit_grad(
              enc, t, dtargets.row(b),
              alpha_grad.subspan(t * (k - 1), k - 1));
        }
      }

      if (!std::isfinite(loss)) {
        failed = true;
      } else {
        const diff::ModelGrads model_grads = diff::backward(model, cache, dlogits);
        model_grads.flatten(std::span<double>(grads).subspan(0, model_params));
        diff::adam_step(params, grads, adam);
      }
    } catch (const std::exception&) {
      failed = true;
    }

    if (failed) {
      report.diverged = true;
      report.diverged_step = step;
      break;
    }
    if ((step + 1) % config.checkpoint_interval == 0) {
      record_checkpoint(step + 1);
    }
  }
  if (!report.diverged && config.steps % config.checkpoint_interval != 0) {
    record_checkpoint(config.steps);
  }

  report.best_step = best_step;
  report.best_val_accuracy = best_val;

  if (!report.diverged) {
    model.unflatten(
        std::span<const double>(best_params).subspan(0, model_params));
    if (best_model != nullptr) {
      *best_model = model;
    }
    const diff::Matrix test_features = gather_rows(dataset.features, split.test);
    const diff::Matrix test_probs = diff::forward(model, test_features);
    std::vector<std::size_t> test_clean(split.test.size());
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      test_clean[i] = dataset.clean_labels[split.test[i]];
    }
    report.test_accuracy = accuracy(test_probs, test_clean);
    report.confusion.assign(k * k, 0);
    for (std::size_t r = 0; r < test_probs.rows; ++r) {
      const std::size_t predicted = numeric::argmax(test_probs.row(r));
      report.confusion[test_clean[r] * k + predicted] += 1;
    }
    if (config.scheme == Scheme::plsord) {
      ordering::OrderingWeights w{std::vector<double>(
          extra_span(params).begin(), extra_span(params).end())};
      report.final_ordering_weights = w.weights();
      const auto& dominant = ordering::dominant_ordering(w, *scheme.candidates);
      report.dominant_ordering_ranks.assign(dominant.ranks().begin(),
                                            dominant.ranks().end());
    } else if (config.scheme == Scheme::learned) {
      learned::EncodingParams enc(
          k,
          std::vector<double>(extra_span(params).begin(),
                              extra_span(params).end()),
          config.target_mass);
      const auto mat = learned::materialize(enc);
      report.final_encoding.assign(mat.entries().begin(), mat.entries().end());
    }
  }

  report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

std::string RunReport::to_text() const {
  std::string out;
  out += "ordenc-report v1\n";
  out += "[config]\n";
  out += config_echo(config);
  out += "[run]\n";
  out += "train_size = " + std::to_string(train_size) + "\n";
  out += "run_seed = " + std::to_string(run_seed) + "\n";
  out += "true_ordering = " + textio::join(true_ordering, ',') + "\n";
  out += "status = " + std::string(diverged ? "diverged" : "ok") + "\n";
  if (diverged) {
    out += "diverged_step = " + std::to_string(diverged_step) + "\n";
  }
  out += "[checkpoints]\n";
  for (const Checkpoint& cp : checkpoints) {
    out += std::to_string(cp.step) + " " + textio::fmt(cp.val_accuracy);
    if (!cp.ordering_weights.empty()) {
      out += " " + textio::join(cp.ordering_weights, ' ');
    }
    if (!cp.encoding.empty()) {
      out += " " + textio::join(cp.encoding, ' ');
    }
    out += "\n";
  }
  if (!diverged) {
    out += "[result]\n";
    out += "best_step = " + std::to_string(best_step) + "\n";
    out += "best_val_accuracy = " + textio::fmt(best_val_accuracy) + "\n";
    out += "test_accuracy = " + textio::fmt(test_accuracy) + "\n";
    out += "[confusion]\n";
    const std::size_t k = config.num_classes();
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t i = 0; i < k; ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(confusion[t * k + i]);
      }
      out += '\n';
    }
    if (!final_ordering_weights.empty()) {
      out += "[ordering_weights_final]\n";
      out += textio::join(final_ordering_weights, ' ') + "\n";
      out += "[dominant_ordering]\n";
      out += textio::join(dominant_ordering_ranks, ' ') + "\n";
    }
    if (!final_encoding.empty()) {
      out += "[learned_encoding]\n";
      const std::size_t kk = config.num_classes();
      for (std::size_t t = 0; t < kk; ++t) {
        out += textio::join(
            std::span<const double>(final_encoding).subspan(t * kk, kk), ' ');
        out += '\n';
      }
    }
  }
  return out;
}

RunReport RunReport::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ordenc-report v1") {
    throw std::runtime_error("unsupported report format");
  }
  if (!std::getline(in, line) || line != "[config]") {
    throw std::runtime_error("report missing [config] section");
  }
  std::string config_text;
  while (std::getline(in, line)) {
    if (line == "[run]") break;
    config_text += line + "\n";
  }
  RunReport report;
  report.config = parse_config(config_text);

  // [run] keys until [checkpoints]
  while (std::getline(in, line)) {
    if (line == "[checkpoints]") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("malformed report run line: " + line);
    }
    const auto key = textio::trim(std::string_view(line).substr(0, eq));
    const auto value = textio::trim(std::string_view(line).substr(eq + 1));
    if (key == "train_size") {
      report.train_size = static_cast<std::size_t>(textio::parse_uint(value));
    } else if (key == "run_seed") {
      report.run_seed = textio::parse_uint(value);
    } else if (key == "true_ordering") {
      for (const auto tok : textio::split(value, ',')) {
        report.true_ordering.push_back(textio::parse_double(tok));
      }
    } else if (key == "status") {
      report.diverged = value == "diverged";
    } else if (key == "diverged_step") {
      report.diverged_step =
          static_cast<std::size_t>(textio::parse_uint(value));
    } else {
      throw std::runtime_error("unknown report run key: '" + std::string(key) +
                               "'");
    }
  }

  const std::size_t k = report.config.num_classes();
  std::string section;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') {
      section = line;
      continue;
    }
    if (section.empty()) {  // still in [checkpoints]
      const auto tokens = textio::split(textio::trim(line), ' ');
      if (tokens.empty()) continue;
      Checkpoint cp;
      cp.step = static_cast<std::size_t>(textio::parse_uint(tokens[0]));
      cp.val_accuracy = textio::parse_double(tokens[1]);
      std::vector<double> extras;
      for (std::size_t i = 2; i < tokens.size(); ++i) {
        extras.push_back(textio::parse_double(tokens[i]));
      }
      if (report.config.scheme == Scheme::plsord) {
        cp.ordering_weights = std::move(extras);
      } else if (report.config.scheme == Scheme::learned) {
        cp.encoding = std::move(extras);
      } else if (!extras.empty()) {
        throw std::runtime_error("unexpected checkpoint extras");
      }
      report.checkpoints.push_back(std::move(cp));
    } else if (section == "[result]") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = textio::trim(std::string_view(line).substr(0, eq));
      const auto value = textio::trim(std::string_view(line).substr(eq + 1));
      if (key == "best_step") {
        report.best_step = static_cast<std::size_t>(textio::parse_uint(value));
      } else if (key == "best_val_accuracy") {
        report.best_val_accuracy = textio::parse_double(value);
      } else if (key == "test_accuracy") {
        report.test_accuracy = textio::parse_double(value);
      } else {
        throw std::runtime_error("unknown report result key");
      }
    } else if (section == "[confusion]") {
      for (const auto tok : textio::split(textio::trim(line), ' ')) {
        report.confusion.push_back(
            static_cast<std::size_t>(textio::parse_uint(tok)));
      }
    } else if (section == "[ordering_weights_final]") {
      for (const auto tok : textio::split(textio::trim(line), ' ')) {
        report.final_ordering_weights.push_back(textio::parse_double(tok));
      }
    } else if (section == "[dominant_ordering]") {
      for (const auto tok : textio::split(textio::trim(line), ' ')) {
        report.dominant_ordering_ranks.push_back(textio::parse_double(tok));
      }
    } else if (section == "[learned_encoding]") {
      for (const auto tok : textio::split(textio::trim(line), ' ')) {
        report.final_encoding.push_back(textio::parse_double(tok));
      }
    } else {
      throw std::runtime_error("unknown report section: " + section);
    }
  }
  if (!report.diverged && report.confusion.size() != k * k) {
    throw std::runtime_error("report confusion matrix size mismatch");
  }
  return report;
}

std::vector<RunReport> run_experiment(const ExperimentConfig& config,
                                      const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory: " +
                             out_dir.string());
  }
  std::vector<RunReport> reports;
  const std::string label = cell_label(config);
  for (const std::size_t size : config.train_sizes) {
    for (const std::uint64_t seed : config.seeds) {
      RunReport report = run_single(config, size, seed);
      const std::string stem = label + "_size" + std::to_string(size) +
                               "_seed" + std::to_string(seed);
      {
        std::ofstream out(out_dir / (stem + ".report.txt"));
        if (!out) {
          throw std::runtime_error("cannot write report file in " +
                                   out_dir.string());
        }
        out << report.to_text();
      }
      {
        std::ofstream timing(out_dir / (stem + ".timing.txt"));
        timing << textio::fmt(report.wall_clock_sec) << "\n";
      }
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

std::vector<RunReport> load_reports(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 11 &&
        name.substr(name.size() - 11) == ".report.txt") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunReport> reports;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      throw std::runtime_error("cannot open report file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    reports.push_back(RunReport::from_text(buffer.str()));
  }
  return reports;
}

SweepSummary sweep_summary(const std::vector<RunReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("sweep_summary: no reports");
  }
  struct CellKey {
    std::string label;
    std::size_t size;
    std::uint64_t seed;
    auto operator<=>(const CellKey&) const = default;
  };
  std::map<CellKey, const RunReport*> cells;
  std::set<std::string> labels;
  std::set<std::size_t> sizes;
  std::set<std::uint64_t> seeds;
  for (const RunReport& r : reports) {
    const CellKey key{cell_label(r.config), r.train_size, r.run_seed};
    if (!cells.emplace(key, &r).second) {
      throw std::invalid_argument("sweep_summary: duplicate cell " + key.label +
                                  " size=" + std::to_string(key.size) +
                                  " seed=" + std::to_string(key.seed));
    }
    labels.insert(key.label);
    sizes.insert(key.size);
    seeds.insert(key.seed);
  }
  std::string missing;
  for (const auto& label : labels) {
    for (const std::size_t size : sizes) {
      for (const std::uint64_t seed : seeds) {
        if (!cells.contains(CellKey{label, size, seed})) {
          missing += "\n  missing cell: " + label +
                     " size=" + std::to_string(size) +
                     " seed=" + std::to_string(seed);
        }
      }
    }
  }
  if (!missing.empty()) {
    throw std::invalid_argument("sweep_summary: ragged grid" + missing);
  }

  const auto mean_std = [](const std::vector<double>& values) {
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return std::pair<double, double>(mean, std::sqrt(std::max(0.0, var)));
  };

  SweepSummary summary;
  for (const auto& label : labels) {
    // running max over ascending sizes, per seed; seeds with any diverged
    // cell are dropped from the running-max statistics
    std::map<std::uint64_t, std::vector<double>> per_seed_accs;
    for (const std::uint64_t seed : seeds) {
      bool ok = true;
      std::vector<double> accs;
      for (const std::size_t size : sizes) {
        const RunReport* r = cells.at(CellKey{label, size, seed});
        if (r->diverged) {
          ok = false;
          break;
        }
        accs.push_back(r->test_accuracy);
      }
      if (ok) {
        for (std::size_t i = 1; i < accs.size(); ++i) {
          accs[i] = std::max(accs[i], accs[i - 1]);
        }
        per_seed_accs.emplace(seed, std::move(accs));
      }
    }

    std::size_t size_index = 0;
    for (const std::size_t size : sizes) {
      SummaryRow row;
      row.scheme = label;
      row.train_size = size;
      std::vector<double> raw;
      for (const std::uint64_t seed : seeds) {
        const RunReport* r = cells.at(CellKey{label, size, seed});
        if (r->diverged) {
          ++row.num_failed;
        } else {
          raw.push_back(r->test_accuracy);
        }
      }
      row.num_seeds = seeds.size();
      if (raw.empty()) {
        throw std::invalid_argument("sweep_summary: every seed diverged for " +
                                    label + " size=" + std::to_string(size));
      }
      std::tie(row.mean_test_accuracy, row.std_test_accuracy) = mean_std(raw);
      std::vector<double> runmax;
      for (const auto& [seed, accs] : per_seed_accs) {
        runmax.push_back(accs[size_index]);
      }
      if (runmax.empty()) {
        throw std::invalid_argument(
            "sweep_summary: no surviving seeds for running max of " + label);
      }
      std::tie(row.mean_running_max_accuracy, row.std_running_max_accuracy) =
          mean_std(runmax);
      summary.rows.push_back(std::move(row));
      ++size_index;
    }
  }
  return summary;
}

std::string SweepSummary::to_csv() const {
  std::string out =
      "scheme,train_size,num_seeds,num_failed,mean_test_accuracy,"
      "std_test_accuracy,mean_running_max_accuracy,std_running_max_accuracy\n";
  for (const SummaryRow& row : rows) {
    out += row.scheme + ',' + std::to_string(row.train_size) + ',' +
           std::to_string(row.num_seeds) + ',' + std::to_string(row.num_failed) +
           ',' + textio::fmt(row.mean_test_accuracy) + ',' +
           textio::fmt(row.std_test_accuracy) + ',' +
           textio::fmt(row.mean_running_max_accuracy) + ',' +
           textio::fmt(row.std_running_max_accuracy) + '\n';
  }
  return out;
}

std::string SweepSummary::to_plot_json() const {
  nlohmann::json series = nlohmann::json::array();
  std::string current;
  nlohmann::json entry;
  for (const SummaryRow& row : rows) {
    if (row.scheme != current) {
      if (!current.empty()) series.push_back(entry);
      current = row.scheme;
      entry = nlohmann::json{{"scheme", row.scheme},
                             {"train_sizes", nlohmann::json::array()},
                             {"mean_test_accuracy", nlohmann::json::array()},
                             {"std_test_accuracy", nlohmann::json::array()},
                             {"mean_running_max_accuracy", nlohmann::json::array()},
                             {"std_running_max_accuracy", nlohmann::json::array()},
                             {"num_failed", nlohmann::json::array()}};
    }
    entry["train_sizes"].push_back(row.train_size);
    entry["mean_test_accuracy"].push_back(row.mean_test_accuracy);
    entry["std_test_accuracy"].push_back(row.std_test_accuracy);
    entry["mean_running_max_accuracy"].push_back(row.mean_running_max_accuracy);
    entry["std_running_max_accuracy"].push_back(row.std_running_max_accuracy);
    entry["num_failed"].push_back(row.num_failed);
  }
  if (!current.empty()) series.push_back(entry);
  nlohmann::json doc{{"format", "ordenc-summary/1"}, {"series", series}};
  return doc.dump(2) + "\n";
}

}  // namespace ordenc::harness
