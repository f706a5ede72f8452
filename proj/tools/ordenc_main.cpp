// Command-line front end: dataset generation, single training runs, sweep
// grids, report aggregation, gradient checking, and encoding printouts.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ordenc/diffcore.hpp"
#include "ordenc/harness.hpp"
#include "ordenc/learned_codec.hpp"
#include "ordenc/numeric.hpp"
#include "ordenc/ordering_search.hpp"
#include "ordenc/synthdata.hpp"
#include "ordenc/textio.hpp"

namespace {

using namespace ordenc;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

harness::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
  harness::ExperimentConfig config = harness::load_config(opts.config_path);
  if (opts.seed.has_value()) {
    config.seeds = {*opts.seed};
  }
  return config;
}

int cmd_generate(const CommonOpts& opts) {
  harness::ExperimentConfig config = harness::load_config(opts.config_path);
  synth::SynthConfig synth_config = config.synth;
  if (opts.seed.has_value()) {
    synth_config.seed = *opts.seed;
  }
  const synth::Dataset dataset = synth::generate(synth_config);
  synth::save_dataset(dataset, opts.out);
  std::cout << "wrote " << dataset.num_samples() << " samples to " << opts.out
            << "\n";
  return 0;
}

int cmd_train(const CommonOpts& opts, const std::optional<std::size_t>& size,
              const std::string& checkpoint_out) {
  harness::ExperimentConfig config = load_with_overrides(opts);
  std::size_t train_size = 0;
  if (size.has_value()) {
    train_size = *size;
  } else if (config.train_size.has_value()) {
    train_size = *config.train_size;
  } else if (config.train_sizes.size() == 1) {
    train_size = config.train_sizes.front();
  } else {
    throw std::invalid_argument(
        "train: specify --size or config key 'train_size'");
  }
  config.train_size = train_size;
  config.validate();

  const std::uint64_t run_seed = config.seeds.front();
  diff::ModelParams best_model(diff::ModelConfig{{2, 2}, diff::Activation::relu},
                               {diff::Layer{diff::Matrix(2, 2), {0.0, 0.0}}});
  const harness::RunReport report =
      harness::run_single(config, train_size, run_seed, &best_model);

  const std::filesystem::path out_dir(opts.out);
  std::filesystem::create_directories(out_dir);
  const std::string stem = harness::cell_label(config) + "_size" +
                           std::to_string(train_size) + "_seed" +
                           std::to_string(run_seed);
  {
    std::ofstream out(out_dir / (stem + ".report.txt"));
    if (!out) {
      throw std::runtime_error("cannot write report under " + opts.out);
    }
    out << report.to_text();
  }
  {
    std::ofstream timing(out_dir / (stem + ".timing.txt"));
    timing << textio::fmt(report.wall_clock_sec) << "\n";
  }
  if (!checkpoint_out.empty() && !report.diverged) {
    diff::save_checkpoint(checkpoint_out, best_model, run_seed);
  }
  if (report.diverged) {
    std::cout << stem << ": diverged at step " << report.diverged_step << "\n";
  } else {
    std::cout << stem << ": val " << textio::fmt(report.best_val_accuracy)
              << " at step " << report.best_step << ", test "
              << textio::fmt(report.test_accuracy) << " ("
              << textio::fmt(report.wall_clock_sec) << " s)\n";
  }
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  const harness::ExperimentConfig config = load_with_overrides(opts);
  const std::filesystem::path out_dir(opts.out);
  const auto reports = harness::run_experiment(config, out_dir);
  const auto summary = harness::sweep_summary(reports);
  {
    std::ofstream csv(out_dir / "summary.csv");
    csv << summary.to_csv();
  }
  {
    std::ofstream json(out_dir / "summary.json");
    json << summary.to_plot_json();
  }
  std::cout << summary.to_csv();
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir_arg) {
  const auto reports = harness::load_reports(in_dir);
  const auto summary = harness::sweep_summary(reports);
  const std::filesystem::path out_dir =
      out_dir_arg.empty() ? std::filesystem::path(in_dir)
                          : std::filesystem::path(out_dir_arg);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "summary.csv");
    csv << summary.to_csv();
  }
  {
    std::ofstream json(out_dir / "summary.json");
    json << summary.to_plot_json();
  }
  std::cout << summary.to_csv();
  return 0;
}

int cmd_encode(const std::string& scheme, std::size_t num_classes,
               const std::optional<double>& scale, double target_mass,
               const std::vector<double>& positions) {
  const auto make_ranks = [&](codec::Geometry geometry) {
    return positions.empty()
               ? codec::RankAssignment::equally_spaced(num_classes, geometry)
               : codec::RankAssignment(positions, geometry);
  };
  std::optional<codec::LabelMatrix> matrix;
  if (scheme == "onehot") {
    matrix = codec::encode_onehot(num_classes);
  } else if (scheme == "sord_linear" || scheme == "sord_circular") {
    if (!scale.has_value()) {
      throw std::invalid_argument("encode: scheme '" + scheme +
                                  "' requires --s");
    }
    const auto geometry = scheme == "sord_linear" ? codec::Geometry::linear
                                                  : codec::Geometry::circular;
    const auto spec = geometry == codec::Geometry::linear
                          ? codec::DistanceSpec::make_linear(*scale)
                          : codec::DistanceSpec::make_circular(*scale);
    matrix = codec::encode_sord(make_ranks(geometry), spec);
  } else if (scheme == "learned") {
    matrix = learned::materialize(
        learned::EncodingParams(num_classes, target_mass));
  } else {
    throw std::invalid_argument(
        "encode: scheme must be onehot, sord_linear, sord_circular, or "
        "learned");
  }
  std::cout << matrix->to_text();
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  using diff::Matrix;
  rng::Engine engine(seed);
  const std::size_t k = 4;
  const std::size_t batch = 16;

  diff::ModelConfig model_config;
  model_config.layer_dims = {6, 16, 16, k};
  model_config.activation = diff::Activation::relu;
  diff::ModelParams model = diff::ModelParams::init(model_config, engine);

  Matrix features(batch, 6);
  for (double& v : features.data) v = engine.normal();
  std::vector<std::size_t> labels(batch);
  for (auto& l : labels) l = engine.uniform_index(k);

  const auto sord = codec::encode_sord(
      codec::RankAssignment::equally_spaced(k, codec::Geometry::circular),
      codec::DistanceSpec::make_circular(1.0));
  Matrix targets(batch, k);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto row = sord.row(labels[b]);
    std::copy(row.begin(), row.end(), targets.row(b).begin());
  }

  // (a) model weights under the soft ordinal cross entropy
  std::vector<double> point(model.param_count());
  model.flatten(point);
  diff::ForwardCache cache;
  diff::forward_cached(model, features, cache);
  const auto dlogits = diff::cross_entropy_logit_grad(cache.probs, targets);
  std::vector<double> analytic(point.size());
  diff::backward(model, cache, dlogits).flatten(analytic);
  diff::ModelParams scratch = model;
  const auto model_loss = [&](std::span<const double> flat) {
    scratch.unflatten(flat);
    return diff::cross_entropy(diff::forward(scratch, features), targets);
  };
  const auto res_model =
      diff::grad_check(model_loss, point, analytic, seed + 1);

  // (b) ordering weights under the weighted total loss
  const auto equally_spaced =
      codec::RankAssignment::equally_spaced(k, codec::Geometry::circular);
  const auto candidates = ordering::enumerate_orderings(
      k,
      std::vector<double>(equally_spaced.ranks().begin(),
                          equally_spaced.ranks().end()),
      codec::Geometry::circular);
  std::vector<double> losses;
  {
    std::vector<double> prediction(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) prediction[i] = 1.0 / k;
    prediction[0] += 0.1;
    prediction[1] -= 0.1;
    losses = ordering::per_ordering_losses(
        prediction, 1, candidates, codec::DistanceSpec::make_circular(1.0));
  }
  std::vector<double> logits(candidates.size());
  for (double& v : logits) v = engine.normal();
  const ordering::OrderingWeights weights{logits};
  const auto grad_logits =
      ordering::weighted_total_loss_logit_grad(losses, weights);
  const auto logit_loss = [&](std::span<const double> flat) {
    return ordering::weighted_total_loss(
        losses,
        ordering::OrderingWeights{std::vector<double>(flat.begin(), flat.end())});
  };
  const auto res_logits =
      diff::grad_check(logit_loss, logits, grad_logits, seed + 2);

  // (c) encoding parameters of the learned codec
  learned::EncodingParams enc(k, 0.855);
  std::vector<double> alpha(enc.logits().begin(), enc.logits().end());
  for (double& v : alpha) v = 0.3 * engine.normal();
  enc = learned::EncodingParams(k, alpha, 0.855);
  const Matrix probs = diff::forward(model, features);
  const auto dtargets = diff::cross_entropy_target_grad(probs);
  std::vector<double> alpha_grad(alpha.size(), 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    learned::accumulate_logit_grad(
        enc, labels[b], dtargets.row(b),
        std::span<double>(alpha_grad).subspan(labels[b] * (k - 1), k - 1));
  }
  const auto alpha_loss = [&](std::span<const double> flat) {
    learned::EncodingParams e(k, std::vector<double>(flat.begin(), flat.end()),
                              0.855);
    const auto mat = learned::materialize(e);
    Matrix t(batch, k);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto row = mat.row(labels[b]);
      std::copy(row.begin(), row.end(), t.row(b).begin());
    }
    return diff::cross_entropy(probs, t);
  };
  const auto res_alpha =
      diff::grad_check(alpha_loss, alpha, alpha_grad, seed + 3);

  // quadratic sanity
  std::vector<double> x(32);
  for (double& v : x) v = engine.normal();
  const auto quad_loss = [](std::span<const double> p) {
    double acc = 0.0;
    for (const double v : p) acc += 0.5 * v * v;
    return acc;
  };
  const auto res_quad = diff::grad_check(quad_loss, x, x, seed + 4);

  std::cout << "quadratic          max rel err " << textio::fmt(res_quad.max_rel_error)
            << "\n";
  std::cout << "model weights      max rel err "
            << textio::fmt(res_model.max_rel_error) << "\n";
  std::cout << "ordering weights   max rel err "
            << textio::fmt(res_logits.max_rel_error) << "\n";
  std::cout << "encoding params    max rel err "
            << textio::fmt(res_alpha.max_rel_error) << "\n";
  const bool ok = res_quad.max_rel_error < 1e-7 &&
                  res_model.max_rel_error < 1e-5 &&
                  res_logits.max_rel_error < 1e-5 &&
                  res_alpha.max_rel_error < 1e-5;
  if (!ok) {
    std::cerr << "error: gradient check failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordinal label-encoding experiments"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::optional<std::size_t> train_size_flag;
  std::string checkpoint_out;
  std::string report_in;
  std::string report_out;
  std::string encode_scheme;
  std::size_t encode_k = 4;
  std::optional<double> encode_scale;
  double encode_target_mass = 0.855;
  std::vector<double> encode_positions;
  std::uint64_t gradcheck_seed = 1234;

  auto* generate = app.add_subcommand("generate", "write a dataset file");
  generate->add_option("--config", opts.config_path)->required();
  generate->add_option("--seed", opts.seed);
  generate->add_option("--out", opts.out)->required();

  auto* train = app.add_subcommand("train", "run one training cell");
  train->add_option("--config", opts.config_path)->required();
  train->add_option("--seed", opts.seed);
  train->add_option("--size", train_size_flag);
  train->add_option("--out", opts.out)->required();
  train->add_option("--checkpoint-out", checkpoint_out);

  auto* sweep = app.add_subcommand("sweep", "run the size x seed grid");
  sweep->add_option("--config", opts.config_path)->required();
  sweep->add_option("--seed", opts.seed);
  sweep->add_option("--out", opts.out)->required();

  auto* report = app.add_subcommand("report", "summarize persisted reports");
  report->add_option("--in", report_in)->required();
  report->add_option("--out", report_out);

  auto* encode = app.add_subcommand("encode", "print a label matrix");
  encode->add_option("--scheme", encode_scheme)->required();
  encode->add_option("--k", encode_k);
  encode->add_option("--s,--scale", encode_scale);
  encode->add_option("--target-mass", encode_target_mass);
  encode->add_option("--positions", encode_positions);

  auto* gradcheck = app.add_subcommand("gradcheck", "run the gradient oracles");
  gradcheck->add_option("--seed", gradcheck_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(opts);
    if (train->parsed()) return cmd_train(opts, train_size_flag, checkpoint_out);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (report->parsed()) return cmd_report(report_in, report_out);
    if (encode->parsed()) {
      return cmd_encode(encode_scheme, encode_k, encode_scale,
                        encode_target_mass, encode_positions);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
