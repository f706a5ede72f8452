#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ordenc/experiment_config.hpp"
#include "ordenc/synthdata.hpp"

namespace ordenc::harness {

/// One validation evaluation. `ordering_weights` is filled for plsord runs,
/// `encoding` (row-major K x K) for learned runs.
struct Checkpoint {
  std::size_t step = 0;
  double val_accuracy = 0.0;
  std::vector<double> ordering_weights;
  std::vector<double> encoding;
};

/// Record of a single training run. Wall-clock time is kept out of the
/// canonical serialization so reports are byte-identical across reruns; the
/// sweep writes it to a timing sidecar instead.
struct RunReport {
  ExperimentConfig config;
  std::size_t train_size = 0;
  std::uint64_t run_seed = 0;
  std::vector<double> true_ordering;

  bool diverged = false;
  std::size_t diverged_step = 0;

  std::vector<Checkpoint> checkpoints;
  std::size_t best_step = 0;
  double best_val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<std::size_t> confusion;  // K x K, row = clean class, col = predicted

  std::vector<double> final_ordering_weights;      // plsord
  std::vector<double> dominant_ordering_ranks;     // plsord
  std::vector<double> final_encoding;              // learned, row-major

  double wall_clock_sec = 0.0;  // not serialized

  std::string to_text() const;
  static RunReport from_text(const std::string& text);
};

/// Label used to group runs in summaries and report filenames; includes the
/// hyperparameter that distinguishes curves of the same scheme.
std::string cell_label(const ExperimentConfig& config);

/// Indices into the dataset for one grid cell, all deterministic given the
/// dataset seed (validation/test split) and the run seed (training subset).
/// The training subset is prefix-stable: the subset for a smaller size is
/// contained in the subset for any larger size under the same seed.
struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};
DataSplit make_split(const ExperimentConfig& config,
                     const synth::Dataset& dataset, std::size_t train_size,
                     std::uint64_t run_seed);

/// Trains one (train_size, run_seed) cell and evaluates the best-validation
/// checkpoint on the held-out test split. When `best_model` is non-null it
/// receives the parameters of the selected checkpoint.
RunReport run_single(const ExperimentConfig& config, std::size_t train_size,
                     std::uint64_t run_seed,
                     diff::ModelParams* best_model = nullptr);

/// Runs the full (train_sizes x seeds) grid, persisting one report file and
/// one timing sidecar per cell under `out_dir`.
std::vector<RunReport> run_experiment(const ExperimentConfig& config,
                                      const std::filesystem::path& out_dir);

std::vector<RunReport> load_reports(const std::filesystem::path& dir);

/// Per (scheme label, size) aggregate. The running-max column reports, for
/// each size, the best test accuracy attained at that size or any smaller
/// one, averaged over seeds.
struct SummaryRow {
  std::string scheme;
  std::size_t train_size = 0;
  std::size_t num_seeds = 0;
  std::size_t num_failed = 0;
  double mean_test_accuracy = 0.0;
  double std_test_accuracy = 0.0;
  double mean_running_max_accuracy = 0.0;
  double std_running_max_accuracy = 0.0;
};

struct SweepSummary {
  std::vector<SummaryRow> rows;

  std::string to_csv() const;
  std::string to_plot_json() const;
};

/// Aggregates a complete (scheme, size, seed) grid of reports; a ragged grid
/// is an error listing every missing cell. Diverged runs are excluded from
/// the means and counted in num_failed.
SweepSummary sweep_summary(const std::vector<RunReport>& reports);

}  // namespace ordenc::harness
