#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vibgsl/config.hpp"
#include "vibgsl/graph.hpp"
#include "vibgsl/model.hpp"
#include "vibgsl/objective.hpp"

namespace vibgsl {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double total = 0.0;     // ce + beta * kl over the epoch means
  double ce = 0.0;
  double kl = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> eval_accuracy;
};

struct TrainRun {
  Model model;
  std::vector<EpochLog> epochs;
  std::vector<double> epoch_seconds;
};

/// Algorithm-1 loop on `train_idx`: per graph generate, encode, sample,
/// classify, compute the loss and step Adam (gradients averaged over
/// config.batch_size graphs). `eval_idx` is scored after every epoch.
[[nodiscard]] TrainRun train_model(const GraphDataset& ds, const std::vector<std::size_t>& train_idx,
                                   const std::vector<std::size_t>& eval_idx, const TrainConfig& config,
                                   std::uint64_t model_seed);

/// Evaluation-mode accuracy; graph i uses X_r drawn from mix_seed(eval_seed, i).
[[nodiscard]] double evaluate(Model& model, const GraphDataset& ds, const std::vector<std::size_t>& idx,
                              std::uint64_t eval_seed);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> test;  // sorted indices per fold
  bool stratified = true;
  std::optional<std::string> warning;

  [[nodiscard]] std::vector<std::size_t> train_indices(std::size_t fold, std::size_t dataset_size) const;
};

/// Label-stratified k-fold split; falls back to an unstratified split (with
/// a warning) when some class has fewer than k members.
[[nodiscard]] FoldSplit make_folds(const GraphDataset& ds, std::size_t k, std::uint64_t seed);

struct FoldResult {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double accuracy = 0.0;
  LossBreakdown final_loss;
};

struct ExperimentReport {
  std::string experiment;
  TrainConfig config;
  std::string dataset;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation
  std::vector<std::vector<EpochLog>> epoch_logs;
  std::vector<std::vector<double>> epoch_seconds;
  std::vector<std::string> warnings;
  // Set for denoising cells.
  std::optional<PerturbMode> perturb_mode;
  std::optional<double> perturb_ratio;

  /// Recomputes mean and sample std from the per-fold accuracies.
  void summarize();
};

/// Trains on every graph and reports training accuracy (evaluation mode).
[[nodiscard]] ExperimentReport train(const GraphDataset& ds, const TrainConfig& config, Model* trained = nullptr);
/// k-fold cross-validation with one fresh model per fold; the fold accuracy
/// is the test accuracy after the final epoch.
[[nodiscard]] ExperimentReport cross_validate(const GraphDataset& ds, const TrainConfig& config);
/// One cross-validation per beta with shared folds and seeds.
[[nodiscard]] std::vector<ExperimentReport> beta_sweep(const GraphDataset& ds, const TrainConfig& config,
                                                       const std::vector<double>& betas);
[[nodiscard]] std::vector<double> default_beta_grid();

struct DenoiseOptions {
  std::vector<double> ratios = {0.25, 0.5, 0.75};
  std::vector<PerturbMode> modes = {PerturbMode::remove, PerturbMode::add};
  /// Also train the raw_gnn baseline on every cell.
  bool with_baseline = true;
};

/// Per (mode, ratio, model) cell: perturb every graph, then run config.runs
/// train/test runs. Run r tests on fold r of a config.runs-fold split and
/// seeds the model exactly as cross-validation fold r would.
[[nodiscard]] std::vector<ExperimentReport> denoise_experiment(const GraphDataset& ds, const TrainConfig& config,
                                                               const DenoiseOptions& options);
/// Max minus min of the cells' mean accuracies for one model and mode.
[[nodiscard]] double accuracy_spread(const std::vector<ExperimentReport>& cells, ModelKind model, PerturbMode mode);

struct TimingPoint {
  std::size_t nodes = 0;
  double seconds = 0.0;  // mean forward + backward + optimizer step
};

struct TimingReport {
  std::vector<TimingPoint> points;
  double coefficient = 0.0;  // c in c * n^p
  double exponent = 0.0;     // p
};

/// Times single-graph training steps on random graphs of each size and fits
/// seconds = c * n^p by least squares in log-log space. Each timing block runs
/// at least `repeats` steps and at least 50 ms.
[[nodiscard]] TimingReport timing_probe(const TrainConfig& config, const std::vector<std::size_t>& sizes,
                                        std::size_t feature_dim = 8, std::size_t repeats = 20);

// Seed streams derived from config.seed.
[[nodiscard]] std::uint64_t split_seed(const TrainConfig& config);
[[nodiscard]] std::uint64_t fold_model_seed(const TrainConfig& config, std::size_t fold);
[[nodiscard]] std::uint64_t eval_seed(const TrainConfig& config);
[[nodiscard]] std::uint64_t perturbation_seed(const TrainConfig& config, PerturbMode mode, std::size_t ratio_index);

// Serialisation. Wall-clock data is written only by timing_json.
[[nodiscard]] nlohmann::ordered_json report_json(const ExperimentReport& report);
[[nodiscard]] nlohmann::ordered_json reports_json(const std::vector<ExperimentReport>& reports);
[[nodiscard]] nlohmann::ordered_json timing_json(const std::vector<ExperimentReport>& reports);
[[nodiscard]] nlohmann::ordered_json timing_json(const TimingReport& report);
/// One row per fold/run: experiment, config hash, model, beta, mode, ratio,
/// fold, seed, accuracy and final losses.
void write_report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);
/// One row per (report, fold, epoch).
void write_epochs_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);

}  // namespace vibgsl
