#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "par/analysis.hpp"
#include "par/hin.hpp"
#include "par/ingest.hpp"
#include "par/model.hpp"
#include "par/objectives.hpp"

namespace par {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  /// d_in is taken from the graph's features at train time.
  ModelOptions model;
  LossWeights weights;
  LossSelection losses;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 100;
  /// Labeled entities per step, and echo-loss anchors per step.
  std::size_t batch_size = 64;
  /// Epochs without a validation improvement before stopping; 0 disables early stopping.
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  /// When set, the consistency term also covers validation and test entities.
  bool consistency_on_all_labeled = false;
  /// When set, every improvement is written to <dir>/epoch-<k>/ and named in <dir>/best.
  std::optional<std::filesystem::path> checkpoint_dir;
};

/// Loss weights from the hyperparameter table.
LossWeights table8_weights();
/// lambda_1 = 1 and lambda_4 = 1e-5 with lambda_2, lambda_3 inside the ranges found to balance the objectives.
LossWeights appendix_b3_weights();

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  LossReport loss;
};

struct EpochRecord {
  std::size_t epoch = 0;
  /// Mean over the epoch's steps.
  LossReport loss;
  double validation_liberal = 0.0;
  double validation_conservative = 0.0;
  double validation_combined = 0.0;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation = 0.0;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

TrainResult train(const Hin& hin, const SplitAssignment& split, const TrainConfig& config);

enum class SplitPart { train, validation, test };

/// Argmax predictions of both heads scored per side and combined by harmonic mean.
MetricsReport evaluate(const ModelParams& params, const Hin& hin, const SplitAssignment& split, SplitPart part);

/// Same, from precomputed head outputs.
MetricsReport evaluate_heads(const Matrix& liberal, const Matrix& conservative, std::span<const ExpertLabel> liberal_labels,
                             std::span<const ExpertLabel> conservative_labels);

/// epoch,step,L1,L2,L3,reg,total
void write_training_log(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace par
