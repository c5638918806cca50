#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stresscast/common.hpp"
#include "stresscast/nn/model.hpp"
#include "stresscast/nn/optim.hpp"
#include "stresscast/windowing.hpp"

namespace stresscast::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t early_stop_patience = 10;  // epochs without validation improvement
  std::uint64_t seed = 0;
  bool freeze_encoder = false;
};

void validate(const TrainConfig& cfg);

/// Raised when a loss becomes NaN or infinite.
class TrainingDiverged : public DataError {
 public:
  using DataError::DataError;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 0-based
  std::size_t epochs_run = 0;
  bool stopped_early = false;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

/// One reconstruction-loss update on the encoder and decoder.
class AutoencoderTrainer {
 public:
  AutoencoderTrainer(ModelParams& params, double learning_rate);
  /// Returns the batch loss before the update.
  double step(std::span<const Tensor> batch);

 private:
  ModelParams& params_;
  Adam adam_;
};

/// Trains encoder + decoder for cfg.max_epochs on shuffled mini-batches.
TrainResult train_autoencoder(const ModelParams& init, std::span<const Example> examples, const TrainConfig& cfg);

/// Binary cross-entropy training with early stopping on validation loss.
/// Returns the best-validation checkpoint. With freeze_encoder the encoder
/// is neither differentiated nor updated.
TrainResult train_classifier(const ModelParams& init, const DatasetSplit& split, const TrainConfig& cfg);

/// One probability per example, in order. Checks the window shape against
/// the length the parameters were trained at.
std::vector<double> predict(const ModelParams& params, std::span<const Example> examples);

}  // namespace stresscast::nn
