#include "stresscast/nn/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "stresscast/nn/ops.hpp"
#include "stresscast/rng.hpp"

namespace stresscast::nn {

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (cfg.batch_size == 0) throw ValidationError("batch_size must be > 0");
  if (cfg.max_epochs == 0) throw ValidationError("max_epochs must be > 0");
  if (cfg.early_stop_patience == 0) throw ValidationError("early_stop_patience must be > 0");
}

namespace {

std::vector<Tensor> tensors_of(std::span<const Example> examples) {
  std::vector<Tensor> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(to_tensor(e.signal));
  return out;
}

std::vector<double> labels_of(std::span<const Example> examples) {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.is_event() ? 1.0 : 0.0);
  return out;
}

std::size_t common_length(std::span<const Tensor> xs, const ModelParams& params) {
  const std::size_t len = xs.front().dim(1);
  for (const auto& x : xs) {
    check_input(params, x);
    if (x.dim(1) != len) throw ValidationError("all windows must share one length");
  }
  if (params.input_length != 0 && params.input_length != len) {
    throw ValidationError("window length " + std::to_string(len) + " differs from the parameters' length " +
                          std::to_string(params.input_length));
  }
  return len;
}

void check_finite(double loss, const char* what) {
  if (!std::isfinite(loss)) throw TrainingDiverged(std::string(what) + ": loss became non-finite");
}

}  // namespace

AutoencoderTrainer::AutoencoderTrainer(ModelParams& params, double learning_rate)
    : params_(params), adam_([&] {
        auto t = params.encoder_tensors();
        for (auto* d : params.decoder_tensors()) t.push_back(d);
        return t;
      }(), learning_rate) {}

double AutoencoderTrainer::step(std::span<const Tensor> batch) {
  adam_.zero_grad();
  const double loss = autoencoder_batch_loss(params_, batch, true);
  check_finite(loss, "autoencoder");
  adam_.step();
  return loss;
}

TrainResult train_autoencoder(const ModelParams& init, std::span<const Example> examples, const TrainConfig& cfg) {
  validate(cfg);
  if (examples.empty()) throw DataError("train_autoencoder: no examples");
  TrainResult result{init, {}};
  auto& params = result.params;
  const auto xs = tensors_of(examples);
  params.input_length = common_length(xs, params);

  AutoencoderTrainer trainer(params, cfg.learning_rate);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::vector<Tensor> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i) batch.push_back(xs[order[i]]);
      total += trainer.step(batch) * static_cast<double>(batch.size());
    }
    result.history.train_loss.push_back(total / static_cast<double>(order.size()));
    result.history.epochs_run = epoch + 1;
  }
  result.history.best_epoch = result.history.epochs_run - 1;
  params.zero_grad();
  return result;
}

TrainResult train_classifier(const ModelParams& init, const DatasetSplit& split, const TrainConfig& cfg) {
  validate(cfg);
  if (split.train.empty() || split.validation.empty()) {
    throw DataError("train_classifier: train and validation parts must be non-empty");
  }
  ModelParams params = init;
  const auto train_x = tensors_of(split.train);
  const auto train_y = labels_of(split.train);
  const auto val_x = tensors_of(split.validation);
  const auto val_y = labels_of(split.validation);
  params.input_length = common_length(train_x, params);
  if (common_length(val_x, params) != params.input_length) throw ValidationError("validation window length differs");

  std::vector<Tensor*> trainable = params.head_tensors();
  if (!cfg.freeze_encoder) {
    for (auto* t : params.encoder_tensors()) trainable.push_back(t);
  }
  Adam adam(trainable, cfg.learning_rate);
  Rng rng(cfg.seed);

  TrainResult best{params, {}};
  auto& history = best.history;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::vector<Tensor> batch;
      std::vector<double> labels;
      for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i) {
        batch.push_back(train_x[order[i]]);
        labels.push_back(train_y[order[i]]);
      }
      adam.zero_grad();
      const double loss = classifier_batch_loss(params, batch, labels, true, !cfg.freeze_encoder);
      check_finite(loss, "classifier");
      adam.step();
      total += loss * static_cast<double>(batch.size());
    }
    const double val = classifier_batch_loss(static_cast<const ModelParams&>(params), val_x, val_y);
    check_finite(val, "classifier validation");
    history.train_loss.push_back(total / static_cast<double>(order.size()));
    history.val_loss.push_back(val);
    history.epochs_run = epoch + 1;
    if (val < best_val) {
      best_val = val;
      history.best_epoch = epoch;
      best.params = params;
    }
    if (epoch - history.best_epoch >= cfg.early_stop_patience) {
      history.stopped_early = true;
      break;
    }
  }
  best.params.zero_grad();
  return best;
}

std::vector<double> predict(const ModelParams& params, std::span<const Example> examples) {
  std::vector<double> scores;
  scores.reserve(examples.size());
  for (const auto& e : examples) {
    const Tensor x = to_tensor(e.signal);
    if (params.input_length != 0 && x.shape().size() == 2 && x.dim(1) != params.input_length) {
      throw ValidationError("predict: window length " + std::to_string(x.dim(1)) + " differs from training length " +
                            std::to_string(params.input_length));
    }
    scores.push_back(sigmoid(classifier_logit(params, x)));
  }
  return scores;
}

}  // namespace stresscast::nn
