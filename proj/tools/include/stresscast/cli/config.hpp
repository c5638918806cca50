#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stresscast/nn/model.hpp"
#include "stresscast/nn/train.hpp"
#include "stresscast/synthetic.hpp"

namespace stresscast::cli {

/// Everything a command needs, resolved from the JSON config and flags.
struct AppConfig {
  std::filesystem::path config_path;
  std::filesystem::path work_dir = "work";
  std::uint64_t root_seed = 1;
  std::size_t threads = 1;
  double target_rate_hz = 4.0;

  // generate
  SyntheticConfig study;
  int baseline_subjects = 3;
  double baseline_duration_s = 2400.0;
  std::pair<double, double> baseline_dance{300.0, 900.0};
  std::pair<double, double> baseline_relax{1200.0, 1800.0};

  // preprocess
  std::vector<double> window_lengths{60.0, 300.0};
  std::vector<double> lead_times{0.0, 60.0, 120.0, 180.0, 240.0, 300.0};

  // tune-activity
  double activity_window_s = 60.0;

  // pretrain
  int corpus_subjects = 3;
  int corpus_weeks = 1;
  nn::TrainConfig pretrain_autoencoder{.max_epochs = 20};
  nn::TrainConfig pretrain_classifier;

  // run / grid
  nn::Architecture arch;
  nn::TrainConfig train;
  std::size_t n_seeds = 10;
  std::optional<std::size_t> budget;
};

/// Defaults overlaid with the file's sections. Unknown keys are rejected.
/// A manifest written by a previous command is accepted in place of a
/// config; its recorded parameters are used.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const AppConfig& cfg);

void validate(const AppConfig& cfg);

}  // namespace stresscast::cli
