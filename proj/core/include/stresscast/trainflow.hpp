#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stresscast/activity.hpp"
#include "stresscast/metrics.hpp"
#include "stresscast/nn/model.hpp"
#include "stresscast/nn/train.hpp"
#include "stresscast/synthetic.hpp"
#include "stresscast/windowing.hpp"

namespace stresscast {

enum class ApplicationMode {
  PretrainedDirect,
  PretrainedRandomFT,
  PretrainedPersonalizedFT,
  UninitRandom,
  UninitPersonalized,
};

inline constexpr ApplicationMode kAllModes[] = {
    ApplicationMode::PretrainedDirect, ApplicationMode::PretrainedRandomFT,
    ApplicationMode::PretrainedPersonalizedFT, ApplicationMode::UninitRandom,
    ApplicationMode::UninitPersonalized};

std::string_view to_string(ApplicationMode mode);
ApplicationMode mode_from_string(std::string_view name);
bool uses_pretrained(ApplicationMode mode);
bool is_personalized(ApplicationMode mode);

/// Experimental condition shared by a block of grid cells.
struct Condition {
  double window_len_s = 60.0;
  bool activity_gate = false;
  double target_rate_hz = 4.0;
  friend bool operator==(const Condition&, const Condition&) = default;
};

/// Events and all non-event tiles of every session, standardized, with
/// accelerometer slices attached. Sessions that yield nothing are skipped.
std::vector<Example> build_examples(std::span<const PreprocessedSession> sessions, const WindowConfig& cfg);

struct PretrainCorpus {
  std::string name;
  std::vector<Session> sessions;
};

/// Four generated stand-ins for public stress corpora, differing in how
/// stress episodes are labeled: "task-phase", "tsst-block",
/// "continuous-rating", "self-tag". Each has `subjects` subjects with one
/// session per week of `base`.
std::vector<PretrainCorpus> synthetic_corpora(const SyntheticConfig& base, int subjects);

struct PretrainConfig {
  WindowConfig window;
  nn::Architecture arch;
  nn::TrainConfig autoencoder{.max_epochs = 20};
  nn::TrainConfig classifier;
  std::uint64_t seed = 0;
};

struct PretrainFold {
  std::string held_out;
  metrics::MetricsReport report;
};

struct PretrainResult {
  nn::ModelParams params;            // trained on every corpus
  std::vector<PretrainFold> folds;   // leave-one-corpus-out
};

/// Autoencoder on the windows of the training corpora, then the classifier
/// on their stress labels; one fold per held-out corpus, final parameters
/// from all corpora.
PretrainResult pretrain(std::span<const PretrainCorpus> corpora, const PretrainConfig& cfg);

/// Sees every partition a run hands to training or evaluation. `part` is one
/// of "train", "validation", "test", "stage1-train", "stage1-validation",
/// "stage2-train", "stage2-validation". Called concurrently when threads > 1.
using PartitionObserver = std::function<void(std::size_t seed_index, const std::string& held_out,
                                             std::string_view part, std::span<const Example> examples)>;

struct RunConfig {
  std::uint64_t root_seed = 0;
  std::size_t n_seeds = 10;
  nn::Architecture arch;
  nn::TrainConfig train;  // seed field is overridden per run
  std::optional<activity::Model> gate;
  std::size_t threads = 1;
  PartitionObserver observe;
};

/// Seed of the i-th repetition.
std::uint64_t run_seed(const RunConfig& cfg, std::size_t index);

/// One model evaluated on one test set.
struct Evaluation {
  std::size_t seed_index = 0;
  std::string held_out;  // personalized modes only
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<double> scores;
  std::vector<int> labels;
};

struct RunResult {
  ApplicationMode mode = ApplicationMode::PretrainedDirect;
  Condition condition;
  double lead_time_s = 0.0;
  std::vector<double> per_seed_accuracy;
  std::vector<double> per_seed_f1;
  std::vector<Evaluation> evaluations;
  metrics::MetricsReport report;
};

/// Runs one application mode on the examples of one (condition, lead) cell,
/// repeated over cfg.n_seeds seeds. `pretrained` must be given exactly for
/// the pretrained modes. Personalized modes hold out each subject in turn and
/// weight subjects equally within a seed.
RunResult run_mode(ApplicationMode mode, std::span<const Example> examples, const Condition& condition,
                   double lead_time_s, const nn::ModelParams* pretrained, const RunConfig& cfg);

void to_json(nlohmann::json& j, const Condition& c);
void from_json(const nlohmann::json& j, Condition& c);
/// Per-evaluation scores are omitted; the report carries the ROC curve.
void to_json(nlohmann::json& j, const RunResult& r);

}  // namespace stresscast
