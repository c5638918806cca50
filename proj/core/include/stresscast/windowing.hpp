#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stresscast/common.hpp"
#include "stresscast/preprocess.hpp"

namespace stresscast {

inline constexpr double kWindowLengths[] = {60.0, 300.0};
inline constexpr double kLeadTimes[] = {0.0, 60.0, 120.0, 180.0, 240.0, 300.0};
inline constexpr double kTargetRates[] = {4.0, 64.0};
inline constexpr double kPostTagBuffer = 300.0;
/// Events make up one third of a balanced dataset (two non-events per event).
inline constexpr std::size_t kNonEventsPerEvent = 2;

struct WindowConfig {
  double window_len_s = 60.0;
  double lead_time_s = 0.0;
  double target_rate_hz = 4.0;
  double post_tag_buffer_s = kPostTagBuffer;
  std::uint64_t seed = 0;

  std::size_t samples_per_window() const;
};

/// Throws ValidationError unless window length, lead and rate come from the
/// enumerated grids.
void validate(const WindowConfig& cfg);

enum class Label { NonEvent = 0, Event = 1 };

struct Example {
  Matrix signal;  // 4 x L, channel order BVP, EDA, HR, TEMP
  Label label = Label::NonEvent;
  std::string subject_id;
  int week_index = 1;
  double window_start = 0.0;
  Matrix acc_window;          // 3 x (len * 32), raw 1/64 g
  std::optional<bool> active; // activity flag, once classified

  bool is_event() const { return label == Label::Event; }
};

struct Extraction {
  std::vector<Example> examples;
  std::size_t skipped = 0;
};

/// One window per tag spanning [tag - lead - len, tag - lead). Tags whose
/// span leaves the recording, overlaps an accepted event window, or overlaps
/// another tag's post-tag buffer are skipped and counted.
Extraction extract_event_windows(const PreprocessedSession& session, const WindowConfig& cfg);

/// Non-overlapping tiles from the recording start; a tile is kept iff it
/// misses every exclusion zone [tag - lead - len, tag + buffer].
Extraction extract_nonevent_windows(const PreprocessedSession& session, const WindowConfig& cfg);

/// Per-channel z-score with the window's own mean and population std;
/// channels with std < 1e-8 become zeros.
Example standardize(Example example);
void standardize_in_place(Matrix& signal);

struct UndersampleResult {
  std::vector<Example> examples;  // all events + sampled non-events, input order
  std::vector<Example> pool;      // non-events not selected
  bool shortage = false;          // fewer than 2 x n_event non-events available
};

/// Keeps every event and draws 2 x n_event non-events without replacement.
UndersampleResult undersample(std::vector<Example> examples, std::uint64_t seed);

enum class SplitKind { Random, PersonalizedStage };

struct DatasetSplit {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;
  SplitKind kind = SplitKind::Random;
  std::string held_out_subject;  // PersonalizedStage only
  bool ratio_warning = false;    // class balance tolerance not reached
};

/// Shuffle, then 80/10/10 by count (floor for train and validation). Up to
/// 100 reshuffles look for parts whose event ratio is within 5 points of the
/// global ratio; otherwise the most balanced attempt is kept with a warning.
DatasetSplit split_random(std::vector<Example> examples, std::uint64_t seed);

/// 80/20 train/validation partition, same balancing rule, empty test.
DatasetSplit split_train_validation(std::vector<Example> examples, std::uint64_t seed);

/// Optional transformation applied to each personalized pool before it is
/// split (balancing and gating hook). Stage names: "stage1", "stage2-week1",
/// "stage2-test".
using PoolTransform = std::function<std::vector<Example>(std::vector<Example>, std::string_view stage)>;

struct PersonalizedSplit {
  DatasetSplit stage1;  // other subjects: 80/20 train/validation
  DatasetSplit stage2;  // held-out week 1: 80/20; weeks >= 2: test
};

PersonalizedSplit split_personalized(std::span<const Example> examples, const std::string& held_out_subject,
                                     std::uint64_t seed, const PoolTransform& transform = {});

/// Writes one row per example: label, subject_id, week_index, window_start,
/// active (-1 unknown, 0, 1), then each channel's samples (BVP, EDA, HR, TEMP).
void write_dataset_csv(const std::filesystem::path& path, std::span<const Example> examples);

}  // namespace stresscast
