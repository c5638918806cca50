#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stresscast/common.hpp"
#include "stresscast/dsp.hpp"
#include "stresscast/e4_io.hpp"

namespace stresscast {

enum class ResampleMethod { Fourier, Linear };

/// What happens to one model channel before windowing.
struct ChannelStage {
  ChannelKind kind;
  std::optional<dsp::FilterSpec> filter;
  ResampleMethod resample;
};

/// Per-channel filtering and rate conversion, in model channel order
/// (BVP, EDA, HR, TEMP).
struct PreprocessPlan {
  std::vector<ChannelStage> stages;

  const ChannelStage& stage(ChannelKind kind) const;
};

/// Lowpass(6, 1 Hz) on EDA and TEMP, bandpass(2, 2-12 Hz) on BVP, HR left
/// unfiltered. BVP/EDA resample spectrally, HR/TEMP linearly.
PreprocessPlan standard_plan();

inline constexpr ChannelKind kModelChannels[] = {ChannelKind::BVP, ChannelKind::EDA, ChannelKind::HR,
                                                  ChannelKind::TEMP};
inline constexpr std::size_t kNumModelChannels = 4;
inline constexpr double kAccRate = 32.0;

/// A session whose model channels have been filtered over the full
/// recording. Rate conversion happens per window.
class PreprocessedSession {
 public:
  PreprocessedSession(const Session& session, PreprocessPlan plan);

  const std::string& subject_id() const { return subject_id_; }
  int week_index() const { return week_index_; }
  const std::vector<double>& tags() const { return tags_; }
  const std::vector<BaselineInterval>& baseline_intervals() const { return baseline_; }
  /// Intersection of all channel spans, [start, end).
  double span_start() const { return span_start_; }
  double span_end() const { return span_end_; }

  /// 4 x (len_s * target_rate) matrix in model channel order, each channel
  /// resampled from its native rate with the plan's method.
  Matrix window_signal(double start, double len_s, double target_rate_hz) const;
  /// 3 x (len_s * 32) raw accelerometer slice.
  Matrix acc_window(double start, double len_s) const;

 private:
  std::span<const double> slice(const ChannelRecording& rec, double start, double len_s) const;

  std::string subject_id_;
  int week_index_;
  std::vector<double> tags_;
  std::vector<BaselineInterval> baseline_;
  PreprocessPlan plan_;
  std::map<ChannelKind, ChannelRecording> channels_;
  double span_start_;
  double span_end_;
};

/// Filters the full recordings (steady-state initial conditions, so a
/// recording's first windows carry no start-up transient).
PreprocessedSession preprocess(const Session& session, const PreprocessPlan& plan = standard_plan());

}  // namespace stresscast
