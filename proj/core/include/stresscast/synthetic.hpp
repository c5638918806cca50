#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stresscast/e4_io.hpp"

namespace stresscast {

/// Size of the planted pre-tag response per channel.
struct EventEffect {
  double eda_us = 0.6;      // skin conductance rise
  double hr_bpm = 12.0;     // heart-rate rise
  double temp_c = 0.3;      // skin temperature drop
  double bvp_rel = 0.35;    // relative pulse amplitude reduction
};

/// Parameters of the seeded E4-format session generator. Intervals are
/// seconds relative to the session start.
struct SyntheticConfig {
  std::uint64_t seed = 1;
  int n_subjects = 9;
  int weeks_per_subject = 8;
  double session_duration_s = 3600.0;
  int events_per_session = 3;
  EventEffect event_effect;
  std::vector<std::pair<double, double>> activity_segments;
  std::vector<std::pair<double, double>> relax_segments;
  double noise_scale = 1.0;
  double response_ramp_s = 300.0;
  double activity_amplitude = 40.0;  // raw 1/64 g
  double activity_freq_hz = 2.0;
  double start_time = 1600000000.0;
  // Window geometry the sessions must accommodate.
  double max_window_s = 300.0;
  double max_lead_s = 300.0;
  double post_tag_buffer_s = 300.0;
};

void validate(const SyntheticConfig& cfg);

/// "S01", "S02", ...
std::string subject_name(int index);

/// Pure function of (cfg, subject_id, week_index): physiology with a linear
/// pre-tag ramp on EDA/HR/TEMP/BVP and elevated accelerometer motion inside
/// activity segments. activity/relax segments become baseline intervals.
Session generate_session(const SyntheticConfig& cfg, const std::string& subject_id, int week_index);

}  // namespace stresscast
