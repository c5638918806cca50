#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stresscast/common.hpp"
#include "stresscast/e4_io.hpp"
#include "stresscast/windowing.hpp"

namespace stresscast::activity {

enum class Method { StdDev, DominantFreq };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// Threshold is in g for StdDev and Hz for DominantFreq.
struct Model {
  Method method = Method::StdDev;
  double threshold = 0.0;
  double window_len_s = 60.0;

  friend bool operator==(const Model&, const Model&) = default;
};

void to_json(nlohmann::json& j, const Model& m);
void from_json(const nlohmann::json& j, Model& m);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// sqrt(x^2 + y^2 + z^2) / 64 per column of a 3 x N raw accelerometer window.
std::vector<double> acc_magnitude(const Matrix& acc_window);

/// Population standard deviation.
double feature_std(std::span<const double> magnitude);

/// Frequency of the largest non-DC DFT bin of the mean-removed series.
/// Returns 0 Hz for an all-zero spectrum; ties go to the lower bin.
double feature_dominant_freq(std::span<const double> magnitude, double rate_hz);

double feature(const Matrix& acc_window, Method method);

struct BaselineWindow {
  Matrix acc_window;
  BaselineLabel label;
};

/// Cuts a session's dance/relax baseline intervals into non-overlapping
/// windows of window_len_s.
std::vector<BaselineWindow> baseline_windows(const Session& session, double window_len_s);

struct TuneResult {
  Model model;
  double balanced_accuracy = 0.0;
  double std_balanced_accuracy = 0.0;
  double freq_balanced_accuracy = 0.0;
};

/// Per method: thresholds at midpoints between consecutive distinct feature
/// values, maximizing balanced accuracy (lowest threshold on ties). The
/// method with the higher score wins; ties go to StdDev.
TuneResult tune(std::span<const BaselineWindow> windows, double window_len_s);

/// Balanced accuracy of a model on labeled baseline windows (dance = active).
double balanced_accuracy(const Model& model, std::span<const BaselineWindow> windows);

bool classify(const Matrix& acc_window, const Model& model);
/// Requires the example to carry its accelerometer slice.
bool classify(const Example& example, const Model& model);

/// Sets the activity flag on every example without removing any.
void flag_examples(std::span<Example> examples, const Model& model);

struct GateReport {
  std::size_t n_input = 0;
  std::size_t n_removed = 0;
  double removed_fraction = 0.0;
  bool resampled = false;
  std::size_t n_replacements = 0;
  bool ratio_restored = true;  // false when the pool ran short
};

struct GateResult {
  std::vector<Example> kept;
  GateReport report;
};

/// Removes active examples. When 25% or more are removed, draws non-active
/// non-events from the pool (events are never replaced) until events are
/// again one third of the kept set, as far as the pool allows.
GateResult gate_dataset(std::vector<Example> examples, const Model& model, std::vector<Example> nonevent_pool,
                        std::uint64_t seed);

inline constexpr double kResampleTrigger = 0.25;

}  // namespace stresscast::activity
