#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace stresscast::metrics {

struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Predicted positive iff score >= threshold. Labels are 0/1.
ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold = kDefaultThreshold);

/// (TP + TN) / (TP + FP + TN + FN).
double accuracy(const ConfusionCounts& c);
/// 2 TP / (2 TP + FP + FN); 0 with a warning when the denominator is 0.
double f1(const ConfusionCounts& c);
/// TP / (TP + FP), 0 when undefined.
double precision(const ConfusionCounts& c);
/// TP / (TP + FN), 0 when undefined.
double recall(const ConfusionCounts& c);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// (FPR, TPR) at every distinct score used as threshold, from (0,0) to (1,1).
/// Equal scores enter the curve together.
std::vector<RocPoint> roc(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a monotone curve starting at (0,0) and ending at (1,1).
double auc(std::span<const RocPoint> curve);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
};

Aggregate aggregate(std::span<const double> values);

/// Summary of one experiment cell across seeds (and folds).
struct MetricsReport {
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
  double precision = 0.0, recall = 0.0;  // pooled confusion
  double auc = 0.0;                      // pooled scores; NaN if a class is missing
  std::vector<RocPoint> roc_points;
  std::vector<double> per_seed_accuracy;
  std::vector<double> per_seed_f1;
  ConfusionCounts pooled;
};

/// Builds a report from per-seed accuracy/F1 values and the pooled test
/// scores of all evaluations.
MetricsReport make_report(std::vector<double> per_seed_accuracy, std::vector<double> per_seed_f1,
                          std::span<const double> pooled_scores, std::span<const int> pooled_labels);

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

}  // namespace stresscast::metrics
