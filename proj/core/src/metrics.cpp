#include "stresscast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stresscast/common.hpp"

namespace stresscast::metrics {

ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw ValidationError("confusion: scores and labels differ in length");
  if (scores.empty()) throw ValidationError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("confusion: labels must be 0 or 1");
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw ValidationError("accuracy: no examples");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double f1(const ConfusionCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) {
    spdlog::warn("f1: no positives predicted or present; defined as 0");
    return 0.0;
  }
  return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double precision(const ConfusionCounts& c) {
  return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double recall(const ConfusionCounts& c) {
  return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::vector<RocPoint> roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc: scores and labels differ in length");
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("roc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ValidationError("roc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return curve;
}

double auc(std::span<const RocPoint> curve) {
  if (curve.size() < 2) throw ValidationError("auc: curve needs at least two points");
  if (curve.front() != RocPoint{0.0, 0.0} || curve.back() != RocPoint{1.0, 1.0}) {
    throw ValidationError("auc: curve must run from (0,0) to (1,1)");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto& a = curve[i - 1];
    const auto& b = curve[i];
    if (b.fpr < a.fpr || b.tpr < a.tpr) throw ValidationError("auc: curve is not monotone");
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw ValidationError("aggregate: no values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

MetricsReport make_report(std::vector<double> per_seed_accuracy, std::vector<double> per_seed_f1,
                          std::span<const double> pooled_scores, std::span<const int> pooled_labels) {
  MetricsReport r;
  const auto acc = aggregate(per_seed_accuracy);
  const auto f = aggregate(per_seed_f1);
  r.accuracy_mean = acc.mean;
  r.accuracy_std = acc.std;
  r.f1_mean = f.mean;
  r.f1_std = f.std;
  r.per_seed_accuracy = std::move(per_seed_accuracy);
  r.per_seed_f1 = std::move(per_seed_f1);
  r.pooled = confusion(pooled_scores, pooled_labels);
  r.precision = precision(r.pooled);
  r.recall = recall(r.pooled);
  const bool both = r.pooled.tp + r.pooled.fn > 0 && r.pooled.tn + r.pooled.fp > 0;
  if (both) {
    r.roc_points = roc(pooled_scores, pooled_labels);
    r.auc = auc(r.roc_points);
  } else {
    r.auc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  nlohmann::json roc_json = nlohmann::json::array();
  for (const auto& p : r.roc_points) roc_json.push_back({p.fpr, p.tpr});
  j = {{"accuracy_mean", r.accuracy_mean},
       {"accuracy_std", r.accuracy_std},
       {"f1_mean", r.f1_mean},
       {"f1_std", r.f1_std},
       {"precision", r.precision},
       {"recall", r.recall},
       {"auc", std::isnan(r.auc) ? nlohmann::json(nullptr) : nlohmann::json(r.auc)},
       {"roc_points", roc_json},
       {"per_seed_accuracy", r.per_seed_accuracy},
       {"per_seed_f1", r.per_seed_f1},
       {"confusion", {{"tp", r.pooled.tp}, {"tn", r.pooled.tn}, {"fp", r.pooled.fp}, {"fn", r.pooled.fn}}}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r.accuracy_mean = j.at("accuracy_mean").get<double>();
  r.accuracy_std = j.at("accuracy_std").get<double>();
  r.f1_mean = j.at("f1_mean").get<double>();
  r.f1_std = j.at("f1_std").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.auc = j.at("auc").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("auc").get<double>();
  r.roc_points.clear();
  for (const auto& p : j.at("roc_points")) r.roc_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  r.per_seed_accuracy = j.at("per_seed_accuracy").get<std::vector<double>>();
  r.per_seed_f1 = j.at("per_seed_f1").get<std::vector<double>>();
  const auto& c = j.at("confusion");
  r.pooled = {c.at("tp").get<std::size_t>(), c.at("tn").get<std::size_t>(), c.at("fp").get<std::size_t>(),
              c.at("fn").get<std::size_t>()};
}

}  // namespace stresscast::metrics
