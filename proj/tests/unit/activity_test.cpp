#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "stresscast/activity.hpp"
#include "stresscast/synthetic.hpp"

using namespace stresscast;
using namespace stresscast::activity;

namespace {

// Magnitude alternates between 1 + spread and 1 - spread (in g).
Matrix alternating(double spread, std::size_t n = 64) {
  Matrix m(3, n);
  for (std::size_t t = 0; t < n; ++t) m(2, t) = 64.0 * (1.0 + (t % 2 == 0 ? spread : -spread));
  return m;
}

Matrix still(std::size_t n = 1920) {
  Matrix m(3, n);
  for (std::size_t t = 0; t < n; ++t) {
    m(0, t) = 6.0;
    m(1, t) = -10.0;
    m(2, t) = 62.0;
  }
  return m;
}

Matrix shaking(std::size_t n = 1920, double freq = 2.0) {
  Matrix m = still(n);
  for (std::size_t t = 0; t < n; ++t) m(0, t) += 40.0 * std::sin(2.0 * std::numbers::pi * freq * t / 32.0);
  return m;
}

Example example(Label label, Matrix acc, double start) {
  Example e;
  e.signal = Matrix(4, 8, 0.0);
  e.label = label;
  e.acc_window = std::move(acc);
  e.window_start = start;
  return e;
}

}  // namespace

TEST(Magnitude, UnitConvention) {
  Matrix m(3, 3);
  m(2, 0) = 64.0;
  m(0, 1) = 3.0;
  m(1, 1) = 4.0;
  const auto mag = acc_magnitude(m);
  EXPECT_DOUBLE_EQ(mag[0], 1.0);
  EXPECT_DOUBLE_EQ(mag[1], 0.078125);
  EXPECT_DOUBLE_EQ(mag[2], 0.0);
}

TEST(FeatureStd, WorkedValues) {
  EXPECT_EQ(feature_std(std::vector<double>{2, 2, 2, 2}), 0.0);
  EXPECT_NEAR(feature_std(std::vector<double>{1, 1, 1, 3}), std::sqrt(0.75), 1e-12);
  oracle::Gen g(2);
  const auto v = g.vec(100);
  std::vector<double> doubled(v);
  for (auto& x : doubled) x *= 2.0;
  EXPECT_NEAR(feature_std(doubled), 2.0 * feature_std(v), 1e-12);
  EXPECT_NEAR(feature_std(v), oracle::population_std(v), 1e-12);
}

TEST(FeatureDominantFreq, FindsSpectralPeak) {
  std::vector<double> sine(256), mix(256);
  for (std::size_t t = 0; t < 256; ++t) {
    const double time = static_cast<double>(t) / 32.0;
    sine[t] = 1.0 + std::sin(2.0 * std::numbers::pi * 2.0 * time);
    mix[t] = sine[t] + 0.1 * std::sin(2.0 * std::numbers::pi * 5.0 * time);
  }
  EXPECT_NEAR(feature_dominant_freq(sine, 32.0), 2.0, 0.125);
  EXPECT_NEAR(feature_dominant_freq(mix, 32.0), 2.0, 0.125);
  EXPECT_EQ(feature_dominant_freq(std::vector<double>(256, 1.0), 32.0), 0.0);
}

TEST(Tune, TwoPointMidpoint) {
  std::vector<BaselineWindow> w{{alternating(0.5), BaselineLabel::Dance}, {alternating(0.1), BaselineLabel::Relax}};
  const auto r = tune(w, 2.0);
  EXPECT_EQ(r.model.method, Method::StdDev);
  EXPECT_NEAR(r.model.threshold, 0.3, 1e-12);
  EXPECT_EQ(r.balanced_accuracy, 1.0);
}

TEST(Tune, UninformativeFeaturesTieToStd) {
  std::vector<BaselineWindow> w{{still(), BaselineLabel::Dance}, {still(), BaselineLabel::Relax}};
  const auto r = tune(w, 60.0);
  EXPECT_EQ(r.model.method, Method::StdDev);
  EXPECT_EQ(r.balanced_accuracy, 0.5);
}

TEST(Tune, SeparableGeneratedBaselines) {
  SyntheticConfig cfg;
  cfg.activity_segments = {{600.0, 1200.0}};
  cfg.relax_segments = {{1500.0, 2100.0}};
  std::vector<BaselineWindow> windows;
  for (int s = 1; s <= 3; ++s) {
    auto w = baseline_windows(generate_session(cfg, subject_name(s), 1), 60.0);
    windows.insert(windows.end(), w.begin(), w.end());
  }
  ASSERT_EQ(windows.size(), 60u);
  const auto r = tune(windows, 60.0);
  EXPECT_EQ(r.balanced_accuracy, 1.0);
  EXPECT_EQ(balanced_accuracy(r.model, windows), 1.0);
}

TEST(Tune, NeedsBothLabels) {
  std::vector<BaselineWindow> w{{still(), BaselineLabel::Dance}};
  EXPECT_THROW(tune(w, 60.0), DataError);
}

TEST(Classify, StrictThresholdAndGeneratorTruth) {
  const Model at{Method::StdDev, 0.5, 2.0};
  EXPECT_FALSE(classify(alternating(0.5), at));
  EXPECT_TRUE(classify(alternating(0.51), at));

  SyntheticConfig cfg;
  cfg.activity_segments = {{600.0, 1200.0}};
  const auto session = preprocess(generate_session(cfg, "S07", 1));
  const Model model{Method::StdDev, 0.05, 60.0};
  EXPECT_TRUE(classify(session.acc_window(session.span_start() + 700.0, 60.0), model));
  EXPECT_FALSE(classify(session.acc_window(session.span_start() + 1300.0, 60.0), model));
  EXPECT_FALSE(classify(still(), model));

  Example bare;
  EXPECT_THROW(classify(bare, model), DataError);
}

TEST(ModelJson, RoundTrip) {
  const Model m{Method::DominantFreq, 1.25, 300.0};
  nlohmann::json j = m;
  EXPECT_EQ(j.at("method"), "dominant_freq");
  EXPECT_EQ(j.get<Model>(), m);
}

TEST(Gate, NothingActiveKeepsInput) {
  std::vector<Example> ex;
  for (int i = 0; i < 30; ++i) ex.push_back(example(i < 10 ? Label::Event : Label::NonEvent, still(), i));
  const auto r = gate_dataset(ex, {Method::StdDev, 0.05, 60.0}, {}, 1);
  EXPECT_EQ(r.kept.size(), 30u);
  EXPECT_FALSE(r.report.resampled);
  for (const auto& e : r.kept) EXPECT_FALSE(*e.active);
}

TEST(Gate, LightRemovalDoesNotResample) {
  std::vector<Example> ex;
  for (int i = 0; i < 100; ++i) {
    ex.push_back(example(i < 34 ? Label::Event : Label::NonEvent, i >= 90 ? shaking() : still(), i));
  }
  std::vector<Example> pool;
  for (int i = 0; i < 50; ++i) pool.push_back(example(Label::NonEvent, still(), 1000 + i));
  const auto r = gate_dataset(ex, {Method::StdDev, 0.05, 60.0}, pool, 1);
  EXPECT_EQ(r.report.n_removed, 10u);
  EXPECT_DOUBLE_EQ(r.report.removed_fraction, 0.1);
  EXPECT_FALSE(r.report.resampled);
  EXPECT_EQ(r.kept.size(), 90u);
}

TEST(Gate, HeavyRemovalRestoresOneThird) {
  std::vector<Example> ex;
  for (int i = 0; i < 100; ++i) {
    ex.push_back(example(i < 34 ? Label::Event : Label::NonEvent, i >= 70 ? shaking() : still(), i));
  }
  std::vector<Example> pool;
  for (int i = 0; i < 70; ++i) pool.push_back(example(Label::NonEvent, i % 2 ? shaking() : still(), 1000 + i));
  const auto r = gate_dataset(ex, {Method::StdDev, 0.05, 60.0}, pool, 9);
  EXPECT_DOUBLE_EQ(r.report.removed_fraction, 0.3);
  EXPECT_TRUE(r.report.resampled);
  EXPECT_TRUE(r.report.ratio_restored);
  EXPECT_EQ(r.report.n_replacements, 32u);
  std::size_t events = 0;
  for (const auto& e : r.kept) {
    EXPECT_FALSE(*e.active);
    events += e.is_event() ? 1 : 0;
  }
  EXPECT_EQ(events, 34u);
  EXPECT_EQ(r.kept.size(), 102u);
}

TEST(Gate, ActiveEventsAreNotReplaced) {
  std::vector<Example> ex;
  for (int i = 0; i < 30; ++i) ex.push_back(example(i < 10 ? Label::Event : Label::NonEvent, i < 10 ? shaking() : still(), i));
  std::vector<Example> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(example(Label::Event, still(), 100 + i));
  const auto r = gate_dataset(ex, {Method::StdDev, 0.05, 60.0}, pool, 2);
  EXPECT_TRUE(r.report.resampled);
  for (const auto& e : r.kept) EXPECT_FALSE(e.is_event());
  EXPECT_EQ(r.kept.size(), 20u);
}
