#include "stresscast/activity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stresscast/fft.hpp"
#include "stresscast/preprocess.hpp"
#include "stresscast/rng.hpp"

namespace stresscast::activity {

std::string_view to_string(Method m) { return m == Method::StdDev ? "std" : "dominant_freq"; }

Method method_from_string(std::string_view s) {
  if (s == "std") return Method::StdDev;
  if (s == "dominant_freq") return Method::DominantFreq;
  throw ValidationError("unknown activity method '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const Model& m) {
  j = {{"method", to_string(m.method)}, {"threshold", m.threshold}, {"window_len_s", m.window_len_s}};
}

void from_json(const nlohmann::json& j, Model& m) {
  m.method = method_from_string(j.at("method").get<std::string>());
  m.threshold = j.at("threshold").get<double>();
  m.window_len_s = j.at("window_len_s").get<double>();
  if (!(m.threshold > 0.0)) throw ValidationError("activity threshold must be > 0");
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << nlohmann::json(model).dump(2) << "\n";
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read activity model " + path.string());
  try {
    return nlohmann::json::parse(in).get<Model>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<double> acc_magnitude(const Matrix& acc_window) {
  if (acc_window.rows() != 3) throw ValidationError("acc_magnitude: expected 3 axes");
  std::vector<double> mag(acc_window.cols());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double x = acc_window(0, i);
    const double y = acc_window(1, i);
    const double z = acc_window(2, i);
    mag[i] = std::sqrt(x * x + y * y + z * z) / 64.0;
  }
  return mag;
}

double feature_std(std::span<const double> magnitude) {
  if (magnitude.size() < 2) throw ValidationError("feature_std: need at least 2 samples");
  double mean = 0.0;
  for (double v : magnitude) mean += v;
  mean /= static_cast<double>(magnitude.size());
  double ss = 0.0;
  for (double v : magnitude) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(magnitude.size()));
}

double feature_dominant_freq(std::span<const double> magnitude, double rate_hz) {
  const std::size_t n = magnitude.size();
  if (n < 4) throw ValidationError("feature_dominant_freq: need at least 4 samples");
  double mean = 0.0;
  for (double v : magnitude) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = magnitude[i] - mean;
  const auto spectrum = fft::forward(centered);
  std::size_t best = 0;
  double best_mag = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double m = std::abs(spectrum[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  // Rounding residue of a constant series is not a peak.
  if (best_mag <= 1e-9 * static_cast<double>(n)) return 0.0;
  return static_cast<double>(best) * rate_hz / static_cast<double>(n);
}

double feature(const Matrix& acc_window, Method method) {
  const auto mag = acc_magnitude(acc_window);
  return method == Method::StdDev ? feature_std(mag) : feature_dominant_freq(mag, kAccRate);
}

std::vector<BaselineWindow> baseline_windows(const Session& session, double window_len_s) {
  const ChannelKind axes[] = {ChannelKind::ACC_X, ChannelKind::ACC_Y, ChannelKind::ACC_Z};
  const auto n = static_cast<std::size_t>(std::llround(window_len_s * kAccRate));
  std::vector<BaselineWindow> out;
  for (const auto& iv : session.baseline_intervals) {
    for (double a = iv.start; a + window_len_s <= iv.end; a += window_len_s) {
      Matrix m(3, n);
      bool ok = true;
      for (std::size_t ax = 0; ax < 3 && ok; ++ax) {
        const auto& rec = session.channel(axes[ax]);
        const auto first = std::llround((a - rec.start_time) * rec.sample_rate);
        if (first < 0 || static_cast<std::size_t>(first) + n > rec.samples.size()) {
          ok = false;
          break;
        }
        std::copy_n(rec.samples.begin() + first, n, m.row(ax).begin());
      }
      if (ok) out.push_back({std::move(m), iv.label});
    }
  }
  return out;
}

namespace {

struct Scored {
  double value;
  bool dance;
};

double balanced_accuracy_at(std::span<const Scored> scored, double threshold) {
  std::size_t tp = 0, pos = 0, tn = 0, neg = 0;
  for (const auto& s : scored) {
    const bool active = s.value > threshold;
    if (s.dance) {
      ++pos;
      tp += active ? 1 : 0;
    } else {
      ++neg;
      tn += active ? 0 : 1;
    }
  }
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(pos) + static_cast<double>(tn) / static_cast<double>(neg));
}

std::pair<double, double> best_threshold(std::vector<Scored> scored) {
  std::vector<double> values;
  for (const auto& s : scored) values.push_back(s.value);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> candidates;
  for (std::size_t i = 1; i < values.size(); ++i) candidates.push_back(0.5 * (values[i - 1] + values[i]));
  if (candidates.empty()) candidates.push_back(std::max(values.front(), 1e-9));

  double best_t = candidates.front();
  double best_ba = -1.0;
  for (double t : candidates) {
    if (!(t > 0.0)) continue;
    const double ba = balanced_accuracy_at(scored, t);
    if (ba > best_ba) {
      best_ba = ba;
      best_t = t;
    }
  }
  if (best_ba < 0.0) {
    best_t = 1e-9;
    best_ba = balanced_accuracy_at(scored, best_t);
  }
  return {best_t, best_ba};
}

}  // namespace

double balanced_accuracy(const Model& model, std::span<const BaselineWindow> windows) {
  std::vector<Scored> scored;
  for (const auto& w : windows) scored.push_back({feature(w.acc_window, model.method), w.label == BaselineLabel::Dance});
  return balanced_accuracy_at(scored, model.threshold);
}

TuneResult tune(std::span<const BaselineWindow> windows, double window_len_s) {
  const bool has_dance = std::any_of(windows.begin(), windows.end(),
                                     [](const auto& w) { return w.label == BaselineLabel::Dance; });
  const bool has_relax = std::any_of(windows.begin(), windows.end(),
                                     [](const auto& w) { return w.label == BaselineLabel::Relax; });
  if (!has_dance || !has_relax) throw DataError("tune: need at least one dance and one relax window");

  auto score = [&](Method m) {
    std::vector<Scored> scored;
    for (const auto& w : windows) scored.push_back({feature(w.acc_window, m), w.label == BaselineLabel::Dance});
    return best_threshold(std::move(scored));
  };
  const auto [std_t, std_ba] = score(Method::StdDev);
  const auto [freq_t, freq_ba] = score(Method::DominantFreq);

  TuneResult r;
  r.std_balanced_accuracy = std_ba;
  r.freq_balanced_accuracy = freq_ba;
  if (freq_ba > std_ba) {
    r.model = {Method::DominantFreq, freq_t, window_len_s};
    r.balanced_accuracy = freq_ba;
  } else {
    r.model = {Method::StdDev, std_t, window_len_s};
    r.balanced_accuracy = std_ba;
  }
  return r;
}

bool classify(const Matrix& acc_window, const Model& model) {
  return feature(acc_window, model.method) > model.threshold;
}

bool classify(const Example& example, const Model& model) {
  if (example.acc_window.empty()) throw DataError("classify: example has no accelerometer slice");
  return classify(example.acc_window, model);
}

void flag_examples(std::span<Example> examples, const Model& model) {
  for (auto& e : examples) e.active = classify(e, model);
}

GateResult gate_dataset(std::vector<Example> examples, const Model& model, std::vector<Example> nonevent_pool,
                        std::uint64_t seed) {
  GateResult result;
  auto& report = result.report;
  report.n_input = examples.size();
  std::size_t events = 0, nonevents = 0;
  for (auto& e : examples) {
    e.active = classify(e, model);
    if (*e.active) {
      ++report.n_removed;
      continue;
    }
    (e.is_event() ? events : nonevents) += 1;
    result.kept.push_back(std::move(e));
  }
  report.removed_fraction =
      report.n_input == 0 ? 0.0 : static_cast<double>(report.n_removed) / static_cast<double>(report.n_input);
  report.resampled = report.n_input > 0 && report.removed_fraction >= kResampleTrigger;
  if (!report.resampled) return result;

  const std::size_t wanted = kNonEventsPerEvent * events;
  if (nonevents >= wanted) {
    report.ratio_restored = nonevents == wanted;
    return result;
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < nonevent_pool.size(); ++i) {
    auto& p = nonevent_pool[i];
    if (p.is_event()) continue;
    p.active = classify(p, model);
    if (!*p.active) candidates.push_back(i);
  }
  const std::size_t need = wanted - nonevents;
  const std::size_t take = std::min(need, candidates.size());
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(candidates.size(), take);
  std::sort(picks.begin(), picks.end());
  for (std::size_t p : picks) result.kept.push_back(std::move(nonevent_pool[candidates[p]]));
  report.n_replacements = take;
  report.ratio_restored = take == need;
  if (!report.ratio_restored) {
    spdlog::warn("gate: pool short by {} non-activity non-event windows", need - take);
  }
  return result;
}

}  // namespace stresscast::activity
