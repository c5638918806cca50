#include "stresscast/windowing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "stresscast/rng.hpp"

namespace stresscast {

namespace {

bool in_grid(double value, std::span<const double> grid) {
  return std::any_of(grid.begin(), grid.end(), [value](double g) { return g == value; });
}

Example make_example(const PreprocessedSession& session, const WindowConfig& cfg, double start, Label label) {
  Example ex;
  ex.signal = session.window_signal(start, cfg.window_len_s, cfg.target_rate_hz);
  ex.label = label;
  ex.subject_id = session.subject_id();
  ex.week_index = session.week_index();
  ex.window_start = start;
  ex.acc_window = session.acc_window(start, cfg.window_len_s);
  return ex;
}

double event_fraction(std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  const auto events = std::count_if(examples.begin(), examples.end(), [](const Example& e) { return e.is_event(); });
  return static_cast<double>(events) / static_cast<double>(examples.size());
}

/// Repeatedly shuffles and cuts into parts of the given sizes; returns the
/// order whose worst per-part deviation from the global event ratio is
/// smallest, stopping early once every part is within tolerance.
std::vector<std::size_t> balanced_order(std::span<const Example> examples, std::span<const std::size_t> sizes,
                                        std::uint64_t seed, bool& warning) {
  constexpr int kMaxAttempts = 100;
  constexpr double kTolerance = 0.05;
  const double global = event_fraction(examples);
  Rng rng(seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> best;
  double best_dev = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    rng.shuffle(order);
    double worst = 0.0;
    std::size_t offset = 0;
    for (std::size_t part : sizes) {
      if (part > 0) {
        std::size_t events = 0;
        for (std::size_t i = offset; i < offset + part; ++i) events += examples[order[i]].is_event() ? 1 : 0;
        worst = std::max(worst, std::abs(static_cast<double>(events) / static_cast<double>(part) - global));
      }
      offset += part;
    }
    if (worst < best_dev) {
      best_dev = worst;
      best = order;
    }
    if (worst <= kTolerance + 1e-12) break;
  }
  warning = best_dev > kTolerance + 1e-12;
  return best;
}

DatasetSplit cut(std::vector<Example> examples, std::span<const std::size_t> sizes, std::uint64_t seed,
                 const char* what) {
  DatasetSplit split;
  const auto order = balanced_order(examples, sizes, seed, split.ratio_warning);
  if (split.ratio_warning) {
    spdlog::warn("{}: class ratio of some part deviates more than 5 points from the global ratio", what);
  }
  std::vector<Example>* parts[] = {&split.train, &split.validation, &split.test};
  std::size_t offset = 0;
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    parts[p]->reserve(sizes[p]);
    for (std::size_t i = offset; i < offset + sizes[p]; ++i) parts[p]->push_back(std::move(examples[order[i]]));
    offset += sizes[p];
  }
  return split;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::size_t WindowConfig::samples_per_window() const {
  return static_cast<std::size_t>(std::llround(window_len_s * target_rate_hz));
}

void validate(const WindowConfig& cfg) {
  if (!in_grid(cfg.window_len_s, kWindowLengths)) throw ValidationError("window length must be 60 or 300 s");
  if (!in_grid(cfg.lead_time_s, kLeadTimes)) throw ValidationError("lead time must be one of 0,60,...,300 s");
  if (!in_grid(cfg.target_rate_hz, kTargetRates)) throw ValidationError("target rate must be 4 or 64 Hz");
  if (!(cfg.post_tag_buffer_s >= 0.0)) throw ValidationError("post-tag buffer must be >= 0");
}

Extraction extract_event_windows(const PreprocessedSession& session, const WindowConfig& cfg) {
  validate(cfg);
  Extraction out;
  std::vector<std::pair<double, double>> accepted;
  const auto& tags = session.tags();
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const double end = tags[i] - cfg.lead_time_s;
    const double start = end - cfg.window_len_s;
    bool skip = start < session.span_start() || end > session.span_end();
    for (std::size_t j = 0; j < tags.size() && !skip; ++j) {
      if (j != i && tags[j] < end && start <= tags[j] + cfg.post_tag_buffer_s) skip = true;
    }
    for (const auto& [a, b] : accepted) {
      if (start < b && a < end) skip = true;
    }
    if (skip) {
      ++out.skipped;
      continue;
    }
    accepted.emplace_back(start, end);
    out.examples.push_back(make_example(session, cfg, start, Label::Event));
  }
  return out;
}

Extraction extract_nonevent_windows(const PreprocessedSession& session, const WindowConfig& cfg) {
  validate(cfg);
  Extraction out;
  const double len = cfg.window_len_s;
  for (std::size_t k = 0;; ++k) {
    const double a = session.span_start() + static_cast<double>(k) * len;
    const double b = a + len;
    if (b > session.span_end()) break;
    bool excluded = false;
    for (double tag : session.tags()) {
      const double zone_lo = tag - cfg.lead_time_s - len;
      const double zone_hi = tag + cfg.post_tag_buffer_s;
      if (a <= zone_hi && zone_lo < b) {
        excluded = true;
        break;
      }
    }
    if (excluded) {
      ++out.skipped;
      continue;
    }
    out.examples.push_back(make_example(session, cfg, a, Label::NonEvent));
  }
  return out;
}

void standardize_in_place(Matrix& signal) {
  for (std::size_t r = 0; r < signal.rows(); ++r) {
    auto row = signal.row(r);
    if (row.empty()) continue;
    double sum = 0.0;
    for (double v : row) {
      if (!std::isfinite(v)) throw ValidationError("standardize: non-finite sample");
      sum += v;
    }
    const double mean = sum / static_cast<double>(row.size());
    double ss = 0.0;
    for (double v : row) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(row.size()));
    if (sd < 1e-8) {
      std::fill(row.begin(), row.end(), 0.0);
    } else {
      for (double& v : row) v = (v - mean) / sd;
    }
  }
}

Example standardize(Example example) {
  standardize_in_place(example.signal);
  return example;
}

UndersampleResult undersample(std::vector<Example> examples, std::uint64_t seed) {
  std::vector<std::size_t> nonevents;
  std::size_t n_event = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].is_event()) {
      ++n_event;
    } else {
      nonevents.push_back(i);
    }
  }
  if (n_event == 0) throw DataError("undersample: no event examples");

  UndersampleResult result;
  const std::size_t wanted = kNonEventsPerEvent * n_event;
  result.shortage = nonevents.size() < wanted;
  if (result.shortage) {
    spdlog::warn("undersample: only {} non-event windows for {} events (wanted {})", nonevents.size(), n_event,
                 wanted);
  }
  Rng rng(seed);
  const auto picks = rng.sample_without_replacement(nonevents.size(), std::min(wanted, nonevents.size()));
  std::vector<bool> keep(examples.size(), false);
  for (std::size_t i = 0; i < examples.size(); ++i) keep[i] = examples[i].is_event();
  for (std::size_t p : picks) keep[nonevents[p]] = true;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (keep[i] ? result.examples : result.pool).push_back(std::move(examples[i]));
  }
  return result;
}

DatasetSplit split_random(std::vector<Example> examples, std::uint64_t seed) {
  const std::size_t n = examples.size();
  if (n < 10) throw DataError("split_random: need at least 10 examples, got " + std::to_string(n));
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  const std::size_t sizes[] = {n_train, n_val, n - n_train - n_val};
  auto split = cut(std::move(examples), sizes, seed, "split_random");
  split.kind = SplitKind::Random;
  return split;
}

DatasetSplit split_train_validation(std::vector<Example> examples, std::uint64_t seed) {
  const std::size_t n = examples.size();
  if (n < 2) throw DataError("train/validation split: need at least 2 examples, got " + std::to_string(n));
  const std::size_t n_train = n * 8 / 10;
  const std::size_t sizes[] = {n_train, n - n_train};
  return cut(std::move(examples), sizes, seed, "split_train_validation");
}

PersonalizedSplit split_personalized(std::span<const Example> examples, const std::string& held_out_subject,
                                     std::uint64_t seed, const PoolTransform& transform) {
  std::vector<std::string> subjects;
  for (const auto& e : examples) {
    if (std::find(subjects.begin(), subjects.end(), e.subject_id) == subjects.end()) subjects.push_back(e.subject_id);
  }
  if (subjects.size() < 2) throw DataError("split_personalized: need at least 2 subjects");
  if (std::find(subjects.begin(), subjects.end(), held_out_subject) == subjects.end()) {
    throw DataError("split_personalized: held-out subject " + held_out_subject + " absent");
  }

  std::vector<Example> others, week1, later;
  for (const auto& e : examples) {
    if (e.subject_id != held_out_subject) {
      others.push_back(e);
    } else if (e.week_index == 1) {
      week1.push_back(e);
    } else {
      later.push_back(e);
    }
  }
  if (week1.empty() || later.empty()) {
    throw DataError("split_personalized: held-out subject " + held_out_subject + " needs week 1 and later weeks");
  }
  if (transform) {
    others = transform(std::move(others), "stage1");
    week1 = transform(std::move(week1), "stage2-week1");
    later = transform(std::move(later), "stage2-test");
  }

  PersonalizedSplit out;
  out.stage1 = split_train_validation(std::move(others), derive_seed(seed, "stage1"));
  out.stage1.kind = SplitKind::PersonalizedStage;
  out.stage1.held_out_subject = held_out_subject;
  out.stage2 = split_train_validation(std::move(week1), derive_seed(seed, "stage2"));
  out.stage2.kind = SplitKind::PersonalizedStage;
  out.stage2.held_out_subject = held_out_subject;
  out.stage2.test = std::move(later);
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, std::span<const Example> examples) {
  std::string text = "label,subject_id,week_index,window_start,active";
  if (!examples.empty()) {
    const std::size_t len = examples.front().signal.cols();
    for (ChannelKind kind : kModelChannels) {
      for (std::size_t i = 0; i < len; ++i) {
        text += ',';
        text += to_string(kind);
        text += '_';
        text += std::to_string(i);
      }
    }
  }
  text += '\n';
  for (const auto& e : examples) {
    text += e.is_event() ? "1," : "0,";
    text += e.subject_id;
    text += ',';
    text += std::to_string(e.week_index);
    text += ',';
    append_number(text, e.window_start);
    text += ',';
    text += e.active ? (*e.active ? "1" : "0") : "-1";
    for (double v : e.signal.data()) {
      text += ',';
      append_number(text, v);
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace stresscast
