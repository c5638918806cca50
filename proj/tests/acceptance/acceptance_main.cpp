// Acceptance gate: one PASS/FAIL line per criterion, each with its runtime
// limit. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "stresscast/activity.hpp"
#include "stresscast/dsp.hpp"
#include "stresscast/grid.hpp"
#include "stresscast/metrics.hpp"
#include "stresscast/nn/train.hpp"
#include "stresscast/preprocess.hpp"
#include "stresscast/synthetic.hpp"
#include "stresscast/trainflow.hpp"
#include "stresscast/windowing.hpp"

#ifdef STRESSCAST_HAVE_CLI
#include "stresscast/cli/commands.hpp"
#endif

using namespace stresscast;
namespace fs = std::filesystem;

namespace {

// Collects failed checks; a criterion passes when none failed.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failed_.size() < 5) failed_.push_back(what);
    if (!ok) ++n_failed_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return n_failed_ == 0; }
  std::string summary() const {
    std::string s = fmt::format("{} checks", total_);
    for (const auto& n : notes_) s += "; " + n;
    if (n_failed_ > 0) {
      s += fmt::format("; {} failed:", n_failed_);
      for (const auto& f : failed_) s += " [" + f + "]";
    }
    return s;
  }

 private:
  std::size_t total_ = 0, n_failed_ = 0;
  std::vector<std::string> failed_, notes_;
};

// ---------------------------------------------------------------- filters

void filter_contracts(Checks& c) {
  struct Case {
    const char* name;
    dsp::FilterSpec spec;
    double fs;
    std::vector<double> cutoffs;
    double dc_expected;
    double dc_tol;
  };
  const std::vector<Case> cases{
      {"lowpass", dsp::design_butterworth_lowpass(6, 1.0, 4.0), 4.0, {1.0}, 1.0, 1e-9},
      {"bandpass", dsp::design_butterworth_bandpass(2, 2.0, 12.0, 64.0), 64.0, {2.0, 12.0}, 0.0, 1e-9},
  };
  for (const auto& k : cases) {
    for (double f : k.cutoffs) {
      const double h = dsp::magnitude_response(k.spec, f);
      c.expect(std::abs(h - std::sqrt(0.5)) < 1e-3, fmt::format("{} |H({} Hz)| = {}", k.name, f, h));
    }
    const double dc = dsp::magnitude_response(k.spec, 0.0);
    c.expect(std::abs(dc - k.dc_expected) < k.dc_tol, fmt::format("{} DC gain {}", k.name, dc));
    for (const auto& s : k.spec.sections) {
      const auto [p1, p2] = s.poles();
      c.expect(std::abs(p1) < 1.0 && std::abs(p2) < 1.0, fmt::format("{} pole outside unit circle", k.name));
    }
    c.expect(k.spec.is_stable(), fmt::format("{} reported unstable", k.name));

    // The DFT of a long impulse response samples the frequency response.
    const std::size_t n = 4096;
    std::vector<double> impulse(n, 0.0);
    impulse[0] = 1.0;
    const auto h = dsp::apply_filter(k.spec, impulse, dsp::FilterInit::Zero);
    double worst = 0.0;
    for (std::size_t bin = 0; bin <= n / 2; bin += 16) {
      const double f = k.fs * static_cast<double>(bin) / static_cast<double>(n);
      worst = std::max(worst, std::abs(oracle::dft_magnitude(h, bin) - dsp::magnitude_response(k.spec, f)));
    }
    c.expect(worst < 1e-3, fmt::format("{} impulse DFT deviates by {}", k.name, worst));
    c.note(fmt::format("{} impulse DFT max dev {:.1e}", k.name, worst));
  }
}

// ------------------------------------------------------------- resampling

std::vector<double> sine(double f, double rate, std::size_t n, double amp, double phase) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / rate + phase);
  }
  return x;
}

void resampling(Checks& c) {
  oracle::Gen g(20);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t seconds = static_cast<std::size_t>(g.integer(4, 60));
    std::vector<double> x(64 * seconds, g.uniform(-2.0, 2.0));
    // Whole cycles below 2 Hz over the window: bandlimited for 4 Hz.
    for (int k = 0; k < 5; ++k) {
      const int max_cycles = static_cast<int>(2 * seconds) - 1;
      const double f = g.integer(1, max_cycles) / static_cast<double>(seconds);
      const auto s = sine(f, 64.0, x.size(), g.uniform(0.1, 1.0), g.uniform(0.0, 6.0));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += s[i];
    }
    const auto down = dsp::resample_fourier(x, 64.0, 4.0);
    const auto up = dsp::resample_fourier(down, 4.0, 64.0);
    c.expect(down.size() == 4 * seconds && up.size() == x.size(), "round-trip lengths");
    if (up.size() != x.size()) continue;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(up[i] - x[i]));
  }
  c.expect(worst < 1e-6, fmt::format("Fourier round trip error {}", worst));
  c.note(fmt::format("Fourier round-trip max error {:.1e}", worst));

  const std::pair<double, double> rates[] = {{1.0, 4.0}, {4.0, 64.0}, {64.0, 4.0}, {32.0, 4.0}, {4.0, 4.0}};
  double ramp_worst = 0.0;
  for (const auto& [in, out] : rates) {
    const double a = g.uniform(-5, 5), b = g.uniform(-3, 3);
    std::vector<double> ramp(static_cast<std::size_t>(in * 30));
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = a + b * static_cast<double>(i) / in;
    const auto y = dsp::resample_linear(ramp, in, out);
    const double last_t = static_cast<double>(ramp.size() - 1) / in;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double t = static_cast<double>(j) / out;
      if (t > last_t) break;  // clamped region
      ramp_worst = std::max(ramp_worst, std::abs(y[j] - (a + b * t)));
    }
  }
  c.expect(ramp_worst < 1e-12, fmt::format("linear ramp error {}", ramp_worst));
}

// ---------------------------------------------------------------- gradients

void gradients(Checks& c) {
  const std::pair<const char*, gradcheck::Tally> suites[] = {
      {"conv1d", gradcheck::conv1d(300, 120)},       {"shape ops", gradcheck::shape_ops(301, 120)},
      {"losses", gradcheck::losses(302, 120)},       {"dense", gradcheck::dense(303, 120)},
      {"classifier", gradcheck::classifier(304, 100)}, {"autoencoder", gradcheck::autoencoder(305, 100)},
  };
  gradcheck::Tally all;
  for (const auto& [name, t] : suites) {
    c.expect(t.ok(), fmt::format("{}: {} failures, {} kinks of {} ({})", name, t.failures, t.kinks, t.checked,
                                 t.first_failure));
    all.merge(t);
  }
  c.note(fmt::format("{} partials checked, {} kink points, worst rel err {:.1e}", all.checked, all.kinks, all.worst));
}

// ------------------------------------------------------------------ metrics

void metric_oracles(Checks& c) {
  oracle::Gen g(40);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 60));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // Coarse scores so that ties occur.
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::round(g.uniform(0, 1) * 10.0) / 10.0;
      labels[i] = g.coin() ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;

    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pos = scores[i] >= 0.5;
      if (pos && labels[i] == 1) ++tp;
      else if (pos) ++fp;
      else if (labels[i] == 1) ++fn;
      else ++tn;
    }
    const auto cm = metrics::confusion(scores, labels);
    c.expect(cm.tp == tp && cm.tn == tn && cm.fp == fp && cm.fn == fn, "confusion counts");
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(n);
    const double f1 = 2.0 * tp + fp + fn == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    c.expect(std::abs(metrics::accuracy(cm) - acc) < 1e-15, "accuracy closed form");
    c.expect(std::abs(metrics::f1(cm) - f1) < 1e-15, "F1 closed form");

    const auto curve = metrics::roc(scores, labels);
    const double diff = std::abs(metrics::auc(curve) - oracle::mann_whitney_auc(scores, labels));
    worst = std::max(worst, diff);
  }
  c.expect(worst < 1e-12, fmt::format("trapezoid AUC vs pair counting {}", worst));
  c.note(fmt::format("AUC max deviation {:.1e} over 1000 instances", worst));

  const std::vector<double> s{0.9, 0.8, 0.3, 0.2};
  const std::vector<int> l{1, 0, 1, 0};
  const double worked = metrics::auc(metrics::roc(s, l));
  c.expect(std::abs(worked - 0.75) < 1e-12, fmt::format("worked AUC {}", worked));
}

// ------------------------------------------------------ dataset construction

std::vector<PreprocessedSession> generated_study(const SyntheticConfig& cfg) {
  std::vector<PreprocessedSession> out;
  for (int s = 1; s <= cfg.n_subjects; ++s) {
    for (int w = 1; w <= cfg.weeks_per_subject; ++w) out.push_back(preprocess(generate_session(cfg, subject_name(s), w)));
  }
  return out;
}

void dataset_construction(Checks& c) {
  SyntheticConfig sc;
  sc.seed = 51;
  sc.n_subjects = 9;
  sc.weeks_per_subject = 2;
  const auto sessions = generated_study(sc);

  std::size_t n_events = 0;
  for (double len : kWindowLengths) {
    for (double lead : kLeadTimes) {
      const WindowConfig wc{len, lead, 4.0};
      for (const auto& s : sessions) {
        const auto ev = extract_event_windows(s, wc).examples;
        n_events += ev.size();
        std::vector<double> starts;
        for (const auto& e : ev) {
          const double end = e.window_start + len;
          const bool tagged = std::any_of(s.tags().begin(), s.tags().end(),
                                          [&](double tag) { return std::abs(end + lead - tag) < 1e-6; });
          c.expect(tagged, fmt::format("event window end + lead misses every tag (len {}, lead {})", len, lead));
          c.expect(e.signal.cols() == wc.samples_per_window(), "event window length");
          starts.push_back(e.window_start);
        }
        std::sort(starts.begin(), starts.end());
        for (std::size_t i = 1; i < starts.size(); ++i) {
          c.expect(starts[i - 1] + len <= starts[i], "overlapping event windows");
        }
        for (const auto& e : extract_nonevent_windows(s, wc).examples) {
          for (double tag : s.tags()) {
            const bool hits = e.window_start < tag + kPostTagBuffer && e.window_start + len > tag;
            c.expect(!hits, fmt::format("non-event window [{}, +{}) inside post-tag zone", e.window_start, len));
          }
        }
      }
    }
  }
  c.expect(n_events > 0, "no event windows extracted");

  const auto all = build_examples(sessions, {60.0, 0.0, 4.0});
  const auto u = undersample(all, 7);
  std::size_t ev = 0;
  for (const auto& e : u.examples) ev += e.is_event() ? 1 : 0;
  const double n = static_cast<double>(u.examples.size());
  c.expect(std::abs(static_cast<double>(ev) - n / 3.0) <= 1.0, fmt::format("event fraction {}/{}", ev, n));
  c.note(fmt::format("{} events / {} examples after undersampling", ev, u.examples.size()));

  std::set<std::string> subjects;
  for (const auto& e : u.examples) subjects.insert(e.subject_id);
  std::size_t folds = 0;
  for (const auto& subj : subjects) {
    const auto split = split_personalized(u.examples, subj, 3);
    bool clean = split.stage2.held_out_subject == subj && !split.stage2.test.empty();
    for (const auto* part : {&split.stage1.train, &split.stage1.validation}) {
      for (const auto& e : *part) clean = clean && e.subject_id != subj;
    }
    for (const auto& e : split.stage2.test) clean = clean && e.subject_id == subj && e.week_index >= 2;
    c.expect(clean, "personalized fold for " + subj);
    folds += clean ? 1 : 0;
  }
  c.expect(subjects.size() == 9 && folds == 9, fmt::format("{} personalized folds", folds));
  c.note(fmt::format("{} personalized folds", folds));
}

// ------------------------------------------------------------ activity gate

void activity_gate(Checks& c) {
  SyntheticConfig bc;
  bc.seed = 61;
  bc.n_subjects = 3;
  bc.weeks_per_subject = 1;
  bc.events_per_session = 1;
  bc.max_window_s = 60.0;
  bc.max_lead_s = 0.0;
  bc.session_duration_s = 2400.0;
  bc.activity_segments = {{300.0, 900.0}};
  bc.relax_segments = {{1200.0, 1800.0}};
  std::vector<activity::BaselineWindow> windows;
  for (int s = 1; s <= bc.n_subjects; ++s) {
    const auto w = activity::baseline_windows(generate_session(bc, subject_name(s), 1), 60.0);
    windows.insert(windows.end(), w.begin(), w.end());
  }
  const auto tuned = activity::tune(windows, 60.0);
  c.expect(tuned.balanced_accuracy >= 0.95, fmt::format("tuned balanced accuracy {}", tuned.balanced_accuracy));
  c.note(fmt::format("tuned {} threshold {:.4g}, BA {}", activity::to_string(tuned.model.method),
                     tuned.model.threshold, tuned.balanced_accuracy));

  SyntheticConfig sc;
  sc.seed = 62;
  sc.n_subjects = 3;
  sc.weeks_per_subject = 2;
  const auto u = undersample(build_examples(generated_study(sc), {60.0, 0.0, 4.0}), 5);

  // Wrist motion planted into 30% of the examples: once into non-events only,
  // once into 30% of each class. Active events cannot be replaced, so a
  // planting that hit events harder than non-events could not be balanced
  // without discarding still windows.
  for (const bool stratified : {false, true}) {
    std::vector<std::size_t> events, nonevents;
    for (std::size_t i = 0; i < u.examples.size(); ++i) (u.examples[i].is_event() ? events : nonevents).push_back(i);
    oracle::Gen g(stratified ? 63 : 64);
    std::shuffle(events.begin(), events.end(), g.engine());
    std::shuffle(nonevents.begin(), nonevents.end(), g.engine());
    const auto share = [](std::size_t n) { return static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(n))); };
    std::vector<std::size_t> planted;
    if (stratified) {
      planted.assign(events.begin(), events.begin() + static_cast<long>(share(events.size())));
      planted.insert(planted.end(), nonevents.begin(), nonevents.begin() + static_cast<long>(share(nonevents.size())));
    } else {
      planted.assign(nonevents.begin(), nonevents.begin() + static_cast<long>(share(u.examples.size())));
    }
    auto examples = u.examples;
    for (std::size_t i : planted) {
      auto& acc = examples[i].acc_window;
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t t = 0; t < acc.cols(); ++t) {
          acc(a, t) += 40.0 * std::sin(2.0 * std::numbers::pi * 2.0 * static_cast<double>(t) / 32.0 + 2.1 * a);
        }
      }
    }
    const char* label = stratified ? "per class" : "non-events";
    const std::size_t n_input = examples.size();
    const auto r = activity::gate_dataset(std::move(examples), tuned.model, u.pool, 65);
    c.expect(r.report.n_removed == planted.size(),
             fmt::format("{}: removed {} of {} planted", label, r.report.n_removed, planted.size()));
    c.expect(r.report.removed_fraction >= activity::kResampleTrigger, fmt::format("{}: below trigger", label));
    c.expect(r.report.resampled, fmt::format("{}: re-sample rule not triggered", label));
    c.expect(r.report.ratio_restored, fmt::format("{}: ratio not restored", label));
    std::size_t ev = 0;
    for (const auto& e : r.kept) {
      ev += e.is_event() ? 1 : 0;
      c.expect(!activity::classify(e, tuned.model), "active example kept");
    }
    const double n = static_cast<double>(r.kept.size());
    c.expect(std::abs(static_cast<double>(ev) - n / 3.0) <= 1.0,
             fmt::format("{}: kept event fraction {}/{}", label, ev, n));
    c.note(fmt::format("{}: {} input, {} removed ({:.0f}%), {} replacements, {} events / {} kept", label, n_input,
                       r.report.n_removed, 100.0 * r.report.removed_fraction, r.report.n_replacements, ev,
                       r.kept.size()));
  }
}

// ---------------------------------------------------------- learning sanity

std::vector<Example> separable(std::size_t n, std::uint64_t seed, std::size_t len = 64) {
  oracle::Gen g(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.label = i % 2 == 0 ? Label::Event : Label::NonEvent;
    e.signal = Matrix(4, len);
    const double slope = e.is_event() ? 1.0 : -1.0;
    for (std::size_t ch = 0; ch < 4; ++ch) {
      for (std::size_t t = 0; t < len; ++t) {
        e.signal(ch, t) = slope * (static_cast<double>(t) / len - 0.5) * 2.0 + 0.3 * g.uniform(-1, 1);
      }
    }
    e.window_start = static_cast<double>(i);
    out.push_back(std::move(e));
  }
  return out;
}

double f1_of(const nn::ModelParams& p, const std::vector<Example>& ex) {
  const auto scores = nn::predict(p, ex);
  std::vector<int> labels;
  for (const auto& e : ex) labels.push_back(e.is_event() ? 1 : 0);
  return metrics::f1(metrics::confusion(scores, labels));
}

nn::Architecture desk_arch() {
  nn::Architecture a;
  a.widths = {8, 16, 32};
  a.kernels = {7, 5, 3};
  a.head_width = 16;
  return a;
}

void learning_sanity(Checks& c) {
  DatasetSplit split;
  split.train = separable(20, 71);
  split.validation = separable(6, 72);
  nn::TrainConfig tc;
  tc.max_epochs = 200;
  tc.early_stop_patience = 200;
  tc.batch_size = 8;
  const auto fit = nn::train_classifier(nn::ModelParams::initialize(nn::Architecture{}, 73), split, tc);
  const double overfit = f1_of(fit.params, split.train);
  c.expect(overfit >= 0.95, fmt::format("overfit train F1 {}", overfit));
  c.note(fmt::format("overfit F1 {:.3f}", overfit));

  // Strong effect: twice the default pre-tag response, rising only over the
  // last two minutes so that non-event windows rarely see it.
  SyntheticConfig strong;
  strong.seed = 74;
  strong.event_effect = {1.2, 24.0, 0.6, 0.7};
  strong.response_ramp_s = 120.0;
  strong.weeks_per_subject = 2;

  PretrainConfig pc;
  pc.window = {60.0, 0.0, 4.0};
  pc.arch = desk_arch();
  pc.autoencoder = {.batch_size = 16, .max_epochs = 10};
  pc.classifier = {.batch_size = 16, .max_epochs = 20, .early_stop_patience = 4};
  pc.seed = 75;
  const auto corpora = synthetic_corpora(strong, 3);
  const auto pre = pretrain(corpora, pc);

  strong.seed = 76;
  strong.n_subjects = 9;
  strong.weeks_per_subject = 4;
  const auto examples = build_examples(generated_study(strong), pc.window);
  const Condition cond{60.0, false, 4.0};

  RunConfig rc;
  rc.root_seed = 77;
  rc.n_seeds = 3;
  rc.arch = pc.arch;
  rc.train = {.batch_size = 16, .max_epochs = 30, .early_stop_patience = 6};
  const auto ft = run_mode(ApplicationMode::PretrainedRandomFT, examples, cond, 0.0, &pre.params, rc);
  c.expect(ft.per_seed_f1.size() == 3, "three seeds");
  const double mean_f1 = metrics::aggregate(ft.per_seed_f1).mean;
  c.expect(mean_f1 >= 0.8, fmt::format("fine-tuned test F1 mean {}", mean_f1));
  c.note(fmt::format("fine-tuned F1 {:.3f} {:.3f} {:.3f} (mean {:.3f})", ft.per_seed_f1.at(0), ft.per_seed_f1.at(1),
                     ft.per_seed_f1.at(2), mean_f1));

  const nn::ModelParams before = pre.params;
  std::vector<Example> seen;
  rc.observe = [&](std::size_t, const std::string&, std::string_view, std::span<const Example> ex) {
    seen.insert(seen.end(), ex.begin(), ex.end());
  };
  rc.n_seeds = 1;
  const auto direct = run_mode(ApplicationMode::PretrainedDirect, examples, cond, 0.0, &pre.params, rc);
  c.expect(pre.params.same_values(before), "direct mode changed the weights");
  c.expect(direct.evaluations.size() == 1 && nn::predict(before, seen) == direct.evaluations[0].scores,
           "direct scores differ from the untouched model's predictions");
}

// ----------------------------------------------------------- grid scheduler

void grid_scheduler(Checks& c) {
  using namespace grid;
  auto run = [](GridState& s, const Batch& b, auto f1) {
    s.start_batch(b);
    for (const auto& k : b.cells) s.record(k, f1(k));
  };
  auto row = [](std::size_t block, std::size_t mode, std::size_t from, std::size_t to) {
    std::vector<CellKey> out;
    for (std::size_t l = from; l <= to; ++l) out.push_back({block, mode, l});
    return out;
  };

  GridState s;
  const auto a = next_batch(s);
  std::vector<CellKey> lead0;
  for (std::size_t i = 0; i < kNumBlocks * kNumModes; ++i) lead0.push_back({i / kNumModes, i % kNumModes, 0});
  c.expect(a.kind == BatchKind::Initial && a.cells == lead0, "(a) lead-0 column");
  run(s, a, [](const CellKey& k) {
    if (k.block == 0 && k.mode == 0) return 0.2;
    if (k.block == 0 && k.mode == 1) return 0.7;
    if (k.block == 1 && k.mode <= 1) return 0.3;
    return 0.1;
  });

  const auto b = next_batch(s);
  c.expect(b.kind == BatchKind::Row && b.cells == row(0, 1, 1, 5), "(b) row of the 0.7 cell");
  const double row_f1[] = {0.7, 0.4, 0.5, 0.45, 0.42, 0.75};
  run(s, b, [&](const CellKey& k) { return row_f1[k.lead]; });

  const auto col = next_batch(s);
  std::vector<CellKey> lead5;
  for (const auto& k : lead0) {
    if (!(k.block == 0 && k.mode == 1)) lead5.push_back({k.block, k.mode, 5});
  }
  c.expect(col.kind == BatchKind::Column && col.cells == lead5, "(c) lead-5 column");
  run(s, col, [](const CellKey& k) {
    if (k.block == 0 && k.mode == 0) return 0.4;
    if (k.block == 1 && k.mode == 0) return 0.3;
    if (k.block == 1 && k.mode == 1) return 0.6;
    return 0.1;
  });

  const auto d = next_batch(s);
  c.expect(d.kind == BatchKind::Row && d.cells == row(1, 1, 1, 4), "(d) best unfinished row");

  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    oracle::Gen g(80 + trial);
    GridState full;
    std::vector<int> hits(kNumCells, 0);
    std::size_t batches = 0;
    for (Batch batch = next_batch(full); !batch.empty() && batches < 500; batch = next_batch(full), ++batches) {
      for (const auto& k : batch.cells) ++hits[k.index()];
      run(full, batch, [&](const CellKey&) { return g.uniform(0, 1); });
    }
    c.expect(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }), "every cell exactly once");
    c.expect(full.count(Status::Done) == kNumCells, "120 cells done");
  }
  c.note("(a)-(d) sequence reproduced; 120 cells once over 10 random tables");
}

// ------------------------------------------------------------ determinism

#ifdef STRESSCAST_HAVE_CLI
std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pipeline(const fs::path& dir) {
  const std::string config = STRESSCAST_DESK_CONFIG;
  for (const char* cmd : {"generate", "tune-activity", "pretrain", "grid"}) {
    std::vector<std::string> args{"-c", config, "-w", dir.string(), "--seed", "2024", "--log-level", "warn", cmd};
    if (std::string(cmd) == "grid") {
      args.push_back("--budget");
      args.push_back("25");
    }
    const int rc = cli::run_cli(args);
    if (rc != 0) throw std::runtime_error(fmt::format("`{}` exited with {}", cmd, rc));
  }
  return read_all(dir / "table.csv");
}
#endif

void determinism(Checks& c) {
#ifdef STRESSCAST_HAVE_CLI
  const fs::path root = fs::temp_directory_path() / fmt::format("stresscast-acceptance-{}", ::getpid());
  fs::remove_all(root);
  const std::string first = pipeline(root / "a");
  const std::string second = pipeline(root / "b");
  c.expect(!first.empty() && first == second, "result tables differ");
  std::size_t filled = 0;
  std::istringstream lines(first);
  for (std::string line; std::getline(lines, line);) {
    if (line.find(" min window") != std::string::npos) continue;
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');
    while (std::getline(fields, field, ',')) filled += field.empty() ? 0 : 1;
  }
  c.expect(filled == 25, fmt::format("{} filled cells, expected 25", filled));
  c.note(fmt::format("table.csv {} bytes, {} filled cells, identical across runs", first.size(), filled));
  fs::remove_all(root);
#else
  c.expect(false, "built without the command-line tool");
#endif
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  void (*run)(Checks&);
};

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {1, "filter contracts", 1.0, filter_contracts},
      {2, "resampling oracles", 1.0, resampling},
      {3, "gradient suite", 30.0, gradients},
      {4, "metric oracles", 5.0, metric_oracles},
      {5, "dataset construction", 10.0, dataset_construction},
      {6, "activity gate", 10.0, activity_gate},
      {7, "learning sanity", 300.0, learning_sanity},
      {8, "grid scheduler", 1.0, grid_scheduler},
      {9, "end-to-end determinism", 900.0, determinism},
  };
  spdlog::set_level(spdlog::level::err);
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0, ran = 0;
  for (const auto& k : criteria) {
    if (!only.empty() && !only.contains(k.id)) continue;
    ++ran;
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      k.run(checks);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = elapsed < k.limit_s;
    const bool pass = error.empty() && checks.ok() && in_time;
    failures += pass ? 0 : 1;
    std::string detail = error.empty() ? checks.summary() : "exception: " + error;
    if (!in_time) detail += "; over time limit";
    std::printf("[%s] %d %s (%.2f s, limit %g s) %s\n", pass ? "PASS" : "FAIL", k.id, k.name, elapsed, k.limit_s,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
