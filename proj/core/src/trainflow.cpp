#include "stresscast/trainflow.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stresscast/rng.hpp"

namespace stresscast {

namespace {

constexpr std::string_view kModeNames[] = {"pretrained_direct", "pretrained_random_ft", "pretrained_personalized_ft",
                                           "uninit_random", "uninit_personalized"};

// Runs fn(0..n-1) on up to `threads` workers; the first exception wins.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<int> labels_of(std::span<const Example> examples) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.is_event() ? 1 : 0);
  return out;
}

Evaluation evaluate(const nn::ModelParams& params, std::span<const Example> test) {
  if (test.empty()) throw DataError("evaluation set is empty");
  Evaluation ev;
  ev.scores = nn::predict(params, test);
  ev.labels = labels_of(test);
  const auto counts = metrics::confusion(ev.scores, ev.labels);
  ev.accuracy = metrics::accuracy(counts);
  ev.f1 = metrics::f1(counts);
  ev.n_test = test.size();
  return ev;
}

// Undersampling, then the activity gate when enabled.
std::vector<Example> balance(std::vector<Example> examples, const std::optional<activity::Model>& gate,
                             std::uint64_t seed) {
  auto u = undersample(std::move(examples), derive_seed(seed, "undersample"));
  if (!gate) return std::move(u.examples);
  auto g = activity::gate_dataset(std::move(u.examples), *gate, std::move(u.pool), derive_seed(seed, "gate"));
  return std::move(g.kept);
}

std::vector<std::string> subjects_of(std::span<const Example> examples) {
  std::set<std::string> s;
  for (const auto& e : examples) s.insert(e.subject_id);
  return {s.begin(), s.end()};
}

nn::TrainConfig with_seed(nn::TrainConfig cfg, std::uint64_t seed, bool freeze) {
  cfg.seed = seed;
  cfg.freeze_encoder = cfg.freeze_encoder && freeze;
  return cfg;
}

}  // namespace

std::string_view to_string(ApplicationMode mode) { return kModeNames[static_cast<int>(mode)]; }

ApplicationMode mode_from_string(std::string_view name) {
  for (ApplicationMode m : kAllModes) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown application mode: " + std::string(name));
}

bool uses_pretrained(ApplicationMode mode) {
  return mode == ApplicationMode::PretrainedDirect || mode == ApplicationMode::PretrainedRandomFT ||
         mode == ApplicationMode::PretrainedPersonalizedFT;
}

bool is_personalized(ApplicationMode mode) {
  return mode == ApplicationMode::PretrainedPersonalizedFT || mode == ApplicationMode::UninitPersonalized;
}

std::vector<Example> build_examples(std::span<const PreprocessedSession> sessions, const WindowConfig& cfg) {
  validate(cfg);
  std::vector<Example> out;
  for (const auto& s : sessions) {
    auto events = extract_event_windows(s, cfg);
    auto nonevents = extract_nonevent_windows(s, cfg);
    for (auto& e : events.examples) out.push_back(standardize(std::move(e)));
    for (auto& e : nonevents.examples) out.push_back(standardize(std::move(e)));
  }
  return out;
}

std::vector<PretrainCorpus> synthetic_corpora(const SyntheticConfig& base, int subjects) {
  if (subjects < 2) throw ValidationError("a pretraining corpus needs at least 2 subjects");
  struct Style {
    const char* name;
    int events;
    double effect_scale;
    double noise_scale;
  };
  constexpr Style styles[] = {
      {"task-phase", 3, 1.0, 1.0},
      {"tsst-block", 2, 1.3, 1.0},
      {"continuous-rating", 3, 1.0, 1.3},
      {"self-tag", 3, 0.9, 1.0},
  };
  std::vector<PretrainCorpus> out;
  for (const auto& st : styles) {
    SyntheticConfig cfg = base;
    cfg.seed = derive_seed(base.seed, std::string("corpus:") + st.name);
    cfg.n_subjects = subjects;
    cfg.events_per_session = st.events;
    cfg.noise_scale = base.noise_scale * st.noise_scale;
    cfg.event_effect.eda_us *= st.effect_scale;
    cfg.event_effect.hr_bpm *= st.effect_scale;
    cfg.event_effect.temp_c *= st.effect_scale;
    cfg.event_effect.bvp_rel = std::min(0.9, cfg.event_effect.bvp_rel * st.effect_scale);
    validate(cfg);
    PretrainCorpus corpus{st.name, {}};
    for (int s = 0; s < subjects; ++s) {
      for (int w = 1; w <= cfg.weeks_per_subject; ++w) {
        corpus.sessions.push_back(generate_session(cfg, std::string(st.name) + "-" + subject_name(s + 1), w));
      }
    }
    out.push_back(std::move(corpus));
  }
  return out;
}

namespace {

struct TrainedModel {
  nn::ModelParams params;
  std::size_t n_train = 0;
};

TrainedModel pretrain_on(const std::vector<Example>& examples, const PretrainConfig& cfg, const std::string& tag) {
  auto ae_cfg = cfg.autoencoder;
  ae_cfg.seed = derive_seed(cfg.seed, "shuffle:autoencoder:" + tag);
  const auto init = nn::ModelParams::initialize(cfg.arch, derive_seed(cfg.seed, "init"));
  auto ae = nn::train_autoencoder(init, examples, ae_cfg);
  auto split = split_train_validation(examples, derive_seed(cfg.seed, "split:" + tag));
  auto cls_cfg = cfg.classifier;
  cls_cfg.seed = derive_seed(cfg.seed, "shuffle:classifier:" + tag);
  auto trained = nn::train_classifier(ae.params, split, cls_cfg);
  return {std::move(trained.params), split.train.size()};
}

}  // namespace

PretrainResult pretrain(std::span<const PretrainCorpus> corpora, const PretrainConfig& cfg) {
  if (corpora.size() < 2) throw ValidationError("pretraining needs at least 2 corpora");
  validate(cfg.window);
  std::vector<std::vector<Example>> per_corpus;
  for (const auto& c : corpora) {
    if (c.sessions.empty()) throw DataError("corpus " + c.name + " is empty");
    std::set<std::string> subjects;
    std::vector<PreprocessedSession> sessions;
    for (const auto& s : c.sessions) {
      subjects.insert(s.subject_id);
      sessions.push_back(preprocess(s));
    }
    if (subjects.size() < 2) throw DataError("corpus " + c.name + " has fewer than 2 subjects");
    auto examples = build_examples(sessions, cfg.window);
    auto balanced = undersample(std::move(examples), derive_seed(cfg.seed, "undersample:" + c.name));
    if (balanced.examples.empty()) throw DataError("corpus " + c.name + " yields no windows");
    spdlog::info("pretrain: corpus {} has {} windows", c.name, balanced.examples.size());
    per_corpus.push_back(std::move(balanced.examples));
  }

  PretrainResult result{nn::ModelParams::initialize(cfg.arch, 0), {}};
  for (std::size_t k = 0; k < corpora.size(); ++k) {
    std::vector<Example> train;
    for (std::size_t j = 0; j < corpora.size(); ++j) {
      if (j != k) train.insert(train.end(), per_corpus[j].begin(), per_corpus[j].end());
    }
    auto model = pretrain_on(train, cfg, "fold:" + corpora[k].name);
    auto ev = evaluate(model.params, per_corpus[k]);
    spdlog::info("pretrain: held-out {} F1 {:.4f}", corpora[k].name, ev.f1);
    result.folds.push_back(
        {corpora[k].name, metrics::make_report({ev.accuracy}, {ev.f1}, ev.scores, ev.labels)});
  }
  std::vector<Example> all;
  for (const auto& v : per_corpus) all.insert(all.end(), v.begin(), v.end());
  result.params = pretrain_on(all, cfg, "all").params;
  return result;
}

std::uint64_t run_seed(const RunConfig& cfg, std::size_t index) { return derive_seed(cfg.root_seed, "seed", index); }

RunResult run_mode(ApplicationMode mode, std::span<const Example> examples, const Condition& condition,
                   double lead_time_s, const nn::ModelParams* pretrained, const RunConfig& cfg) {
  if (uses_pretrained(mode) && pretrained == nullptr) {
    throw ValidationError(std::string(to_string(mode)) + " needs pretrained parameters");
  }
  if (!uses_pretrained(mode) && pretrained != nullptr) {
    throw ValidationError(std::string(to_string(mode)) + " must not be given pretrained parameters");
  }
  if (pretrained != nullptr && !(pretrained->architecture() == cfg.arch)) {
    throw ValidationError("pretrained parameters have a different architecture");
  }
  if (cfg.n_seeds == 0) throw ValidationError("n_seeds must be > 0");
  if (condition.activity_gate && !cfg.gate) throw ValidationError("activity gate enabled without an activity model");
  nn::validate(cfg.train);
  if (examples.empty()) throw DataError("no examples for this cell");
  const std::size_t len = static_cast<std::size_t>(condition.window_len_s * condition.target_rate_hz);
  for (const auto& e : examples) {
    if (e.signal.rows() != kNumModelChannels || e.signal.cols() != len) {
      throw ValidationError("example shape does not match the condition's window");
    }
  }
  const std::optional<activity::Model> gate = condition.activity_gate ? cfg.gate : std::nullopt;
  const bool from_pretrained = uses_pretrained(mode);

  std::vector<std::string> subjects;
  if (is_personalized(mode)) {
    subjects = subjects_of(examples);
    if (subjects.size() < 2) throw DataError("personalized modes need at least 2 subjects");
  }
  const std::size_t per_seed = is_personalized(mode) ? subjects.size() : 1;
  std::vector<Evaluation> evals(cfg.n_seeds * per_seed);

  parallel_for(evals.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t seed_index = job / per_seed;
    const std::uint64_t seed = run_seed(cfg, seed_index);
    const nn::ModelParams init =
        from_pretrained ? *pretrained : nn::ModelParams::initialize(cfg.arch, derive_seed(seed, "init"));
    auto observe = [&](const std::string& held_out, std::string_view part, std::span<const Example> ex) {
      if (cfg.observe) cfg.observe(seed_index, held_out, part, ex);
    };
    Evaluation ev;
    switch (mode) {
      case ApplicationMode::PretrainedDirect: {
        const auto data = balance({examples.begin(), examples.end()}, gate, seed);
        observe("", "test", data);
        ev = evaluate(init, data);
        break;
      }
      case ApplicationMode::PretrainedRandomFT:
      case ApplicationMode::UninitRandom: {
        auto split = split_random(balance({examples.begin(), examples.end()}, gate, seed), derive_seed(seed, "split"));
        observe("", "train", split.train);
        observe("", "validation", split.validation);
        observe("", "test", split.test);
        auto trained =
            nn::train_classifier(init, split, with_seed(cfg.train, derive_seed(seed, "shuffle"), from_pretrained));
        ev = evaluate(trained.params, split.test);
        ev.n_train = split.train.size();
        break;
      }
      case ApplicationMode::PretrainedPersonalizedFT:
      case ApplicationMode::UninitPersonalized: {
        const std::string& subject = subjects[job % per_seed];
        const std::uint64_t fold_seed = derive_seed(seed, "fold:" + subject);
        PoolTransform transform = [&](std::vector<Example> pool, std::string_view stage) {
          return balance(std::move(pool), gate, derive_seed(fold_seed, stage));
        };
        auto split = split_personalized(examples, subject, derive_seed(fold_seed, "split"), transform);
        observe(subject, "stage1-train", split.stage1.train);
        observe(subject, "stage1-validation", split.stage1.validation);
        observe(subject, "stage2-train", split.stage2.train);
        observe(subject, "stage2-validation", split.stage2.validation);
        observe(subject, "test", split.stage2.test);
        auto stage1 = nn::train_classifier(
            init, split.stage1, with_seed(cfg.train, derive_seed(fold_seed, "shuffle:stage1"), from_pretrained));
        auto stage2 = nn::train_classifier(stage1.params, split.stage2,
                                           with_seed(cfg.train, derive_seed(fold_seed, "shuffle:stage2"),
                                                     from_pretrained));
        ev = evaluate(stage2.params, split.stage2.test);
        ev.held_out = subject;
        ev.n_train = split.stage1.train.size() + split.stage2.train.size();
        break;
      }
    }
    ev.seed_index = seed_index;
    evals[job] = std::move(ev);
  });

  RunResult result;
  result.mode = mode;
  result.condition = condition;
  result.lead_time_s = lead_time_s;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
    double acc = 0.0, f1 = 0.0;
    for (std::size_t f = 0; f < per_seed; ++f) {
      const auto& ev = evals[s * per_seed + f];
      acc += ev.accuracy;
      f1 += ev.f1;
      pooled_scores.insert(pooled_scores.end(), ev.scores.begin(), ev.scores.end());
      pooled_labels.insert(pooled_labels.end(), ev.labels.begin(), ev.labels.end());
    }
    result.per_seed_accuracy.push_back(acc / static_cast<double>(per_seed));
    result.per_seed_f1.push_back(f1 / static_cast<double>(per_seed));
  }
  result.report = metrics::make_report(result.per_seed_accuracy, result.per_seed_f1, pooled_scores, pooled_labels);
  result.evaluations = std::move(evals);
  spdlog::info("run {} window {}s gate {} lead {}s: F1 {:.4f} +- {:.4f}", to_string(mode), condition.window_len_s,
               condition.activity_gate ? "on" : "off", lead_time_s, result.report.f1_mean, result.report.f1_std);
  return result;
}

void to_json(nlohmann::json& j, const Condition& c) {
  j = {{"window_len_s", c.window_len_s}, {"activity_gate", c.activity_gate}, {"target_rate_hz", c.target_rate_hz}};
}

void from_json(const nlohmann::json& j, Condition& c) {
  c.window_len_s = j.at("window_len_s").get<double>();
  c.activity_gate = j.at("activity_gate").get<bool>();
  c.target_rate_hz = j.at("target_rate_hz").get<double>();
}

void to_json(nlohmann::json& j, const RunResult& r) {
  j = nlohmann::json::object();
  j["mode"] = to_string(r.mode);
  j["condition"] = r.condition;
  j["lead_time_s"] = r.lead_time_s;
  j["per_seed_accuracy"] = r.per_seed_accuracy;
  j["per_seed_f1"] = r.per_seed_f1;
  auto& evs = j["evaluations"] = nlohmann::json::array();
  for (const auto& ev : r.evaluations) {
    evs.push_back({{"seed_index", ev.seed_index},
                   {"held_out", ev.held_out},
                   {"accuracy", ev.accuracy},
                   {"f1", ev.f1},
                   {"n_train", ev.n_train},
                   {"n_test", ev.n_test}});
  }
  j["report"] = r.report;
}

}  // namespace stresscast
