#include "stresscast/cli/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "stresscast/windowing.hpp"

namespace stresscast::cli {

namespace {

using nlohmann::json;

void allow_keys(const json& j, const char* section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(std::string("config section '") + section + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw ValidationError(std::string("unknown key '") + k + "' in config section '" + section + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void take_train(const json& j, const char* section, nn::TrainConfig& t) {
  allow_keys(j, section, {"learning_rate", "batch_size", "max_epochs", "early_stop_patience", "freeze_encoder"});
  take(j, "learning_rate", t.learning_rate);
  take(j, "batch_size", t.batch_size);
  take(j, "max_epochs", t.max_epochs);
  take(j, "early_stop_patience", t.early_stop_patience);
  take(j, "freeze_encoder", t.freeze_encoder);
}

json train_json(const nn::TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"max_epochs", t.max_epochs},
          {"early_stop_patience", t.early_stop_patience},
          {"freeze_encoder", t.freeze_encoder}};
}

json segments_json(const std::vector<std::pair<double, double>>& segs) {
  json out = json::array();
  for (const auto& [a, b] : segs) out.push_back({a, b});
  return out;
}

std::vector<std::pair<double, double>> segments_from(const json& j) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : j) out.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  return out;
}

AppConfig defaults() {
  AppConfig cfg;
  cfg.study.activity_segments = {{1200.0, 1500.0}};
  return cfg;
}

}  // namespace

AppConfig config_from_json(const json& root) {
  AppConfig cfg = defaults();
  allow_keys(root, "top level",
             {"work_dir", "root_seed", "threads", "target_rate_hz", "generate", "preprocess", "tune_activity",
              "model", "pretrain", "run", "grid"});
  if (root.contains("work_dir")) cfg.work_dir = root.at("work_dir").get<std::string>();
  take(root, "root_seed", cfg.root_seed);
  take(root, "threads", cfg.threads);
  take(root, "target_rate_hz", cfg.target_rate_hz);

  if (root.contains("generate")) {
    const auto& g = root.at("generate");
    allow_keys(g, "generate",
               {"n_subjects", "weeks_per_subject", "session_duration_s", "events_per_session", "noise_scale",
                "response_ramp_s", "event_effect", "activity_segments", "activity_amplitude", "baseline_subjects",
                "baseline_duration_s", "baseline_dance", "baseline_relax"});
    auto& s = cfg.study;
    take(g, "n_subjects", s.n_subjects);
    take(g, "weeks_per_subject", s.weeks_per_subject);
    take(g, "session_duration_s", s.session_duration_s);
    take(g, "events_per_session", s.events_per_session);
    take(g, "noise_scale", s.noise_scale);
    take(g, "response_ramp_s", s.response_ramp_s);
    take(g, "activity_amplitude", s.activity_amplitude);
    if (g.contains("activity_segments")) s.activity_segments = segments_from(g.at("activity_segments"));
    if (g.contains("event_effect")) {
      const auto& e = g.at("event_effect");
      allow_keys(e, "generate.event_effect", {"eda_us", "hr_bpm", "temp_c", "bvp_rel"});
      take(e, "eda_us", s.event_effect.eda_us);
      take(e, "hr_bpm", s.event_effect.hr_bpm);
      take(e, "temp_c", s.event_effect.temp_c);
      take(e, "bvp_rel", s.event_effect.bvp_rel);
    }
    take(g, "baseline_subjects", cfg.baseline_subjects);
    take(g, "baseline_duration_s", cfg.baseline_duration_s);
    if (g.contains("baseline_dance")) cfg.baseline_dance = segments_from(json::array({g.at("baseline_dance")}))[0];
    if (g.contains("baseline_relax")) cfg.baseline_relax = segments_from(json::array({g.at("baseline_relax")}))[0];
  }
  if (root.contains("preprocess")) {
    const auto& p = root.at("preprocess");
    allow_keys(p, "preprocess", {"window_lengths_s", "lead_times_s"});
    take(p, "window_lengths_s", cfg.window_lengths);
    take(p, "lead_times_s", cfg.lead_times);
  }
  if (root.contains("tune_activity")) {
    const auto& t = root.at("tune_activity");
    allow_keys(t, "tune_activity", {"window_len_s"});
    take(t, "window_len_s", cfg.activity_window_s);
  }
  if (root.contains("model")) {
    const auto& m = root.at("model");
    allow_keys(m, "model", {"in_channels", "widths", "kernels", "stride", "head_width", "head_kernel"});
    take(m, "in_channels", cfg.arch.in_channels);
    take(m, "widths", cfg.arch.widths);
    take(m, "kernels", cfg.arch.kernels);
    take(m, "stride", cfg.arch.stride);
    take(m, "head_width", cfg.arch.head_width);
    take(m, "head_kernel", cfg.arch.head_kernel);
  }
  if (root.contains("pretrain")) {
    const auto& p = root.at("pretrain");
    allow_keys(p, "pretrain", {"corpus_subjects", "corpus_weeks", "autoencoder", "classifier"});
    take(p, "corpus_subjects", cfg.corpus_subjects);
    take(p, "corpus_weeks", cfg.corpus_weeks);
    if (p.contains("autoencoder")) take_train(p.at("autoencoder"), "pretrain.autoencoder", cfg.pretrain_autoencoder);
    if (p.contains("classifier")) take_train(p.at("classifier"), "pretrain.classifier", cfg.pretrain_classifier);
  }
  if (root.contains("run")) {
    const auto& r = root.at("run");
    allow_keys(r, "run", {"n_seeds", "train"});
    take(r, "n_seeds", cfg.n_seeds);
    if (r.contains("train")) take_train(r.at("train"), "run.train", cfg.train);
  }
  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    allow_keys(g, "grid", {"budget"});
    if (g.contains("budget") && !g.at("budget").is_null()) cfg.budget = g.at("budget").get<std::size_t>();
  }
  return cfg;
}

json config_to_json(const AppConfig& cfg) {
  const auto& s = cfg.study;
  return {
      {"work_dir", cfg.work_dir.string()},
      {"root_seed", cfg.root_seed},
      {"threads", cfg.threads},
      {"target_rate_hz", cfg.target_rate_hz},
      {"generate",
       {{"n_subjects", s.n_subjects},
        {"weeks_per_subject", s.weeks_per_subject},
        {"session_duration_s", s.session_duration_s},
        {"events_per_session", s.events_per_session},
        {"noise_scale", s.noise_scale},
        {"response_ramp_s", s.response_ramp_s},
        {"event_effect",
         {{"eda_us", s.event_effect.eda_us},
          {"hr_bpm", s.event_effect.hr_bpm},
          {"temp_c", s.event_effect.temp_c},
          {"bvp_rel", s.event_effect.bvp_rel}}},
        {"activity_segments", segments_json(s.activity_segments)},
        {"activity_amplitude", s.activity_amplitude},
        {"baseline_subjects", cfg.baseline_subjects},
        {"baseline_duration_s", cfg.baseline_duration_s},
        {"baseline_dance", {cfg.baseline_dance.first, cfg.baseline_dance.second}},
        {"baseline_relax", {cfg.baseline_relax.first, cfg.baseline_relax.second}}}},
      {"preprocess", {{"window_lengths_s", cfg.window_lengths}, {"lead_times_s", cfg.lead_times}}},
      {"tune_activity", {{"window_len_s", cfg.activity_window_s}}},
      {"model",
       {{"in_channels", cfg.arch.in_channels},
        {"widths", cfg.arch.widths},
        {"kernels", cfg.arch.kernels},
        {"stride", cfg.arch.stride},
        {"head_width", cfg.arch.head_width},
        {"head_kernel", cfg.arch.head_kernel}}},
      {"pretrain",
       {{"corpus_subjects", cfg.corpus_subjects},
        {"corpus_weeks", cfg.corpus_weeks},
        {"autoencoder", train_json(cfg.pretrain_autoencoder)},
        {"classifier", train_json(cfg.pretrain_classifier)}}},
      {"run", {{"n_seeds", cfg.n_seeds}, {"train", train_json(cfg.train)}}},
      {"grid", {{"budget", cfg.budget ? json(*cfg.budget) : json(nullptr)}}},
  };
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("tool") && j.contains("parameters")) j = j.at("parameters");
  try {
    AppConfig cfg = config_from_json(j);
    cfg.config_path = path;
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void validate(const AppConfig& cfg) {
  validate(cfg.study);
  if (cfg.threads < 1) throw ValidationError("threads must be >= 1");
  if (cfg.target_rate_hz != 4.0 && cfg.target_rate_hz != 64.0) throw ValidationError("target_rate_hz must be 4 or 64");
  if (cfg.baseline_subjects < 1 || cfg.baseline_subjects > cfg.study.n_subjects) {
    throw ValidationError("baseline_subjects must be between 1 and n_subjects");
  }
  if (cfg.window_lengths.empty() || cfg.lead_times.empty()) throw ValidationError("preprocess needs window lengths and lead times");
  for (double len : cfg.window_lengths) {
    for (double lead : cfg.lead_times) validate(WindowConfig{len, lead, cfg.target_rate_hz});
  }
  validate(WindowConfig{cfg.activity_window_s, 0.0, cfg.target_rate_hz});
  if (cfg.corpus_subjects < 2) throw ValidationError("corpus_subjects must be >= 2");
  if (cfg.corpus_weeks < 1) throw ValidationError("corpus_weeks must be >= 1");
  nn::validate(cfg.pretrain_autoencoder);
  nn::validate(cfg.pretrain_classifier);
  nn::validate(cfg.train);
  if (cfg.n_seeds < 1) throw ValidationError("n_seeds must be >= 1");
  if (cfg.arch.in_channels != 4) throw ValidationError("model.in_channels must be 4");
}

}  // namespace stresscast::cli
