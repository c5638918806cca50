#include "stresscast/cli/commands.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stresscast/e4_io.hpp"
#include "stresscast/nn/serialize.hpp"
#include "stresscast/preprocess.hpp"
#include "stresscast/rng.hpp"

namespace stresscast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path Layout::session(const std::string& subject, int week) const {
  return sessions() / subject / fmt::format("week_{}", week);
}

fs::path Layout::pretrained(double window_len_s, double rate_hz) const {
  return root / fmt::format("pretrained_w{}_r{}.json", window_len_s, rate_hz);
}

fs::path Layout::result(const grid::CellKey& key) const {
  return root / "results" / fmt::format("b{}_{}_l{:03}.json", key.block, to_string(key.application_mode()),
                                        static_cast<int>(key.lead_time_s()));
}

fs::path Layout::manifest(std::string_view command) const { return root / "manifests" / fmt::format("{}.json", command); }

namespace {

// Write to a sibling temp file, then rename, so readers never see half a file.
void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::uint64_t run_root(const AppConfig& cfg) { return derive_seed(cfg.root_seed, "run"); }

SyntheticConfig study_config(const AppConfig& cfg) {
  SyntheticConfig s = cfg.study;
  s.seed = derive_seed(cfg.root_seed, "generator");
  return s;
}

std::vector<fs::path> session_dirs(const fs::path& root, int depth) {
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    if (depth == 1) {
      out.push_back(e.path());
    } else {
      for (const auto& w : fs::directory_iterator(e.path())) {
        if (w.is_directory()) out.push_back(w.path());
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Lazily loaded inputs shared by the cells of one invocation.
class Workspace {
 public:
  explicit Workspace(const AppConfig& cfg) : cfg_(cfg), layout_{cfg.work_dir} {}

  const std::vector<PreprocessedSession>& sessions() {
    if (sessions_.empty()) {
      const auto dirs = session_dirs(layout_.sessions(), 2);
      if (dirs.empty()) throw DataError("no sessions under " + layout_.sessions().string() + "; run `generate` first");
      for (const auto& d : dirs) sessions_.push_back(preprocess(read_session(d)));
      spdlog::info("loaded and filtered {} sessions", sessions_.size());
    }
    return sessions_;
  }

  const std::vector<Example>& examples(double len, double lead) {
    const auto key = std::make_pair(len, lead);
    auto it = std::find_if(examples_.begin(), examples_.end(), [&](const auto& e) { return e.first == key; });
    if (it != examples_.end()) return it->second;
    // Accelerometer slices make example sets large; keep the two most recent.
    if (examples_.size() == 2) examples_.pop_front();
    examples_.emplace_back(key, build_examples(sessions(), {len, lead, cfg_.target_rate_hz}));
    return examples_.back().second;
  }

  const activity::Model& gate() {
    if (!gate_) {
      if (!fs::exists(layout_.activity_model())) {
        throw DataError("missing " + layout_.activity_model().string() + "; run `tune-activity` first");
      }
      gate_ = activity::load_model(layout_.activity_model());
    }
    return *gate_;
  }

  const nn::ModelParams& pretrained(double len) {
    auto it = pretrained_.find(len);
    if (it == pretrained_.end()) {
      const auto path = layout_.pretrained(len, cfg_.target_rate_hz);
      if (!fs::exists(path)) throw DataError("missing " + path.string() + "; run `pretrain` first");
      it = pretrained_.emplace(len, nn::load_params(path, cfg_.arch)).first;
    }
    return it->second;
  }

 private:
  const AppConfig& cfg_;
  Layout layout_;
  std::vector<PreprocessedSession> sessions_;
  std::deque<std::pair<std::pair<double, double>, std::vector<Example>>> examples_;
  std::optional<activity::Model> gate_;
  std::map<double, nn::ModelParams> pretrained_;
};

RunConfig run_config(const AppConfig& cfg) {
  RunConfig rc;
  rc.root_seed = run_root(cfg);
  rc.n_seeds = cfg.n_seeds;
  rc.arch = cfg.arch;
  rc.train = cfg.train;
  rc.threads = cfg.threads;
  return rc;
}

RunResult run_cell(const AppConfig& cfg, Workspace& ws, const grid::CellKey& key) {
  const Condition cond = grid::block_condition(key.block, cfg.target_rate_hz);
  spdlog::info("cell {}", key.describe());
  RunConfig rc = run_config(cfg);
  if (cond.activity_gate) rc.gate = ws.gate();
  const nn::ModelParams* pretrained = uses_pretrained(key.application_mode()) ? &ws.pretrained(cond.window_len_s) : nullptr;
  const auto& examples = ws.examples(cond.window_len_s, key.lead_time_s());
  return run_mode(key.application_mode(), examples, cond, key.lead_time_s(), pretrained, rc);
}

void save_result(const Layout& layout, const grid::CellKey& key, const RunResult& r) {
  json j = r;
  j["cell"] = {{"block", key.block}, {"mode", key.mode}, {"lead", key.lead}, {"title", key.describe()}};
  write_file(layout.result(key), j.dump(2) + "\n");
}

grid::GridState load_state(const Layout& layout) {
  if (!fs::exists(layout.grid_state())) return grid::GridState();
  return read_json(layout.grid_state()).get<grid::GridState>();
}

void save_state(const Layout& layout, const grid::GridState& state) {
  write_file(layout.grid_state(), json(state).dump(2) + "\n");
}

std::string cell_stem(const grid::CellKey& key) {
  return fmt::format("b{}_{}_l{:03}", key.block, to_string(key.application_mode()), static_cast<int>(key.lead_time_s()));
}

}  // namespace

void write_manifest(const AppConfig& cfg, std::string_view command) {
  const Layout layout{cfg.work_dir};
  const RunConfig rc = run_config(cfg);
  json seeds = json::array();
  for (std::size_t i = 0; i < cfg.n_seeds; ++i) seeds.push_back(run_seed(rc, i));
  const json m{{"tool", "stresscast"},
               {"version", kToolVersion},
               {"command", command},
               {"config_path", cfg.config_path.string()},
               {"output_dir", cfg.work_dir.string()},
               {"root_seed", cfg.root_seed},
               {"seeds", seeds},
               {"parameters", config_to_json(cfg)}};
  write_file(layout.manifest(command), m.dump(2) + "\n");
}

void cmd_generate(const AppConfig& cfg) {
  const Layout layout{cfg.work_dir};
  const SyntheticConfig study = study_config(cfg);
  std::size_t written = 0;
  for (int s = 1; s <= study.n_subjects; ++s) {
    const std::string subject = subject_name(s);
    for (int w = 1; w <= study.weeks_per_subject; ++w) {
      Session session = generate_session(study, subject, w);
      session.baseline_intervals.clear();
      write_session(session, layout.session(subject, w));
      ++written;
    }
  }
  SyntheticConfig base = cfg.study;
  base.seed = derive_seed(cfg.root_seed, "generator:baseline");
  base.session_duration_s = cfg.baseline_duration_s;
  base.events_per_session = 1;
  base.activity_segments = {cfg.baseline_dance};
  base.relax_segments = {cfg.baseline_relax};
  base.max_window_s = 60.0;
  base.max_lead_s = 0.0;
  for (int s = 1; s <= cfg.baseline_subjects; ++s) {
    const std::string subject = subject_name(s);
    write_session(generate_session(base, subject, 1), layout.baseline() / subject);
  }
  spdlog::info("generate: {} study sessions, {} baseline sessions under {}", written, cfg.baseline_subjects,
               layout.root.string());
}

void cmd_preprocess(const AppConfig& cfg) {
  const Layout layout{cfg.work_dir};
  Workspace ws(cfg);
  spdlog::info("preprocess: stage 1 filter (BVP band-pass 2-12 Hz, EDA/TEMP low-pass 1 Hz, HR unfiltered)");
  const auto& sessions = ws.sessions();
  json summary = json::array();
  for (double len : cfg.window_lengths) {
    for (double lead : cfg.lead_times) {
      std::size_t events = 0, nonevents = 0, skipped = 0;
      const WindowConfig wc{len, lead, cfg.target_rate_hz};
      std::vector<Example> examples;
      for (const auto& s : sessions) {
        auto ev = extract_event_windows(s, wc);
        auto ne = extract_nonevent_windows(s, wc);
        events += ev.examples.size();
        nonevents += ne.examples.size();
        skipped += ev.skipped;
        std::move(ev.examples.begin(), ev.examples.end(), std::back_inserter(examples));
        std::move(ne.examples.begin(), ne.examples.end(), std::back_inserter(examples));
      }
      spdlog::info("preprocess: stage 2 resample to {} Hz, stage 3 window {}s lead {}s: {} events ({} skipped), {} "
                   "non-events",
                   cfg.target_rate_hz, len, lead, events, skipped, nonevents);
      for (auto& e : examples) standardize_in_place(e.signal);
      spdlog::info("preprocess: stage 4 standardize {} windows", examples.size());
      if (events == 0) throw DataError(fmt::format("window {}s lead {}s yields no event windows", len, lead));
      auto u = undersample(std::move(examples), derive_seed(cfg.root_seed, "undersample:preprocess"));
      const double fraction = static_cast<double>(events) / static_cast<double>(u.examples.size());
      spdlog::info("preprocess: stage 5 undersample to {} windows, event fraction {:.4f}", u.examples.size(),
                   fraction);
      const auto name = fmt::format("w{}_l{}_r{}.csv", len, lead, cfg.target_rate_hz);
      fs::create_directories(layout.datasets());
      write_dataset_csv(layout.datasets() / name, u.examples);
      summary.push_back({{"file", name},
                         {"window_len_s", len},
                         {"lead_time_s", lead},
                         {"events", events},
                         {"events_skipped", skipped},
                         {"nonevents", nonevents},
                         {"kept", u.examples.size()},
                         {"event_fraction", fraction}});
    }
  }
  write_file(layout.datasets() / "summary.json", summary.dump(2) + "\n");
}

activity::TuneResult cmd_tune_activity(const AppConfig& cfg) {
  const Layout layout{cfg.work_dir};
  const auto dirs = session_dirs(layout.baseline(), 1);
  if (dirs.empty()) throw DataError("no baseline sessions under " + layout.baseline().string() + "; run `generate` first");
  std::vector<activity::BaselineWindow> windows;
  for (const auto& d : dirs) {
    auto w = activity::baseline_windows(read_session(d), cfg.activity_window_s);
    std::move(w.begin(), w.end(), std::back_inserter(windows));
  }
  auto r = activity::tune(windows, cfg.activity_window_s);
  activity::save_model(r.model, layout.activity_model());
  const json report{{"model", r.model},
                    {"balanced_accuracy", r.balanced_accuracy},
                    {"std_balanced_accuracy", r.std_balanced_accuracy},
                    {"dominant_freq_balanced_accuracy", r.freq_balanced_accuracy},
                    {"windows", windows.size()}};
  write_file(layout.root / "activity_report.json", report.dump(2) + "\n");
  spdlog::info("tune-activity: {} threshold {:.6g}, balanced accuracy {:.4f} over {} windows",
               activity::to_string(r.model.method), r.model.threshold, r.balanced_accuracy, windows.size());
  return r;
}

void cmd_pretrain(const AppConfig& cfg) {
  const Layout layout{cfg.work_dir};
  SyntheticConfig base = cfg.study;
  base.seed = derive_seed(cfg.root_seed, "generator:corpora");
  base.weeks_per_subject = cfg.corpus_weeks;
  base.activity_segments.clear();
  const auto corpora = synthetic_corpora(base, cfg.corpus_subjects);
  for (double len : cfg.window_lengths) {
    PretrainConfig pc;
    pc.window = {len, 0.0, cfg.target_rate_hz};
    pc.arch = cfg.arch;
    pc.autoencoder = cfg.pretrain_autoencoder;
    pc.classifier = cfg.pretrain_classifier;
    pc.seed = derive_seed(cfg.root_seed, "pretrain");
    const auto r = pretrain(corpora, pc);
    nn::save_params(r.params, layout.pretrained(len, cfg.target_rate_hz));
    json folds = json::array();
    for (const auto& f : r.folds) folds.push_back({{"held_out", f.held_out}, {"report", f.report}});
    write_file(layout.root / fmt::format("pretrain_report_w{}_r{}.json", len, cfg.target_rate_hz),
               json{{"window_len_s", len}, {"folds", folds}}.dump(2) + "\n");
  }
}

RunResult cmd_run(const AppConfig& cfg, const grid::CellKey& key, bool force) {
  const Layout layout{cfg.work_dir};
  auto state = load_state(layout);
  const auto& cell = state.cell(key);
  if (cell.status == grid::Status::Done && !force) {
    throw ValidationError("cell " + key.describe() + " already has a result; pass --force to rerun it");
  }
  Workspace ws(cfg);
  auto r = run_cell(cfg, ws, key);
  save_result(layout, key, r);
  if (cell.status == grid::Status::Done) {
    spdlog::warn("forced rerun of {}: F1 {:.6f}, grid keeps its recorded {:.6f}", key.describe(), r.report.f1_mean,
                 *cell.f1);
  } else {
    state.record(key, r.report.f1_mean);
    save_state(layout, state);
  }
  return r;
}

grid::GridState cmd_grid(const AppConfig& cfg) {
  const Layout layout{cfg.work_dir};
  auto state = load_state(layout);
  state.set_budget(cfg.budget);
  Workspace ws(cfg);
  auto finish = [&](const grid::CellKey& key) {
    const auto r = run_cell(cfg, ws, key);
    save_result(layout, key, r);
    state.record(key, r.report.f1_mean);
    save_state(layout, state);
  };

  std::vector<grid::CellKey> leftover;
  for (const auto& b : state.history()) {
    for (const auto& k : b.cells) {
      if (state.cell(k).status == grid::Status::Running) leftover.push_back(k);
    }
  }
  if (!leftover.empty()) spdlog::info("grid: resuming {} interrupted cells", leftover.size());
  for (const auto& k : leftover) finish(k);

  for (auto batch = grid::next_batch(state); !batch.empty(); batch = grid::next_batch(state)) {
    spdlog::info("grid: batch of {} cells ({} emitted so far)", batch.cells.size(), state.emitted());
    state.start_batch(batch);
    save_state(layout, state);
    for (const auto& k : batch.cells) finish(k);
  }
  save_state(layout, state);
  write_file(layout.table(), grid::export_table(state));
  spdlog::info("grid: {} of {} cells done", state.count(grid::Status::Done), grid::kNumCells);
  return state;
}

void cmd_report(const AppConfig& cfg) {
  const Layout layout{cfg.work_dir};
  const auto state = load_state(layout);
  write_file(layout.table(), grid::export_table(state));
  std::size_t plots = 0;
  for (const auto& c : state.cells()) {
    if (c.status != grid::Status::Done || !fs::exists(layout.result(c.key))) continue;
    const auto report = read_json(layout.result(c.key)).at("report").get<metrics::MetricsReport>();
    if (report.roc_points.empty()) continue;
    const auto stem = cell_stem(c.key);
    write_file(layout.roc() / (stem + ".csv"), roc_csv(report));
    write_file(layout.roc() / (stem + ".svg"), roc_svg(report, c.key.describe()));
    ++plots;
  }
  spdlog::info("report: table with {} results, {} ROC plots", state.count(grid::Status::Done), plots);
}

}  // namespace stresscast::cli
