#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stresscast/cli/commands.hpp"

namespace stresscast::cli {

namespace {

grid::CellKey parse_cell(std::size_t block, const std::string& mode, double lead) {
  if (block >= grid::kNumBlocks) throw ValidationError("block must be 0..3");
  const auto m = mode_from_string(mode);
  std::size_t mode_index = 0;
  while (kAllModes[mode_index] != m) ++mode_index;
  for (std::size_t l = 0; l < grid::kNumLeads; ++l) {
    if (kLeadTimes[l] == lead) return {block, mode_index, l};
  }
  throw ValidationError("lead must be one of 0,60,...,300 seconds");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Stress event prediction pipeline on E4-format wearable sessions", "stresscast"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path, work_dir, log_level = "info";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, n_seeds;
  app.add_option("-c,--config", config_path, "JSON config (or a manifest from an earlier run)");
  app.add_option("-w,--work-dir", work_dir, "Work directory; overrides the config");
  app.add_option("--seed", seed, "Root seed; overrides the config");
  app.add_option("--threads", threads, "Worker threads for seed/fold jobs");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* gen = app.add_subcommand("generate", "Write synthetic study and baseline sessions in E4 layout");
  std::optional<int> subjects, weeks;
  gen->add_option("--subjects", subjects, "Number of subjects");
  gen->add_option("--weeks", weeks, "Weeks per subject");

  app.add_subcommand("preprocess", "Filter, resample, window, standardize and undersample the sessions");
  app.add_subcommand("tune-activity", "Fit the accelerometer activity gate on baseline sessions");
  app.add_subcommand("pretrain", "Pretrain the autoencoder and classifier on generated public-style corpora");

  auto* run = app.add_subcommand("run", "Run one grid cell");
  std::size_t block = 0;
  std::string mode;
  double lead = 0.0;
  bool force = false;
  run->add_option("--block", block, "Condition block: 0 = 5 min + gate, 1 = 5 min, 2 = 1 min + gate, 3 = 1 min")
      ->required();
  run->add_option("--mode", mode, "Application mode name")->required();
  run->add_option("--lead", lead, "Lead time in seconds")->required();
  run->add_flag("--force", force, "Rerun a cell that already has a result");
  run->add_option("--seeds", n_seeds, "Number of seeds");

  auto* grid_cmd = app.add_subcommand("grid", "Fill the experiment grid greedily up to the budget");
  std::optional<std::size_t> budget;
  grid_cmd->add_option("--budget", budget, "Total cells to schedule");
  grid_cmd->add_option("--seeds", n_seeds, "Number of seeds");

  app.add_subcommand("report", "Export the results table and ROC plots");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto logger = spdlog::get("stresscast");
  if (!logger) logger = spdlog::stderr_color_mt("stresscast");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    AppConfig cfg = config_path.empty() ? config_from_json(nlohmann::json::object()) : load_config(config_path);
    if (!work_dir.empty()) cfg.work_dir = work_dir;
    if (seed) cfg.root_seed = *seed;
    if (threads) cfg.threads = *threads;
    if (n_seeds) cfg.n_seeds = *n_seeds;
    if (subjects) cfg.study.n_subjects = *subjects;
    if (weeks) cfg.study.weeks_per_subject = *weeks;
    if (budget) cfg.budget = *budget;
    validate(cfg);
    write_manifest(cfg, command);

    if (command == "generate") {
      cmd_generate(cfg);
    } else if (command == "preprocess") {
      cmd_preprocess(cfg);
    } else if (command == "tune-activity") {
      cmd_tune_activity(cfg);
    } else if (command == "pretrain") {
      cmd_pretrain(cfg);
    } else if (command == "run") {
      const auto r = cmd_run(cfg, parse_cell(block, mode, lead), force);
      std::cout << nlohmann::json{{"f1_mean", r.report.f1_mean}, {"f1_std", r.report.f1_std}}.dump() << "\n";
    } else if (command == "grid") {
      cmd_grid(cfg);
    } else if (command == "report") {
      cmd_report(cfg);
    }
    return 0;
  } catch (const ValidationError& e) {
    spdlog::error("{}: {}", command, e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", command, e.what());
    return 2;
  }
}

}  // namespace stresscast::cli
