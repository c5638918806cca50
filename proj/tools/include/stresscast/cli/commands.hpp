#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stresscast/activity.hpp"
#include "stresscast/cli/config.hpp"
#include "stresscast/grid.hpp"
#include "stresscast/metrics.hpp"
#include "stresscast/trainflow.hpp"

namespace stresscast::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// File layout under the work directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path sessions() const { return root / "sessions"; }
  std::filesystem::path session(const std::string& subject, int week) const;
  std::filesystem::path baseline() const { return root / "baseline"; }
  std::filesystem::path datasets() const { return root / "datasets"; }
  std::filesystem::path activity_model() const { return root / "activity_model.json"; }
  std::filesystem::path pretrained(double window_len_s, double rate_hz) const;
  std::filesystem::path grid_state() const { return root / "grid_state.json"; }
  std::filesystem::path result(const grid::CellKey& key) const;
  std::filesystem::path table() const { return root / "table.csv"; }
  std::filesystem::path roc() const { return root / "roc"; }
  std::filesystem::path manifest(std::string_view command) const;
};

/// Records command, resolved parameters and seeds before any work starts.
void write_manifest(const AppConfig& cfg, std::string_view command);

void cmd_generate(const AppConfig& cfg);
void cmd_preprocess(const AppConfig& cfg);
activity::TuneResult cmd_tune_activity(const AppConfig& cfg);
void cmd_pretrain(const AppConfig& cfg);
/// Runs one cell. A cell that already has a result is refused unless
/// `force`; a forced rerun rewrites the result file only.
RunResult cmd_run(const AppConfig& cfg, const grid::CellKey& key, bool force);
/// Greedy grid loop up to the budget; resumes cells left running.
grid::GridState cmd_grid(const AppConfig& cfg);
/// table.csv plus ROC CSV/SVG for every finished cell.
void cmd_report(const AppConfig& cfg);

std::string roc_csv(const metrics::MetricsReport& report);
std::string roc_svg(const metrics::MetricsReport& report, const std::string& title);

/// Parses arguments, dispatches, maps errors to exit codes: 0 success,
/// 1 validation error, 2 data or runtime error.
int run_cli(const std::vector<std::string>& args);

}  // namespace stresscast::cli
