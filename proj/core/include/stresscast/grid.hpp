#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stresscast/trainflow.hpp"

namespace stresscast::grid {

/// Condition blocks in table order: 5 min + gate, 5 min, 1 min + gate, 1 min.
struct Block {
  double window_len_s;
  bool activity_gate;
};
inline constexpr Block kBlocks[] = {{300.0, true}, {300.0, false}, {60.0, true}, {60.0, false}};
inline constexpr std::size_t kNumBlocks = 4;
inline constexpr std::size_t kNumModes = 5;
inline constexpr std::size_t kNumLeads = 6;
inline constexpr std::size_t kNumCells = kNumBlocks * kNumModes * kNumLeads;

enum class Status { Pending, Running, Done };

struct CellKey {
  std::size_t block = 0;
  std::size_t mode = 0;
  std::size_t lead = 0;  // index into kLeadTimes

  std::size_t index() const { return (block * kNumModes + mode) * kNumLeads + lead; }
  static CellKey from_index(std::size_t i);
  ApplicationMode application_mode() const { return kAllModes[mode]; }
  double lead_time_s() const { return kLeadTimes[lead]; }
  std::string describe() const;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct GridCell {
  CellKey key;
  Status status = Status::Pending;
  std::optional<double> f1;
};

enum class BatchKind { Initial, Row, Column, Manual };

struct BatchRecord {
  BatchKind kind = BatchKind::Manual;
  std::vector<CellKey> cells;
  std::vector<double> f1;  // filled as cells complete, in completion order
  std::vector<CellKey> completed;
};

struct Batch {
  BatchKind kind = BatchKind::Initial;
  std::vector<CellKey> cells;
  bool empty() const { return cells.empty(); }
};

class GridState {
 public:
  GridState();
  explicit GridState(std::optional<std::size_t> budget);

  const GridCell& cell(const CellKey& key) const { return cells_[key.index()]; }
  const std::array<GridCell, kNumCells>& cells() const { return cells_; }
  const std::vector<BatchRecord>& history() const { return history_; }
  std::optional<std::size_t> budget() const { return budget_; }
  void set_budget(std::optional<std::size_t> budget) { budget_ = budget; }
  /// Cells emitted in batches so far (counts against the budget).
  std::size_t emitted() const;
  std::size_t count(Status s) const;

  /// Marks the batch's cells running and appends it to the history.
  void start_batch(const Batch& batch);
  /// Stores the F1 of a pending or running cell. Recording a done cell is an
  /// error. Pending cells (manual runs) get a single-cell manual batch.
  void record(const CellKey& key, double f1);

  /// Throws ValidationError on any broken invariant.
  void validate() const;

  friend bool operator==(const GridState&, const GridState&);

 private:
  std::array<GridCell, kNumCells> cells_;
  std::vector<BatchRecord> history_;
  std::optional<std::size_t> budget_;
};

/// Greedy schedule: the lead-0 column first, then alternately the best row
/// (condition + mode of the best finished cell whose row still has pending
/// cells) and the best column (lead whose best finished F1 is highest among
/// columns with pending cells). Ties break by table order. Truncated to the
/// remaining budget; empty when nothing is left to run. Running cells are
/// never re-emitted.
Batch next_batch(const GridState& state);

/// Rebuilds a state from a history by replaying start_batch/record.
GridState replay(const std::vector<BatchRecord>& history, std::optional<std::size_t> budget);

/// CSV in table layout: per block a title row "<title>,0min,...,5min" and
/// one row per mode; blank fields for cells without a result.
std::string export_table(const GridState& state);

std::string block_title(std::size_t block);
Condition block_condition(std::size_t block, double target_rate_hz);

void to_json(nlohmann::json& j, const GridState& s);
void from_json(const nlohmann::json& j, GridState& s);

}  // namespace stresscast::grid
