#include "stresscast/grid.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace stresscast::grid {

namespace {

constexpr std::string_view kBatchKindNames[] = {"initial", "row", "column", "manual"};
constexpr std::string_view kStatusNames[] = {"pending", "running", "done"};

template <std::size_t N>
std::size_t parse_enum(const std::string_view (&names)[N], const std::string& s, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return i;
  }
  throw DataError(std::string("unknown ") + what + ": " + s);
}

std::vector<CellKey> pending_where(const GridState& state, auto pred) {
  std::vector<CellKey> out;
  for (const auto& c : state.cells()) {
    if (c.status == Status::Pending && pred(c.key)) out.push_back(c.key);
  }
  return out;
}

std::vector<CellKey> best_row(const GridState& state) {
  std::vector<const GridCell*> done;
  for (const auto& c : state.cells()) {
    if (c.status == Status::Done) done.push_back(&c);
  }
  std::stable_sort(done.begin(), done.end(), [](const GridCell* a, const GridCell* b) { return *a->f1 > *b->f1; });
  for (const GridCell* c : done) {
    auto row = pending_where(state, [&](const CellKey& k) { return k.block == c->key.block && k.mode == c->key.mode; });
    if (!row.empty()) return row;
  }
  return {};
}

std::vector<CellKey> best_column(const GridState& state) {
  std::optional<std::size_t> best;
  double best_f1 = -std::numeric_limits<double>::infinity();
  for (std::size_t lead = 0; lead < kNumLeads; ++lead) {
    bool has_pending = false;
    double col_best = -std::numeric_limits<double>::infinity();
    for (const auto& c : state.cells()) {
      if (c.key.lead != lead) continue;
      if (c.status == Status::Pending) has_pending = true;
      if (c.status == Status::Done) col_best = std::max(col_best, *c.f1);
    }
    if (has_pending && (!best || col_best > best_f1)) {
      best = lead;
      best_f1 = col_best;
    }
  }
  if (!best) return {};
  return pending_where(state, [&](const CellKey& k) { return k.lead == *best; });
}

}  // namespace

CellKey CellKey::from_index(std::size_t i) {
  if (i >= kNumCells) throw ValidationError("cell index out of range");
  return {i / (kNumModes * kNumLeads), (i / kNumLeads) % kNumModes, i % kNumLeads};
}

std::string CellKey::describe() const {
  return fmt::format("{} / {} / lead {}s", block_title(block), to_string(application_mode()), lead_time_s());
}

GridState::GridState() : GridState(std::nullopt) {}

GridState::GridState(std::optional<std::size_t> budget) : budget_(budget) {
  for (std::size_t i = 0; i < kNumCells; ++i) cells_[i].key = CellKey::from_index(i);
}

std::size_t GridState::emitted() const {
  std::size_t n = 0;
  for (const auto& b : history_) {
    if (b.kind != BatchKind::Manual) n += b.cells.size();
  }
  return n;
}

std::size_t GridState::count(Status s) const {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [&](const auto& c) { return c.status == s; }));
}

void GridState::start_batch(const Batch& batch) {
  if (batch.kind == BatchKind::Manual) throw ValidationError("manual batches are created by record");
  for (const auto& k : batch.cells) {
    if (cells_.at(k.index()).status != Status::Pending) throw ValidationError("cell " + k.describe() + " is not pending");
  }
  for (const auto& k : batch.cells) cells_[k.index()].status = Status::Running;
  history_.push_back({batch.kind, batch.cells, {}, {}});
}

void GridState::record(const CellKey& key, double f1) {
  auto& cell = cells_.at(key.index());
  if (cell.status == Status::Done) throw ValidationError("cell " + key.describe() + " already has a result");
  if (cell.status == Status::Pending) {
    history_.push_back({BatchKind::Manual, {key}, {}, {}});
  }
  auto it = std::find_if(history_.rbegin(), history_.rend(), [&](const BatchRecord& b) {
    return std::find(b.cells.begin(), b.cells.end(), key) != b.cells.end();
  });
  it->completed.push_back(key);
  it->f1.push_back(f1);
  cell.status = Status::Done;
  cell.f1 = f1;
}

void GridState::validate() const {
  std::vector<int> seen(kNumCells, 0);
  for (std::size_t i = 0; i < kNumCells; ++i) {
    const auto& c = cells_[i];
    if (c.key.index() != i) throw ValidationError("cell key does not match its position");
    if (c.f1.has_value() != (c.status == Status::Done)) {
      throw ValidationError("cell " + c.key.describe() + ": F1 must be present exactly when done");
    }
  }
  for (const auto& b : history_) {
    if (b.f1.size() != b.completed.size()) throw ValidationError("batch result count mismatch");
    for (const auto& k : b.cells) {
      if (k.index() >= kNumCells || ++seen[k.index()] > 1) throw ValidationError("cell scheduled twice: " + k.describe());
    }
    for (std::size_t i = 0; i < b.completed.size(); ++i) {
      const auto& k = b.completed[i];
      if (std::find(b.cells.begin(), b.cells.end(), k) == b.cells.end()) {
        throw ValidationError("completed cell outside its batch");
      }
      const auto& c = cells_[k.index()];
      if (c.status != Status::Done || *c.f1 != b.f1[i]) throw ValidationError("history disagrees with cell " + k.describe());
    }
  }
  for (std::size_t i = 0; i < kNumCells; ++i) {
    if ((cells_[i].status == Status::Pending) != (seen[i] == 0)) {
      throw ValidationError("cell " + cells_[i].key.describe() + " status disagrees with history");
    }
  }
}

bool operator==(const GridState& a, const GridState& b) {
  if (a.budget_ != b.budget_ || a.history_.size() != b.history_.size()) return false;
  for (std::size_t i = 0; i < kNumCells; ++i) {
    if (a.cells_[i].status != b.cells_[i].status || a.cells_[i].f1 != b.cells_[i].f1) return false;
  }
  for (std::size_t i = 0; i < a.history_.size(); ++i) {
    const auto &x = a.history_[i], &y = b.history_[i];
    if (x.kind != y.kind || x.cells != y.cells || x.completed != y.completed || x.f1 != y.f1) return false;
  }
  return true;
}

Batch next_batch(const GridState& state) {
  state.validate();
  std::size_t remaining = std::numeric_limits<std::size_t>::max();
  if (state.budget()) remaining = *state.budget() > state.emitted() ? *state.budget() - state.emitted() : 0;
  Batch batch;
  if (remaining == 0) return batch;

  batch.cells = pending_where(state, [](const CellKey& k) { return k.lead == 0; });
  if (batch.cells.empty()) {
    BatchKind last = BatchKind::Initial;
    for (const auto& b : state.history()) {
      if (b.kind != BatchKind::Manual) last = b.kind;
    }
    batch.kind = last == BatchKind::Row ? BatchKind::Column : BatchKind::Row;
    batch.cells = batch.kind == BatchKind::Row ? best_row(state) : best_column(state);
    if (batch.cells.empty()) {
      batch.kind = batch.kind == BatchKind::Row ? BatchKind::Column : BatchKind::Row;
      batch.cells = batch.kind == BatchKind::Row ? best_row(state) : best_column(state);
    }
  }
  if (batch.cells.size() > remaining) batch.cells.resize(remaining);
  return batch;
}

GridState replay(const std::vector<BatchRecord>& history, std::optional<std::size_t> budget) {
  GridState state(budget);
  for (const auto& b : history) {
    if (b.kind == BatchKind::Manual) {
      if (b.completed.size() != 1) throw ValidationError("manual batch must hold one result");
      state.record(b.completed[0], b.f1[0]);
      continue;
    }
    state.start_batch({b.kind, b.cells});
    for (std::size_t i = 0; i < b.completed.size(); ++i) state.record(b.completed[i], b.f1.at(i));
  }
  return state;
}

std::string block_title(std::size_t block) {
  const auto& b = kBlocks[block];
  return fmt::format("{} min window {}", b.window_len_s / 60.0, b.activity_gate ? "with activity gate" : "without gate");
}

Condition block_condition(std::size_t block, double target_rate_hz) {
  return {kBlocks[block].window_len_s, kBlocks[block].activity_gate, target_rate_hz};
}

std::string export_table(const GridState& state) {
  std::string out;
  for (std::size_t b = 0; b < kNumBlocks; ++b) {
    out += block_title(b);
    for (double lead : kLeadTimes) out += fmt::format(",{}min", lead / 60.0);
    out += '\n';
    for (std::size_t m = 0; m < kNumModes; ++m) {
      out += to_string(kAllModes[m]);
      for (std::size_t l = 0; l < kNumLeads; ++l) {
        out += ',';
        const auto& c = state.cell({b, m, l});
        if (c.f1) out += fmt::format("{:.6f}", *c.f1);
      }
      out += '\n';
    }
  }
  return out;
}

namespace {

nlohmann::json key_json(const CellKey& k) { return nlohmann::json::array({k.block, k.mode, k.lead}); }

CellKey key_from(const nlohmann::json& j) {
  CellKey k{j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>(), j.at(2).get<std::size_t>()};
  if (k.block >= kNumBlocks || k.mode >= kNumModes || k.lead >= kNumLeads) throw DataError("cell key out of range");
  return k;
}

}  // namespace

void to_json(nlohmann::json& j, const GridState& s) {
  j = nlohmann::json::object();
  j["budget"] = s.budget() ? nlohmann::json(*s.budget()) : nlohmann::json(nullptr);
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& c : s.cells()) {
    cells.push_back({{"key", key_json(c.key)},
                     {"status", kStatusNames[static_cast<int>(c.status)]},
                     {"f1", c.f1 ? nlohmann::json(*c.f1) : nlohmann::json(nullptr)}});
  }
  auto& hist = j["history"] = nlohmann::json::array();
  for (const auto& b : s.history()) {
    nlohmann::json rec{{"kind", kBatchKindNames[static_cast<int>(b.kind)]}, {"f1", b.f1}};
    auto& keys = rec["cells"] = nlohmann::json::array();
    for (const auto& k : b.cells) keys.push_back(key_json(k));
    auto& done = rec["completed"] = nlohmann::json::array();
    for (const auto& k : b.completed) done.push_back(key_json(k));
    hist.push_back(std::move(rec));
  }
}

void from_json(const nlohmann::json& j, GridState& s) {
  try {
    std::optional<std::size_t> budget;
    if (!j.at("budget").is_null()) budget = j.at("budget").get<std::size_t>();
    std::vector<BatchRecord> history;
    for (const auto& rec : j.at("history")) {
      BatchRecord b;
      b.kind = static_cast<BatchKind>(parse_enum(kBatchKindNames, rec.at("kind").get<std::string>(), "batch kind"));
      for (const auto& k : rec.at("cells")) b.cells.push_back(key_from(k));
      for (const auto& k : rec.at("completed")) b.completed.push_back(key_from(k));
      b.f1 = rec.at("f1").get<std::vector<double>>();
      history.push_back(std::move(b));
    }
    GridState rebuilt = replay(history, budget);
    const auto& cells = j.at("cells");
    if (cells.size() != kNumCells) throw DataError("grid state must hold exactly 120 cells");
    for (const auto& c : cells) {
      const CellKey k = key_from(c.at("key"));
      const auto status = static_cast<Status>(parse_enum(kStatusNames, c.at("status").get<std::string>(), "status"));
      const auto& cell = rebuilt.cell(k);
      const std::optional<double> f1 =
          c.at("f1").is_null() ? std::nullopt : std::optional<double>(c.at("f1").get<double>());
      if (cell.status != status || cell.f1 != f1) throw DataError("cell " + k.describe() + " disagrees with history");
    }
    s = std::move(rebuilt);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed grid state: ") + e.what());
  } catch (const ValidationError& e) {
    throw DataError(std::string("inconsistent grid state: ") + e.what());
  }
}

}  // namespace stresscast::grid
