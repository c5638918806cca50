#include "stresscast/e4_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stresscast {

namespace fs = std::filesystem;

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::BVP: return "BVP";
    case ChannelKind::EDA: return "EDA";
    case ChannelKind::TEMP: return "TEMP";
    case ChannelKind::HR: return "HR";
    case ChannelKind::ACC_X: return "ACC_X";
    case ChannelKind::ACC_Y: return "ACC_Y";
    case ChannelKind::ACC_Z: return "ACC_Z";
  }
  return "?";
}

double canonical_rate(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::BVP: return 64.0;
    case ChannelKind::EDA: return 4.0;
    case ChannelKind::TEMP: return 4.0;
    case ChannelKind::HR: return 1.0;
    case ChannelKind::ACC_X:
    case ChannelKind::ACC_Y:
    case ChannelKind::ACC_Z: return 32.0;
  }
  return 0.0;
}

std::string_view to_string(BaselineLabel label) {
  return label == BaselineLabel::Dance ? "dance" : "relax";
}

const ChannelRecording& Session::channel(ChannelKind kind) const {
  auto it = channels.find(kind);
  if (it == channels.end()) {
    throw DataError("session " + subject_id + ": missing channel " + std::string(to_string(kind)));
  }
  return it->second;
}

std::pair<double, double> Session::common_span() const {
  double start = -INFINITY;
  double end = INFINITY;
  for (const auto& [kind, rec] : channels) {
    start = std::max(start, rec.start_time);
    end = std::min(end, rec.end_time());
  }
  return {start, end};
}

void validate_session(const Session& session) {
  for (ChannelKind kind : kAllChannelKinds) {
    const auto& rec = session.channel(kind);
    if (std::abs(rec.sample_rate - canonical_rate(kind)) > 1e-9) {
      throw DataError("channel " + std::string(to_string(kind)) + ": rate mismatch");
    }
    if (rec.samples.empty()) {
      throw DataError("channel " + std::string(to_string(kind)) + ": no samples");
    }
    for (double v : rec.samples) {
      if (!std::isfinite(v)) throw DataError("channel " + std::string(to_string(kind)) + ": non-finite sample");
    }
  }
  const auto [span_start, span_end] = session.common_span();
  for (std::size_t i = 0; i < session.tags.size(); ++i) {
    const double t = session.tags[i];
    if (i > 0 && !(t > session.tags[i - 1])) throw DataError("tags not strictly increasing");
    if (t < span_start || t > span_end) throw DataError("tag outside recorded span");
  }
  for (const auto& iv : session.baseline_intervals) {
    if (!(iv.start < iv.end)) throw DataError("baseline interval with start >= end");
  }
}

E4FormatError::E4FormatError(fs::path file, std::size_t line, const std::string& what)
    : DataError(file.string() + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw E4FormatError(path, 0, "missing file");
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (trim(text).empty()) continue;
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

double parse_number(std::string_view field, const fs::path& path, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw E4FormatError(path, line, "malformed number '" + std::string(field) + "'");
  }
  return value;
}

std::vector<double> parse_row(const Line& line, std::size_t expected, const fs::path& path) {
  std::vector<double> values;
  std::string_view rest = line.text;
  while (true) {
    const auto comma = rest.find(',');
    values.push_back(parse_number(rest.substr(0, comma), path, line.number));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (values.size() != expected) {
    throw E4FormatError(path, line.number,
                        "expected " + std::to_string(expected) + " columns, got " + std::to_string(values.size()));
  }
  return values;
}

std::vector<ChannelRecording> read_channel_file(const fs::path& path, std::span<const ChannelKind> kinds) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw E4FormatError(path, 0, "missing start-time/sample-rate header");
  const std::size_t ncol = kinds.size();
  const auto starts = parse_row(lines[0], ncol, path);
  const auto rates = parse_row(lines[1], ncol, path);

  std::vector<ChannelRecording> recs(ncol);
  for (std::size_t c = 0; c < ncol; ++c) {
    if (std::abs(rates[c] - canonical_rate(kinds[c])) > 1e-9) {
      std::ostringstream msg;
      msg << "rate mismatch: " << to_string(kinds[c]) << " declares " << rates[c] << " Hz, expected "
          << canonical_rate(kinds[c]) << " Hz";
      throw E4FormatError(path, lines[1].number, msg.str());
    }
    recs[c] = {kinds[c], starts[c], rates[c], {}};
    recs[c].samples.reserve(lines.size() - 2);
  }
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto row = parse_row(lines[i], ncol, path);
    for (std::size_t c = 0; c < ncol; ++c) recs[c].samples.push_back(row[c]);
  }
  if (recs.front().samples.empty()) throw E4FormatError(path, 0, "no samples");
  return recs;
}

void append_number(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_channel_file(const fs::path& path, std::span<const ChannelRecording* const> recs) {
  std::string text;
  const std::size_t n = recs.front()->samples.size();
  text.reserve(n * 12 * recs.size());
  auto header = [&](auto field) {
    for (std::size_t c = 0; c < recs.size(); ++c) {
      if (c > 0) text.push_back(',');
      append_number(text, field(*recs[c]));
    }
    text.push_back('\n');
  };
  header([](const ChannelRecording& r) { return r.start_time; });
  header([](const ChannelRecording& r) { return r.sample_rate; });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < recs.size(); ++c) {
      if (c > 0) text.push_back(',');
      append_number(text, recs[c]->samples[i]);
    }
    text.push_back('\n');
  }
  write_text(path, text);
}

}  // namespace

Session read_session(const fs::path& directory) {
  Session session;
  session.subject_id = directory.filename().string();
  session.week_index = 1;

  const fs::path info_path = directory / "session.json";
  if (fs::exists(info_path)) {
    std::ifstream in(info_path);
    try {
      const auto info = nlohmann::json::parse(in);
      session.subject_id = info.at("subject_id").get<std::string>();
      session.week_index = info.at("week_index").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw E4FormatError(info_path, 0, e.what());
    }
    if (session.week_index < 1) throw E4FormatError(info_path, 0, "week_index must be >= 1");
  }

  const std::pair<const char*, ChannelKind> singles[] = {{"BVP.csv", ChannelKind::BVP},
                                                         {"EDA.csv", ChannelKind::EDA},
                                                         {"TEMP.csv", ChannelKind::TEMP},
                                                         {"HR.csv", ChannelKind::HR}};
  for (const auto& [name, kind] : singles) {
    const ChannelKind kinds[] = {kind};
    session.channels[kind] = std::move(read_channel_file(directory / name, kinds).front());
  }
  const ChannelKind acc_kinds[] = {ChannelKind::ACC_X, ChannelKind::ACC_Y, ChannelKind::ACC_Z};
  for (auto& rec : read_channel_file(directory / "ACC.csv", acc_kinds)) {
    session.channels[rec.kind] = std::move(rec);
  }

  const fs::path tags_path = directory / "tags.csv";
  const auto [span_start, span_end] = session.common_span();
  for (const auto& line : read_lines(tags_path)) {
    const double t = parse_number(line.text, tags_path, line.number);
    if (t < span_start || t > span_end) throw E4FormatError(tags_path, line.number, "tag outside recorded span");
    if (!session.tags.empty() && !(t > session.tags.back())) {
      throw E4FormatError(tags_path, line.number, "tags not strictly increasing");
    }
    session.tags.push_back(t);
  }

  const fs::path baseline_path = directory / "baseline.csv";
  if (fs::exists(baseline_path)) {
    for (const auto& line : read_lines(baseline_path)) {
      std::string_view text = line.text;
      const auto c1 = text.find(',');
      const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
      if (c2 == std::string_view::npos) throw E4FormatError(baseline_path, line.number, "expected start,end,label");
      BaselineInterval iv;
      iv.start = parse_number(text.substr(0, c1), baseline_path, line.number);
      iv.end = parse_number(text.substr(c1 + 1, c2 - c1 - 1), baseline_path, line.number);
      const auto label = trim(text.substr(c2 + 1));
      if (label == "dance") {
        iv.label = BaselineLabel::Dance;
      } else if (label == "relax") {
        iv.label = BaselineLabel::Relax;
      } else {
        throw E4FormatError(baseline_path, line.number, "unknown baseline label '" + std::string(label) + "'");
      }
      if (!(iv.start < iv.end)) throw E4FormatError(baseline_path, line.number, "start >= end");
      session.baseline_intervals.push_back(iv);
    }
  }
  return session;
}

void write_session(const Session& session, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw DataError("cannot create " + directory.string() + ": " + ec.message());

  const std::pair<const char*, ChannelKind> singles[] = {{"BVP.csv", ChannelKind::BVP},
                                                         {"EDA.csv", ChannelKind::EDA},
                                                         {"TEMP.csv", ChannelKind::TEMP},
                                                         {"HR.csv", ChannelKind::HR}};
  for (const auto& [name, kind] : singles) {
    const ChannelRecording* recs[] = {&session.channel(kind)};
    write_channel_file(directory / name, recs);
  }
  const ChannelRecording* acc[] = {&session.channel(ChannelKind::ACC_X), &session.channel(ChannelKind::ACC_Y),
                                   &session.channel(ChannelKind::ACC_Z)};
  if (acc[0]->samples.size() != acc[1]->samples.size() || acc[0]->samples.size() != acc[2]->samples.size()) {
    throw DataError("ACC axes have different lengths");
  }
  write_channel_file(directory / "ACC.csv", acc);

  std::string tags;
  for (double t : session.tags) {
    append_number(tags, t);
    tags.push_back('\n');
  }
  write_text(directory / "tags.csv", tags);

  if (!session.baseline_intervals.empty()) {
    std::string text;
    for (const auto& iv : session.baseline_intervals) {
      append_number(text, iv.start);
      text.push_back(',');
      append_number(text, iv.end);
      text.push_back(',');
      text.append(to_string(iv.label));
      text.push_back('\n');
    }
    write_text(directory / "baseline.csv", text);
  }

  nlohmann::json info = {{"subject_id", session.subject_id}, {"week_index", session.week_index}};
  write_text(directory / "session.json", info.dump(2) + "\n");
}

}  // namespace stresscast
