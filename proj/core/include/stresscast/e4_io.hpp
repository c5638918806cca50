#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stresscast/common.hpp"

namespace stresscast {

enum class ChannelKind { BVP, EDA, TEMP, HR, ACC_X, ACC_Y, ACC_Z };

inline constexpr ChannelKind kAllChannelKinds[] = {
    ChannelKind::BVP,   ChannelKind::EDA,   ChannelKind::TEMP, ChannelKind::HR,
    ChannelKind::ACC_X, ChannelKind::ACC_Y, ChannelKind::ACC_Z};

std::string_view to_string(ChannelKind kind);

/// Sampling rate the E4 wristband uses for each channel.
double canonical_rate(ChannelKind kind);

struct ChannelRecording {
  ChannelKind kind = ChannelKind::BVP;
  double start_time = 0.0;  // unix seconds
  double sample_rate = 0.0;
  std::vector<double> samples;

  /// One past the time of the last sample.
  double end_time() const { return start_time + static_cast<double>(samples.size()) / sample_rate; }

  friend bool operator==(const ChannelRecording&, const ChannelRecording&) = default;
};

enum class BaselineLabel { Dance, Relax };

std::string_view to_string(BaselineLabel label);

struct BaselineInterval {
  double start = 0.0;
  double end = 0.0;
  BaselineLabel label = BaselineLabel::Relax;

  friend bool operator==(const BaselineInterval&, const BaselineInterval&) = default;
};

struct Session {
  std::string subject_id;
  int week_index = 1;
  std::map<ChannelKind, ChannelRecording> channels;
  std::vector<double> tags;  // unix seconds, strictly increasing
  std::vector<BaselineInterval> baseline_intervals;

  const ChannelRecording& channel(ChannelKind kind) const;

  /// Intersection of all channels' recorded spans, [start, end).
  std::pair<double, double> common_span() const;
};

/// Checks every Session invariant; throws DataError naming the violation.
void validate_session(const Session& session);

/// Parse or I/O problem tied to a file location. line is 1-based, 0 when the
/// problem concerns the whole file.
class E4FormatError : public DataError {
 public:
  E4FormatError(std::filesystem::path file, std::size_t line, const std::string& what);

  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

/// Reads an Empatica E4 export directory (BVP.csv, EDA.csv, TEMP.csv, HR.csv,
/// ACC.csv, tags.csv). Optional session.json supplies subject/week; optional
/// baseline.csv holds "start,end,label" rows for in-clinic dance/relax blocks.
Session read_session(const std::filesystem::path& directory);

/// Writes the same layout read_session accepts. Creates the directory.
void write_session(const Session& session, const std::filesystem::path& directory);

}  // namespace stresscast
