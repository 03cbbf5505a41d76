#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gazemap {

enum class SampleKind { pc, pd, gp, gp3, gd };
inline constexpr std::size_t kSampleKindCount = 5;

// `combined` is the absence of an `eye` key in the log.
enum class Eye { combined, left, right };

std::string_view to_string(SampleKind kind);
std::optional<SampleKind> parse_sample_kind(std::string_view text);
std::string_view to_string(Eye eye);

struct GazeSample {
  std::int64_t ts_us = 0;
  SampleKind kind = SampleKind::gp;
  Eye eye = Eye::combined;
  std::vector<double> values;
  bool valid = true;

  friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

// Total order used to sort a stream; equal timestamps are ordered by the
// remaining fields so parsing does not depend on input line order.
bool sample_less(const GazeSample& a, const GazeSample& b);

class GazeStream {
 public:
  GazeStream() = default;
  // Sorts `samples` with sample_less.
  explicit GazeStream(std::vector<GazeSample> samples, double nominal_rate_hz = 100.0);

  const std::vector<GazeSample>& samples() const { return samples_; }
  double nominal_rate_hz() const { return nominal_rate_hz_; }
  std::int64_t duration_us() const;
  bool empty() const { return samples_.empty(); }

  friend bool operator==(const GazeStream&, const GazeStream&) = default;

 private:
  std::vector<GazeSample> samples_;
  double nominal_rate_hz_ = 100.0;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  GazeStream stream;
  std::vector<ParseIssue> issues;
  std::size_t record_lines = 0;  // non-blank, non-comment lines seen
};

// Parses a newline-delimited gaze log. Malformed lines are skipped and
// recorded in `issues`. Throws FormatError when nothing parses or when more
// than half of the record lines are malformed.
ParseResult parse_gaze_stream(std::string_view text, double nominal_rate_hz = 100.0);
ParseResult load_gaze_stream(const std::string& path, double nominal_rate_hz = 100.0);

// One record per line, keys in the order ts, type, eye, <value>, s.
std::string serialize_gaze_stream(const GazeStream& stream);
std::string serialize_sample(const GazeSample& sample);

struct TrackPoint {
  std::int64_t ts_us = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

// Valid combined gp samples only, in stream order.
std::vector<TrackPoint> gaze_track(const GazeStream& stream);

struct StreamStats {
  std::array<std::size_t, kSampleKindCount> sample_count{};
  std::size_t gap_count = 0;
  std::size_t invalid_count = 0;
  double measured_rate_hz = 0.0;

  std::size_t count(SampleKind kind) const {
    return sample_count[static_cast<std::size_t>(kind)];
  }
};

StreamStats stream_stats(const GazeStream& stream);

}  // namespace gazemap
