#include "gazemap/gaze_ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "gazemap/error.hpp"

namespace gazemap {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kSampleKindCount> kKindNames = {"pc", "pd", "gp", "gp3",
                                                                      "gd"};

struct LineError {
  std::string message;
};

std::optional<double> as_number(const json& value) {
  if (!value.is_number()) return std::nullopt;
  return value.get<double>();
}

// Returns an error message, or fills `out`.
std::optional<std::string> decode_record(const json& record, GazeSample& out) {
  if (!record.is_object()) return "record is not an object";

  const auto ts = record.find("ts");
  if (ts == record.end()) return "missing key 'ts'";
  if (ts->is_number_float()) return "timestamp must be integer microseconds";
  if (ts->is_number_unsigned()) {
    out.ts_us = static_cast<std::int64_t>(ts->get<std::uint64_t>());
  } else if (ts->is_number_integer()) {
    out.ts_us = ts->get<std::int64_t>();
  } else {
    return "timestamp is not a number";
  }
  if (out.ts_us < 0) return "negative timestamp";

  const auto type = record.find("type");
  if (type == record.end() || !type->is_string()) return "missing or non-string 'type'";
  const auto kind = parse_sample_kind(type->get_ref<const std::string&>());
  if (!kind) return "unknown record type '" + type->get<std::string>() + "'";
  out.kind = *kind;

  const auto status = record.find("s");
  if (status == record.end() || !status->is_number_integer()) return "missing or non-integer 's'";
  out.valid = status->get<std::int64_t>() == 0;

  out.eye = Eye::combined;
  if (const auto eye = record.find("eye"); eye != record.end()) {
    if (*eye == "left") {
      out.eye = Eye::left;
    } else if (*eye == "right") {
      out.eye = Eye::right;
    } else {
      return "bad 'eye' value";
    }
  }

  const auto payload = record.find(std::string(to_string(out.kind)));
  if (payload == record.end()) return "missing value key '" + std::string(to_string(out.kind)) + "'";

  out.values.clear();
  if (out.kind == SampleKind::pd) {
    const auto v = as_number(*payload);
    if (!v) return "pd value is not a number";
    out.values.push_back(*v);
  } else {
    if (!payload->is_array()) return "value is not an array";
    for (const auto& item : *payload) {
      const auto v = as_number(item);
      if (!v) return "non-numeric array entry";
      out.values.push_back(*v);
    }
    const std::size_t n = out.values.size();
    switch (out.kind) {
      case SampleKind::gp:
        if (n != 2) return "gp needs exactly 2 values";
        break;
      case SampleKind::gp3:
      case SampleKind::gd:
        if (n != 3) return std::string(to_string(out.kind)) + " needs exactly 3 values";
        break;
      case SampleKind::pc:
        if (n < 2 || n > 3) return "pc needs 2 or 3 values";
        break;
      case SampleKind::pd:
        break;
    }
  }

  if (out.kind == SampleKind::gp) {
    for (double v : out.values) {
      if (v < 0.0 || v > 1.0) out.valid = false;
    }
  }
  return std::nullopt;
}

// Per timestamp: a combined gp row wins; otherwise left/right rows are
// averaged into one combined sample.
std::vector<GazeSample> merge_eye_rows(std::vector<GazeSample> samples) {
  std::map<std::int64_t, std::vector<GazeSample>> per_eye;
  std::vector<std::int64_t> combined_ts;
  std::vector<GazeSample> out;
  out.reserve(samples.size());
  for (auto& s : samples) {
    if (s.kind != SampleKind::gp) {
      out.push_back(std::move(s));
    } else if (s.eye == Eye::combined) {
      combined_ts.push_back(s.ts_us);
      out.push_back(std::move(s));
    } else {
      per_eye[s.ts_us].push_back(std::move(s));
    }
  }
  if (per_eye.empty()) return out;

  std::sort(combined_ts.begin(), combined_ts.end());
  for (auto& [ts, rows] : per_eye) {
    if (std::binary_search(combined_ts.begin(), combined_ts.end(), ts)) continue;
    std::vector<const GazeSample*> use;
    for (const auto& r : rows) {
      if (r.valid) use.push_back(&r);
    }
    const bool valid = !use.empty();
    if (use.empty()) {
      for (const auto& r : rows) use.push_back(&r);
    }
    GazeSample merged;
    merged.ts_us = ts;
    merged.kind = SampleKind::gp;
    merged.eye = Eye::combined;
    merged.values = {0.0, 0.0};
    for (const auto* r : use) {
      merged.values[0] += r->values[0];
      merged.values[1] += r->values[1];
    }
    merged.values[0] /= static_cast<double>(use.size());
    merged.values[1] /= static_cast<double>(use.size());
    merged.valid = valid;
    out.push_back(std::move(merged));
  }
  return out;
}

}  // namespace

std::string_view to_string(SampleKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<SampleKind> parse_sample_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<SampleKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Eye eye) {
  switch (eye) {
    case Eye::left:
      return "left";
    case Eye::right:
      return "right";
    case Eye::combined:
      break;
  }
  return "combined";
}

bool sample_less(const GazeSample& a, const GazeSample& b) {
  return std::tie(a.ts_us, a.kind, a.eye, a.values, a.valid) <
         std::tie(b.ts_us, b.kind, b.eye, b.values, b.valid);
}

GazeStream::GazeStream(std::vector<GazeSample> samples, double nominal_rate_hz)
    : samples_(std::move(samples)), nominal_rate_hz_(nominal_rate_hz) {
  std::sort(samples_.begin(), samples_.end(), sample_less);
}

std::int64_t GazeStream::duration_us() const {
  if (samples_.empty()) return 0;
  return samples_.back().ts_us - samples_.front().ts_us;
}

ParseResult parse_gaze_stream(std::string_view text, double nominal_rate_hz) {
  ParseResult result;
  std::vector<GazeSample> samples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    if (line[first] == '#') continue;
    ++result.record_lines;

    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      result.issues.push_back({line_no, "not a valid record"});
      continue;
    }
    GazeSample sample;
    if (auto err = decode_record(record, sample)) {
      result.issues.push_back({line_no, std::move(*err)});
      continue;
    }
    samples.push_back(std::move(sample));
  }

  if (samples.empty()) throw FormatError("gaze log: no records");
  if (result.issues.size() * 2 > result.record_lines) {
    throw FormatError("gaze log: " + std::to_string(result.issues.size()) + " of " +
                      std::to_string(result.record_lines) +
                      " records malformed; first at line " +
                      std::to_string(result.issues.front().line) + ": " +
                      result.issues.front().message);
  }
  result.stream = GazeStream(merge_eye_rows(std::move(samples)), nominal_rate_hz);
  return result;
}

ParseResult load_gaze_stream(const std::string& path, double nominal_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open gaze log '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_gaze_stream(buf.str(), nominal_rate_hz);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string serialize_sample(const GazeSample& sample) {
  nlohmann::ordered_json record;
  record["ts"] = sample.ts_us;
  record["type"] = to_string(sample.kind);
  if (sample.eye != Eye::combined) record["eye"] = to_string(sample.eye);
  const std::string key(to_string(sample.kind));
  if (sample.kind == SampleKind::pd && sample.values.size() == 1) {
    record[key] = sample.values.front();
  } else {
    record[key] = sample.values;
  }
  // gp rows that are invalid only because of their range keep s=0; the
  // parser re-derives the flag from the values.
  const bool out_of_range =
      sample.kind == SampleKind::gp &&
      std::any_of(sample.values.begin(), sample.values.end(),
                  [](double v) { return v < 0.0 || v > 1.0; });
  record["s"] = (sample.valid || out_of_range) ? 0 : 1;
  return record.dump();
}

std::string serialize_gaze_stream(const GazeStream& stream) {
  std::string out;
  for (const auto& s : stream.samples()) {
    out += serialize_sample(s);
    out += '\n';
  }
  return out;
}

std::vector<TrackPoint> gaze_track(const GazeStream& stream) {
  std::vector<TrackPoint> track;
  for (const auto& s : stream.samples()) {
    if (s.kind == SampleKind::gp && s.valid && s.eye == Eye::combined) {
      track.push_back({s.ts_us, s.values[0], s.values[1]});
    }
  }
  return track;
}

StreamStats stream_stats(const GazeStream& stream) {
  StreamStats stats;
  const double period_us = 1e6 / stream.nominal_rate_hz();
  std::optional<std::int64_t> first_gp;
  std::optional<std::int64_t> prev_gp;
  std::size_t gp_count = 0;
  for (const auto& s : stream.samples()) {
    ++stats.sample_count[static_cast<std::size_t>(s.kind)];
    if (!s.valid) ++stats.invalid_count;
    if (s.kind != SampleKind::gp) continue;
    if (prev_gp && static_cast<double>(s.ts_us - *prev_gp) > 2.0 * period_us) ++stats.gap_count;
    if (!first_gp) first_gp = s.ts_us;
    prev_gp = s.ts_us;
    ++gp_count;
  }
  if (gp_count >= 2 && *prev_gp > *first_gp) {
    stats.measured_rate_hz =
        static_cast<double>(gp_count - 1) * 1e6 / static_cast<double>(*prev_gp - *first_gp);
  }
  return stats;
}

}  // namespace gazemap
