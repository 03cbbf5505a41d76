#include "gazemap/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gazemap/error.hpp"

namespace gazemap {

std::int64_t FrameTimeline::frame_period_us() const { return std::llround(1e6 / fps); }

void check_timeline(const FrameTimeline& tl) {
  if (!(tl.fps > 0.0) || !std::isfinite(tl.fps)) throw ContractError("fps must be positive");
  if (tl.frame_count < 0) throw ContractError("frame_count must be >= 0");
  if (tl.resolution.width <= 0 || tl.resolution.height <= 0) {
    throw ContractError("resolution must be positive");
  }
}

void check_policy(const AlignmentPolicy& policy) {
  if (policy.max_staleness_us <= 0) throw ContractError("max_staleness_us must be > 0");
}

std::int64_t frame_timestamp(const FrameTimeline& tl, std::int64_t index) {
  if (index < 0 || index >= tl.frame_count) {
    throw ContractError("frame index " + std::to_string(index) + " outside [0, " +
                        std::to_string(tl.frame_count) + ")");
  }
  return tl.t0_us + std::llround(static_cast<double>(index) * 1e6 / tl.fps);
}

std::optional<TrackPoint> gaze_at_frame(std::span<const TrackPoint> track, std::int64_t frame_ts,
                                        const AlignmentPolicy& policy) {
  const auto after = std::lower_bound(track.begin(), track.end(), frame_ts,
                                      [](const TrackPoint& p, std::int64_t t) { return p.ts_us < t; });
  const TrackPoint* best = nullptr;
  std::int64_t best_dt = 0;
  if (after != track.begin()) {
    // first sample of the run of equal timestamps preceding frame_ts
    auto before = std::prev(after);
    const std::int64_t ts = before->ts_us;
    while (before != track.begin() && std::prev(before)->ts_us == ts) --before;
    best = &*before;
    best_dt = frame_ts - ts;
  }
  if (after != track.end()) {
    const std::int64_t dt = after->ts_us - frame_ts;
    if (!best || dt < best_dt) {
      best = &*after;
      best_dt = dt;
    }
  }
  if (!best || best_dt > policy.max_staleness_us) return std::nullopt;
  return *best;
}

Pixel to_pixel(double x, double y, Resolution res) {
  auto axis = [](double v, int extent) {
    const double scaled = std::floor(v * extent);
    if (!(scaled >= 0.0)) return 0;
    if (scaled > extent - 1) return extent - 1;
    return static_cast<int>(scaled);
  };
  return {axis(x, res.width), axis(y, res.height)};
}

FrameTimeline parse_video_meta(const std::string& text) {
  using nlohmann::json;
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw FormatError("video metadata is not a valid document");
  for (const char* key : {"fps", "frame_count", "t0_us", "resolution"}) {
    if (!doc.contains(key)) throw FormatError(std::string("video metadata: missing key '") + key + "'");
  }
  FrameTimeline tl;
  if (!doc["fps"].is_number()) throw FormatError("video metadata: 'fps' must be a number");
  if (!doc["frame_count"].is_number_integer()) {
    throw FormatError("video metadata: 'frame_count' must be an integer");
  }
  if (!doc["t0_us"].is_number_integer()) throw FormatError("video metadata: 't0_us' must be an integer");
  const json& res = doc["resolution"];
  if (!res.is_array() || res.size() != 2 || !res[0].is_number_integer() || !res[1].is_number_integer()) {
    throw FormatError("video metadata: 'resolution' must be [w,h]");
  }
  tl.fps = doc["fps"].get<double>();
  tl.frame_count = doc["frame_count"].get<std::int64_t>();
  tl.t0_us = doc["t0_us"].get<std::int64_t>();
  tl.resolution = {res[0].get<int>(), res[1].get<int>()};
  try {
    check_timeline(tl);
  } catch (const ContractError& e) {
    throw FormatError(std::string("video metadata: ") + e.what());
  }
  return tl;
}

FrameTimeline load_video_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open video metadata '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_video_meta(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string serialize_video_meta(const FrameTimeline& tl) {
  nlohmann::ordered_json doc;
  doc["fps"] = tl.fps;
  doc["frame_count"] = tl.frame_count;
  doc["t0_us"] = tl.t0_us;
  doc["resolution"] = {tl.resolution.width, tl.resolution.height};
  return doc.dump(2) + "\n";
}

}  // namespace gazemap
