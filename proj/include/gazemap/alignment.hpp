#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "gazemap/gaze_ingest.hpp"
#include "gazemap/mask_store.hpp"

namespace gazemap {

// Video frame clock expressed in the gaze clock. t0_us is the gaze timestamp
// of frame 0; it is never estimated, only supplied.
struct FrameTimeline {
  double fps = 25.0;
  std::int64_t frame_count = 0;
  std::int64_t t0_us = 0;
  Resolution resolution{1920, 1080};

  // round(1e6 / fps)
  std::int64_t frame_period_us() const;

  friend bool operator==(const FrameTimeline&, const FrameTimeline&) = default;
};

struct AlignmentPolicy {
  std::int64_t max_staleness_us = 20000;

  friend bool operator==(const AlignmentPolicy&, const AlignmentPolicy&) = default;
};

// Throws ContractError for fps <= 0, negative frame_count or a non-positive
// resolution.
void check_timeline(const FrameTimeline& tl);
void check_policy(const AlignmentPolicy& policy);

// t0 + round(i * 1e6 / fps). Throws ContractError if i is out of range.
std::int64_t frame_timestamp(const FrameTimeline& tl, std::int64_t index);

// Nearest track point to frame_ts (earlier one on ties) if it is within
// max_staleness_us. `track` must be sorted by ts_us.
std::optional<TrackPoint> gaze_at_frame(std::span<const TrackPoint> track, std::int64_t frame_ts,
                                        const AlignmentPolicy& policy);

// Normalized gaze to pixel: floor(x * w), floor(y * h), clamped to the image.
Pixel to_pixel(double x, double y, Resolution res);

// Video metadata document: {fps, frame_count, t0_us, resolution: [w, h]}.
FrameTimeline parse_video_meta(const std::string& text);
FrameTimeline load_video_meta(const std::string& path);
std::string serialize_video_meta(const FrameTimeline& tl);

}  // namespace gazemap
