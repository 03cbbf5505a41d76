#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazemap/alignment.hpp"
#include "gazemap/gaze_ingest.hpp"
#include "gazemap/mask_store.hpp"

namespace gazemap {

enum class TargetKind { aoi, off_target, no_gaze };

struct Target {
  TargetKind kind = TargetKind::no_gaze;
  std::string label;  // set only for aoi

  static Target aoi(std::string label) { return {TargetKind::aoi, std::move(label)}; }
  static Target off_target() { return {TargetKind::off_target, {}}; }
  static Target no_gaze() { return {TargetKind::no_gaze, {}}; }

  bool is_aoi() const { return kind == TargetKind::aoi; }
  friend bool operator==(const Target&, const Target&) = default;
  friend auto operator<=>(const Target&, const Target&) = default;
};

std::string_view to_string(TargetKind kind);

struct FrameHit {
  std::int64_t frame_index = 0;
  std::optional<Pixel> gaze_px;  // absent iff target is no_gaze
  Target target;

  friend bool operator==(const FrameHit&, const FrameHit&) = default;
};

// inclusive: (last - first + 1) frame periods. endpoint_difference: time
// between the first and last frame stamps of the run.
enum class DurationConvention { inclusive, endpoint_difference };

std::string_view to_string(DurationConvention convention);
std::optional<DurationConvention> parse_duration_convention(std::string_view text);

struct RunConfig {
  int min_consecutive = 7;
  int gap_tolerance_frames = 0;  // no_gaze frames a run may bridge
  DurationConvention duration = DurationConvention::inclusive;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct IdtConfig {
  double dispersion_px = 50.0;
  double min_duration_ms = 280.0;

  friend bool operator==(const IdtConfig&, const IdtConfig&) = default;
};

void check_run_config(const RunConfig& cfg);
void check_idt_config(const IdtConfig& cfg);

struct Fixation {
  Target target;  // aoi or off_target
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
  std::int64_t duration_us = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;

  std::int64_t frame_span() const { return last_frame - first_frame + 1; }
  friend bool operator==(const Fixation&, const Fixation&) = default;
};

// Start/end stamps and duration of a fixation covering frames first..last.
struct FixationTiming {
  std::int64_t start_us;
  std::int64_t end_us;
  std::int64_t duration_us;
};
FixationTiming fixation_timing(const FrameTimeline& tl, std::int64_t first, std::int64_t last,
                               DurationConvention convention);

// One FrameHit per frame: nearest gaze sample -> pixel -> mask hit test.
std::vector<FrameHit> classify_frames(const FrameTimeline& tl, std::span<const TrackPoint> track,
                                      const MaskSet& masks, double score_threshold,
                                      TieBreak tie_break, const AlignmentPolicy& policy);

// One fixation per maximal run of the same AOI label lasting at least
// min_consecutive frames. `hits` must be indexed 0..n-1.
std::vector<Fixation> detect_aoi_fixations(std::span<const FrameHit> hits, const RunConfig& cfg,
                                           const FrameTimeline& tl);

// Dispersion-threshold identification over the frames that have gaze and are
// not part of any AOI fixation. Windows never cross a no_gaze frame or an AOI
// fixation.
std::vector<Fixation> detect_offtarget_fixations(std::span<const FrameHit> hits,
                                                 std::span<const Fixation> aoi_fixations,
                                                 const IdtConfig& cfg, const FrameTimeline& tl,
                                                 DurationConvention convention);

struct TrialRecord {
  FrameTimeline timeline;
  std::vector<FrameHit> hits;
  std::vector<Fixation> fixations;  // sorted by start_us
  std::int64_t trial_duration_us = 0;
};

// Merges both fixation lists in time order. Throws InvariantError if two
// fixations share a frame.
TrialRecord build_trial(std::vector<FrameHit> hits, std::span<const Fixation> aoi_fixations,
                        std::span<const Fixation> off_fixations, const FrameTimeline& tl);

}  // namespace gazemap
