#pragma once

#include <string>

#include <json.hpp>

#include "gazemap/alignment.hpp"
#include "gazemap/fixation_engine.hpp"
#include "gazemap/gaze_ingest.hpp"
#include "gazemap/mask_store.hpp"
#include "gazemap/metrics_report.hpp"

namespace gazemap {

struct PipelineConfig {
  double score_threshold = kDefaultScoreThreshold;
  TieBreak tie_break = TieBreak::score_area_id;
  RunConfig run;
  IdtConfig idt;
  int dilation_radius = 0;
  AlignmentPolicy alignment;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Throws ConfigError when any value is outside its module's range.
void check_config(const PipelineConfig& cfg);

// Keys: score_threshold, tie_break, min_consecutive, gap_tolerance,
// duration_convention, dispersion_px, min_duration_ms, dilation_radius,
// max_staleness_us. Missing keys keep their defaults; unknown keys throw
// ConfigError.
PipelineConfig parse_config(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

// Gaze track + masks + timeline -> fixations. The mask set must already be
// validated.
TrialRecord map_trial(const GazeStream& gaze, const MaskSet& masks, const FrameTimeline& tl,
                      const PipelineConfig& cfg);

}  // namespace gazemap
