#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazemap/alignment.hpp"
#include "gazemap/fixation_engine.hpp"
#include "gazemap/metrics_report.hpp"
#include "gazemap/pipeline.hpp"

namespace gazemap::sim {

// Continuous image coordinates in pixels (pixel (x, y) covers [x, x+1)).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class Shape { rect, ellipse };

struct Keyframe {
  std::int64_t frame = 0;
  Point center;

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

struct Actor {
  std::string id;
  std::string label;
  Shape shape = Shape::rect;
  double width = 0.0;   // full extent in pixels
  double height = 0.0;
  std::vector<Keyframe> path;  // linear between keyframes, held outside
  double score = 0.95;
  std::map<std::int64_t, double> score_overrides;  // frame -> score
  std::optional<std::pair<std::int64_t, std::int64_t>> visible;  // inclusive frames

  Point center_at(std::int64_t frame) const;
  double score_at(std::int64_t frame) const;
  bool visible_at(std::int64_t frame) const;
  // Rows of column x covered by the shape at `frame` (pixel centers inside),
  // clipped to [0, image_height).
  std::optional<std::pair<int, int>> column_rows(std::int64_t frame, int x, int image_height) const;

  friend bool operator==(const Actor&, const Actor&) = default;
};

enum class SegmentKind { dwell, saccade, dropout };

struct Segment {
  SegmentKind kind = SegmentKind::dwell;
  std::int64_t frames = 0;
  std::string target;           // dwell on an actor (by id)
  std::optional<Point> point;   // dwell on a fixed point
  std::optional<Point> from;    // saccade; defaults to the previous gaze point
  std::optional<Point> to;      // saccade; defaults to the next dwell start

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  FrameTimeline timeline;
  double jitter_px = 0.0;  // uniform per-sample jitter on dwell samples
  std::map<std::string, std::string> classes;
  std::vector<Actor> actors;
  std::vector<Segment> gaze_script;
  PipelineConfig config;  // thresholds the ground truth is computed under

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

ScenarioSpec parse_scenario(const nlohmann::json& doc);
ScenarioSpec load_scenario(const std::string& path);
nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec);

struct GroundTruth {
  std::vector<std::optional<Pixel>> gaze_px;  // per frame
  std::vector<Target> targets;                // per frame
  std::vector<Fixation> fixations;            // sorted by first frame
  TrialMetrics metrics;
};

nlohmann::ordered_json ground_truth_to_json(const GroundTruth& gt);

struct ScenarioOutput {
  std::string gaze_log;
  std::string mask_file;
  std::string meta_file;
  GroundTruth truth;
  std::size_t gaze_records = 0;
};

// Throws FormatError when the spec is inconsistent or when its gaze script
// could not be scored exactly (see README: scenario constraints).
ScenarioOutput generate(const ScenarioSpec& spec);

// Writes gaze.jsonl, masks.json, meta.json and ground_truth.json into `dir`.
void write_scenario(const ScenarioOutput& out, const std::string& dir);

struct OracleResult {
  TrialRecord trial;
  TrialMetrics metrics;
};

// Brute-force reference: decodes every mask to a full bitmap, scans every
// gaze sample per frame and looks for runs naively. Shares only the file
// parsers with the main pipeline.
OracleResult oracle_map(const std::string& gaze_log, const std::string& mask_file,
                        const std::string& meta_file, const PipelineConfig& cfg);

// A scripted trial in the layout of a head-mounted recording: AOI dwells and
// background dwells of `dwell_frames` each, separated by saccades, over a
// 1920x1080 25 fps timeline.
struct TrialPlan {
  std::uint64_t seed = 1;
  std::int64_t frame_count = 703;
  std::int64_t dwell_frames = 7;
  std::map<std::string, int> aoi_dwells;  // label -> number of dwells; labels H1..H3
  int off_target_dwells = 0;
  double jitter_px = 2.0;
};

ScenarioSpec plan_trial(const TrialPlan& plan);

// Random but valid scenario for differential testing.
ScenarioSpec random_scenario(std::uint64_t seed);

}  // namespace gazemap::sim
