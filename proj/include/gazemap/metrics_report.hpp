#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazemap/fixation_engine.hpp"

namespace gazemap {

struct TrialMetrics {
  double trial_duration_ms = 0.0;
  std::map<std::string, double> dwell_ms;  // AOI label -> dwell time
  std::int64_t fixation_count = 0;
  std::int64_t on_target_count = 0;
  double tfr_exact = 0.0;
  double tfr_reported = 0.0;  // truncated to two decimals

  friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

// Sum of durations of the fixations on `aoi`, in milliseconds.
double dwell_time(std::span<const Fixation> fixations, const std::string& aoi);

// floor(on_target * 100 / total) / 100, computed in integers.
double truncate_ratio(std::int64_t on_target, std::int64_t total);

// `aoi_labels` are reported even when never fixated (dwell 0).
TrialMetrics compute_metrics(const TrialRecord& trial, std::span<const std::string> aoi_labels = {});

// Label-based comparison of system output and ground truth at sampled frames.
struct LabeledPoint {
  std::int64_t frame = 0;
  std::optional<Pixel> px;
  std::string label;
  std::string remark;
};

struct ValidationRow {
  std::int64_t frame = 0;
  std::optional<Pixel> sys_px;
  std::string sys_label;
  std::optional<Pixel> gt_px;
  std::string gt_label;
  bool match = false;
  std::string remark;
};

struct PixelDeviation {
  std::size_t compared = 0;   // rows where both sides carry a pixel
  std::size_t displaced = 0;  // rows with a nonzero offset
  double mean_px = 0.0;       // Euclidean
  double max_px = 0.0;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;  // sorted by frame
  std::size_t matches = 0;
  double accuracy = 0.0;
  PixelDeviation deviation;
};

inline constexpr std::string_view kOffTargetLabel = "Off-target";
inline constexpr std::string_view kNoGazeLabel = "No-gaze";

// Throws FormatError if the frame key sets differ or contain duplicates.
ValidationReport validate(std::span<const LabeledPoint> sys_rows, std::span<const LabeledPoint> gt_rows);

// Rows of a ground-truth (or system) label file: an array of
// {frame, px: [x, y] | null, label, remark?}, optionally wrapped in {"rows": [...]}.
std::vector<LabeledPoint> parse_labeled_points(const nlohmann::json& doc);

// Shortest decimal text; integral values print without a fraction.
std::string format_number(double value);

struct TrialReport {
  nlohmann::ordered_json config;
  FrameTimeline timeline;
  TrialMetrics metrics;
  std::vector<Fixation> fixations;
  std::vector<FrameHit> frames;
};

nlohmann::ordered_json metrics_to_json(const TrialMetrics& m);
TrialMetrics metrics_from_json(const nlohmann::json& j);

nlohmann::ordered_json trial_report_to_json(const TrialRecord& trial, const TrialMetrics& metrics,
                                            const nlohmann::ordered_json& config);
std::string serialize_trial_report(const TrialRecord& trial, const TrialMetrics& metrics,
                                   const nlohmann::ordered_json& config);
TrialReport parse_trial_report(const nlohmann::json& doc);

// System rows at every frame of a report: aoi label, "Off-target" or "No-gaze".
std::vector<LabeledPoint> report_points(const TrialReport& report);

struct NamedMetrics {
  std::string name;
  TrialMetrics metrics;
};

// Header: trial,trial_duration_ms,DT_<label>_ms...,FC,TFR; LF line endings.
std::string metrics_table(std::span<const NamedMetrics> trials);

nlohmann::ordered_json validation_to_json(const ValidationReport& report);
std::string validation_table(const ValidationReport& report);

}  // namespace gazemap
