#include "gazemap/metrics_report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "gazemap/error.hpp"

namespace gazemap {

using nlohmann::json;
using nlohmann::ordered_json;

double dwell_time(std::span<const Fixation> fixations, const std::string& aoi) {
  std::int64_t total_us = 0;
  for (const auto& f : fixations) {
    if (f.target.is_aoi() && f.target.label == aoi) total_us += f.end_us - f.start_us;
  }
  return static_cast<double>(total_us) / 1000.0;
}

double truncate_ratio(std::int64_t on_target, std::int64_t total) {
  if (total <= 0) return 0.0;
  return static_cast<double>(on_target * 100 / total) / 100.0;
}

TrialMetrics compute_metrics(const TrialRecord& trial, std::span<const std::string> aoi_labels) {
  TrialMetrics m;
  m.trial_duration_ms = static_cast<double>(trial.trial_duration_us) / 1000.0;
  std::set<std::string> labels(aoi_labels.begin(), aoi_labels.end());
  for (const auto& f : trial.fixations) {
    ++m.fixation_count;
    if (f.target.is_aoi()) {
      ++m.on_target_count;
      labels.insert(f.target.label);
    }
  }
  for (const auto& label : labels) m.dwell_ms[label] = dwell_time(trial.fixations, label);
  if (m.fixation_count > 0) {
    m.tfr_exact = static_cast<double>(m.on_target_count) / static_cast<double>(m.fixation_count);
  }
  m.tfr_reported = truncate_ratio(m.on_target_count, m.fixation_count);
  return m;
}

namespace {

std::map<std::int64_t, const LabeledPoint*> key_rows(std::span<const LabeledPoint> rows, const char* side) {
  std::map<std::int64_t, const LabeledPoint*> keyed;
  for (const auto& r : rows) {
    if (!keyed.emplace(r.frame, &r).second) {
      throw FormatError(std::string(side) + " rows: duplicate frame " + std::to_string(r.frame));
    }
  }
  return keyed;
}

}  // namespace

ValidationReport validate(std::span<const LabeledPoint> sys_rows, std::span<const LabeledPoint> gt_rows) {
  const auto sys = key_rows(sys_rows, "system");
  const auto gt = key_rows(gt_rows, "ground-truth");
  for (const auto& [frame, row] : gt) {
    if (!sys.contains(frame)) throw FormatError("frame " + std::to_string(frame) + " missing from system rows");
  }
  for (const auto& [frame, row] : sys) {
    if (!gt.contains(frame)) throw FormatError("frame " + std::to_string(frame) + " missing from ground truth");
  }

  ValidationReport report;
  double dev_sum = 0.0;
  for (const auto& [frame, g] : gt) {
    const LabeledPoint& s = *sys.at(frame);
    ValidationRow row;
    row.frame = frame;
    row.sys_px = s.px;
    row.sys_label = s.label;
    row.gt_px = g->px;
    row.gt_label = g->label;
    row.match = s.label == g->label;
    row.remark = !g->remark.empty() ? g->remark : (row.match ? "" : "label mismatch");
    if (row.match) ++report.matches;
    if (s.px && g->px) {
      const double dx = s.px->x - g->px->x;
      const double dy = s.px->y - g->px->y;
      const double d = std::hypot(dx, dy);
      ++report.deviation.compared;
      if (d > 0.0) ++report.deviation.displaced;
      dev_sum += d;
      report.deviation.max_px = std::max(report.deviation.max_px, d);
    }
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    report.accuracy = static_cast<double>(report.matches) / static_cast<double>(report.rows.size());
  }
  if (report.deviation.compared > 0) {
    report.deviation.mean_px = dev_sum / static_cast<double>(report.deviation.compared);
  }
  return report;
}

namespace {

std::optional<Pixel> parse_px(const json& j, const std::string& where) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw FormatError(where + ": 'px' must be [x,y] integers or null");
  }
  return Pixel{j[0].get<int>(), j[1].get<int>()};
}

json px_json(const std::optional<Pixel>& px) {
  if (!px) return nullptr;
  return json::array({px->x, px->y});
}

}  // namespace

std::vector<LabeledPoint> parse_labeled_points(const json& doc) {
  const json* rows = &doc;
  if (doc.is_object()) {
    if (!doc.contains("rows")) throw FormatError("label file: expected an array or {\"rows\": [...]}");
    rows = &doc["rows"];
  }
  if (!rows->is_array()) throw FormatError("label file: rows must be an array");
  std::vector<LabeledPoint> out;
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const json& r = (*rows)[i];
    const std::string where = "row " + std::to_string(i);
    if (!r.is_object()) throw FormatError(where + ": expected an object");
    if (!r.contains("frame") || !r["frame"].is_number_integer()) {
      throw FormatError(where + ": 'frame' must be an integer");
    }
    if (!r.contains("label") || !r["label"].is_string()) throw FormatError(where + ": 'label' must be a string");
    LabeledPoint p;
    p.frame = r["frame"].get<std::int64_t>();
    p.label = r["label"].get<std::string>();
    if (r.contains("px")) p.px = parse_px(r["px"], where);
    if (r.contains("remark")) {
      if (!r["remark"].is_string()) throw FormatError(where + ": 'remark' must be a string");
      p.remark = r["remark"].get<std::string>();
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 9.0e15) {
    return std::to_string(static_cast<std::int64_t>(value));
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

// Integral doubles are written as JSON integers.
ordered_json number_json(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 9.0e15) {
    return static_cast<std::int64_t>(value);
  }
  return value;
}

double get_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw FormatError(std::string("report: '") + key + "' must be a number");
  }
  return j[key].get<double>();
}

std::int64_t get_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw FormatError(std::string("report: '") + key + "' must be an integer");
  }
  return j[key].get<std::int64_t>();
}

Target parse_target(const json& j, const std::string& where) {
  if (!j.contains("target") || !j["target"].is_string()) throw FormatError(where + ": missing 'target'");
  const auto kind = j["target"].get<std::string>();
  if (kind == "aoi") {
    if (!j.contains("label") || !j["label"].is_string()) throw FormatError(where + ": aoi target without label");
    return Target::aoi(j["label"].get<std::string>());
  }
  if (kind == "off_target") return Target::off_target();
  if (kind == "no_gaze") return Target::no_gaze();
  throw FormatError(where + ": unknown target '" + kind + "'");
}

void put_target(ordered_json& j, const Target& t) {
  j["target"] = to_string(t.kind);
  if (t.is_aoi()) j["label"] = t.label;
}

}  // namespace

ordered_json metrics_to_json(const TrialMetrics& m) {
  ordered_json j;
  j["trial_duration_ms"] = number_json(m.trial_duration_ms);
  j["dwell_ms"] = ordered_json::object();
  for (const auto& [label, ms] : m.dwell_ms) j["dwell_ms"][label] = number_json(ms);
  j["fixation_count"] = m.fixation_count;
  j["on_target_count"] = m.on_target_count;
  j["tfr_exact"] = m.tfr_exact;
  j["tfr_reported"] = m.tfr_reported;
  return j;
}

TrialMetrics metrics_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("report: metrics must be an object");
  TrialMetrics m;
  m.trial_duration_ms = get_number(j, "trial_duration_ms");
  if (!j.contains("dwell_ms") || !j["dwell_ms"].is_object()) throw FormatError("report: 'dwell_ms' must be an object");
  for (const auto& [label, v] : j["dwell_ms"].items()) {
    if (!v.is_number()) throw FormatError("report: dwell of '" + label + "' must be a number");
    m.dwell_ms[label] = v.get<double>();
  }
  m.fixation_count = get_int(j, "fixation_count");
  m.on_target_count = get_int(j, "on_target_count");
  m.tfr_exact = get_number(j, "tfr_exact");
  m.tfr_reported = get_number(j, "tfr_reported");
  return m;
}

ordered_json trial_report_to_json(const TrialRecord& trial, const TrialMetrics& metrics,
                                  const ordered_json& config) {
  ordered_json doc;
  doc["config"] = config;
  const FrameTimeline& tl = trial.timeline;
  doc["timeline"] = {{"fps", number_json(tl.fps)},
                     {"frame_count", tl.frame_count},
                     {"t0_us", tl.t0_us},
                     {"resolution", {tl.resolution.width, tl.resolution.height}}};
  const ordered_json flat = metrics_to_json(metrics);
  for (const auto& [key, value] : flat.items()) doc[key] = value;

  doc["fixations"] = ordered_json::array();
  for (const auto& f : trial.fixations) {
    ordered_json fj;
    put_target(fj, f.target);
    fj["first_frame"] = f.first_frame;
    fj["last_frame"] = f.last_frame;
    fj["start_us"] = f.start_us;
    fj["end_us"] = f.end_us;
    fj["duration_us"] = f.duration_us;
    fj["centroid"] = {number_json(f.centroid_x), number_json(f.centroid_y)};
    doc["fixations"].push_back(std::move(fj));
  }
  doc["frames"] = ordered_json::array();
  for (const auto& h : trial.hits) {
    ordered_json hj;
    hj["frame"] = h.frame_index;
    hj["px"] = h.gaze_px ? ordered_json::array({h.gaze_px->x, h.gaze_px->y}) : ordered_json(nullptr);
    put_target(hj, h.target);
    doc["frames"].push_back(std::move(hj));
  }
  return doc;
}

std::string serialize_trial_report(const TrialRecord& trial, const TrialMetrics& metrics,
                                   const ordered_json& config) {
  return trial_report_to_json(trial, metrics, config).dump(1) + "\n";
}

TrialReport parse_trial_report(const json& doc) {
  if (!doc.is_object()) throw FormatError("report: expected an object");
  TrialReport report;
  if (doc.contains("config")) report.config = doc["config"];
  if (doc.contains("timeline")) {
    const json& t = doc["timeline"];
    report.timeline.fps = get_number(t, "fps");
    report.timeline.frame_count = get_int(t, "frame_count");
    report.timeline.t0_us = get_int(t, "t0_us");
    if (!t.contains("resolution") || !t["resolution"].is_array() || t["resolution"].size() != 2) {
      throw FormatError("report: timeline resolution must be [w,h]");
    }
    report.timeline.resolution = {t["resolution"][0].get<int>(), t["resolution"][1].get<int>()};
  }
  report.metrics = metrics_from_json(doc);
  if (doc.contains("fixations")) {
    for (const auto& fj : doc["fixations"]) {
      Fixation f;
      f.target = parse_target(fj, "fixation");
      f.first_frame = get_int(fj, "first_frame");
      f.last_frame = get_int(fj, "last_frame");
      f.start_us = get_int(fj, "start_us");
      f.end_us = get_int(fj, "end_us");
      f.duration_us = get_int(fj, "duration_us");
      if (fj.contains("centroid") && fj["centroid"].is_array() && fj["centroid"].size() == 2) {
        f.centroid_x = fj["centroid"][0].get<double>();
        f.centroid_y = fj["centroid"][1].get<double>();
      }
      report.fixations.push_back(std::move(f));
    }
  }
  if (doc.contains("frames")) {
    for (const auto& hj : doc["frames"]) {
      FrameHit h;
      h.frame_index = get_int(hj, "frame");
      const std::string where = "frame " + std::to_string(h.frame_index);
      h.gaze_px = hj.contains("px") ? parse_px(hj["px"], where) : std::nullopt;
      h.target = parse_target(hj, where);
      report.frames.push_back(std::move(h));
    }
  }
  return report;
}

std::vector<LabeledPoint> report_points(const TrialReport& report) {
  std::vector<LabeledPoint> out;
  out.reserve(report.frames.size());
  for (const auto& h : report.frames) {
    LabeledPoint p;
    p.frame = h.frame_index;
    p.px = h.gaze_px;
    switch (h.target.kind) {
      case TargetKind::aoi:
        p.label = h.target.label;
        break;
      case TargetKind::off_target:
        p.label = kOffTargetLabel;
        break;
      case TargetKind::no_gaze:
        p.label = kNoGazeLabel;
        break;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string metrics_table(std::span<const NamedMetrics> trials) {
  std::set<std::string> labels;
  for (const auto& t : trials) {
    for (const auto& [label, ms] : t.metrics.dwell_ms) labels.insert(label);
  }
  std::string out = "trial,trial_duration_ms";
  for (const auto& label : labels) out += ",DT_" + label + "_ms";
  out += ",FC,TFR\n";
  for (const auto& t : trials) {
    out += t.name;
    out += "," + format_number(t.metrics.trial_duration_ms);
    for (const auto& label : labels) {
      const auto it = t.metrics.dwell_ms.find(label);
      out += "," + format_number(it == t.metrics.dwell_ms.end() ? 0.0 : it->second);
    }
    out += "," + std::to_string(t.metrics.fixation_count);
    // two fixed decimals; the value is already truncated
    const auto hundredths = static_cast<std::int64_t>(std::llround(t.metrics.tfr_reported * 100.0));
    const std::string frac = std::to_string(hundredths % 100);
    out += "," + std::to_string(hundredths / 100) + "." + (frac.size() < 2 ? "0" + frac : frac) + "\n";
  }
  return out;
}

ordered_json validation_to_json(const ValidationReport& report) {
  ordered_json doc;
  doc["total"] = report.rows.size();
  doc["matches"] = report.matches;
  doc["accuracy"] = report.accuracy;
  doc["px_deviation"] = {{"compared", report.deviation.compared},
                         {"displaced", report.deviation.displaced},
                         {"mean_px", report.deviation.mean_px},
                         {"max_px", report.deviation.max_px}};
  doc["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json rj;
    rj["frame"] = r.frame;
    rj["sys_px"] = px_json(r.sys_px);
    rj["sys_label"] = r.sys_label;
    rj["gt_px"] = px_json(r.gt_px);
    rj["gt_label"] = r.gt_label;
    rj["match"] = r.match;
    rj["remark"] = r.remark;
    doc["rows"].push_back(std::move(rj));
  }
  return doc;
}

std::string validation_table(const ValidationReport& report) {
  auto px = [](const std::optional<Pixel>& p) {
    return p ? std::to_string(p->x) + "," + std::to_string(p->y) : std::string(",");
  };
  std::string out = "frame,sys_x,sys_y,sys_label,gt_x,gt_y,gt_label,match,remark\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.frame) + "," + px(r.sys_px) + "," + r.sys_label + "," + px(r.gt_px) + "," +
           r.gt_label + "," + (r.match ? "1" : "0") + "," + r.remark + "\n";
  }
  return out;
}

}  // namespace gazemap
