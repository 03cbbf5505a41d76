#include "gazemap/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "gazemap/error.hpp"

namespace gazemap {

using nlohmann::json;

void check_config(const PipelineConfig& cfg) {
  if (!(cfg.score_threshold >= 0.0 && cfg.score_threshold <= 1.0)) {
    throw ConfigError("score_threshold must be in [0,1]");
  }
  check_run_config(cfg.run);
  check_idt_config(cfg.idt);
  if (cfg.dilation_radius < 0) throw ConfigError("dilation_radius must be >= 0");
  if (cfg.alignment.max_staleness_us <= 0) throw ConfigError("max_staleness_us must be > 0");
}

namespace {

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

int small_int(const json& v, const std::string& key) {
  const auto i = integer(v, key);
  if (i < INT32_MIN || i > INT32_MAX) throw ConfigError("config: '" + key + "' out of range");
  return static_cast<int>(i);
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config: '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

PipelineConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected an object");
  PipelineConfig cfg;
  for (const auto& [key, v] : doc.items()) {
    if (key == "score_threshold") {
      cfg.score_threshold = number(v, key);
    } else if (key == "tie_break") {
      const auto p = parse_tie_break(text(v, key));
      if (!p) throw ConfigError("config: unknown tie_break '" + v.get<std::string>() + "'");
      cfg.tie_break = *p;
    } else if (key == "min_consecutive") {
      cfg.run.min_consecutive = small_int(v, key);
    } else if (key == "gap_tolerance") {
      cfg.run.gap_tolerance_frames = small_int(v, key);
    } else if (key == "duration_convention") {
      const auto c = parse_duration_convention(text(v, key));
      if (!c) throw ConfigError("config: unknown duration_convention '" + v.get<std::string>() + "'");
      cfg.run.duration = *c;
    } else if (key == "dispersion_px") {
      cfg.idt.dispersion_px = number(v, key);
    } else if (key == "min_duration_ms") {
      cfg.idt.min_duration_ms = number(v, key);
    } else if (key == "dilation_radius") {
      cfg.dilation_radius = small_int(v, key);
    } else if (key == "max_staleness_us") {
      cfg.alignment.max_staleness_us = integer(v, key);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  check_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + ": not a valid document");
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["score_threshold"] = cfg.score_threshold;
  j["tie_break"] = to_string(cfg.tie_break);
  j["min_consecutive"] = cfg.run.min_consecutive;
  j["gap_tolerance"] = cfg.run.gap_tolerance_frames;
  j["duration_convention"] = to_string(cfg.run.duration);
  j["dispersion_px"] = cfg.idt.dispersion_px;
  j["min_duration_ms"] = cfg.idt.min_duration_ms;
  j["dilation_radius"] = cfg.dilation_radius;
  j["max_staleness_us"] = cfg.alignment.max_staleness_us;
  return j;
}

TrialRecord map_trial(const GazeStream& gaze, const MaskSet& masks, const FrameTimeline& tl,
                      const PipelineConfig& cfg) {
  check_config(cfg);
  const auto track = gaze_track(gaze);
  const MaskSet dilated = cfg.dilation_radius > 0 ? dilate_maskset(masks, cfg.dilation_radius) : MaskSet{};
  const MaskSet& effective = cfg.dilation_radius > 0 ? dilated : masks;
  auto hits = classify_frames(tl, track, effective, cfg.score_threshold, cfg.tie_break, cfg.alignment);
  const auto aoi = detect_aoi_fixations(hits, cfg.run, tl);
  const auto off = detect_offtarget_fixations(hits, aoi, cfg.idt, tl, cfg.run.duration);
  return build_trial(std::move(hits), aoi, off, tl);
}

}  // namespace gazemap
