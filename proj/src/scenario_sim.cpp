#include "gazemap/scenario_sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "gazemap/error.hpp"

namespace gazemap::sim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::int64_t kSamplePeriodUs = 10000;  // 100 Hz

// Uniform in [0, 1) from the top 53 bits, identical on every standard library.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

[[noreturn]] void invalid(const std::string& msg) { throw FormatError("scenario: " + msg); }

}  // namespace

Point Actor::center_at(std::int64_t frame) const {
  if (path.empty()) return {};
  if (frame <= path.front().frame) return path.front().center;
  if (frame >= path.back().frame) return path.back().center;
  const auto next = std::upper_bound(path.begin(), path.end(), frame,
                                     [](std::int64_t f, const Keyframe& k) { return f < k.frame; });
  const auto prev = std::prev(next);
  const double u = static_cast<double>(frame - prev->frame) / static_cast<double>(next->frame - prev->frame);
  return {prev->center.x + (next->center.x - prev->center.x) * u,
          prev->center.y + (next->center.y - prev->center.y) * u};
}

double Actor::score_at(std::int64_t frame) const {
  const auto it = score_overrides.find(frame);
  return it == score_overrides.end() ? score : it->second;
}

bool Actor::visible_at(std::int64_t frame) const {
  return !visible || (frame >= visible->first && frame <= visible->second);
}

std::optional<std::pair<int, int>> Actor::column_rows(std::int64_t frame, int x, int image_height) const {
  const Point c = center_at(frame);
  const double dx = x + 0.5 - c.x;
  double half = 0.0;
  if (shape == Shape::rect) {
    if (std::fabs(dx) > width / 2.0) return std::nullopt;
    half = height / 2.0;
  } else {
    const double a = width / 2.0;
    const double t = 1.0 - (dx / a) * (dx / a);
    if (t < 0.0) return std::nullopt;
    half = (height / 2.0) * std::sqrt(t);
  }
  const int lo = std::max(0, static_cast<int>(std::ceil(c.y - half - 0.5)));
  const int hi = std::min(image_height - 1, static_cast<int>(std::floor(c.y + half - 0.5)));
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

// ---------------------------------------------------------------------------
// Spec documents

namespace {

Point parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    invalid(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ordered_json point_json(Point p) { return ordered_json::array({p.x, p.y}); }

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) invalid(where + ": missing '" + key + "'");
  return j[key];
}

double need_number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) invalid(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t need_int(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer()) invalid(where + ": '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string_view segment_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::dwell:
      return "dwell";
    case SegmentKind::saccade:
      return "saccade";
    case SegmentKind::dropout:
      break;
  }
  return "dropout";
}

}  // namespace

ScenarioSpec parse_scenario(const json& doc) {
  if (!doc.is_object()) invalid("expected an object");
  ScenarioSpec spec;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) invalid("'seed' must be an integer");
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  const json& tl = need(doc, "timeline", "spec");
  spec.timeline.fps = need_number(tl, "fps", "timeline");
  spec.timeline.frame_count = need_int(tl, "frame_count", "timeline");
  spec.timeline.t0_us = tl.contains("t0_us") ? need_int(tl, "t0_us", "timeline") : 0;
  const json& res = need(tl, "resolution", "timeline");
  if (!res.is_array() || res.size() != 2 || !res[0].is_number_integer() || !res[1].is_number_integer()) {
    invalid("timeline: 'resolution' must be [w, h]");
  }
  spec.timeline.resolution = {res[0].get<int>(), res[1].get<int>()};
  if (doc.contains("jitter_px")) spec.jitter_px = need_number(doc, "jitter_px", "spec");
  if (doc.contains("classes")) {
    if (!doc["classes"].is_object()) invalid("'classes' must be an object");
    for (const auto& [k, v] : doc["classes"].items()) {
      if (!v.is_string()) invalid("class description must be a string");
      spec.classes[k] = v.get<std::string>();
    }
  }
  if (doc.contains("config")) {
    try {
      spec.config = parse_config(doc["config"]);
    } catch (const ConfigError& e) {
      invalid(e.what());
    }
  }

  const json& actors = need(doc, "actors", "spec");
  if (!actors.is_array()) invalid("'actors' must be an array");
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const json& a = actors[i];
    const std::string where = "actor " + std::to_string(i);
    Actor actor;
    const json& id = need(a, "id", where);
    const json& label = need(a, "label", where);
    if (!id.is_string() || !label.is_string()) invalid(where + ": 'id' and 'label' must be strings");
    actor.id = id.get<std::string>();
    actor.label = label.get<std::string>();
    const json& shape = need(a, "shape", where);
    if (shape == "rect") {
      actor.shape = Shape::rect;
    } else if (shape == "ellipse") {
      actor.shape = Shape::ellipse;
    } else {
      invalid(where + ": shape must be rect or ellipse");
    }
    const Point size = parse_point(need(a, "size", where), where + " size");
    actor.width = size.x;
    actor.height = size.y;
    const json& path = need(a, "path", where);
    if (!path.is_array()) invalid(where + ": 'path' must be an array");
    for (const auto& k : path) {
      actor.path.push_back({need_int(k, "frame", where + " path"), parse_point(need(k, "center", where), where)});
    }
    if (a.contains("score")) actor.score = need_number(a, "score", where);
    if (a.contains("score_overrides")) {
      if (!a["score_overrides"].is_object()) invalid(where + ": 'score_overrides' must be an object");
      for (const auto& [frame, v] : a["score_overrides"].items()) {
        if (!v.is_number()) invalid(where + ": override scores must be numbers");
        try {
          actor.score_overrides[std::stoll(frame)] = v.get<double>();
        } catch (const std::exception&) {
          invalid(where + ": override key '" + frame + "' is not a frame index");
        }
      }
    }
    if (a.contains("visible")) {
      const json& v = a["visible"];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        invalid(where + ": 'visible' must be [first, last]");
      }
      actor.visible = std::make_pair(v[0].get<std::int64_t>(), v[1].get<std::int64_t>());
    }
    spec.actors.push_back(std::move(actor));
  }

  const json& script = need(doc, "gaze_script", "spec");
  if (!script.is_array()) invalid("'gaze_script' must be an array");
  for (std::size_t i = 0; i < script.size(); ++i) {
    const json& s = script[i];
    const std::string where = "segment " + std::to_string(i);
    Segment seg;
    const json& kind = need(s, "kind", where);
    if (kind == "dwell") {
      seg.kind = SegmentKind::dwell;
    } else if (kind == "saccade") {
      seg.kind = SegmentKind::saccade;
    } else if (kind == "dropout") {
      seg.kind = SegmentKind::dropout;
    } else {
      invalid(where + ": unknown kind");
    }
    seg.frames = need_int(s, "frames", where);
    if (s.contains("target")) {
      if (!s["target"].is_string()) invalid(where + ": 'target' must be an actor id");
      seg.target = s["target"].get<std::string>();
    }
    if (s.contains("point")) seg.point = parse_point(s["point"], where + " point");
    if (s.contains("from")) seg.from = parse_point(s["from"], where + " from");
    if (s.contains("to")) seg.to = parse_point(s["to"], where + " to");
    spec.gaze_script.push_back(std::move(seg));
  }
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open scenario spec '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw FormatError(path + ": not a valid document");
  try {
    return parse_scenario(doc);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

ordered_json scenario_to_json(const ScenarioSpec& spec) {
  ordered_json doc;
  doc["seed"] = spec.seed;
  doc["timeline"] = {{"fps", spec.timeline.fps},
                     {"frame_count", spec.timeline.frame_count},
                     {"t0_us", spec.timeline.t0_us},
                     {"resolution", {spec.timeline.resolution.width, spec.timeline.resolution.height}}};
  doc["jitter_px"] = spec.jitter_px;
  doc["classes"] = ordered_json::object();
  for (const auto& [k, v] : spec.classes) doc["classes"][k] = v;
  doc["config"] = config_to_json(spec.config);
  doc["actors"] = ordered_json::array();
  for (const auto& a : spec.actors) {
    ordered_json aj;
    aj["id"] = a.id;
    aj["label"] = a.label;
    aj["shape"] = a.shape == Shape::rect ? "rect" : "ellipse";
    aj["size"] = {a.width, a.height};
    aj["path"] = ordered_json::array();
    for (const auto& k : a.path) aj["path"].push_back({{"frame", k.frame}, {"center", point_json(k.center)}});
    aj["score"] = a.score;
    if (!a.score_overrides.empty()) {
      aj["score_overrides"] = ordered_json::object();
      for (const auto& [f, s] : a.score_overrides) aj["score_overrides"][std::to_string(f)] = s;
    }
    if (a.visible) aj["visible"] = {a.visible->first, a.visible->second};
    doc["actors"].push_back(std::move(aj));
  }
  doc["gaze_script"] = ordered_json::array();
  for (const auto& s : spec.gaze_script) {
    ordered_json sj;
    sj["kind"] = segment_name(s.kind);
    sj["frames"] = s.frames;
    if (!s.target.empty()) sj["target"] = s.target;
    if (s.point) sj["point"] = point_json(*s.point);
    if (s.from) sj["from"] = point_json(*s.from);
    if (s.to) sj["to"] = point_json(*s.to);
    doc["gaze_script"].push_back(std::move(sj));
  }
  return doc;
}

ordered_json ground_truth_to_json(const GroundTruth& gt) {
  ordered_json doc = metrics_to_json(gt.metrics);
  doc["fixations"] = ordered_json::array();
  for (const auto& f : gt.fixations) {
    ordered_json fj;
    fj["target"] = to_string(f.target.kind);
    if (f.target.is_aoi()) fj["label"] = f.target.label;
    fj["first_frame"] = f.first_frame;
    fj["last_frame"] = f.last_frame;
    fj["start_us"] = f.start_us;
    fj["end_us"] = f.end_us;
    fj["duration_us"] = f.duration_us;
    fj["centroid"] = {f.centroid_x, f.centroid_y};
    doc["fixations"].push_back(std::move(fj));
  }
  doc["frames"] = ordered_json::array();
  for (std::size_t i = 0; i < gt.targets.size(); ++i) {
    ordered_json fj;
    fj["frame"] = i;
    fj["px"] = gt.gaze_px[i] ? ordered_json::array({gt.gaze_px[i]->x, gt.gaze_px[i]->y}) : ordered_json(nullptr);
    fj["target"] = to_string(gt.targets[i].kind);
    if (gt.targets[i].is_aoi()) fj["label"] = gt.targets[i].label;
    doc["frames"].push_back(std::move(fj));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct Interval {
  std::uint64_t start;
  std::uint64_t length;
};

// 1-pixel intervals of an actor at a frame, in column-major linear order.
std::vector<Interval> actor_intervals(const Actor& a, std::int64_t frame, Resolution res) {
  std::vector<Interval> out;
  const auto h = static_cast<std::uint64_t>(res.height);
  for (int x = 0; x < res.width; ++x) {
    if (const auto rows = a.column_rows(frame, x, res.height)) {
      out.push_back({std::uint64_t(x) * h + std::uint64_t(rows->first),
                     std::uint64_t(rows->second - rows->first + 1)});
    }
  }
  return out;
}

RleMask intervals_to_rle(const std::vector<Interval>& intervals, Resolution res) {
  const std::uint64_t total = std::uint64_t(res.width) * std::uint64_t(res.height);
  std::vector<std::uint32_t> counts;
  std::uint64_t cursor = 0;
  for (const auto& iv : intervals) {
    if (iv.start == cursor && !counts.empty()) {
      counts.back() += static_cast<std::uint32_t>(iv.length);
    } else {
      counts.push_back(static_cast<std::uint32_t>(iv.start - cursor));
      counts.push_back(static_cast<std::uint32_t>(iv.length));
    }
    cursor = iv.start + iv.length;
  }
  if (cursor < total || counts.empty()) counts.push_back(static_cast<std::uint32_t>(total - cursor));
  return RleMask(res.height, res.width, std::move(counts));
}

void validate_spec(const ScenarioSpec& spec) {
  const FrameTimeline& tl = spec.timeline;
  if (!(tl.fps > 0.0)) invalid("fps must be positive");
  const double period = 1e6 / tl.fps;
  if (period != std::floor(period) || static_cast<std::int64_t>(period) % kSamplePeriodUs != 0) {
    invalid("frame period must be a whole multiple of the 10 ms gaze period");
  }
  if (tl.t0_us < 0 || tl.t0_us % kSamplePeriodUs != 0) invalid("t0_us must be a non-negative multiple of 10000");
  if (tl.frame_count < 1) invalid("frame_count must be >= 1");
  if (tl.resolution.width <= 0 || tl.resolution.height <= 0) invalid("resolution must be positive");
  if (spec.jitter_px < 0.0) invalid("jitter_px must be >= 0");
  if (static_cast<std::int64_t>(period) <= spec.config.alignment.max_staleness_us) {
    invalid("frame period must exceed max_staleness_us");
  }
  if (fixation_timing(tl, 0, 0, spec.config.run.duration).duration_us >=
      static_cast<std::int64_t>(std::ceil(spec.config.idt.min_duration_ms * 1000.0))) {
    invalid("min_duration_ms must span more than one frame");
  }

  std::set<std::string> ids;
  for (const auto& a : spec.actors) {
    if (a.id.empty() || !ids.insert(a.id).second) invalid("actor ids must be unique and non-empty");
    if (a.label.empty()) invalid("actor '" + a.id + "' has no label");
    if (!spec.classes.empty() && !spec.classes.contains(a.label)) {
      invalid("actor '" + a.id + "' label not in classes");
    }
    if (!(a.width > 0.0 && a.height > 0.0)) invalid("actor '" + a.id + "' needs a positive size");
    if (a.path.empty()) invalid("actor '" + a.id + "' has an empty path");
    if (!std::is_sorted(a.path.begin(), a.path.end(),
                        [](const Keyframe& l, const Keyframe& r) { return l.frame <= r.frame; })) {
      invalid("actor '" + a.id + "' path frames must increase");
    }
    auto check_score = [&](double s) {
      if (!(s >= 0.0 && s <= 1.0)) invalid("actor '" + a.id + "' score outside [0,1]");
    };
    check_score(a.score);
    for (const auto& [f, s] : a.score_overrides) check_score(s);
    for (std::int64_t f = 0; f < tl.frame_count; ++f) {
      if (!a.visible_at(f)) continue;
      const Point c = a.center_at(f);
      if (c.x - a.width / 2.0 < 0.0 || c.x + a.width / 2.0 > tl.resolution.width ||
          c.y - a.height / 2.0 < 0.0 || c.y + a.height / 2.0 > tl.resolution.height) {
        invalid("actor '" + a.id + "' leaves the image at frame " + std::to_string(f));
      }
    }
  }

  std::int64_t total = 0;
  for (const auto& s : spec.gaze_script) {
    if (s.frames < 1) invalid("every segment needs at least one frame");
    total += s.frames;
    if (s.kind == SegmentKind::dwell && s.target.empty() == !s.point.has_value()) {
      invalid("a dwell needs exactly one of 'target' or 'point'");
    }
    if (s.kind == SegmentKind::dwell && !s.target.empty() && !ids.contains(s.target)) {
      invalid("dwell target '" + s.target + "' is not an actor");
    }
  }
  if (total != tl.frame_count) {
    invalid("gaze script covers " + std::to_string(total) + " frames, timeline has " +
            std::to_string(tl.frame_count));
  }
}

// Per-frame gaze plan derived from the script.
struct FramePlan {
  std::size_t segment = 0;
  SegmentKind kind = SegmentKind::dropout;
  Point dwell_point;  // dwell frames
  Point from, to;     // saccade frames
  std::int64_t saccade_first = 0;
  std::int64_t saccade_frames = 0;
};

std::vector<FramePlan> plan_frames(const ScenarioSpec& spec) {
  const auto& script = spec.gaze_script;
  std::vector<FramePlan> frames(static_cast<std::size_t>(spec.timeline.frame_count));
  auto actor = [&](const std::string& id) -> const Actor& {
    return *std::find_if(spec.actors.begin(), spec.actors.end(), [&](const Actor& a) { return a.id == id; });
  };
  auto dwell_point = [&](const Segment& s, std::int64_t frame) {
    if (s.point) return *s.point;
    const Actor& a = actor(s.target);
    if (!a.visible_at(frame)) {
      invalid("dwell target '" + s.target + "' is not visible at frame " + std::to_string(frame));
    }
    return a.center_at(frame);
  };

  std::int64_t first = 0;
  for (std::size_t si = 0; si < script.size(); ++si) {
    const Segment& s = script[si];
    for (std::int64_t f = first; f < first + s.frames; ++f) {
      FramePlan& p = frames[static_cast<std::size_t>(f)];
      p.segment = si;
      p.kind = s.kind;
      if (s.kind == SegmentKind::dwell) p.dwell_point = dwell_point(s, f);
    }
    if (s.kind == SegmentKind::saccade) {
      Point from;
      if (s.from) {
        from = *s.from;
      } else if (first > 0 && frames[static_cast<std::size_t>(first - 1)].kind == SegmentKind::dwell) {
        from = frames[static_cast<std::size_t>(first - 1)].dwell_point;
      } else if (first > 0 && frames[static_cast<std::size_t>(first - 1)].kind == SegmentKind::saccade) {
        from = frames[static_cast<std::size_t>(first - 1)].to;
      } else {
        invalid("saccade " + std::to_string(si) + " needs 'from'");
      }
      Point to;
      if (s.to) {
        to = *s.to;
      } else if (si + 1 < script.size() && script[si + 1].kind == SegmentKind::dwell) {
        to = dwell_point(script[si + 1], first + s.frames);
      } else {
        invalid("saccade " + std::to_string(si) + " needs 'to'");
      }
      for (std::int64_t f = first; f < first + s.frames; ++f) {
        FramePlan& p = frames[static_cast<std::size_t>(f)];
        p.from = from;
        p.to = to;
        p.saccade_first = first;
        p.saccade_frames = s.frames;
      }
    }
    first += s.frames;
  }
  return frames;
}

// Continuous gaze position of a sample at time t owned by a non-dropout frame.
Point position(const FramePlan& p, std::int64_t t, std::int64_t t0, std::int64_t period) {
  if (p.kind == SegmentKind::dwell) return p.dwell_point;
  const double ta = static_cast<double>(t0 + (p.saccade_first - 1) * period);
  const double tb = static_cast<double>(t0 + (p.saccade_first + p.saccade_frames) * period);
  const double u = (static_cast<double>(t) - ta) / (tb - ta);
  return {p.from.x + (p.to.x - p.from.x) * u, p.from.y + (p.to.y - p.from.y) * u};
}

Pixel pixel_of(double xn, double yn, Resolution res) {
  auto axis = [](double v, int n) {
    return std::clamp(static_cast<int>(std::floor(v * n)), 0, n - 1);
  };
  return {axis(xn, res.width), axis(yn, res.height)};
}

struct ActorFrame {
  const Actor* actor;
  double score;
  std::uint64_t area;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

ScenarioOutput generate(const ScenarioSpec& spec) {
  validate_spec(spec);
  const FrameTimeline& tl = spec.timeline;
  const Resolution res = tl.resolution;
  const std::int64_t period = tl.frame_period_us();
  const std::int64_t n_frames = tl.frame_count;
  const std::vector<FramePlan> plan = plan_frames(spec);
  const PipelineConfig& cfg = spec.config;
  auto frame_ts = [&](std::int64_t f) { return tl.t0_us + f * period; };

  ScenarioOutput out;

  // Gaze log. Samples on the 10 ms grid are owned by their nearest frame
  // (earlier on ties); samples near a dropout frame are flagged invalid so no
  // neighbour sample can stand in for it.
  std::mt19937_64 rng(spec.seed);
  std::vector<std::optional<std::pair<double, double>>> frame_sample(static_cast<std::size_t>(n_frames));
  {
    std::ostringstream log;
    log << "# synthetic gaze log, seed " << spec.seed << "\n";
    const std::int64_t t_lo = std::max<std::int64_t>(0, frame_ts(0) - period / 2 + 1);
    const std::int64_t t_hi = frame_ts(n_frames - 1) + period / 2;
    const std::int64_t k_lo = (t_lo + kSamplePeriodUs - 1) / kSamplePeriodUs;
    auto is_dropout = [&](std::int64_t f) {
      return f >= 0 && f < n_frames && plan[static_cast<std::size_t>(f)].kind == SegmentKind::dropout;
    };
    for (std::int64_t k = k_lo; k * kSamplePeriodUs <= t_hi; ++k) {
      const std::int64_t t = k * kSamplePeriodUs;
      // nearest frame, ties toward the earlier one
      const std::int64_t owner =
          std::clamp<std::int64_t>(-floor_div(-(2 * (t - tl.t0_us) - period), 2 * period), 0, n_frames - 1);
      const FramePlan& p = plan[static_cast<std::size_t>(owner)];
      GazeSample s;
      s.ts_us = t;
      s.kind = SampleKind::gp;
      bool valid = !is_dropout(owner);
      double xn = 0.0;
      double yn = 0.0;
      if (valid) {
        Point g = position(p, t, tl.t0_us, period);
        if (p.kind == SegmentKind::dwell && spec.jitter_px > 0.0) {
          g.x += (2.0 * unit(rng) - 1.0) * spec.jitter_px;
          g.y += (2.0 * unit(rng) - 1.0) * spec.jitter_px;
        }
        xn = g.x / res.width;
        yn = g.y / res.height;
        for (std::int64_t d = owner - 1; d <= owner + 1; ++d) {
          if (is_dropout(d) && std::llabs(t - frame_ts(d)) <= cfg.alignment.max_staleness_us) valid = false;
        }
      }
      s.values = {xn, yn};
      s.valid = valid;
      if (valid && t == frame_ts(owner)) {
        if (!(xn >= 0.0 && xn < 1.0 && yn >= 0.0 && yn < 1.0)) {
          invalid("gaze leaves the image at frame " + std::to_string(owner));
        }
        frame_sample[static_cast<std::size_t>(owner)] = std::make_pair(xn, yn);
      }
      log << serialize_sample(s) << "\n";
      ++out.gaze_records;
    }
    out.gaze_log = log.str();
  }

  // Masks, plus per-frame actor geometry for the analytic ground truth.
  MaskSet masks;
  masks.resolution = res;
  masks.class_table = spec.classes;
  std::vector<std::vector<ActorFrame>> present(static_cast<std::size_t>(n_frames));
  for (std::int64_t f = 0; f < n_frames; ++f) {
    FrameMasks fm;
    fm.frame_index = f;
    for (const auto& a : spec.actors) {
      if (!a.visible_at(f)) continue;
      const auto intervals = actor_intervals(a, f, res);
      if (intervals.empty()) continue;
      std::uint64_t area = 0;
      for (const auto& iv : intervals) area += iv.length;
      present[static_cast<std::size_t>(f)].push_back({&a, a.score_at(f), area});
      fm.instances.push_back(make_instance(a.id, a.label, a.score_at(f), intervals_to_rle(intervals, res)));
    }
    if (!fm.instances.empty()) masks.frames.emplace(f, std::move(fm));
  }
  out.mask_file = serialize_maskset(masks);
  out.meta_file = serialize_video_meta(tl);

  // Ground truth: per-frame target from the shapes themselves.
  GroundTruth& gt = out.truth;
  gt.gaze_px.resize(static_cast<std::size_t>(n_frames));
  gt.targets.assign(static_cast<std::size_t>(n_frames), Target::no_gaze());
  const int dilate = cfg.dilation_radius;
  for (std::int64_t f = 0; f < n_frames; ++f) {
    const auto& sample = frame_sample[static_cast<std::size_t>(f)];
    if (!sample) continue;
    const Pixel px = pixel_of(sample->first, sample->second, res);
    gt.gaze_px[static_cast<std::size_t>(f)] = px;
    const ActorFrame* best = nullptr;
    for (const auto& af : present[static_cast<std::size_t>(f)]) {
      if (af.score < cfg.score_threshold) continue;
      if (dilate > 0) invalid("ground truth is only defined for dilation_radius 0");
      const auto rows = af.actor->column_rows(f, px.x, res.height);
      if (!rows || px.y < rows->first || px.y > rows->second) continue;
      if (!best) {
        best = &af;
        continue;
      }
      const bool by_score = cfg.tie_break == TieBreak::score_area_id;
      auto key = [&](const ActorFrame& x) {
        return by_score ? std::make_tuple(-x.score, static_cast<double>(x.area))
                        : std::make_tuple(static_cast<double>(x.area), -x.score);
      };
      if (key(af) < key(*best) || (key(af) == key(*best) && af.actor->id < best->actor->id)) best = &af;
    }
    gt.targets[static_cast<std::size_t>(f)] = best ? Target::aoi(best->actor->label) : Target::off_target();
  }

  // Scoring constraints that keep the dispersion detector's output a pure
  // function of the script: each dwell stays within the dispersion limit and
  // every step that leaves a dwell or moves along a saccade exceeds it.
  const double limit = cfg.idt.dispersion_px;
  for (std::size_t si = 0, first = 0; si < spec.gaze_script.size(); first += spec.gaze_script[si].frames, ++si) {
    const Segment& s = spec.gaze_script[si];
    if (s.kind != SegmentKind::dwell) continue;
    int min_x = INT32_MAX, max_x = INT32_MIN, min_y = INT32_MAX, max_y = INT32_MIN;
    for (std::size_t f = first; f < first + s.frames; ++f) {
      const Pixel p = *gt.gaze_px[f];
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    if (double(max_x - min_x) + double(max_y - min_y) > limit) {
      invalid("dwell segment " + std::to_string(si) + " spreads over more than dispersion_px");
    }
  }
  for (std::int64_t f = 0; f + 1 < n_frames; ++f) {
    const auto& a = gt.gaze_px[static_cast<std::size_t>(f)];
    const auto& b = gt.gaze_px[static_cast<std::size_t>(f + 1)];
    if (!a || !b) continue;
    const FramePlan& pa = plan[static_cast<std::size_t>(f)];
    const FramePlan& pb = plan[static_cast<std::size_t>(f + 1)];
    if (pa.segment == pb.segment && pa.kind == SegmentKind::dwell) continue;
    const double step = std::abs(a->x - b->x) + std::abs(a->y - b->y);
    if (step <= limit) {
      invalid("gaze step between frames " + std::to_string(f) + " and " + std::to_string(f + 1) +
              " is within dispersion_px");
    }
  }

  // AOI fixations: runs over the analytic targets.
  const RunConfig& run = cfg.run;
  std::vector<bool> consumed(static_cast<std::size_t>(n_frames), false);
  auto timing = [&](std::int64_t first, std::int64_t last) {
    const std::int64_t start = frame_ts(first);
    if (run.duration == DurationConvention::inclusive) {
      return std::make_pair(start, (last - first + 1) * period);
    }
    return std::make_pair(start, (last - first) * period);
  };
  auto emit = [&](Target target, std::int64_t first, std::int64_t last) {
    Fixation fx;
    fx.target = std::move(target);
    fx.first_frame = first;
    fx.last_frame = last;
    const auto [start, duration] = timing(first, last);
    fx.start_us = start;
    fx.duration_us = duration;
    fx.end_us = start + duration;
    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (std::int64_t f = first; f <= last; ++f) {
      if (const auto& p = gt.gaze_px[static_cast<std::size_t>(f)]) {
        sx += p->x;
        sy += p->y;
        ++n;
      }
    }
    fx.centroid_x = n ? sx / n : 0.0;
    fx.centroid_y = n ? sy / n : 0.0;
    gt.fixations.push_back(std::move(fx));
  };
  for (std::int64_t f = 0; f < n_frames;) {
    const Target& t = gt.targets[static_cast<std::size_t>(f)];
    if (!t.is_aoi()) {
      ++f;
      continue;
    }
    std::int64_t last = f;
    std::int64_t gap = 0;
    for (std::int64_t g = f + 1; g < n_frames; ++g) {
      const Target& u = gt.targets[static_cast<std::size_t>(g)];
      if (u == t) {
        last = g;
        gap = 0;
      } else if (u.kind == TargetKind::no_gaze && ++gap <= run.gap_tolerance_frames) {
        continue;
      } else {
        break;
      }
    }
    if (last - f + 1 >= run.min_consecutive) {
      emit(t, f, last);
      for (std::int64_t g = f; g <= last; ++g) consumed[static_cast<std::size_t>(g)] = true;
    }
    f = last + 1;
  }

  // Off-target fixations: unconsumed stretches of dwell segments that last
  // at least min_duration_ms.
  const auto min_duration_us = static_cast<std::int64_t>(std::ceil(cfg.idt.min_duration_ms * 1000.0));
  for (std::size_t si = 0, first = 0; si < spec.gaze_script.size(); first += spec.gaze_script[si].frames, ++si) {
    const Segment& s = spec.gaze_script[si];
    if (s.kind != SegmentKind::dwell) continue;
    const auto lo = static_cast<std::int64_t>(first);
    const std::int64_t hi = lo + s.frames - 1;
    for (std::int64_t f = lo; f <= hi;) {
      if (consumed[static_cast<std::size_t>(f)]) {
        ++f;
        continue;
      }
      std::int64_t g = f;
      while (g + 1 <= hi && !consumed[static_cast<std::size_t>(g + 1)]) ++g;
      if (timing(f, g).second >= min_duration_us) emit(Target::off_target(), f, g);
      f = g + 1;
    }
  }
  std::sort(gt.fixations.begin(), gt.fixations.end(),
            [](const Fixation& a, const Fixation& b) { return a.first_frame < b.first_frame; });

  TrialMetrics& m = gt.metrics;
  m.trial_duration_ms = static_cast<double>(n_frames * period) / 1000.0;
  for (const auto& [label, desc] : spec.classes) m.dwell_ms[label] = 0.0;
  std::map<std::string, std::int64_t> dwell_us;
  for (const auto& fx : gt.fixations) {
    ++m.fixation_count;
    if (fx.target.is_aoi()) {
      ++m.on_target_count;
      dwell_us[fx.target.label] += fx.duration_us;
    }
  }
  for (const auto& [label, us] : dwell_us) m.dwell_ms[label] = static_cast<double>(us) / 1000.0;
  if (m.fixation_count > 0) {
    m.tfr_exact = static_cast<double>(m.on_target_count) / static_cast<double>(m.fixation_count);
    m.tfr_reported = static_cast<double>(m.on_target_count * 100 / m.fixation_count) / 100.0;
  }
  return out;
}

void write_scenario(const ScenarioOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir + "': " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    const auto path = (fs::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
    if (!f) throw Error("failed writing '" + path + "'");
  };
  write("gaze.jsonl", out.gaze_log);
  write("masks.json", out.mask_file);
  write("meta.json", out.meta_file);
  write("ground_truth.json", ground_truth_to_json(out.truth).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Brute-force oracle

OracleResult oracle_map(const std::string& gaze_log, const std::string& mask_file,
                        const std::string& meta_file, const PipelineConfig& cfg) {
  const ParseResult parsed = parse_gaze_stream(gaze_log);
  const FrameTimeline tl = parse_video_meta(meta_file);
  const MaskSet masks = load_maskset_document(mask_file);
  const int W = tl.resolution.width;
  const int H = tl.resolution.height;
  if (masks.resolution != tl.resolution) throw FormatError("mask resolution differs from video resolution");

  std::vector<const GazeSample*> samples;
  for (const auto& s : parsed.stream.samples()) {
    if (s.kind == SampleKind::gp && s.valid && s.eye == Eye::combined) samples.push_back(&s);
  }

  OracleResult result;
  TrialRecord& trial = result.trial;
  trial.timeline = tl;
  const std::int64_t period = std::llround(1e6 / tl.fps);
  auto stamp = [&](std::int64_t f) { return tl.t0_us + std::llround(static_cast<double>(f) * 1e6 / tl.fps); };

  for (std::int64_t f = 0; f < tl.frame_count; ++f) {
    FrameHit hit;
    hit.frame_index = f;
    hit.target = Target::no_gaze();
    const std::int64_t ts = stamp(f);
    const GazeSample* nearest = nullptr;
    std::int64_t best = 0;
    for (const GazeSample* s : samples) {
      const std::int64_t d = std::llabs(s->ts_us - ts);
      if (!nearest || d < best) {
        nearest = s;
        best = d;
      }
    }
    if (nearest && best <= cfg.alignment.max_staleness_us) {
      int px = static_cast<int>(std::floor(nearest->values[0] * W));
      int py = static_cast<int>(std::floor(nearest->values[1] * H));
      px = std::min(std::max(px, 0), W - 1);
      py = std::min(std::max(py, 0), H - 1);
      hit.gaze_px = Pixel{px, py};
      hit.target = Target::off_target();

      const FrameMasks* fm = masks.frame(f);
      const Instance* winner = nullptr;
      std::size_t winner_area = 0;
      for (std::size_t i = 0; fm && i < fm->instances.size(); ++i) {
        const Instance& inst = fm->instances[i];
        if (inst.score < cfg.score_threshold) continue;
        // full column-major bitmap
        std::vector<char> bits(std::size_t(W) * std::size_t(H), 0);
        std::size_t pos = 0;
        for (std::size_t r = 0; r < inst.mask.counts().size(); ++r) {
          const std::size_t len = inst.mask.counts()[r];
          if (r % 2 == 1) std::fill(bits.begin() + pos, bits.begin() + pos + len, 1);
          pos += len;
        }
        if (cfg.dilation_radius > 0) {
          std::vector<char> grown(bits.size(), 0);
          const int rad = cfg.dilation_radius;
          for (int x = 0; x < W; ++x) {
            for (int y = 0; y < H; ++y) {
              if (!bits[std::size_t(x) * H + y]) continue;
              for (int xx = std::max(0, x - rad); xx <= std::min(W - 1, x + rad); ++xx) {
                for (int yy = std::max(0, y - rad); yy <= std::min(H - 1, y + rad); ++yy) {
                  grown[std::size_t(xx) * H + yy] = 1;
                }
              }
            }
          }
          bits.swap(grown);
        }
        if (!bits[std::size_t(px) * H + py]) continue;
        const auto area = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
        bool wins = !winner;
        if (winner) {
          const bool score_first = cfg.tie_break == TieBreak::score_area_id;
          if (score_first && inst.score != winner->score) {
            wins = inst.score > winner->score;
          } else if (area != winner_area) {
            wins = area < winner_area;
          } else if (inst.score != winner->score) {
            wins = inst.score > winner->score;
          } else {
            wins = inst.id < winner->id;
          }
        }
        if (wins) {
          winner = &inst;
          winner_area = area;
        }
      }
      if (winner) hit.target = Target::aoi(winner->label);
    }
    trial.hits.push_back(std::move(hit));
  }

  const std::int64_t n = tl.frame_count;
  auto make = [&](Target target, std::int64_t first, std::int64_t last) {
    Fixation fx;
    fx.target = std::move(target);
    fx.first_frame = first;
    fx.last_frame = last;
    fx.start_us = stamp(first);
    if (cfg.run.duration == DurationConvention::inclusive) {
      fx.duration_us = (last - first + 1) * period;
      fx.end_us = fx.start_us + fx.duration_us;
    } else {
      fx.end_us = stamp(last);
      fx.duration_us = fx.end_us - fx.start_us;
    }
    double sx = 0.0, sy = 0.0;
    int count = 0;
    for (std::int64_t f = first; f <= last; ++f) {
      if (const auto& p = trial.hits[static_cast<std::size_t>(f)].gaze_px) {
        sx += p->x;
        sy += p->y;
        ++count;
      }
    }
    if (count) {
      fx.centroid_x = sx / count;
      fx.centroid_y = sy / count;
    }
    return fx;
  };

  // AOI runs: for each frame, try to start a run there if the previous frame
  // is not part of the same run.
  std::vector<Fixation> fixations;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (std::int64_t start = 0; start < n; ++start) {
    const Target& t = trial.hits[static_cast<std::size_t>(start)].target;
    if (t.kind != TargetKind::aoi || taken[static_cast<std::size_t>(start)]) continue;
    std::int64_t last = start;
    std::int64_t f = start + 1;
    while (f < n) {
      std::int64_t blanks = 0;
      while (f + blanks < n && trial.hits[static_cast<std::size_t>(f + blanks)].target.kind == TargetKind::no_gaze) {
        ++blanks;
      }
      if (f + blanks >= n || blanks > cfg.run.gap_tolerance_frames) break;
      if (!(trial.hits[static_cast<std::size_t>(f + blanks)].target == t)) break;
      last = f + blanks;
      f = last + 1;
    }
    for (std::int64_t g = start; g <= last; ++g) taken[static_cast<std::size_t>(g)] = 1;
    if (last - start + 1 >= cfg.run.min_consecutive) fixations.push_back(make(t, start, last));
    else
      for (std::int64_t g = start; g <= last; ++g) taken[static_cast<std::size_t>(g)] = 0;
    start = last;
  }

  // Dispersion detector, recomputing the spread from scratch for every window.
  std::vector<char> free(static_cast<std::size_t>(n), 0);
  for (std::int64_t f = 0; f < n; ++f) {
    free[static_cast<std::size_t>(f)] = trial.hits[static_cast<std::size_t>(f)].gaze_px.has_value() && !taken[static_cast<std::size_t>(f)];
  }
  auto spread = [&](std::int64_t a, std::int64_t b) {
    int x0 = INT32_MAX, x1 = INT32_MIN, y0 = INT32_MAX, y1 = INT32_MIN;
    for (std::int64_t f = a; f <= b; ++f) {
      const Pixel p = *trial.hits[static_cast<std::size_t>(f)].gaze_px;
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    return double(x1 - x0) + double(y1 - y0);
  };
  const auto min_us = static_cast<std::int64_t>(std::ceil(cfg.idt.min_duration_ms * 1000.0));
  std::int64_t i = 0;
  while (i < n) {
    if (!free[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    std::int64_t j = i;
    bool ok = true;
    while (make(Target::off_target(), i, j).duration_us < min_us) {
      ++j;
      if (j >= n || !free[static_cast<std::size_t>(j)]) {
        ok = false;
        break;
      }
    }
    if (!ok || spread(i, j) > cfg.idt.dispersion_px) {
      ++i;
      continue;
    }
    while (j + 1 < n && free[static_cast<std::size_t>(j + 1)] && spread(i, j + 1) <= cfg.idt.dispersion_px) ++j;
    fixations.push_back(make(Target::off_target(), i, j));
    i = j + 1;
  }

  std::sort(fixations.begin(), fixations.end(),
            [](const Fixation& a, const Fixation& b) { return a.first_frame < b.first_frame; });
  trial.fixations = fixations;
  trial.trial_duration_us = n * period;

  TrialMetrics& m = result.metrics;
  m.trial_duration_ms = static_cast<double>(trial.trial_duration_us) / 1000.0;
  for (const auto& [label, desc] : masks.class_table) m.dwell_ms[label] = 0.0;
  std::map<std::string, std::int64_t> dwell_us;
  for (const auto& fx : fixations) {
    ++m.fixation_count;
    if (fx.target.kind == TargetKind::aoi) {
      ++m.on_target_count;
      dwell_us[fx.target.label] += fx.end_us - fx.start_us;
    }
  }
  for (const auto& [label, us] : dwell_us) m.dwell_ms[label] = static_cast<double>(us) / 1000.0;
  if (m.fixation_count > 0) {
    m.tfr_exact = static_cast<double>(m.on_target_count) / static_cast<double>(m.fixation_count);
    m.tfr_reported = std::floor(static_cast<double>(m.on_target_count * 100) / static_cast<double>(m.fixation_count)) / 100.0;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Scenario builders

ScenarioSpec plan_trial(const TrialPlan& plan) {
  ScenarioSpec spec;
  spec.seed = plan.seed;
  spec.timeline = FrameTimeline{25.0, plan.frame_count, 0, {1920, 1080}};
  spec.jitter_px = plan.jitter_px;
  spec.classes = {{"H1", "motion hazard (excavator)"},
                  {"H2", "electrical hazard (cables)"},
                  {"H3", "mechanical/electrical hazard (generator)"}};

  // AOIs in the upper band, background dwells in the lower band, so every
  // saccade crosses open ground. H2 sits to the right, off every saccade path.
  auto rect = [](std::string id, std::string label, Point c, double w, double h) {
    Actor a;
    a.id = std::move(id);
    a.label = std::move(label);
    a.shape = Shape::rect;
    a.width = w;
    a.height = h;
    a.path = {{0, c}};
    return a;
  };
  spec.actors.push_back(rect("excavator", "H1", {320, 150}, 220, 100));
  Actor cables = rect("cables", "H2", {1800, 600}, 120, 60);
  cables.shape = Shape::ellipse;
  cables.score = 0.88;
  spec.actors.push_back(std::move(cables));
  spec.actors.push_back(rect("generator", "H3", {1560, 160}, 180, 110));
  const std::map<std::string, std::string> actor_for = {{"H1", "excavator"}, {"H2", "cables"}, {"H3", "generator"}};

  const std::vector<Point> background = {{180, 1000}, {1200, 960}, {520, 1020}, {1500, 990},
                                         {860, 940},  {240, 880},  {1380, 1030}, {700, 900}};

  // Spread AOI dwells evenly among background dwells.
  int aoi_total = 0;
  for (const auto& [label, n] : plan.aoi_dwells) aoi_total += n;
  const int total = aoi_total + plan.off_target_dwells;
  if (total == 0) invalid("plan has no dwells");
  std::vector<std::string> aoi_order;
  {
    std::map<std::string, int> left = plan.aoi_dwells;
    std::map<std::string, int> placed;
    for (int k = 0; k < aoi_total; ++k) {
      // label furthest behind its target share
      std::string pick;
      double worst = 2.0;
      for (const auto& [label, n] : plan.aoi_dwells) {
        if (placed[label] >= n) continue;
        const double share = static_cast<double>(placed[label]) / n;
        if (share < worst) {
          worst = share;
          pick = label;
        }
      }
      ++placed[pick];
      aoi_order.push_back(pick);
    }
  }
  std::vector<Segment> dwells;
  std::size_t next_aoi = 0;
  std::size_t next_bg = 0;
  for (int k = 0; k < total; ++k) {
    const bool aoi = (static_cast<long>(k + 1) * aoi_total) / total > (static_cast<long>(k) * aoi_total) / total;
    Segment s;
    s.kind = SegmentKind::dwell;
    s.frames = plan.dwell_frames;
    if (aoi) {
      const auto it = actor_for.find(aoi_order[next_aoi++]);
      if (it == actor_for.end()) invalid("plan labels must be H1, H2 or H3");
      s.target = it->second;
    } else {
      s.point = background[next_bg++ % background.size()];
    }
    dwells.push_back(std::move(s));
  }

  const std::int64_t gaps = total - 1;
  const std::int64_t spare = plan.frame_count - static_cast<std::int64_t>(total) * plan.dwell_frames;
  if (spare < gaps) invalid("frame_count too small for the planned dwells");
  for (int k = 0; k < total; ++k) {
    spec.gaze_script.push_back(dwells[static_cast<std::size_t>(k)]);
    if (k + 1 < total) {
      Segment sac;
      sac.kind = SegmentKind::saccade;
      sac.frames = spare / gaps + (k < spare % gaps ? 1 : 0);
      spec.gaze_script.push_back(sac);
    }
  }
  if (gaps == 0 && spare > 0) spec.gaze_script.push_back({SegmentKind::dropout, spare, {}, {}, {}, {}});
  return spec;
}

namespace {

std::optional<ScenarioSpec> try_random_scenario(std::mt19937_64& rng, std::uint64_t seed) {
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(unit(rng) * (hi - lo + 1)); };

  ScenarioSpec spec;
  spec.seed = seed;
  const Resolution res{320, 240};
  spec.timeline = FrameTimeline{25.0, 0, 10000 * pick(0, 5), res};
  spec.jitter_px = unit(rng) < 0.5 ? 0.0 : uniform(0.0, 1.5);
  spec.classes = {{"H1", "motion"}, {"H2", "electrical"}, {"H3", "mechanical"}};
  spec.config.idt.dispersion_px = 30.0;
  spec.config.run.gap_tolerance_frames = unit(rng) < 0.3 ? 1 : 0;
  if (unit(rng) < 0.3) spec.config.tie_break = TieBreak::area_score_id;

  const int n_frames_target = pick(120, 260);
  const int n_actors = pick(0, 4);
  for (int i = 0; i < n_actors; ++i) {
    Actor a;
    a.id = "a" + std::to_string(i);
    a.label = "H" + std::to_string(pick(1, 3));
    a.shape = unit(rng) < 0.5 ? Shape::rect : Shape::ellipse;
    a.width = uniform(20.0, 90.0);
    a.height = uniform(20.0, 90.0);
    const double margin_x = a.width / 2.0 + 2.0;
    const double margin_y = a.height / 2.0 + 2.0;
    const Point c0{uniform(margin_x + 25.0, res.width - margin_x - 25.0),
                   uniform(margin_y + 25.0, res.height - margin_y - 25.0)};
    a.path.push_back({0, c0});
    if (unit(rng) < 0.6) {
      a.path.push_back({n_frames_target, {c0.x + uniform(-25.0, 25.0), c0.y + uniform(-25.0, 25.0)}});
    }
    a.score = unit(rng) < 0.2 ? uniform(0.4, 0.69) : uniform(0.71, 0.99);
    if (unit(rng) < 0.3) {
      for (int k = 0; k < 4; ++k) a.score_overrides[pick(0, n_frames_target - 1)] = uniform(0.3, 0.65);
    }
    if (unit(rng) < 0.3) {
      const int first = pick(0, n_frames_target / 2);
      a.visible = std::make_pair(first, static_cast<std::int64_t>(first + pick(20, n_frames_target)));
    }
    spec.actors.push_back(std::move(a));
  }

  // Alternate dwells with saccades or blinks; every saccade must travel far
  // enough that each of its steps leaves the dispersion window.
  const double step_needed = spec.config.idt.dispersion_px + 4.0 * spec.jitter_px + 4.0;
  std::int64_t frame = 0;
  std::optional<Point> last_point;  // where the last dwell ended
  while (frame < n_frames_target) {
    Segment dwell;
    dwell.kind = SegmentKind::dwell;
    dwell.frames = pick(3, 14);
    std::optional<Point> start;
    std::optional<Point> end;
    for (int attempt = 0; attempt < 20 && !start; ++attempt) {
      dwell.target.clear();
      dwell.point.reset();
      std::vector<const Actor*> candidates;
      for (const auto& a : spec.actors) {
        if (a.visible_at(frame + 4) && a.visible_at(frame + 4 + dwell.frames)) candidates.push_back(&a);
      }
      if (!candidates.empty() && unit(rng) < 0.55) {
        dwell.target = candidates[static_cast<std::size_t>(pick(0, static_cast<int>(candidates.size()) - 1))]->id;
      } else {
        dwell.point = Point{uniform(8.0, res.width - 8.0), uniform(8.0, res.height - 8.0)};
      }
      // a saccade of up to 3 frames (or a blink) leads into the dwell
      Segment lead;
      if (!last_point) {
        lead = {SegmentKind::dropout, pick(1, 3), {}, {}, {}, {}};
      } else if (unit(rng) < 0.2) {
        lead = {SegmentKind::dropout, pick(1, 3), {}, {}, {}, {}};
      } else {
        lead = {SegmentKind::saccade, pick(1, 3), {}, {}, {}, {}};
      }
      const std::int64_t dwell_first = frame + lead.frames;
      const Actor* target = nullptr;
      for (const auto& a : spec.actors) {
        if (a.id == dwell.target) target = &a;
      }
      if (target && !(target->visible_at(dwell_first) && target->visible_at(dwell_first + dwell.frames - 1))) {
        continue;
      }
      const Point s = target ? target->center_at(dwell_first) : *dwell.point;
      const Point e = target ? target->center_at(dwell_first + dwell.frames - 1) : *dwell.point;
      if (lead.kind == SegmentKind::saccade) {
        const double dist = std::abs(s.x - last_point->x) + std::abs(s.y - last_point->y);
        if (dist / static_cast<double>(lead.frames + 1) <= step_needed) continue;
      }
      spec.gaze_script.push_back(lead);
      start = s;
      end = e;
      frame = dwell_first;
    }
    if (!start) return std::nullopt;
    spec.gaze_script.push_back(dwell);
    frame += dwell.frames;
    last_point = end;
  }
  spec.timeline.frame_count = frame;
  for (auto& a : spec.actors) {
    if (a.path.size() > 1) a.path.back().frame = frame;
  }
  return spec;
}

}  // namespace

ScenarioSpec random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto spec = try_random_scenario(rng, seed);
    if (!spec) continue;
    try {
      generate(*spec);
      return *spec;
    } catch (const FormatError&) {
      // jitter or motion broke a scoring constraint; draw again
    }
  }
  throw InvariantError("no valid random scenario for seed " + std::to_string(seed));
}

}  // namespace gazemap::sim
