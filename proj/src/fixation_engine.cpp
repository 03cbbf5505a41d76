#include "gazemap/fixation_engine.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "gazemap/error.hpp"

namespace gazemap {

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::aoi:
      return "aoi";
    case TargetKind::off_target:
      return "off_target";
    case TargetKind::no_gaze:
      break;
  }
  return "no_gaze";
}

std::string_view to_string(DurationConvention convention) {
  return convention == DurationConvention::inclusive ? "inclusive" : "endpoint_difference";
}

std::optional<DurationConvention> parse_duration_convention(std::string_view text) {
  if (text == "inclusive") return DurationConvention::inclusive;
  if (text == "endpoint_difference") return DurationConvention::endpoint_difference;
  return std::nullopt;
}

void check_run_config(const RunConfig& cfg) {
  if (cfg.min_consecutive < 1) throw ConfigError("min_consecutive must be >= 1");
  if (cfg.gap_tolerance_frames < 0) throw ConfigError("gap_tolerance must be >= 0");
}

void check_idt_config(const IdtConfig& cfg) {
  if (!(cfg.dispersion_px > 0.0)) throw ConfigError("dispersion_px must be > 0");
  if (!(cfg.min_duration_ms > 0.0)) throw ConfigError("min_duration_ms must be > 0");
}

FixationTiming fixation_timing(const FrameTimeline& tl, std::int64_t first, std::int64_t last,
                               DurationConvention convention) {
  const std::int64_t start = frame_timestamp(tl, first);
  if (convention == DurationConvention::inclusive) {
    const std::int64_t duration = (last - first + 1) * tl.frame_period_us();
    return {start, start + duration, duration};
  }
  const std::int64_t end = frame_timestamp(tl, last);
  return {start, end, end - start};
}

std::vector<FrameHit> classify_frames(const FrameTimeline& tl, std::span<const TrackPoint> track,
                                      const MaskSet& masks, double score_threshold,
                                      TieBreak tie_break, const AlignmentPolicy& policy) {
  check_timeline(tl);
  check_policy(policy);
  if (masks.resolution != tl.resolution) {
    throw FormatError("mask resolution " + std::to_string(masks.resolution.width) + "x" +
                      std::to_string(masks.resolution.height) + " differs from video resolution " +
                      std::to_string(tl.resolution.width) + "x" +
                      std::to_string(tl.resolution.height));
  }
  std::vector<FrameHit> hits;
  hits.reserve(static_cast<std::size_t>(tl.frame_count));
  for (std::int64_t i = 0; i < tl.frame_count; ++i) {
    FrameHit hit{i, std::nullopt, Target::no_gaze()};
    if (const auto gaze = gaze_at_frame(track, frame_timestamp(tl, i), policy)) {
      const Pixel px = to_pixel(gaze->x, gaze->y, tl.resolution);
      hit.gaze_px = px;
      hit.target = Target::off_target();
      if (const FrameMasks* frame = masks.frame(i)) {
        if (auto label = hit_test(px, *frame, score_threshold, tie_break)) {
          hit.target = Target::aoi(std::move(*label));
        }
      }
    }
    hits.push_back(std::move(hit));
  }
  return hits;
}

namespace {

Fixation make_fixation(Target target, std::span<const FrameHit> hits, std::int64_t first,
                       std::int64_t last, const FrameTimeline& tl, DurationConvention convention) {
  Fixation f;
  f.target = std::move(target);
  f.first_frame = first;
  f.last_frame = last;
  const auto timing = fixation_timing(tl, first, last, convention);
  f.start_us = timing.start_us;
  f.end_us = timing.end_us;
  f.duration_us = timing.duration_us;
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (std::int64_t i = first; i <= last; ++i) {
    const auto& px = hits[static_cast<std::size_t>(i)].gaze_px;
    if (!px) continue;
    sx += px->x;
    sy += px->y;
    ++n;
  }
  if (n > 0) {
    f.centroid_x = sx / static_cast<double>(n);
    f.centroid_y = sy / static_cast<double>(n);
  }
  return f;
}

void check_indexing(std::span<const FrameHit> hits) {
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].frame_index != static_cast<std::int64_t>(i)) {
      throw ContractError("frame hits must be indexed contiguously from 0");
    }
  }
}

}  // namespace

std::vector<Fixation> detect_aoi_fixations(std::span<const FrameHit> hits, const RunConfig& cfg,
                                           const FrameTimeline& tl) {
  check_run_config(cfg);
  check_indexing(hits);
  std::vector<Fixation> out;
  const auto n = static_cast<std::int64_t>(hits.size());
  std::int64_t i = 0;
  while (i < n) {
    const Target& target = hits[static_cast<std::size_t>(i)].target;
    if (!target.is_aoi()) {
      ++i;
      continue;
    }
    // Extend over same-label frames, bridging short no_gaze gaps.
    std::int64_t last = i;
    std::int64_t j = i + 1;
    while (j < n) {
      const Target& t = hits[static_cast<std::size_t>(j)].target;
      if (t == target) {
        last = j;
        ++j;
        continue;
      }
      if (t.kind != TargetKind::no_gaze) break;
      std::int64_t k = j;
      while (k < n && hits[static_cast<std::size_t>(k)].target.kind == TargetKind::no_gaze) ++k;
      if (k - j > cfg.gap_tolerance_frames || k == n || hits[static_cast<std::size_t>(k)].target != target) {
        break;
      }
      j = k;
    }
    if (last - i + 1 >= cfg.min_consecutive) {
      out.push_back(make_fixation(target, hits, i, last, tl, cfg.duration));
    }
    i = last + 1;
  }
  return out;
}

std::vector<Fixation> detect_offtarget_fixations(std::span<const FrameHit> hits,
                                                 std::span<const Fixation> aoi_fixations,
                                                 const IdtConfig& cfg, const FrameTimeline& tl,
                                                 DurationConvention convention) {
  check_idt_config(cfg);
  check_indexing(hits);
  const auto n = static_cast<std::int64_t>(hits.size());
  std::vector<bool> eligible(hits.size());
  for (std::int64_t i = 0; i < n; ++i) eligible[static_cast<std::size_t>(i)] = hits[static_cast<std::size_t>(i)].gaze_px.has_value();
  for (const auto& f : aoi_fixations) {
    for (std::int64_t i = f.first_frame; i <= f.last_frame && i < n; ++i) {
      eligible[static_cast<std::size_t>(i)] = false;
    }
  }
  const auto min_duration_us = static_cast<std::int64_t>(std::ceil(cfg.min_duration_ms * 1000.0));
  auto long_enough = [&](std::int64_t first, std::int64_t last) {
    return fixation_timing(tl, first, last, convention).duration_us >= min_duration_us;
  };

  // Bounding-box extent of the window, maintained incrementally while growing.
  struct Extent {
    int min_x, max_x, min_y, max_y;
    void add(Pixel p) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    double dispersion() const { return double(max_x - min_x) + double(max_y - min_y); }
  };
  auto px_at = [&](std::int64_t i) { return *hits[static_cast<std::size_t>(i)].gaze_px; };

  std::vector<Fixation> out;
  std::int64_t seg = 0;
  while (seg < n) {
    if (!eligible[static_cast<std::size_t>(seg)]) {
      ++seg;
      continue;
    }
    std::int64_t seg_end = seg;
    while (seg_end + 1 < n && eligible[static_cast<std::size_t>(seg_end + 1)]) ++seg_end;

    std::int64_t i = seg;
    while (i <= seg_end) {
      // smallest window starting at i that satisfies the duration threshold
      std::int64_t j = i;
      while (j <= seg_end && !long_enough(i, j)) ++j;
      if (j > seg_end) break;
      const Pixel p0 = px_at(i);
      Extent ext{p0.x, p0.x, p0.y, p0.y};
      for (std::int64_t k = i + 1; k <= j; ++k) ext.add(px_at(k));
      if (ext.dispersion() > cfg.dispersion_px) {
        ++i;
        continue;
      }
      while (j + 1 <= seg_end) {
        Extent grown = ext;
        grown.add(px_at(j + 1));
        if (grown.dispersion() > cfg.dispersion_px) break;
        ext = grown;
        ++j;
      }
      out.push_back(make_fixation(Target::off_target(), hits, i, j, tl, convention));
      i = j + 1;
    }
    seg = seg_end + 1;
  }
  return out;
}

TrialRecord build_trial(std::vector<FrameHit> hits, std::span<const Fixation> aoi_fixations,
                        std::span<const Fixation> off_fixations, const FrameTimeline& tl) {
  TrialRecord trial;
  trial.timeline = tl;
  trial.fixations.assign(aoi_fixations.begin(), aoi_fixations.end());
  trial.fixations.insert(trial.fixations.end(), off_fixations.begin(), off_fixations.end());
  std::sort(trial.fixations.begin(), trial.fixations.end(), [](const Fixation& a, const Fixation& b) {
    return std::tie(a.start_us, a.first_frame) < std::tie(b.start_us, b.first_frame);
  });
  for (std::size_t k = 0; k < trial.fixations.size(); ++k) {
    const auto& f = trial.fixations[k];
    if (f.first_frame > f.last_frame) throw InvariantError("fixation with first_frame > last_frame");
    if (k > 0 && trial.fixations[k - 1].last_frame >= f.first_frame) {
      throw InvariantError("fixations overlap at frame " + std::to_string(f.first_frame));
    }
  }
  trial.hits = std::move(hits);
  trial.trial_duration_us = tl.frame_count * tl.frame_period_us();
  return trial;
}

}  // namespace gazemap
