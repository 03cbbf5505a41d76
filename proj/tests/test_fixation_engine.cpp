#include <doctest.h>

#include "gazemap/error.hpp"
#include "gazemap/fixation_engine.hpp"
#include "helpers.hpp"

using namespace gazemap;

namespace {

const FrameTimeline kTl{25.0, 100, 0, {1920, 1080}};

// Hits for a label sequence: "1" = H1, "3" = H3, "." = off-target at a
// spread-out location, "o" = off-target at a fixed spot, "_" = no gaze.
std::vector<FrameHit> hits_from(const std::string& seq) {
  std::vector<FrameHit> hits;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    FrameHit h;
    h.frame_index = static_cast<std::int64_t>(i);
    switch (seq[i]) {
      case '1':
        h.target = Target::aoi("H1");
        h.gaze_px = Pixel{300, 150};
        break;
      case '3':
        h.target = Target::aoi("H3");
        h.gaze_px = Pixel{1600, 150};
        break;
      case '.':
        h.target = Target::off_target();
        h.gaze_px = Pixel{static_cast<int>(i * 97 % 1800), static_cast<int>(i * 61 % 1000)};
        break;
      case 'o':
        h.target = Target::off_target();
        h.gaze_px = Pixel{800, 900};
        break;
      default:
        h.target = Target::no_gaze();
    }
    hits.push_back(h);
  }
  return hits;
}

}  // namespace

TEST_CASE("seven-frame rule") {
  const RunConfig cfg;
  CHECK(detect_aoi_fixations(hits_from("..111111.."), cfg, kTl).empty());

  const auto seven = detect_aoi_fixations(hits_from("..1111111.."), cfg, kTl);
  REQUIRE(seven.size() == 1);
  CHECK(seven[0].duration_us == 280000);
  CHECK(seven[0].first_frame == 2);
  CHECK(seven[0].last_frame == 8);
  CHECK(seven[0].start_us == 80000);
  CHECK(seven[0].end_us == 360000);

  const auto fourteen = detect_aoi_fixations(hits_from("11111111111111"), cfg, kTl);
  REQUIRE(fourteen.size() == 1);
  CHECK(fourteen[0].duration_us == 560000);
}

TEST_CASE("label changes split runs; gap tolerance bridges no-gaze frames") {
  CHECK(detect_aoi_fixations(hits_from("11113333333"), RunConfig{}, kTl).size() == 1);
  CHECK(detect_aoi_fixations(hits_from("1111_111"), RunConfig{}, kTl).empty());
  RunConfig tolerant;
  tolerant.gap_tolerance_frames = 1;
  const auto bridged = detect_aoi_fixations(hits_from("1111_111"), tolerant, kTl);
  REQUIRE(bridged.size() == 1);
  CHECK(bridged[0].frame_span() == 8);
  CHECK(detect_aoi_fixations(hits_from("1111__111"), tolerant, kTl).empty());
}

TEST_CASE("endpoint-difference convention") {
  RunConfig cfg;
  cfg.duration = DurationConvention::endpoint_difference;
  const auto fx = detect_aoi_fixations(hits_from("1111111"), cfg, kTl);
  REQUIRE(fx.size() == 1);
  CHECK(fx[0].duration_us == 240000);
}

TEST_CASE("off-target dispersion detection") {
  const IdtConfig idt;
  const auto conv = DurationConvention::inclusive;
  // 300 ms stationary on background
  const auto hits = hits_from("........ooooooo.......");
  const auto aoi = detect_aoi_fixations(hits, RunConfig{}, kTl);
  const auto off = detect_offtarget_fixations(hits, aoi, idt, kTl, conv);
  REQUIRE(off.size() == 1);
  CHECK(off[0].first_frame == 8);
  CHECK(off[0].last_frame == 14);
  CHECK(off[0].target == Target::off_target());

  // fast sweep never settles
  std::vector<FrameHit> sweep;
  for (int i = 0; i < 40; ++i) {
    sweep.push_back({i, Pixel{i * 80, 500}, Target::off_target()});
  }
  CHECK(detect_offtarget_fixations(sweep, {}, idt, kTl, conv).empty());

  // six stationary frames are too short
  CHECK(detect_offtarget_fixations(hits_from("..oooooo.."), {}, idt, kTl, conv).empty());
  // frames inside an AOI fixation are never reused
  const auto mixed = hits_from("1111111");
  CHECK(detect_offtarget_fixations(mixed, detect_aoi_fixations(mixed, RunConfig{}, kTl), idt, kTl, conv).empty());
}

TEST_CASE("build_trial orders fixations and keeps duration") {
  const auto hits = hits_from("ooooooo..1111111..3333333");
  const auto aoi = detect_aoi_fixations(hits, RunConfig{}, kTl);
  const auto off = detect_offtarget_fixations(hits, aoi, IdtConfig{}, kTl, DurationConvention::inclusive);
  const TrialRecord trial = build_trial(hits, aoi, off, kTl);
  REQUIRE(trial.fixations.size() == 3);
  CHECK(trial.fixations[0].target == Target::off_target());
  CHECK(trial.fixations[1].target == Target::aoi("H1"));
  CHECK(trial.fixations[2].target == Target::aoi("H3"));
  CHECK(trial.trial_duration_us == 100 * 40000);

  const TrialRecord empty = build_trial(hits_from("...."), {}, {}, kTl);
  CHECK(empty.fixations.empty());
  CHECK(empty.trial_duration_us == 4000000);

  CHECK_THROWS_AS(build_trial(hits, aoi, aoi, kTl), InvariantError);
}

TEST_CASE("classify frames against masks") {
  const FrameTimeline tl{25.0, 3, 0, {100, 100}};
  MaskSet masks;
  masks.resolution = {100, 100};
  masks.frames.emplace(1, FrameMasks{1, {testutil::rect_instance("a", "H1", 0.9, 100, 100, 40, 40, 60, 60)}});
  const std::vector<TrackPoint> track{{0, 0.5, 0.5}, {40000, 0.5, 0.5}};
  const auto hits = classify_frames(tl, track, masks, 0.7, TieBreak::score_area_id, AlignmentPolicy{});
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].target == Target::off_target());
  CHECK(hits[1].target == Target::aoi("H1"));
  CHECK(hits[1].gaze_px == Pixel{50, 50});
  CHECK(hits[2].target == Target::no_gaze());
  CHECK_FALSE(hits[2].gaze_px.has_value());

  masks.resolution = {200, 100};
  CHECK_THROWS_AS(classify_frames(tl, track, masks, 0.7, TieBreak::score_area_id, AlignmentPolicy{}), FormatError);
}

TEST_CASE("config checks") {
  RunConfig run;
  run.min_consecutive = 0;
  CHECK_THROWS_AS(check_run_config(run), ConfigError);
  IdtConfig idt;
  idt.dispersion_px = -1;
  CHECK_THROWS_AS(check_idt_config(idt), ConfigError);
}
