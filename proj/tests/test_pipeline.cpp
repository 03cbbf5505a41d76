#include <doctest.h>

#include <algorithm>

#include "gazemap/error.hpp"
#include "gazemap/pipeline.hpp"
#include "gazemap/scenario_sim.hpp"

using namespace gazemap;

namespace {

sim::ScenarioSpec one_dwell_spec() {
  sim::ScenarioSpec spec;
  spec.seed = 4;
  spec.timeline = {25.0, 30, 0, {640, 480}};
  spec.classes = {{"H1", "machine"}};
  sim::Actor a;
  a.id = "exc";
  a.label = "H1";
  a.width = 100;
  a.height = 60;
  a.path = {{0, {200, 200}}};
  spec.actors.push_back(a);
  spec.gaze_script = {{sim::SegmentKind::dwell, 10, "", sim::Point{500, 400}, {}, {}},
                      {sim::SegmentKind::saccade, 3, "", {}, {}, {}},
                      {sim::SegmentKind::dwell, 10, "exc", {}, {}, {}},
                      {sim::SegmentKind::dropout, 7, "", {}, {}, {}}};
  return spec;
}

TrialMetrics run(const sim::ScenarioOutput& out, const PipelineConfig& cfg) {
  const MaskSet masks = load_maskset_document(out.mask_file);
  std::vector<std::string> labels;
  for (const auto& [k, v] : masks.class_table) labels.push_back(k);
  return compute_metrics(
      map_trial(parse_gaze_stream(out.gaze_log).stream, masks, parse_video_meta(out.meta_file), cfg), labels);
}

}  // namespace

TEST_CASE("config parsing") {
  CHECK(parse_config(nlohmann::json::object()) == PipelineConfig{});
  const auto cfg = parse_config(nlohmann::json::parse(
      R"({"score_threshold":0.5,"tie_break":"area_score_id","min_consecutive":5,"gap_tolerance":1,)"
      R"("duration_convention":"endpoint_difference","dispersion_px":40,"min_duration_ms":200,)"
      R"("dilation_radius":2,"max_staleness_us":15000})"));
  CHECK(cfg.score_threshold == 0.5);
  CHECK(cfg.tie_break == TieBreak::area_score_id);
  CHECK(cfg.run.min_consecutive == 5);
  CHECK(cfg.run.gap_tolerance_frames == 1);
  CHECK(cfg.run.duration == DurationConvention::endpoint_difference);
  CHECK(cfg.idt.dispersion_px == 40);
  CHECK(cfg.idt.min_duration_ms == 200);
  CHECK(cfg.dilation_radius == 2);
  CHECK(cfg.alignment.max_staleness_us == 15000);
  CHECK(parse_config(nlohmann::json::parse(config_to_json(cfg).dump())) == cfg);

  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"bogus":1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"score_threshold":1.5})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"tie_break":"random"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"min_consecutive":0})")), ConfigError);
}

TEST_CASE("one 10-frame dwell on an H1 rectangle") {
  const auto spec = one_dwell_spec();
  const auto out = sim::generate(spec);
  const auto& gt = out.truth;
  REQUIRE(gt.fixations.size() == 2);
  CHECK(gt.fixations[0].target == Target::off_target());
  CHECK(gt.fixations[1].target == Target::aoi("H1"));
  CHECK(gt.fixations[1].duration_us == 400000);
  CHECK(gt.metrics.dwell_ms.at("H1") == 400.0);
  CHECK(run(out, spec.config) == gt.metrics);
  CHECK(std::count(gt.targets.begin(), gt.targets.end(), Target::no_gaze()) == 7);
  CHECK(sim::oracle_map(out.gaze_log, out.mask_file, out.meta_file, spec.config).metrics == gt.metrics);
}

TEST_CASE("generation is deterministic") {
  const auto a = sim::generate(one_dwell_spec());
  const auto b = sim::generate(one_dwell_spec());
  CHECK(a.gaze_log == b.gaze_log);
  CHECK(a.mask_file == b.mask_file);
  CHECK(a.meta_file == b.meta_file);
  CHECK(sim::ground_truth_to_json(a.truth).dump() == sim::ground_truth_to_json(b.truth).dump());
}

TEST_CASE("scenario spec round trip") {
  const auto spec = one_dwell_spec();
  CHECK(sim::parse_scenario(nlohmann::json::parse(sim::scenario_to_json(spec).dump())) == spec);
  const auto r = sim::random_scenario(17);
  CHECK(sim::parse_scenario(nlohmann::json::parse(sim::scenario_to_json(r).dump())) == r);
}

TEST_CASE("invalid scenarios are rejected") {
  auto spec = one_dwell_spec();
  spec.gaze_script.back().frames = 6;
  CHECK_THROWS_AS(sim::generate(spec), FormatError);

  spec = one_dwell_spec();
  spec.timeline.fps = 30.0;
  CHECK_THROWS_AS(sim::generate(spec), FormatError);

  spec = one_dwell_spec();
  spec.gaze_script[2].target = "nobody";
  CHECK_THROWS_AS(sim::generate(spec), FormatError);

  spec = one_dwell_spec();
  spec.actors[0].path = {{0, {20, 20}}};
  CHECK_THROWS_AS(sim::generate(spec), FormatError);

  // second dwell point too close to the first: saccade steps would be ambiguous
  spec = one_dwell_spec();
  spec.gaze_script[2] = {sim::SegmentKind::dwell, 10, "", sim::Point{510, 400}, {}, {}};
  CHECK_THROWS_AS(sim::generate(spec), FormatError);
}

TEST_CASE("scenario without actors has no AOI fixations") {
  auto spec = one_dwell_spec();
  spec.actors.clear();
  spec.gaze_script[2].target.clear();
  spec.gaze_script[2].point = sim::Point{100, 100};
  const auto out = sim::generate(spec);
  CHECK(out.truth.metrics.on_target_count == 0);
  CHECK(run(out, spec.config).on_target_count == 0);
  CHECK(sim::oracle_map(out.gaze_log, out.mask_file, out.meta_file, spec.config).metrics.on_target_count == 0);
}

TEST_CASE("703-frame trial: one hit per frame, counts match ground truth") {
  sim::TrialPlan plan;
  plan.aoi_dwells = {{"H1", 21}, {"H3", 5}};
  plan.off_target_dwells = 27;
  const auto spec = sim::plan_trial(plan);
  const auto out = sim::generate(spec);
  const auto trial = map_trial(parse_gaze_stream(out.gaze_log).stream, load_maskset_document(out.mask_file),
                               parse_video_meta(out.meta_file), spec.config);
  REQUIRE(trial.hits.size() == 703);
  for (std::size_t i = 0; i < trial.hits.size(); ++i) {
    CHECK(trial.hits[i].target == out.truth.targets[i]);
    CHECK(trial.hits[i].gaze_px == out.truth.gaze_px[i]);
  }
  CHECK(trial.fixations == out.truth.fixations);
  CHECK(std::count_if(trial.fixations.begin(), trial.fixations.end(),
                      [](const Fixation& f) { return f.target == Target::off_target(); }) == 27);
  CHECK(trial.fixations.size() == 53);
}

TEST_CASE("fixations are ordered on random scenarios") {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto spec = sim::random_scenario(seed);
    const auto out = sim::generate(spec);
    const auto trial = map_trial(parse_gaze_stream(out.gaze_log).stream, load_maskset_document(out.mask_file),
                                 parse_video_meta(out.meta_file), spec.config);
    CHECK(std::is_sorted(trial.fixations.begin(), trial.fixations.end(),
                         [](const Fixation& a, const Fixation& b) { return a.start_us < b.start_us; }));
  }
}

TEST_CASE("dilation widens hits consistently with the oracle") {
  auto spec = one_dwell_spec();
  spec.gaze_script[2].target.clear();
  spec.gaze_script[2].point = sim::Point{252.5, 200};  // just right of the rectangle edge
  const auto out = sim::generate(spec);
  CHECK(run(out, spec.config).on_target_count == 0);
  PipelineConfig cfg = spec.config;
  cfg.dilation_radius = 3;
  const auto dilated = run(out, cfg);
  CHECK(dilated.on_target_count == 1);
  CHECK(sim::oracle_map(out.gaze_log, out.mask_file, out.meta_file, cfg).metrics == dilated);
}
