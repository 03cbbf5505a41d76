#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gazemap/error.hpp"
#include "gazemap/metrics_report.hpp"

using namespace gazemap;

namespace {

Fixation fix(const std::string& label, std::int64_t first, std::int64_t frames) {
  Fixation f;
  f.target = label.empty() ? Target::off_target() : Target::aoi(label);
  f.first_frame = first;
  f.last_frame = first + frames - 1;
  f.start_us = first * 40000;
  f.duration_us = frames * 40000;
  f.end_us = f.start_us + f.duration_us;
  return f;
}

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(GAZEMAP_FIXTURES) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("dwell time") {
  std::vector<Fixation> fx;
  for (int i = 0; i < 21; ++i) fx.push_back(fix("H1", i * 20, 7));
  CHECK(dwell_time(fx, "H1") == 5880.0);
  CHECK(dwell_time(fx, "H2") == 0.0);
  const std::vector<Fixation> three{fix("H3", 0, 7), fix("H3", 10, 14), fix("H3", 30, 7)};
  CHECK(dwell_time(three, "H3") == 1120.0);
}

TEST_CASE("truncated ratio") {
  CHECK(truncate_ratio(26, 53) == 0.49);
  CHECK(truncate_ratio(13, 55) == 0.23);
  CHECK(truncate_ratio(20, 61) == 0.32);
  CHECK(truncate_ratio(0, 0) == 0.0);
  CHECK(truncate_ratio(1, 1) == 1.0);
}

TEST_CASE("compute_metrics") {
  TrialRecord trial;
  trial.timeline = {25.0, 703, 0, {1920, 1080}};
  trial.trial_duration_us = 703 * 40000;
  for (int i = 0; i < 26; ++i) trial.fixations.push_back(fix(i < 21 ? "H1" : "H3", i * 20, 7));
  for (int i = 0; i < 27; ++i) trial.fixations.push_back(fix("", 600 + i, 7));
  const std::vector<std::string> labels{"H1", "H2", "H3"};
  const TrialMetrics m = compute_metrics(trial, labels);
  CHECK(m.trial_duration_ms == 28120.0);
  CHECK(m.dwell_ms.at("H1") == 5880.0);
  CHECK(m.dwell_ms.at("H2") == 0.0);
  CHECK(m.dwell_ms.at("H3") == 1400.0);
  CHECK(m.fixation_count == 53);
  CHECK(m.on_target_count == 26);
  CHECK(m.tfr_exact == doctest::Approx(0.4906).epsilon(1e-4));
  CHECK(m.tfr_reported == 0.49);

  TrialRecord empty;
  const TrialMetrics z = compute_metrics(empty);
  CHECK(z.fixation_count == 0);
  CHECK(z.tfr_exact == 0.0);
  CHECK(z.tfr_reported == 0.0);
}

TEST_CASE("metrics table rows") {
  TrialMetrics p1;
  p1.trial_duration_ms = 25410;
  p1.dwell_ms = {{"H1", 5880}, {"H2", 0}, {"H3", 1400}};
  p1.fixation_count = 53;
  p1.on_target_count = 26;
  p1.tfr_exact = 26.0 / 53.0;
  p1.tfr_reported = 0.49;
  const std::vector<NamedMetrics> rows{{"Participant_1", p1}, {"empty", TrialMetrics{}}};
  const std::string table = metrics_table(rows);
  CHECK(table ==
        "trial,trial_duration_ms,DT_H1_ms,DT_H2_ms,DT_H3_ms,FC,TFR\n"
        "Participant_1,25410,5880,0,1400,53,0.49\n"
        "empty,0,0,0,0,0,0.00\n");
}

TEST_CASE("metrics serialize round trip") {
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    TrialMetrics m;
    m.trial_duration_ms = (rng() % 100000) / 2.0;
    m.dwell_ms["H1"] = (rng() % 10000) / 4.0;
    m.dwell_ms["H2"] = 0.0;
    m.fixation_count = rng() % 100 + 1;
    m.on_target_count = rng() % (m.fixation_count + 1);
    m.tfr_exact = double(m.on_target_count) / double(m.fixation_count);
    m.tfr_reported = truncate_ratio(m.on_target_count, m.fixation_count);
    CHECK(metrics_from_json(nlohmann::json::parse(metrics_to_json(m).dump())) == m);
  }
}

TEST_CASE("validation of the 25-frame field check") {
  const auto sys = parse_labeled_points(nlohmann::json::parse(fixture("field_check_system.json")));
  const auto gt = parse_labeled_points(nlohmann::json::parse(fixture("field_check_truth.json")));
  REQUIRE(sys.size() == 25);
  const ValidationReport r = validate(sys, gt);
  CHECK(r.matches == 22);
  CHECK(r.accuracy == 0.88);
  CHECK_FALSE(r.rows[1].match);
  CHECK(r.rows[1].sys_label == "Off-target");
  CHECK(r.rows[1].gt_label == "Electrical");
  CHECK(r.rows[1].remark == "Error in mask");
  CHECK(r.rows[17].remark == "Object detection failure");
  CHECK(r.deviation.compared == 25);
  CHECK(r.deviation.displaced > 0);

  CHECK(validate(gt, gt).accuracy == 1.0);

  auto shifted = gt;
  shifted[0].frame = 99;
  CHECK_THROWS_AS(validate(sys, shifted), FormatError);
  auto dup = gt;
  dup[1].frame = dup[0].frame;
  CHECK_THROWS_AS(validate(dup, dup), FormatError);
}

TEST_CASE("trial report round trip") {
  TrialRecord trial;
  trial.timeline = {25.0, 3, 0, {10, 10}};
  trial.trial_duration_us = 120000;
  trial.hits = {{0, Pixel{1, 2}, Target::aoi("H1")}, {1, Pixel{3, 4}, Target::off_target()}, {2, {}, Target::no_gaze()}};
  trial.fixations = {fix("H1", 0, 1)};
  trial.fixations[0].centroid_x = 1.5;
  const TrialMetrics m = compute_metrics(trial, std::vector<std::string>{"H1"});
  const TrialReport r = parse_trial_report(nlohmann::json::parse(serialize_trial_report(trial, m, {{"k", 1}})));
  CHECK(r.metrics == m);
  CHECK(r.fixations == trial.fixations);
  CHECK(r.frames == trial.hits);
  CHECK(r.timeline == trial.timeline);
  const auto pts = report_points(r);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].label == "H1");
  CHECK(pts[1].label == "Off-target");
  CHECK(pts[2].label == "No-gaze");
}
