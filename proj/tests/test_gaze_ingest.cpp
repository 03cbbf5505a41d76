#include <doctest.h>

#include "gazemap/error.hpp"
#include "gazemap/gaze_ingest.hpp"
#include "helpers.hpp"

using namespace gazemap;

TEST_CASE("single gp record maps field by field") {
  const auto r = parse_gaze_stream(R"({"ts":1000000,"type":"gp","gp":[0.5,0.5],"s":0})");
  REQUIRE(r.stream.samples().size() == 1);
  const GazeSample& s = r.stream.samples()[0];
  CHECK(s.ts_us == 1000000);
  CHECK(s.kind == SampleKind::gp);
  CHECK(s.eye == Eye::combined);
  CHECK(s.values == std::vector<double>{0.5, 0.5});
  CHECK(s.valid);
  CHECK(r.issues.empty());
}

TEST_CASE("empty or mostly broken input is fatal") {
  CHECK_THROWS_AS(parse_gaze_stream(""), FormatError);
  CHECK_THROWS_WITH_AS(parse_gaze_stream("\n# only a comment\n"), doctest::Contains("no records"), FormatError);
  CHECK_THROWS_AS(parse_gaze_stream("{\"ts\":0,\"type\":\"gp\",\"gp\":[0.1,0.1],\"s\":0}\nnope\nnope\n"),
                  FormatError);
}

TEST_CASE("malformed lines are skipped and reported") {
  const std::string text =
      "{\"ts\":0,\"type\":\"gp\",\"gp\":[0.1,0.1],\"s\":0}\n"
      "{\"ts\":1.5,\"type\":\"gp\",\"gp\":[0.1,0.1],\"s\":0}\n"
      "{\"ts\":10000,\"type\":\"gp\",\"gp\":[0.2,0.2],\"s\":0}\n"
      "{\"ts\":20000,\"type\":\"gp\",\"gp\":[0.2],\"s\":0}\n"
      "{\"ts\":30000,\"type\":\"gp\",\"gp\":[0.3,0.3],\"s\":0}\n"
      "{\"ts\":40000,\"type\":\"gp\",\"gp\":[0.4,0.4],\"s\":0}\n";
  const auto r = parse_gaze_stream(text);
  CHECK(r.stream.samples().size() == 4);
  REQUIRE(r.issues.size() == 2);
  CHECK(r.issues[0].line == 2);
  CHECK(r.issues[1].line == 4);
}

TEST_CASE("28.10 s gapless log: 2811 samples at 100 Hz") {
  const auto r = parse_gaze_stream(testutil::gp_log(2811));
  const StreamStats st = stream_stats(r.stream);
  CHECK(st.count(SampleKind::gp) == 2811);
  CHECK(st.gap_count == 0);
  CHECK(st.measured_rate_hz == doctest::Approx(100.0));
  CHECK(r.stream.duration_us() == 28100000);
  CHECK(gaze_track(r.stream).size() == 2811);
}

TEST_CASE("track keeps only valid combined gp samples") {
  const std::string text =
      "{\"ts\":0,\"type\":\"pc\",\"pc\":[1,2,3],\"s\":0}\n"
      "{\"ts\":0,\"type\":\"pd\",\"pd\":3.1,\"s\":0}\n"
      "{\"ts\":0,\"type\":\"gd\",\"gd\":[0,0,1],\"s\":0}\n"
      "{\"ts\":0,\"type\":\"gp\",\"gp\":[0.4,0.6],\"s\":0}\n"
      "{\"ts\":10000,\"type\":\"gp\",\"gp\":[0.4,0.6],\"s\":1}\n";
  const auto track = gaze_track(parse_gaze_stream(text).stream);
  REQUIRE(track.size() == 1);
  CHECK(track[0] == TrackPoint{0, 0.4, 0.6});

  CHECK(gaze_track(parse_gaze_stream("{\"ts\":0,\"type\":\"gp\",\"gp\":[0.4,0.6],\"s\":1}\n").stream).empty());
}

TEST_CASE("out of range gp is kept but invalid") {
  const auto r = parse_gaze_stream("{\"ts\":0,\"type\":\"gp\",\"gp\":[1.2,0.5],\"s\":0}\n");
  REQUIRE(r.stream.samples().size() == 1);
  CHECK_FALSE(r.stream.samples()[0].valid);
  CHECK(gaze_track(r.stream).empty());
}

TEST_CASE("per-eye gp rows merge when no combined row exists") {
  const std::string text =
      "{\"ts\":0,\"type\":\"gp\",\"eye\":\"left\",\"gp\":[0.2,0.4],\"s\":0}\n"
      "{\"ts\":0,\"type\":\"gp\",\"eye\":\"right\",\"gp\":[0.4,0.6],\"s\":0}\n"
      "{\"ts\":10000,\"type\":\"gp\",\"eye\":\"left\",\"gp\":[0.2,0.4],\"s\":0}\n"
      "{\"ts\":10000,\"type\":\"gp\",\"eye\":\"right\",\"gp\":[0.9,0.9],\"s\":1}\n"
      "{\"ts\":20000,\"type\":\"gp\",\"eye\":\"left\",\"gp\":[0.2,0.4],\"s\":0}\n"
      "{\"ts\":20000,\"type\":\"gp\",\"gp\":[0.7,0.7],\"s\":0}\n";
  const auto track = gaze_track(parse_gaze_stream(text).stream);
  REQUIRE(track.size() == 3);
  CHECK(track[0].x == doctest::Approx(0.3));
  CHECK(track[0].y == doctest::Approx(0.5));
  CHECK(track[1].x == doctest::Approx(0.2));
  CHECK(track[2].x == doctest::Approx(0.7));
}

TEST_CASE("gap counting") {
  std::string text = testutil::gp_log(10);
  // 50 ms hole: next sample at 140 ms instead of 100 ms
  text += "{\"ts\":140000,\"type\":\"gp\",\"gp\":[0.5,0.5],\"s\":0}\n";
  CHECK(stream_stats(parse_gaze_stream(text).stream).gap_count == 1);
}

TEST_CASE("per-kind counts match a generated mixed stream") {
  std::mt19937 rng(7);
  std::array<std::size_t, kSampleKindCount> expected{};
  std::vector<GazeSample> samples;
  for (int i = 0; i < 500; ++i) {
    const auto k = static_cast<SampleKind>(rng() % kSampleKindCount);
    GazeSample s;
    s.ts_us = i * 4000;
    s.kind = k;
    switch (k) {
      case SampleKind::gp:
        s.values = {0.25, 0.75};
        break;
      case SampleKind::pd:
        s.values = {3.0};
        break;
      case SampleKind::pc:
        s.values = {1.0, 2.0};
        break;
      default:
        s.values = {0.1, 0.2, 0.3};
    }
    ++expected[static_cast<std::size_t>(k)];
    samples.push_back(s);
  }
  const GazeStream stream(samples);
  const auto text = serialize_gaze_stream(stream);
  const auto parsed = parse_gaze_stream(text);
  CHECK(stream_stats(parsed.stream).sample_count == expected);
  CHECK(parsed.stream == stream);
}

TEST_CASE("stream order does not depend on line order") {
  const std::string a =
      "{\"ts\":10000,\"type\":\"gp\",\"gp\":[0.1,0.1],\"s\":0}\n{\"ts\":0,\"type\":\"pd\",\"pd\":2,\"s\":0}\n";
  const std::string b =
      "{\"ts\":0,\"type\":\"pd\",\"pd\":2,\"s\":0}\n{\"ts\":10000,\"type\":\"gp\",\"gp\":[0.1,0.1],\"s\":0}\n";
  CHECK(parse_gaze_stream(a).stream == parse_gaze_stream(b).stream);
}
