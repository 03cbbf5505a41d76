#include <doctest.h>

#include "gazemap/error.hpp"
#include "gazemap/mask_store.hpp"
#include "helpers.hpp"

using namespace gazemap;

TEST_CASE("trivial run-length masks") {
  const Bitmap none = decode_rle(RleMask(4, 5, {20}));
  CHECK(none.area() == 0);
  const Bitmap all = decode_rle(RleMask(4, 5, {0, 20}));
  CHECK(all.area() == 20);
  CHECK_THROWS_AS(decode_rle(RleMask(4, 5, {19})), FormatError);
}

TEST_CASE("runs are column-major") {
  // 3 rows x 2 columns, only (x=1, y=0) set: linear index 1*3+0 = 3
  const RleMask m(3, 2, {3, 1, 2});
  const Bitmap b = decode_rle(m);
  CHECK(b.at(1, 0));
  CHECK(b.area() == 1);
  CHECK(m.contains(1, 0));
  CHECK_FALSE(m.contains(0, 0));
  CHECK(m.bbox() == BBox{1, 0, 1, 0});
  CHECK(encode_rle(b) == m);
}

TEST_CASE("encode/decode identity on 200 random 32x32 masks") {
  std::mt19937 rng(42);
  for (int i = 0; i < 200; ++i) {
    const Bitmap b = testutil::random_bitmap(rng, 32, 32, (i % 10) / 10.0);
    const RleMask m = encode_rle(b);
    CHECK(m.canonical());
    CHECK(decode_rle(m) == b);
    CHECK(m.area() == b.area());
  }
}

TEST_CASE("point_in_instance equals bitmap lookup on 50 random instances") {
  std::mt19937 rng(9);
  int checked = 0;
  while (checked < 50) {
    const Bitmap b = testutil::random_bitmap(rng, 32, 32, 0.05 + 0.02 * checked);
    if (b.area() == 0) continue;
    const Instance inst = make_instance("i", "H1", 0.9, encode_rle(b));
    for (int x = 0; x < 32; ++x)
      for (int y = 0; y < 32; ++y) REQUIRE(point_in_instance({x, y}, inst) == b.at(x, y));
    ++checked;
  }
  const Instance inst = testutil::rect_instance("r", "H1", 0.9, 32, 32, 10, 10, 12, 12);
  CHECK_FALSE(point_in_instance({2, 2}, inst));
  CHECK_THROWS_AS(point_in_instance({32, 0}, inst), ContractError);
}

TEST_CASE("bbox is tight") {
  const Instance inst = testutil::rect_instance("r", "H1", 0.9, 40, 30, 5, 7, 20, 9);
  CHECK(inst.bbox == BBox{5, 7, 20, 9});
  CHECK_THROWS_AS(make_instance("e", "H1", 0.9, RleMask(3, 3, {9})), ContractError);
}

TEST_CASE("excavator instance covers (1343,736)") {
  const Instance exc = testutil::rect_instance("exc-0", "Excavator", 0.93, 1920, 1080, 1200, 600, 1500, 850);
  CHECK(point_in_instance({1343, 736}, exc));
  FrameMasks frame{3, {exc}};
  CHECK(hit_test({1343, 736}, frame, kDefaultScoreThreshold) == "Excavator");
}

TEST_CASE("hit test and tie-breaks") {
  FrameMasks empty{0, {}};
  CHECK_FALSE(hit_test({5, 5}, empty, 0.7).has_value());

  const Instance a = testutil::rect_instance("a", "H1", 0.9, 20, 20, 0, 0, 9, 9);
  const Instance b = testutil::rect_instance("b", "H2", 0.8, 20, 20, 5, 5, 7, 7);
  const Instance low = testutil::rect_instance("c", "H3", 0.5, 20, 20, 0, 0, 19, 19);
  FrameMasks frame{0, {b, a, low}};
  CHECK(hit_test({6, 6}, frame, 0.7) == "H1");
  CHECK(hit_test({6, 6}, frame, 0.7, TieBreak::area_score_id) == "H2");
  CHECK(hit_test({15, 15}, frame, 0.7) == std::nullopt);
  CHECK(hit_test({15, 15}, frame, 0.5) == "H3");

  // equal score: smaller area wins; equal area: lower id wins
  const Instance big = testutil::rect_instance("z", "big", 0.8, 20, 20, 0, 0, 9, 9);
  const Instance same = testutil::rect_instance("a2", "same", 0.8, 20, 20, 5, 5, 7, 7);
  FrameMasks tie{0, {big, b, same}};
  CHECK(hit_test({6, 6}, tie, 0.7) == "same");
}

TEST_CASE("dilation") {
  const Instance dot = testutil::rect_instance("d", "H1", 0.9, 11, 11, 5, 5, 5, 5);
  CHECK(dilate_instance(dot, 0) == dot);
  const Instance grown = dilate_instance(dot, 1);
  CHECK(grown.mask.area() == 9);
  CHECK(grown.bbox == BBox{4, 4, 6, 6});
  for (int x = 4; x <= 6; ++x)
    for (int y = 4; y <= 6; ++y) CHECK(point_in_instance({x, y}, grown));

  const Instance corner = testutil::rect_instance("c", "H1", 0.9, 11, 11, 0, 0, 0, 0);
  CHECK(dilate_instance(corner, 2).mask.area() == 9);

  std::mt19937 rng(5);
  for (int i = 0; i < 30; ++i) {
    const Bitmap b = testutil::random_bitmap(rng, 24, 17, 0.08);
    if (b.area() == 0) continue;
    const Instance inst = make_instance("r", "H1", 0.9, encode_rle(b));
    const Bitmap d = decode_rle(dilate_instance(inst, 1).mask);
    CHECK(d.area() >= b.area());
    for (int x = 0; x < 24; ++x)
      for (int y = 0; y < 17; ++y) {
        if (b.at(x, y)) CHECK(d.at(x, y));
        // brute-force 3x3 neighbourhood
        bool any = false;
        for (int dx = -1; dx <= 1; ++dx)
          for (int dy = -1; dy <= 1; ++dy) {
            const int xx = x + dx, yy = y + dy;
            if (xx >= 0 && yy >= 0 && xx < 24 && yy < 17 && b.at(xx, yy)) any = true;
          }
        REQUIRE(d.at(x, y) == any);
      }
  }
}

TEST_CASE("mask file loading and validation") {
  const std::string minimal =
      R"({"resolution":[4,3],"classes":{"H1":"machine"},"frames":[{"frame":0,"instances":[)"
      R"({"id":"a","label":"H1","score":0.9,"bbox":[1,0,1,0],"rle":{"size":[3,4],"counts":[3,1,8]}}]}]})";
  const MaskSet set = load_maskset_document(minimal);
  CHECK(set.frames.size() == 1);
  CHECK(set.frame(0) != nullptr);
  CHECK(set.frame(1) == nullptr);

  std::string bad = minimal;
  bad.replace(bad.find("[3,1,8]"), 7, "[3,1,7]");
  CHECK_THROWS_WITH_AS(load_maskset_document(bad), doctest::Contains("frame 0, instance 0"), FormatError);

  std::string unknown = minimal;
  unknown.replace(unknown.find("\"label\":\"H1\""), 12, "\"label\":\"H9\"");
  CHECK_FALSE(validate_maskset(parse_maskset(nlohmann::json::parse(unknown))).ok());

  // frames with no instances and files with no frames are valid
  CHECK(validate_maskset(parse_maskset(nlohmann::json::parse(
                             R"({"resolution":[4,3],"classes":{},"frames":[{"frame":2,"instances":[]}]})")))
            .ok());
  CHECK(validate_maskset(parse_maskset(nlohmann::json::parse(R"({"resolution":[4,3],"classes":{},"frames":[]})")))
            .ok());
  CHECK_THROWS_WITH_AS(load_maskset("/nonexistent/masks.json"), doctest::Contains("/nonexistent/masks.json"),
                       FormatError);
}

TEST_CASE("save/load round trip on random mask sets") {
  std::mt19937 rng(11);
  for (int round = 0; round < 20; ++round) {
    MaskSet set;
    set.resolution = {16, 12};
    set.class_table = {{"H1", "a"}, {"H2", "b"}};
    for (int f = 0; f < 5; ++f) {
      if (rng() % 3 == 0) continue;
      FrameMasks fm{f, {}};
      for (int k = 0; k < int(rng() % 4); ++k) {
        const Bitmap b = testutil::random_bitmap(rng, 16, 12, 0.2);
        if (b.area() == 0) continue;
        fm.instances.push_back(make_instance("i" + std::to_string(k), k % 2 ? "H1" : "H2",
                                             (rng() % 1000) / 1000.0, encode_rle(b)));
      }
      set.frames.emplace(f, std::move(fm));
    }
    CHECK(load_maskset_document(serialize_maskset(set)) == set);
  }
}
