#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "../support/expect_error.hpp"
#include "trackkit/config.hpp"
#include "trackkit/fileutil.hpp"
#include "trackkit/io.hpp"

using namespace trackkit;
using testing_support::error_code_of;

TEST_CASE("rle json accepts both count forms") {
  const RleMask r{3, 3, {0, 1, 8}};
  CHECK(rle_to_json(r)["counts"].is_string());
  CHECK(rle_to_json(r, RleFormat::array)["counts"] == Json::array({0, 1, 8}));
  CHECK(rle_from_json(rle_to_json(r)) == r);
  CHECK(rle_from_json(rle_to_json(r, RleFormat::array)) == r);
  CHECK(error_code_of([] { rle_from_json(Json{{"size", {2, 2}}, {"counts", {3, 2}}}); }) == ErrorCode::SumMismatch);
  CHECK(error_code_of([] { rle_from_json(Json{{"size", {2}}, {"counts", {4}}}); }) == ErrorCode::MalformedInput);
}

TEST_CASE("detections json") {
  const Json bare = Json::parse(R"([
    {"frame": 0, "bbox": [1, 2, 3, 4], "score": 0.9},
    {"frame": 2, "bbox": [1, 2, 3, 4], "score": 0.5, "modality": "event",
     "segmentation": {"size": [3, 3], "counts": [0, 1, 8]}}
  ])");
  const auto seqs = parse_detections(bare, "clip");
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].id == "clip");
  CHECK(seqs[0].length == 3);
  REQUIRE(seqs[0].detections.size() == 2);
  CHECK(seqs[0].detections[0].box == Box{1, 2, 3, 4});
  CHECK(!seqs[0].detections[0].mask);
  CHECK(seqs[0].detections[1].modality == Modality::event);

  const auto again = parse_detections(detection_sequences_to_json(seqs), "x");
  REQUIRE(again.size() == 1);
  CHECK(again[0].detections == seqs[0].detections);

  CHECK(error_code_of([] { parse_detections(Json::parse(R"([{"frame": 0, "bbox": [1,2,3,4], "score": 1, "oops": 1}])"), "x"); }) ==
        ErrorCode::MalformedInput);
  CHECK(error_code_of([] { parse_detections(Json::parse(R"([{"frame": 0, "bbox": [1,2,3], "score": 1}])"), "x"); }) ==
        ErrorCode::MalformedInput);
}

TEST_CASE("sequences json round-trip") {
  SequenceTracks s{"seq", 2, {InstanceTrack{4, 0.75, {RleMask{3, 3, {0, 1, 8}}, std::nullopt}}}};
  for (const auto fmt : {RleFormat::string, RleFormat::array}) {
    const auto back = parse_sequences(sequences_to_json({s}, true, fmt), true);
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == "seq");
    CHECK(back[0].instances[0].score == 0.75);
    CHECK(back[0].instances[0].segmentations == s.instances[0].segmentations);
  }
  Json wrong = sequences_to_json({s}, true);
  wrong["sequences"][0]["length"] = 3;
  CHECK(error_code_of([&] { parse_sequences(wrong, true); }) == ErrorCode::MalformedInput);
}

TEST_CASE("tracklets json round-trip") {
  Tracklet t{3, {TrackEntry{0, {1, 1, 2, 2}, RleMask{3, 3, {0, 1, 8}}, 0.8, false},
                 TrackEntry{1, {1, 1, 2, 2}, std::nullopt, 0.8, true}}};
  const auto back = parse_tracklets(tracklets_to_json({t}));
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == 3);
  CHECK(back[0].entries == t.entries);
}

TEST_CASE("load_json reports a line number") {
  const auto p = std::filesystem::temp_directory_path() / "trackkit_unit_bad.json";
  {
    std::ofstream out(p);
    out << "{\n  \"a\": 1,\n  oops\n}\n";
  }
  try {
    load_json(p);
    FAIL("expected MalformedInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedInput);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::filesystem::remove(p);
}

TEST_CASE("atomic writes replace the target and leave no temporary behind") {
  const auto dir = std::filesystem::temp_directory_path() / "trackkit_unit_atomic";
  std::filesystem::remove_all(dir);
  write_file_atomic(dir / "sub" / "f.txt", "one");
  write_file_atomic(dir / "sub" / "f.txt", "two");
  CHECK(read_file(dir / "sub" / "f.txt") == "two");
  CHECK(std::distance(std::filesystem::directory_iterator(dir / "sub"), std::filesystem::directory_iterator{}) == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config") {
  SUBCASE("defaults carry the published values") {
    const PipelineConfig c;
    CHECK(c.tracker.track_buffer == 60);
    CHECK(c.merge.theta == 0.1);
    CHECK(c.denoise.window_size == 30000);
    CHECK(c.denoise.tau == 2.5);
    CHECK(c.voxel.bins == 10);
    CHECK(c.enhance.clip_limit == 2.0);
    CHECK(c.enhance.grid_rows == 8);
    CHECK(c.enhance.grid_cols == 8);
    CHECK(c.postprocess.dilate_iters == 4);
    CHECK(c.postprocess.erode_iters == 3);
    CHECK(c.tta.iou_gate == 0.3);
  }
  SUBCASE("round-trip") {
    PipelineConfig c;
    c.tracker.motion = MotionModel::static_box;
    c.tracker.noise.aspect_std = 0.5;
    c.voxel.polarity = PolarityMode::per_polarity;
    c.enhance.mode = EnhanceMode::he;
    c.tta.area_ratio_hi = 3.0;
    CHECK(config_from_json(config_to_json(c)) == c);
    CHECK(config_from_json(Json::parse(dump_json(config_to_json(PipelineConfig{})))) == PipelineConfig{});
  }
  SUBCASE("partial files keep defaults") {
    const PipelineConfig c = config_from_json(Json::parse(R"({"tracker": {"min_hits": 1}})"));
    CHECK(c.tracker.min_hits == 1);
    CHECK(c.tracker.track_buffer == 60);
  }
  SUBCASE("violations") {
    for (const char* text : {R"({"trackr": {}})", R"({"tracker": {"min_hit": 1}})", R"({"nms_iou": "x"})",
                             R"({"nms_iou": 2})", R"({"enhance": {"mode": "fancy"}})", R"({"voxel": {"bins": 0}})",
                             R"({"tracker": {"noise": {"bogus": 1}}})", R"([])"}) {
      CAPTURE(text);
      CHECK(error_code_of([&] { config_from_json(Json::parse(text)); }) == ErrorCode::ConfigViolation);
    }
  }
}
