// Walks the on-disk corpus. Every document under valid/ must parse, and the
// frame files must survive a serialize/reparse round trip; every document
// under invalid/ must fail with the error kind named on its first line
// ("# expect: <Kind>").
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "sefm/error.hpp"
#include "sefm/frames.hpp"
#include "sefm/world.hpp"
#include "test_support.hpp"

using namespace sefm;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> corpus_files(const std::string& subdir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(fs::path(SEFM_CORPUS_DIR) / subdir))
    if (entry.is_regular_file()) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string expect_tag(const std::string& text) {
  const std::string marker = "# expect: ";
  REQUIRE_MESSAGE(text.rfind(marker, 0) == 0, "invalid corpus file lacks an expect tag");
  const auto eol = text.find('\n');
  return text.substr(marker.size(), eol - marker.size());
}

void check_frames_round_trip(const std::string& text) {
  const FrameLibrary lib = parse_frame_library(text);
  const std::string emitted = serialize_frame_library(lib);
  const FrameLibrary again = parse_frame_library(emitted);

  // The emitted form is a fixed point of the serializer.
  CHECK(serialize_frame_library(again) == emitted);

  REQUIRE(again.frames().size() == lib.frames().size());
  for (std::size_t i = 0; i < lib.frames().size(); ++i) {
    const SemanticFrame& a = lib.frames()[i];
    const SemanticFrame& b = again.frames()[i];
    CHECK(a.id == b.id);
    CHECK(a.verbs == b.verbs);
    CHECK(a.preconditions == b.preconditions);
    CHECK(a.actions == b.actions);
    CHECK(a.permanence == b.permanence);
    CHECK(a.movable_sigma == b.movable_sigma);
    REQUIRE(a.elements.size() == b.elements.size());
    for (std::size_t k = 0; k < a.elements.size(); ++k) {
      CHECK(a.elements[k].object_class == b.elements[k].object_class);
      CHECK(a.elements[k].role_schedule == b.elements[k].role_schedule);
    }
    REQUIRE(a.postconditions.size() == b.postconditions.size());
    for (std::size_t k = 0; k < a.postconditions.size(); ++k)
      CHECK(a.postconditions[k] == b.postconditions[k]);
  }
}

void check_scenario_reload(const std::string& text) {
  const World w1 = load_scenario(text, 4242);
  const World w2 = load_scenario(text, 4242);

  CHECK(w1.map().rooms.size() == w2.map().rooms.size());
  CHECK(w1.map().obstacles.size() == w2.map().obstacles.size());
  CHECK(w1.sensor().range == w2.sensor().range);
  CHECK(w1.sensor().fov == w2.sensor().fov);
  CHECK(w1.sensor().sigma_z == w2.sensor().sigma_z);
  CHECK(w1.sensor().miss_rate == w2.sensor().miss_rate);
  CHECK(w1.pose_level() == w2.pose_level());

  CHECK(w1.robot().pose.x == w2.robot().pose.x);
  CHECK(w1.robot().pose.y == w2.robot().pose.y);
  CHECK(w1.robot().pose.heading == w2.robot().pose.heading);
  CHECK(w1.robot().gripper == w2.robot().gripper);

  REQUIRE(w1.objects().size() == w2.objects().size());
  for (std::size_t i = 0; i < w1.objects().size(); ++i) {
    CHECK(w1.objects()[i].object_class == w2.objects()[i].object_class);
    CHECK(w1.objects()[i].position.x == w2.objects()[i].position.x);
    CHECK(w1.objects()[i].position.y == w2.objects()[i].position.y);
    CHECK(w1.objects()[i].flags == w2.objects()[i].flags);
  }
}

}  // namespace

TEST_CASE("valid corpus parses and round-trips") {
  const auto files = corpus_files("valid");
  REQUIRE(files.size() >= 9);
  for (const auto& path : files) {
    CAPTURE(path.filename().string());
    const std::string text = testsupport::read_file(path.string());
    REQUIRE(!text.empty());
    if (path.extension() == ".frames") {
      check_frames_round_trip(text);
    } else if (path.extension() == ".scenario") {
      check_scenario_reload(text);
    } else {
      FAIL("unexpected corpus extension");
    }
  }
}

TEST_CASE("invalid corpus fails with the tagged error kind") {
  const auto files = corpus_files("invalid");
  REQUIRE(files.size() >= 12);
  for (const auto& path : files) {
    CAPTURE(path.filename().string());
    const std::string text = testsupport::read_file(path.string());
    const std::string expected = expect_tag(text);
    try {
      if (path.extension() == ".frames") {
        parse_frame_library(text);
      } else {
        load_scenario(text, 4242);
      }
      FAIL("parse unexpectedly succeeded");
    } catch (const Error& e) {
      CHECK(e.kind() == expected);
    }
  }
}
