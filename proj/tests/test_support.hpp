// Shared fixtures: a small frame library and scenario pair used across the
// unit tests, plus file helpers. Asset/corpus locations come from compile
// definitions so the binaries run from any directory.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace testsupport {

inline std::string asset_path(const std::string& rel) {
  return std::string(SEFM_ASSET_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Two-frame library mirroring the grasp-then-stir chain.
inline const char* kMiniLibrary = R"(frame grasp_spoon
  verbs: grasp grab take
  element spoon roles: core@0
  actions: approach_spoon close_gripper
  postconditions: gripper_set spoon
  permanence: movable
end

frame stir_cup
  verbs: stir mix
  element spoon roles: core@0 disjoint@1
  element cup roles: other@0 core@1
  preconditions: grasp_spoon
  actions: approach_cup stir
  postconditions: object_state_flag cup stirred
  permanence: movable
end
)";

// Four-room map, one wall, spoon and cup with overlapping priors in the
// kitchen. 12 x 9 m, sensor range 5 m.
inline const char* kMiniScenario = R"(map
  bounds 0 0 12 9
  room kitchen 0.5 5 4 8.5
  room dining 4.5 5 7.5 8.5
  room living 8 0.5 11.5 4
  room bedroom 8 5 11.5 8.5
  obstacle 5.8 0 6.2 4.6
  sensor range 5 fov 2.0943951023931953 sigma 0.15 miss 0.05
end
prior spoon kitchen 0.45
prior spoon dining 0.35
prior cup kitchen 0.35
prior cup living 0.45
object spoon 2.2 7.8
object cup 10.8 1.0
robot 1.0 0.8 1.5707963267948966
)";

}  // namespace testsupport
