// Semantic frame data model.
//
// A frame is a verb-evoked action template: the object classes it needs
// (elements, each with a relation role per execution stage), an ordered list
// of precondition frames, the primitive action sequence, and postcondition
// effects describing the state change a successful execution produces.
//
// Frame libraries are written in a small line-oriented language; see the
// grammar in README.md. A parsed library is immutable and safe to share
// across threads.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sefm/error.hpp"
#include "sefm/geometry.hpp"

namespace sefm {

enum class Role { kCore, kOther, kPrecondition, kDisjoint };

const char* role_name(Role r);

// Distribution over relation roles between a frame and one of its neighbors
// (object class or precondition frame). The beliefs produced by this module
// are point masses; the potential evaluation accepts soft distributions so a
// learned belief model can be dropped in later.
struct RelationDistribution {
  double core = 0.0;
  double other = 0.0;
  double precondition = 0.0;
  double disjoint = 0.0;

  static RelationDistribution point_mass(Role r);
  double sum() const { return core + other + precondition + disjoint; }
  // Mass on any role that couples the pair (everything except Disjoint).
  double coupling_mass() const { return core + other + precondition; }
};

enum class EffectKind {
  kGripperSet,
  kGripperClear,
  kObjectMovedTo,
  kObjectStateFlag,
};

struct StateEffect {
  EffectKind kind;
  std::vector<std::string> args;  // arity checked at parse time

  bool operator==(const StateEffect&) const = default;
};

struct FrameElement {
  std::string object_class;
  // Role at each precondition-progress stage; index clamped to the last
  // declared stage, so a schedule of {Core} means Core throughout.
  std::vector<Role> role_schedule;

  Role role_at(int stage) const;
};

enum class Permanence { kStatic, kMovable };

struct SemanticFrame {
  std::string id;
  std::vector<std::string> verbs;
  std::vector<FrameElement> elements;
  std::vector<std::string> preconditions;  // frame ids, declared order
  std::vector<std::string> actions;
  std::vector<StateEffect> postconditions;
  Permanence permanence = Permanence::kStatic;
  double movable_sigma = 0.0;  // prediction noise scale, movable frames only

  const FrameElement* find_element(const std::string& object_class) const;
};

// Known side of the conditioning vector: where the robot is, what it holds,
// and which frames it has completed.
struct RobotState {
  Pose pose;
  std::optional<std::string> gripper;
  std::vector<std::string> executed;

  bool has_executed(const std::string& frame_id) const;
};

class FrameLibrary {
 public:
  FrameLibrary() = default;

  void add(SemanticFrame frame);  // keeps declaration order, enforces unique ids
  bool has(const std::string& id) const;
  const SemanticFrame& frame(const std::string& id) const;
  const std::vector<SemanticFrame>& frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }

  // All object classes referenced by any element, sorted and unique.
  std::vector<std::string> object_classes() const;

 private:
  std::vector<SemanticFrame> frames_;
  std::map<std::string, std::size_t> index_;
};

// A command bound to a frame: the evoked frame id plus the element classes
// the utterance mentioned.
struct FrameInstance {
  std::string frame_id;
  std::vector<std::string> bound_classes;
};

// --- parsing -------------------------------------------------------------

// Parses and validates a frame library document. Throws Error with kind
// SyntaxError (line/column set), DanglingPrecondition, or PreconditionCycle.
FrameLibrary parse_frame_library(const std::string& source_text);

// Canonical text form; parse(serialize(lib)) is structurally equal to lib.
std::string serialize_frame_library(const FrameLibrary& library);

// Matches an utterance against the library's verb templates. Words matching
// element classes disambiguate between frames sharing a verb. Throws Error
// with kind NoFrameEvoked or AmbiguousEvocation.
FrameInstance parse_command(const std::string& utterance, const FrameLibrary& library);

// --- state-conditioned relations ------------------------------------------

// True when the effect is reflected in the robot state. Gripper effects are
// compared against the actual gripper so externally caused state counts
// (e.g. the robot starting out holding a spoon); world-side effects are
// credited through the execution history.
bool effect_holds(const StateEffect& effect, const RobotState& state,
                  const FrameLibrary& library);

// A precondition counts as satisfied when all of its postconditions hold in
// the state, or when it is in the execution history.
bool precondition_satisfied(const SemanticFrame& precondition, const RobotState& state,
                            const FrameLibrary& library);

// Number of contiguously satisfied preconditions, in declared order. This is
// the stage index that selects element roles.
int stage_of(const SemanticFrame& frame, const RobotState& state,
             const FrameLibrary& library);

std::optional<std::string> next_unmet_precondition(const SemanticFrame& frame,
                                                   const RobotState& state,
                                                   const FrameLibrary& library);

// Point mass on the element's scheduled role at the current stage; all mass
// on Disjoint for classes the frame does not reference.
RelationDistribution relation_belief(const SemanticFrame& frame,
                                     const std::string& object_class,
                                     const RobotState& state,
                                     const FrameLibrary& library);

// Point mass on Precondition iff `other` is the next unmet precondition of
// `frame` under the state; otherwise Disjoint.
RelationDistribution frame_relation_belief(const SemanticFrame& frame,
                                           const SemanticFrame& other,
                                           const RobotState& state,
                                           const FrameLibrary& library);

// Applies the frame's gripper effects and records the execution. Used by the
// planner to project state along a precondition chain.
RobotState apply_frame_effects(const SemanticFrame& frame, RobotState state);

}  // namespace sefm
