#include "sefm/frames.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "dsl.hpp"

namespace sefm {

namespace {

using dsl::Line;
using dsl::format_double;
using dsl::require_identifier;
using dsl::require_number;
using dsl::syntax_error;
using dsl::tokenize_lines;

Role parse_role_name(const Line& line, int idx, const std::string& name) {
  if (name == "core") return Role::kCore;
  if (name == "other") return Role::kOther;
  if (name == "disjoint") return Role::kDisjoint;
  syntax_error(line, idx, "unknown role '" + name + "'");
}

// role@stage tokens -> schedule covering stages 0..max with no gaps.
std::vector<Role> parse_role_schedule(const Line& line, int first_idx) {
  std::vector<std::optional<Role>> stages;
  for (int i = first_idx; i < static_cast<int>(line.tokens.size()); ++i) {
    const std::string& tok = line.tokens[i];
    std::size_t at = tok.find('@');
    if (at == std::string::npos) syntax_error(line, i, "expected role@stage, got '" + tok + "'");
    Role role = parse_role_name(line, i, tok.substr(0, at));
    int stage = 0;
    const std::string stage_text = tok.substr(at + 1);
    auto [ptr, ec] = std::from_chars(stage_text.data(), stage_text.data() + stage_text.size(), stage);
    if (ec != std::errc() || ptr != stage_text.data() + stage_text.size() || stage < 0)
      syntax_error(line, i, "invalid stage in '" + tok + "'");
    if (stage >= static_cast<int>(stages.size())) stages.resize(stage + 1);
    if (stages[stage].has_value()) syntax_error(line, i, "duplicate role for stage " + std::to_string(stage));
    stages[stage] = role;
  }
  if (stages.empty()) syntax_error(line, first_idx - 1, "element needs at least one role");
  std::vector<Role> schedule;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (!stages[s].has_value())
      syntax_error(line, first_idx, "missing role for stage " + std::to_string(s));
    schedule.push_back(*stages[s]);
  }
  return schedule;
}

StateEffect parse_effect(const Line& line, int first_idx) {
  const std::string kind = require_identifier(line, first_idx, "effect kind");
  const int argc = static_cast<int>(line.tokens.size()) - first_idx - 1;
  StateEffect effect;
  auto take_args = [&](int n) {
    if (argc != n)
      syntax_error(line, first_idx, kind + " takes " + std::to_string(n) + " argument(s), got " +
                                        std::to_string(argc));
    for (int i = 0; i < n; ++i)
      effect.args.push_back(require_identifier(line, first_idx + 1 + i, "effect argument"));
  };
  if (kind == "gripper_set") {
    effect.kind = EffectKind::kGripperSet;
    take_args(1);
  } else if (kind == "gripper_clear") {
    effect.kind = EffectKind::kGripperClear;
    take_args(0);
  } else if (kind == "object_moved_to") {
    effect.kind = EffectKind::kObjectMovedTo;
    take_args(2);
  } else if (kind == "object_state_flag") {
    effect.kind = EffectKind::kObjectStateFlag;
    take_args(2);
  } else {
    syntax_error(line, first_idx, "unknown effect kind '" + kind + "'");
  }
  return effect;
}

void validate_frame(const Line& opener, const SemanticFrame& frame) {
  if (frame.verbs.empty()) syntax_error(opener, 0, "frame '" + frame.id + "' has no verbs");
  if (frame.actions.empty()) syntax_error(opener, 0, "frame '" + frame.id + "' has no actions");
  if (frame.elements.empty())
    syntax_error(opener, 0, "frame '" + frame.id + "' has no elements");
  bool core_at_start = false;
  std::set<std::string> classes;
  for (const auto& el : frame.elements) {
    if (!classes.insert(el.object_class).second)
      syntax_error(opener, 0, "frame '" + frame.id + "' repeats element '" + el.object_class + "'");
    if (el.role_at(0) == Role::kCore) core_at_start = true;
  }
  if (!core_at_start)
    syntax_error(opener, 0, "frame '" + frame.id + "' has no core element at stage 0");
  for (const auto& p : frame.preconditions) {
    if (p == frame.id)
      throw Error(errkind::kPreconditionCycle,
                  "precondition cycle: " + frame.id + " -> " + frame.id);
  }
  if (frame.movable_sigma < 0.0)
    syntax_error(opener, 0, "movable sigma must be non-negative");
}

void check_precondition_graph(const FrameLibrary& library) {
  for (const auto& frame : library.frames()) {
    for (const auto& p : frame.preconditions) {
      if (!library.has(p))
        throw Error(errkind::kDanglingPrecondition,
                    "frame '" + frame.id + "' requires unknown frame '" + p + "'");
    }
  }
  // Iterative DFS, white/grey/black; a grey hit closes a cycle.
  enum Color { kWhite, kGrey, kBlack };
  std::map<std::string, Color> color;
  for (const auto& f : library.frames()) color[f.id] = kWhite;
  for (const auto& root : library.frames()) {
    if (color[root.id] != kWhite) continue;
    std::vector<std::pair<std::string, std::size_t>> stack;  // (id, next child)
    stack.emplace_back(root.id, 0);
    color[root.id] = kGrey;
    while (!stack.empty()) {
      auto& [id, child] = stack.back();
      const auto& preconds = library.frame(id).preconditions;
      if (child >= preconds.size()) {
        color[id] = kBlack;
        stack.pop_back();
        continue;
      }
      const std::string next = preconds[child++];
      if (color[next] == kGrey) {
        std::string text = "precondition cycle: ";
        bool in_cycle = false;
        for (const auto& [sid, _] : stack) {
          if (sid == next) in_cycle = true;
          if (in_cycle) text += sid + " -> ";
        }
        text += next;
        throw Error(errkind::kPreconditionCycle, text);
      }
      if (color[next] == kWhite) {
        color[next] = kGrey;
        stack.emplace_back(next, 0);
      }
    }
  }
}

std::vector<std::string> lowercase_words(const std::string& text) {
  std::vector<std::string> words;
  std::string word;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
        static_cast<unsigned char>(c) >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!word.empty()) {
      words.push_back(word);
      word.clear();
    }
  }
  if (!word.empty()) words.push_back(word);
  return words;
}

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

const char* role_name(Role r) {
  switch (r) {
    case Role::kCore: return "core";
    case Role::kOther: return "other";
    case Role::kPrecondition: return "precondition";
    case Role::kDisjoint: return "disjoint";
  }
  return "?";
}

RelationDistribution RelationDistribution::point_mass(Role r) {
  RelationDistribution d;
  switch (r) {
    case Role::kCore: d.core = 1.0; break;
    case Role::kOther: d.other = 1.0; break;
    case Role::kPrecondition: d.precondition = 1.0; break;
    case Role::kDisjoint: d.disjoint = 1.0; break;
  }
  return d;
}

Role FrameElement::role_at(int stage) const {
  if (role_schedule.empty()) return Role::kDisjoint;
  const int last = static_cast<int>(role_schedule.size()) - 1;
  return role_schedule[std::clamp(stage, 0, last)];
}

const FrameElement* SemanticFrame::find_element(const std::string& object_class) const {
  for (const auto& el : elements)
    if (el.object_class == object_class) return &el;
  return nullptr;
}

bool RobotState::has_executed(const std::string& frame_id) const {
  return std::find(executed.begin(), executed.end(), frame_id) != executed.end();
}

void FrameLibrary::add(SemanticFrame frame) {
  if (index_.count(frame.id))
    throw Error(errkind::kSyntax, "duplicate frame id '" + frame.id + "'");
  index_[frame.id] = frames_.size();
  frames_.push_back(std::move(frame));
}

bool FrameLibrary::has(const std::string& id) const { return index_.count(id) > 0; }

const SemanticFrame& FrameLibrary::frame(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(errkind::kDanglingPrecondition, "unknown frame '" + id + "'");
  return frames_[it->second];
}

std::vector<std::string> FrameLibrary::object_classes() const {
  std::set<std::string> classes;
  for (const auto& f : frames_)
    for (const auto& el : f.elements) classes.insert(el.object_class);
  return {classes.begin(), classes.end()};
}

FrameLibrary parse_frame_library(const std::string& source_text) {
  FrameLibrary library;
  const auto lines = tokenize_lines(source_text);
  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& opener = lines[i];
    if (opener.tokens[0] != "frame")
      syntax_error(opener, 0, "expected 'frame', got '" + opener.tokens[0] + "'");
    SemanticFrame frame;
    frame.id = require_identifier(opener, 1, "frame id");
    if (opener.tokens.size() > 2) syntax_error(opener, 2, "unexpected token after frame id");
    ++i;
    bool closed = false;
    bool saw_permanence = false;
    while (i < lines.size()) {
      const Line& line = lines[i];
      const std::string& key = line.tokens[0];
      if (key == "end") {
        if (line.tokens.size() > 1) syntax_error(line, 1, "unexpected token after 'end'");
        closed = true;
        ++i;
        break;
      }
      if (key == "verbs:") {
        if (line.tokens.size() < 2) syntax_error(line, 0, "verbs: needs at least one verb");
        for (std::size_t k = 1; k < line.tokens.size(); ++k)
          frame.verbs.push_back(line.tokens[k]);
      } else if (key == "element") {
        FrameElement el;
        el.object_class = require_identifier(line, 1, "object class");
        if (line.tokens.size() < 3 || line.tokens[2] != "roles:")
          syntax_error(line, 2, "expected 'roles:' after object class");
        el.role_schedule = parse_role_schedule(line, 3);
        frame.elements.push_back(std::move(el));
      } else if (key == "preconditions:") {
        for (std::size_t k = 1; k < line.tokens.size(); ++k)
          frame.preconditions.push_back(require_identifier(line, static_cast<int>(k), "frame id"));
      } else if (key == "actions:") {
        if (line.tokens.size() < 2) syntax_error(line, 0, "actions: needs at least one action");
        for (std::size_t k = 1; k < line.tokens.size(); ++k)
          frame.actions.push_back(require_identifier(line, static_cast<int>(k), "action name"));
      } else if (key == "postconditions:") {
        frame.postconditions.push_back(parse_effect(line, 1));
      } else if (key == "permanence:") {
        if (saw_permanence) syntax_error(line, 0, "duplicate permanence line");
        saw_permanence = true;
        const std::string mode = require_identifier(line, 1, "permanence");
        if (mode == "static") {
          frame.permanence = Permanence::kStatic;
          if (line.tokens.size() > 2) syntax_error(line, 2, "static takes no parameter");
        } else if (mode == "movable") {
          frame.permanence = Permanence::kMovable;
          if (line.tokens.size() > 3) syntax_error(line, 3, "unexpected token after sigma");
          if (line.tokens.size() == 3) frame.movable_sigma = require_number(line, 2, "sigma");
        } else {
          syntax_error(line, 1, "permanence must be 'static' or 'movable'");
        }
      } else {
        syntax_error(line, 0, "unknown key '" + key + "'");
      }
      ++i;
    }
    if (!closed) syntax_error(opener, 0, "frame '" + frame.id + "' is missing 'end'");
    validate_frame(opener, frame);
    library.add(std::move(frame));
  }
  check_precondition_graph(library);
  return library;
}

std::string serialize_frame_library(const FrameLibrary& library) {
  std::ostringstream os;
  bool first = true;
  for (const auto& frame : library.frames()) {
    if (!first) os << "\n";
    first = false;
    os << "frame " << frame.id << "\n";
    os << "  verbs:";
    for (const auto& v : frame.verbs) os << " " << v;
    os << "\n";
    for (const auto& el : frame.elements) {
      os << "  element " << el.object_class << " roles:";
      for (std::size_t s = 0; s < el.role_schedule.size(); ++s)
        os << " " << role_name(el.role_schedule[s]) << "@" << s;
      os << "\n";
    }
    if (!frame.preconditions.empty()) {
      os << "  preconditions:";
      for (const auto& p : frame.preconditions) os << " " << p;
      os << "\n";
    }
    os << "  actions:";
    for (const auto& a : frame.actions) os << " " << a;
    os << "\n";
    for (const auto& e : frame.postconditions) {
      os << "  postconditions: ";
      switch (e.kind) {
        case EffectKind::kGripperSet: os << "gripper_set"; break;
        case EffectKind::kGripperClear: os << "gripper_clear"; break;
        case EffectKind::kObjectMovedTo: os << "object_moved_to"; break;
        case EffectKind::kObjectStateFlag: os << "object_state_flag"; break;
      }
      for (const auto& a : e.args) os << " " << a;
      os << "\n";
    }
    os << "  permanence: ";
    if (frame.permanence == Permanence::kStatic) {
      os << "static";
    } else {
      os << "movable";
      if (frame.movable_sigma > 0.0) os << " " << format_double(frame.movable_sigma);
    }
    os << "\n";
    os << "end\n";
  }
  return os.str();
}

FrameInstance parse_command(const std::string& utterance, const FrameLibrary& library) {
  const auto words = lowercase_words(utterance);
  struct Candidate {
    const SemanticFrame* frame;
    int slots;
    std::vector<std::string> bound;
  };
  std::vector<Candidate> candidates;
  for (const auto& frame : library.frames()) {
    bool verb_hit = false;
    for (const auto& verb : frame.verbs) {
      const std::string v = lowercase(verb);
      if (std::find(words.begin(), words.end(), v) != words.end()) {
        verb_hit = true;
        break;
      }
    }
    if (!verb_hit) continue;
    Candidate c{&frame, 0, {}};
    for (const auto& el : frame.elements) {
      if (std::find(words.begin(), words.end(), el.object_class) != words.end()) {
        ++c.slots;
        c.bound.push_back(el.object_class);
      }
    }
    candidates.push_back(std::move(c));
  }
  if (candidates.empty())
    throw Error(errkind::kNoFrameEvoked, "no frame evoked by: '" + utterance + "'");
  int best = -1;
  for (const auto& c : candidates) best = std::max(best, c.slots);
  std::vector<const Candidate*> top;
  for (const auto& c : candidates)
    if (c.slots == best) top.push_back(&c);
  if (top.size() > 1) {
    std::string ids;
    for (const auto* c : top) ids += (ids.empty() ? "" : ", ") + c->frame->id;
    throw Error(errkind::kAmbiguousEvocation, "ambiguous command; candidates: " + ids);
  }
  return FrameInstance{top[0]->frame->id, top[0]->bound};
}

bool effect_holds(const StateEffect& effect, const RobotState& state,
                  const FrameLibrary& library) {
  switch (effect.kind) {
    case EffectKind::kGripperSet:
      return state.gripper.has_value() && *state.gripper == effect.args[0];
    case EffectKind::kGripperClear:
      return !state.gripper.has_value();
    case EffectKind::kObjectMovedTo:
    case EffectKind::kObjectStateFlag:
      // Not directly observable from the robot's own state; credited via the
      // execution history of frames that declare the identical effect.
      for (const auto& id : state.executed) {
        if (!library.has(id)) continue;
        const auto& post = library.frame(id).postconditions;
        if (std::find(post.begin(), post.end(), effect) != post.end()) return true;
      }
      return false;
  }
  return false;
}

bool precondition_satisfied(const SemanticFrame& precondition, const RobotState& state,
                            const FrameLibrary& library) {
  if (state.has_executed(precondition.id)) return true;
  if (precondition.postconditions.empty()) return false;
  for (const auto& effect : precondition.postconditions)
    if (!effect_holds(effect, state, library)) return false;
  return true;
}

int stage_of(const SemanticFrame& frame, const RobotState& state, const FrameLibrary& library) {
  int stage = 0;
  for (const auto& pid : frame.preconditions) {
    if (!precondition_satisfied(library.frame(pid), state, library)) break;
    ++stage;
  }
  return stage;
}

std::optional<std::string> next_unmet_precondition(const SemanticFrame& frame,
                                                   const RobotState& state,
                                                   const FrameLibrary& library) {
  for (const auto& pid : frame.preconditions) {
    if (!precondition_satisfied(library.frame(pid), state, library)) return pid;
  }
  return std::nullopt;
}

RelationDistribution relation_belief(const SemanticFrame& frame,
                                     const std::string& object_class,
                                     const RobotState& state,
                                     const FrameLibrary& library) {
  const FrameElement* element = frame.find_element(object_class);
  if (element == nullptr) return RelationDistribution::point_mass(Role::kDisjoint);
  const int stage = stage_of(frame, state, library);
  return RelationDistribution::point_mass(element->role_at(stage));
}

RelationDistribution frame_relation_belief(const SemanticFrame& frame,
                                           const SemanticFrame& other,
                                           const RobotState& state,
                                           const FrameLibrary& library) {
  const auto next = next_unmet_precondition(frame, state, library);
  if (next.has_value() && *next == other.id)
    return RelationDistribution::point_mass(Role::kPrecondition);
  return RelationDistribution::point_mass(Role::kDisjoint);
}

RobotState apply_frame_effects(const SemanticFrame& frame, RobotState state) {
  for (const auto& effect : frame.postconditions) {
    switch (effect.kind) {
      case EffectKind::kGripperSet: state.gripper = effect.args[0]; break;
      case EffectKind::kGripperClear: state.gripper.reset(); break;
      case EffectKind::kObjectMovedTo:
      case EffectKind::kObjectStateFlag: break;  // world-side, tracked via history
    }
  }
  if (!state.has_executed(frame.id)) state.executed.push_back(frame.id);
  return state;
}

}  // namespace sefm
