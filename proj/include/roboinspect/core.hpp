#pragma once

// Shared domain types: tasks, instructions, behaviors and trial outcomes,
// plus the two scalar characterizations (task complexity and instruction
// granularity).

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "roboinspect/error.hpp"

namespace roboinspect {

using json = nlohmann::json;

enum class PrimitiveAction { Grasp, Move, Rotate };

inline constexpr std::array<PrimitiveAction, 3> kPrimitiveActions{
    PrimitiveAction::Grasp, PrimitiveAction::Move, PrimitiveAction::Rotate};

constexpr std::string_view to_string(PrimitiveAction a) noexcept {
  switch (a) {
    case PrimitiveAction::Grasp: return "Grasp";
    case PrimitiveAction::Move: return "Move";
    case PrimitiveAction::Rotate: return "Rotate";
  }
  return "?";
}

inline std::optional<PrimitiveAction> primitive_action_from(std::string_view s) {
  for (auto a : kPrimitiveActions)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

enum class GranularityLevel { A, P, C };

inline constexpr std::array<GranularityLevel, 3> kLevels{GranularityLevel::A, GranularityLevel::P,
                                                         GranularityLevel::C};

constexpr std::string_view to_string(GranularityLevel l) noexcept {
  switch (l) {
    case GranularityLevel::A: return "A";
    case GranularityLevel::P: return "P";
    case GranularityLevel::C: return "C";
  }
  return "?";
}

/// Granularity value carried by instructions rendered at this level.
constexpr int granularity_value(GranularityLevel l) noexcept {
  switch (l) {
    case GranularityLevel::A: return 2;
    case GranularityLevel::P: return 3;
    case GranularityLevel::C: return 4;
  }
  return 0;
}

inline std::optional<GranularityLevel> level_from(std::string_view s) {
  for (auto l : kLevels)
    if (to_string(l) == s) return l;
  if (s == "I_A") return GranularityLevel::A;
  if (s == "I_P") return GranularityLevel::P;
  if (s == "I_C") return GranularityLevel::C;
  return std::nullopt;
}

enum class UnreliableBehavior { Nonsense, Disorder, Infeasible, Badpose };

inline constexpr std::array<UnreliableBehavior, 4> kBehaviors{
    UnreliableBehavior::Nonsense, UnreliableBehavior::Disorder, UnreliableBehavior::Infeasible,
    UnreliableBehavior::Badpose};

constexpr std::string_view to_string(UnreliableBehavior b) noexcept {
  switch (b) {
    case UnreliableBehavior::Nonsense: return "Nonsense";
    case UnreliableBehavior::Disorder: return "Disorder";
    case UnreliableBehavior::Infeasible: return "Infeasible";
    case UnreliableBehavior::Badpose: return "Badpose";
  }
  return "?";
}

inline std::optional<UnreliableBehavior> behavior_from(std::string_view s) {
  for (auto b : kBehaviors)
    if (to_string(b) == s) return b;
  return std::nullopt;
}

/// Pipeline phase in which a behavior is detected.
enum class Phase { Parse, Static, Runtime };

constexpr std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Parse: return "parse";
    case Phase::Static: return "static";
    case Phase::Runtime: return "runtime";
  }
  return "?";
}

constexpr Phase phase_of(UnreliableBehavior b) noexcept {
  switch (b) {
    case UnreliableBehavior::Nonsense: return Phase::Parse;
    case UnreliableBehavior::Disorder: return Phase::Static;
    case UnreliableBehavior::Infeasible:
    case UnreliableBehavior::Badpose: return Phase::Runtime;
  }
  return Phase::Runtime;
}

/// Diagnostic record attached to a failure. `kind` is a short machine tag
/// (e.g. "offending-line", "precedence-violation", "out-of-bounds-waypoint",
/// "misaligned"), `location` names the artifact (line number, edge, step).
struct Evidence {
  std::string kind;
  std::string location;
  std::string message;

  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct Success {
  friend bool operator==(const Success&, const Success&) = default;
};

/// A justified refusal: the instruction carried the workspace condition and
/// the target really is out of reach.
struct SpecialSuccess {
  std::string refusal_text;
  friend bool operator==(const SpecialSuccess&, const SpecialSuccess&) = default;
};

struct Failure {
  UnreliableBehavior behavior;
  Evidence evidence;
  Phase phase;
  friend bool operator==(const Failure&, const Failure&) = default;
};

using TrialOutcome = std::variant<Success, SpecialSuccess, Failure>;

inline bool is_success(const TrialOutcome& o) { return !std::holds_alternative<Failure>(o); }

inline std::string outcome_label(const TrialOutcome& o) {
  if (std::holds_alternative<Success>(o)) return "Success";
  if (std::holds_alternative<SpecialSuccess>(o)) return "SpecialSuccess";
  return "Failure(" + std::string(to_string(std::get<Failure>(o).behavior)) + ")";
}

// ---------------------------------------------------------------------------
// Tasks

struct TaskSpec {
  std::string name;
  std::set<PrimitiveAction> actions;
  std::string scene;     // scene template id (resolved by the simulator)
  std::string ordering;  // precedence constraint id (resolved by behavior-check)
  std::string goal;      // goal predicate id
  bool primitive = false;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Number of distinct primitive actions the task requires, in {1,2,3}.
inline int complexity_of(const TaskSpec& task) noexcept {
  return static_cast<int>(task.actions.size());
}

class TaskRegistry {
 public:
  TaskRegistry() = default;
  explicit TaskRegistry(std::vector<TaskSpec> tasks) : tasks_(std::move(tasks)) { validate(); }

  static TaskRegistry from_json(const json& doc) {
    std::vector<TaskSpec> tasks;
    for (const auto& t : doc.at("tasks")) {
      TaskSpec spec;
      spec.name = t.at("name").get<std::string>();
      for (const auto& a : t.at("actions")) {
        auto action = primitive_action_from(a.get<std::string>());
        if (!action) throw Error(Errc::FixtureError, "unknown primitive action in task " + spec.name);
        spec.actions.insert(*action);
      }
      spec.scene = t.value("scene", spec.name);
      spec.ordering = t.value("ordering", spec.name);
      spec.goal = t.at("goal").get<std::string>();
      spec.primitive = t.value("primitive", false);
      tasks.push_back(std::move(spec));
    }
    return TaskRegistry(std::move(tasks));
  }

  static TaskRegistry load(const std::filesystem::path& path);

  const TaskSpec& find(std::string_view name) const {
    for (const auto& t : tasks_)
      if (t.name == name) return t;
    throw Error(Errc::UnknownTask, std::string(name));
  }

  bool contains(std::string_view name) const {
    return std::any_of(tasks_.begin(), tasks_.end(), [&](const TaskSpec& t) { return t.name == name; });
  }

  const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }

 private:
  void validate() const {
    std::set<std::string> seen;
    for (const auto& t : tasks_) {
      if (t.name.empty()) throw Error(Errc::FixtureError, "task with empty name");
      if (!seen.insert(t.name).second) throw Error(Errc::FixtureError, "duplicate task " + t.name);
      if (t.actions.empty()) throw Error(Errc::FixtureError, "task " + t.name + " has no primitive actions");
    }
  }

  std::vector<TaskSpec> tasks_;
};

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FixtureError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::FixtureError, path.string() + ": " + e.what());
  }
}

inline std::string load_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FixtureError, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline TaskRegistry TaskRegistry::load(const std::filesystem::path& path) {
  return from_json(load_json_file(path));
}

// ---------------------------------------------------------------------------
// Instructions

/// The (object, action, purpose, condition) quadruple plus the surface text
/// actually sent to the model. `task`/`level` record where it was rendered
/// from and are empty for hand-built instructions.
class Instruction {
 public:
  static Instruction make(std::string object, std::string action, std::optional<std::string> purpose,
                          std::optional<std::string> condition, std::string text = {}) {
    if (object.empty()) throw Error(Errc::InvalidArgument, "instruction object is empty");
    if (action.empty()) throw Error(Errc::InvalidArgument, "instruction action is empty");
    if (purpose && purpose->empty()) purpose.reset();
    if (condition && condition->empty()) condition.reset();
    if (condition && !purpose)
      throw Error(Errc::InvalidArgument, "instruction has a condition but no purpose");
    Instruction ins;
    ins.object_ = std::move(object);
    ins.action_ = std::move(action);
    ins.purpose_ = std::move(purpose);
    ins.condition_ = std::move(condition);
    ins.text_ = text.empty() ? ins.action_ : std::move(text);
    return ins;
  }

  const std::string& object() const noexcept { return object_; }
  const std::string& action() const noexcept { return action_; }
  const std::optional<std::string>& purpose() const noexcept { return purpose_; }
  const std::optional<std::string>& condition() const noexcept { return condition_; }
  const std::string& text() const noexcept { return text_; }

  const std::string& task() const noexcept { return task_; }
  std::optional<GranularityLevel> level() const noexcept { return level_; }

  Instruction& tag(std::string task, GranularityLevel level) {
    task_ = std::move(task);
    level_ = level;
    return *this;
  }

  friend bool operator==(const Instruction&, const Instruction&) = default;

 private:
  Instruction() = default;

  std::string object_;
  std::string action_;
  std::optional<std::string> purpose_;
  std::optional<std::string> condition_;
  std::string text_;
  std::string task_;
  std::optional<GranularityLevel> level_;
};

/// Count of non-empty elements among object, action, purpose and condition.
inline int granularity_of(const Instruction& ins) noexcept {
  int n = 0;
  if (!ins.object().empty()) ++n;
  if (!ins.action().empty()) ++n;
  if (ins.purpose() && !ins.purpose()->empty()) ++n;
  if (ins.condition() && !ins.condition()->empty()) ++n;
  return n;
}

}  // namespace roboinspect
