#pragma once

// Static step-ordering checks and the single-label failure dispatcher.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "roboinspect/core.hpp"
#include "roboinspect/policy_parse.hpp"
#include "roboinspect/simworld.hpp"

namespace roboinspect {

struct StepPattern {
  Verb verb = Verb::MoveTo;
  std::optional<std::string> target;  // absent: any target

  bool matches(const ComposerStep& s) const { return s.verb == verb && (!target || s.target == target); }

  std::string describe() const {
    std::string out(to_string(verb));
    if (target) out += "(" + *target + ")";
    return out;
  }

  friend auto operator<=>(const StepPattern&, const StepPattern&) = default;
};

struct PrecedenceEdge {
  StepPattern before;
  StepPattern after;
  std::string rationale;
};

struct PrecedenceConstraints {
  std::string task;
  std::vector<PrecedenceEdge> edges;
  std::vector<StepPattern> required;

  /// Throws FixtureError when the edge graph has a cycle.
  void check_acyclic() const {
    std::set<StepPattern> nodes;
    for (const auto& e : edges) nodes.insert(e.before), nodes.insert(e.after);
    std::map<StepPattern, int> indegree;
    for (const auto& n : nodes) indegree[n] = 0;
    for (const auto& e : edges) ++indegree[e.after];
    std::vector<StepPattern> ready;
    for (const auto& [n, d] : indegree)
      if (d == 0) ready.push_back(n);
    std::size_t seen = 0;
    while (!ready.empty()) {
      StepPattern n = ready.back();
      ready.pop_back();
      ++seen;
      for (const auto& e : edges) {
        if (e.before == n && --indegree[e.after] == 0) ready.push_back(e.after);
      }
    }
    if (seen != nodes.size()) throw Error(Errc::FixtureError, "precedence constraints for " + task + " contain a cycle");
  }
};

inline StepPattern pattern_from(const json& j) {
  auto verb = verb_from(j.at("verb").get<std::string>());
  if (!verb) throw Error(Errc::FixtureError, "unknown verb " + j.at("verb").get<std::string>());
  StepPattern p{*verb, std::nullopt};
  if (j.contains("target")) p.target = j.at("target").get<std::string>();
  return p;
}

class ConstraintSet {
 public:
  static ConstraintSet from_json(const json& doc) {
    ConstraintSet set;
    for (const auto& c : doc.at("constraints")) {
      PrecedenceConstraints pc;
      pc.task = c.at("task").get<std::string>();
      for (const auto& r : c.at("required")) pc.required.push_back(pattern_from(r));
      for (const auto& e : c.at("edges"))
        pc.edges.push_back({pattern_from(e.at("before")), pattern_from(e.at("after")), e.value("rationale", "")});
      pc.check_acyclic();
      std::string key = pc.task;
      set.by_task_.emplace(std::move(key), std::move(pc));
    }
    return set;
  }

  static ConstraintSet load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

  const PrecedenceConstraints& find(std::string_view id) const {
    auto it = by_task_.find(std::string(id));
    if (it == by_task_.end()) throw Error(Errc::UnknownTask, "no ordering constraints for " + std::string(id));
    return it->second;
  }

 private:
  std::map<std::string, PrecedenceConstraints, std::less<>> by_task_;
};

struct OrderOk {
  friend bool operator==(const OrderOk&, const OrderOk&) = default;
};

struct DisorderViolation {
  Evidence evidence;
  friend bool operator==(const DisorderViolation&, const DisorderViolation&) = default;
};

using OrderVerdict = std::variant<OrderOk, DisorderViolation>;

inline std::optional<std::size_t> first_occurrence(const Program& prog, const StepPattern& p) {
  for (std::size_t i = 0; i < prog.steps.size(); ++i)
    if (p.matches(prog.steps[i])) return i;
  return std::nullopt;
}

/// Checks edges first (ties go to the edge whose second element occurs
/// earliest), then required steps. An edge whose first element never occurs
/// while its second does counts as violated.
inline OrderVerdict validate_order(const Program& prog, const PrecedenceConstraints& constraints,
                                   std::string_view trial_ordering) {
  if (constraints.task != trial_ordering) {
    throw Error(Errc::ConstraintTaskMismatch,
                "constraints for " + constraints.task + " applied to " + std::string(trial_ordering));
  }
  const PrecedenceEdge* worst = nullptr;
  std::size_t worst_at = 0;
  for (const auto& e : constraints.edges) {
    auto b = first_occurrence(prog, e.after);
    if (!b) continue;
    auto a = first_occurrence(prog, e.before);
    if (a && *a < *b) continue;
    if (!worst || *b < worst_at) {
      worst = &e;
      worst_at = *b;
    }
  }
  if (worst) {
    std::string edge = worst->before.describe() + " ≺ " + worst->after.describe();
    return DisorderViolation{{"precedence-violation", edge,
                              "step " + std::to_string(worst_at + 1) + " (" + describe(prog.steps[worst_at]) +
                                  ") runs before " + worst->before.describe()}};
  }
  for (const auto& r : constraints.required) {
    if (!first_occurrence(prog, r)) {
      return DisorderViolation{{"missing-step", r.describe(), "required step " + r.describe() + " never occurs"}};
    }
  }
  return OrderOk{};
}

/// Steps naming an object that is not in the scene are a planning error.
inline std::optional<DisorderViolation> check_referents(const Program& prog, const std::vector<std::string>& scene) {
  for (std::size_t i = 0; i < prog.steps.size(); ++i) {
    const auto& t = prog.steps[i].target;
    if (t && std::find(scene.begin(), scene.end(), *t) == scene.end()) {
      return DisorderViolation{{"missing-referent", "step " + std::to_string(i + 1),
                                "step refers to '" + *t + "', which is not in the scene"}};
    }
  }
  return std::nullopt;
}

struct GroundTruth {
  bool target_out_of_workspace = false;
};

inline Failure fail(UnreliableBehavior b, Evidence e) { return Failure{b, std::move(e), phase_of(b)}; }

/// Assigns exactly one outcome, in parse -> static -> runtime precedence.
inline TrialOutcome classify(const ParseResult& parsed, const std::optional<OrderVerdict>& order,
                             const std::optional<SimResult>& sim, GranularityLevel level, const GroundTruth& truth) {
  if (const auto* n = std::get_if<NonsenseRejection>(&parsed)) return fail(UnreliableBehavior::Nonsense, n->evidence);
  if (const auto* r = std::get_if<Refusal>(&parsed)) {
    if (level == GranularityLevel::C && truth.target_out_of_workspace) return SpecialSuccess{r->text};
    return fail(UnreliableBehavior::Nonsense,
                {"unjustified-refusal", "completion",
                 level == GranularityLevel::C ? "refused although the target is reachable"
                                              : "refused without a workspace condition in the instruction"});
  }
  if (!order) throw Error(Errc::MissingOrderVerdict, "program parsed but no ordering verdict was supplied");
  if (const auto* d = std::get_if<DisorderViolation>(&*order)) return fail(UnreliableBehavior::Disorder, d->evidence);
  if (!sim) throw Error(Errc::MissingSimResult, "program passed ordering but was not simulated");
  return std::visit(
      [](const auto& o) -> TrialOutcome {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, InfeasibleHalt>) {
          return fail(UnreliableBehavior::Infeasible,
                      {"out-of-bounds-waypoint", "step " + std::to_string(o.step_index + 1),
                       "planned waypoint " + format_tuple(o.waypoint) + " lies outside the executable box"});
        } else if constexpr (std::is_same_v<T, BadposeEvent>) {
          return fail(UnreliableBehavior::Badpose,
                      {std::string(to_string(o.kind)), "step " + std::to_string(o.step_index + 1),
                       o.object + " " + std::string(to_string(o.kind)) +
                           (o.kind == BadposeKind::Misaligned ? " (approach error " : " (step length ") +
                           format_number(std::round(o.measure * 100) / 100) + ")"});
        } else {
          if (o.goal_met) return Success{};
          return fail(UnreliableBehavior::Badpose,
                      {"pose-error", "final state", "program ran to completion but the goal is not met"});
        }
      },
      sim->outcome);
}

}  // namespace roboinspect
