#pragma once

// Instruction rendering at the three granularity levels from per-task
// templates.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "roboinspect/core.hpp"
#include "roboinspect/geometry.hpp"

namespace roboinspect {

inline constexpr std::string_view kBoundsPlaceholder = "{bounds}";

struct LevelPhrases {
  std::string action;
  std::string purpose;    // empty at level A
  std::string condition;  // empty below level C; contains {bounds}
  std::string text;       // surface text; may contain {bounds} at level C only
};

struct InstructionTemplate {
  std::string task;
  std::string object;
  std::string origin;
  std::map<GranularityLevel, LevelPhrases> levels;
};

namespace detail {

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace detail

class InstructionTemplates {
 public:
  InstructionTemplates() = default;

  explicit InstructionTemplates(std::vector<InstructionTemplate> templates) {
    for (auto& t : templates) {
      validate(t);
      std::string key = t.task;
      by_task_.emplace(std::move(key), std::move(t));
    }
  }

  static InstructionTemplates from_json(const json& doc) {
    std::vector<InstructionTemplate> out;
    for (const auto& t : doc.at("tasks")) {
      InstructionTemplate tpl;
      tpl.task = t.at("task").get<std::string>();
      tpl.object = t.at("object").get<std::string>();
      tpl.origin = t.value("origin", "");
      for (const auto& [key, value] : t.at("levels").items()) {
        auto level = level_from(key);
        if (!level) throw Error(Errc::FixtureError, "bad level '" + key + "' in template " + tpl.task);
        LevelPhrases p;
        p.action = value.at("action").get<std::string>();
        p.purpose = value.value("purpose", "");
        p.condition = value.value("condition", "");
        p.text = value.at("text").get<std::string>();
        tpl.levels[*level] = std::move(p);
      }
      out.push_back(std::move(tpl));
    }
    return InstructionTemplates(std::move(out));
  }

  static InstructionTemplates load(const std::filesystem::path& path) {
    return from_json(load_json_file(path));
  }

  const InstructionTemplate& find(std::string_view task) const {
    auto it = by_task_.find(std::string(task));
    if (it == by_task_.end()) throw Error(Errc::UnknownTask, std::string(task));
    return it->second;
  }

  Instruction render(const TaskSpec& task, GranularityLevel level, const WorkspaceBounds& workspace) const {
    workspace.validate();
    const auto& tpl = find(task.name);
    const auto& phrases = tpl.levels.at(level);
    std::string bounds = format_tuple(workspace.executable_extents());
    std::optional<std::string> purpose, condition;
    if (level != GranularityLevel::A) purpose = phrases.purpose;
    if (level == GranularityLevel::C) condition = detail::replace_all(phrases.condition, kBoundsPlaceholder, bounds);
    std::string text = detail::replace_all(phrases.text, kBoundsPlaceholder, bounds);
    auto ins = Instruction::make(tpl.object, phrases.action, std::move(purpose), std::move(condition), std::move(text));
    ins.tag(task.name, level);
    return ins;
  }

  std::vector<std::pair<GranularityLevel, Instruction>> render_all(const TaskSpec& task,
                                                                   const WorkspaceBounds& workspace) const {
    std::vector<std::pair<GranularityLevel, Instruction>> out;
    for (auto level : kLevels) out.emplace_back(level, render(task, level, workspace));
    return out;
  }

  std::vector<std::string> tasks() const {
    std::vector<std::string> names;
    for (const auto& [name, _] : by_task_) names.push_back(name);
    return names;
  }

 private:
  static void validate(const InstructionTemplate& t) {
    auto fail = [&](const std::string& why) { throw Error(Errc::FixtureError, "template " + t.task + ": " + why); };
    if (t.object.empty()) fail("empty object phrase");
    for (auto level : kLevels) {
      auto it = t.levels.find(level);
      if (it == t.levels.end()) fail("missing level " + std::string(to_string(level)));
      const auto& p = it->second;
      if (p.action.empty() || p.text.empty()) fail("empty action or text");
      bool has_bounds = p.text.find(kBoundsPlaceholder) != std::string::npos;
      if (level == GranularityLevel::C) {
        if (p.purpose.empty()) fail("level C needs a purpose");
        if (p.condition.find(kBoundsPlaceholder) == std::string::npos) fail("condition must mention {bounds}");
        if (!has_bounds) fail("level C text must embed {bounds}");
      } else {
        if (has_bounds || p.condition.size()) fail("only level C may carry a condition");
        if (level == GranularityLevel::P && p.purpose.empty()) fail("level P needs a purpose");
      }
    }
  }

  std::map<std::string, InstructionTemplate, std::less<>> by_task_;
};

}  // namespace roboinspect
