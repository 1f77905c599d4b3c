#pragma once

// Chat prompt assembly: the four-message generation prompt and the
// failure-feedback prompt.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roboinspect/core.hpp"
#include "roboinspect/geometry.hpp"
#include "roboinspect/hashing.hpp"
#include "roboinspect/policy_parse.hpp"

namespace roboinspect {

inline constexpr std::string_view kSystemPrompt =
    "You are a helpful assistant that pays attention to the user's instructions and writes good python code for "
    "operating a robot arm in a tabletop environment.";

inline constexpr std::string_view kPrefixHead =
    "I'm seeking assistance with developing Python code to manage a robotic arm functioning on a tabletop. Each time "
    "I present a new prompt, please give the policy code accordingly. Focus closely on identifying and maintaining "
    "consistent coding structures from the context provided. Ensure your solutions are meticulous and well-considered. "
    "Omit any import statements. Avoid restating my requests or adding textual explanations (inline code comments are "
    "acceptable). To begin, here’s the reference code segment: `";

inline constexpr std::string_view kPrefixTail =
    "`. Note: the coordinate system is defined as follows — x indicates depth (front to back), y represents "
    "horizontal movement (left to right), and z denotes vertical direction (bottom to top).";

inline constexpr std::string_view kImportRule = "Omit any import statements.";

inline constexpr std::string_view kAcknowledgement = "Got it. I will provide policy code what you give me next.";

inline constexpr std::string_view kRegenerateRequest =
    "Based on the experience of this failure, regenerate the policy code for the task.";

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct DemonstrationCode {
  std::string id;
  std::string text;

  static DemonstrationCode load(const std::filesystem::path& path) {
    return {path.stem().string(), load_text_file(path)};
  }
};

struct BehaviorDescription {
  std::string description;
  std::string possible_code;
  std::string solution;
};

class BehaviorCatalog {
 public:
  static BehaviorCatalog from_json(const json& doc) {
    BehaviorCatalog c;
    for (const auto& b : doc.at("behaviors")) {
      auto behavior = behavior_from(b.at("name").get<std::string>());
      if (!behavior) throw Error(Errc::FixtureError, "unknown behavior " + b.at("name").get<std::string>());
      c.entries_[*behavior] = {b.at("description").get<std::string>(), b.at("possible_code").get<std::string>(),
                               b.at("solution").get<std::string>()};
    }
    for (auto b : kBehaviors) {
      if (!c.entries_.count(b)) throw Error(Errc::FixtureError, "no description for " + std::string(to_string(b)));
    }
    return c;
  }

  static BehaviorCatalog load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

  const BehaviorDescription& at(UnreliableBehavior b) const { return entries_.at(b); }

 private:
  std::map<UnreliableBehavior, BehaviorDescription> entries_;
};

/// What the perception module reports about the scene. It travels with the
/// bundle for backends that model scene awareness and is never sent over
/// the wire.
struct PerceptionSnapshot {
  Box executable;
  std::vector<std::pair<std::string, Vec3>> objects;

  friend bool operator==(const PerceptionSnapshot&, const PerceptionSnapshot&) = default;
};

struct PromptBundle {
  std::vector<ChatMessage> messages;
  std::string demo_id;
  std::string task;
  GranularityLevel level = GranularityLevel::A;
  int granularity = 2;
  std::optional<UnreliableBehavior> feedback_for;
  std::uint64_t sampling_seed = 0;
  std::optional<PerceptionSnapshot> perception;

  bool is_feedback() const noexcept { return feedback_for.has_value(); }

  json to_json() const {
    json j;
    j["demo_id"] = demo_id;
    j["task"] = task;
    j["level"] = to_string(level);
    j["granularity"] = granularity;
    j["feedback_for"] = feedback_for ? json(to_string(*feedback_for)) : json(nullptr);
    j["sampling_seed"] = sampling_seed;
    for (const auto& m : messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
    if (perception) {
      json p;
      p["executable"] = {{"center", {perception->executable.center.x, perception->executable.center.y,
                                     perception->executable.center.z}},
                         {"half", {perception->executable.half.x, perception->executable.half.y,
                                   perception->executable.half.z}}};
      for (const auto& [name, pos] : perception->objects) p["objects"].push_back({{"name", name}, {"position", {pos.x, pos.y, pos.z}}});
      j["perception"] = std::move(p);
    }
    return j;
  }

  /// Stable digest over every field, messages included.
  std::uint64_t digest() const { return fnv1a64(to_json().dump()); }

  /// Digest of the message list alone (what a remote model actually sees).
  std::uint64_t message_digest() const {
    Fnv1a64 h;
    for (const auto& m : messages) h.update(m.role).separator().update(m.content).separator();
    return h.digest();
  }

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

namespace detail {

inline std::vector<ChatMessage> preamble(const DemonstrationCode& demo) {
  if (detail::trim(demo.text).empty()) throw Error(Errc::EmptyDemo, "demonstration code '" + demo.id + "' is empty");
  std::string prefix;
  prefix.reserve(kPrefixHead.size() + demo.text.size() + kPrefixTail.size());
  prefix += kPrefixHead;
  prefix += demo.text;
  prefix += kPrefixTail;
  return {{"system", std::string(kSystemPrompt)}, {"user", std::move(prefix)}, {"assistant", std::string(kAcknowledgement)}};
}

inline void tag_bundle(PromptBundle& b, const Instruction& ins, const DemonstrationCode& demo) {
  b.demo_id = demo.id;
  b.task = ins.task();
  b.level = ins.level().value_or(GranularityLevel::A);
  b.granularity = granularity_of(ins);
}

}  // namespace detail

/// "# Query: <text>."
inline std::string query_line(const Instruction& ins) { return "# Query: " + ins.text() + "."; }

inline PromptBundle build_prompt(const Instruction& ins, const DemonstrationCode& demo) {
  PromptBundle b;
  b.messages = detail::preamble(demo);
  b.messages.push_back({"user", query_line(ins)});
  detail::tag_bundle(b, ins, demo);
  return b;
}

inline PromptBundle build_feedback_prompt(const RawCompletion& failed, UnreliableBehavior behavior,
                                          const Instruction& ins, const DemonstrationCode& demo,
                                          const BehaviorCatalog& catalog) {
  const auto& desc = catalog.at(behavior);
  PromptBundle b;
  b.messages = detail::preamble(demo);
  std::string body = "During this manipulation, you generated the following failed policy code:\n";
  body += failed.text;
  if (failed.text.empty() || failed.text.back() != '\n') body += "\n";
  body += "These policy codes result in the following unreliable behavior:\n";
  body += "1." + std::string(to_string(behavior)) + "\n";
  body += desc.description + "\n";
  body += "Possible code like: " + desc.possible_code + "\n";
  body += "Solution is " + desc.solution + "\n";
  body += query_line(ins) + "\n";
  body += kRegenerateRequest;
  b.messages.push_back({"user", std::move(body)});
  detail::tag_bundle(b, ins, demo);
  b.feedback_for = behavior;
  return b;
}

}  // namespace roboinspect
