#pragma once

// Parser for generated policy code. A completion is accepted only if every
// non-blank, non-comment line is the planner context line
// (`objects = [...]`) or a `composer(...)` call whose phrase the composer
// grammar understands. Anything else makes the completion Nonsense; a
// completion with no composer calls that states it cannot do the task is a
// Refusal.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "roboinspect/core.hpp"
#include "roboinspect/geometry.hpp"

namespace roboinspect {

struct RawCompletion {
  std::string text;
  std::string backend_id;
  std::int64_t latency_ms = 0;

  friend bool operator==(const RawCompletion&, const RawCompletion&) = default;
};

enum class Verb { MoveTo, Grasp, OpenGripper, CloseGripper, Rotate, ResetPose };

inline constexpr std::array<Verb, 6> kVerbs{Verb::MoveTo,       Verb::Grasp,  Verb::OpenGripper,
                                            Verb::CloseGripper, Verb::Rotate, Verb::ResetPose};

constexpr std::string_view to_string(Verb v) noexcept {
  switch (v) {
    case Verb::MoveTo: return "MoveTo";
    case Verb::Grasp: return "Grasp";
    case Verb::OpenGripper: return "OpenGripper";
    case Verb::CloseGripper: return "CloseGripper";
    case Verb::Rotate: return "Rotate";
    case Verb::ResetPose: return "ResetPose";
  }
  return "?";
}

inline std::optional<Verb> verb_from(std::string_view s) {
  for (auto v : kVerbs)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

enum class Offset { None, Top, Left, Right, Front, Back };

inline constexpr std::array<Offset, 5> kOffsets{Offset::Top, Offset::Left, Offset::Right, Offset::Front,
                                                Offset::Back};

constexpr std::string_view to_string(Offset o) noexcept {
  switch (o) {
    case Offset::None: return "none";
    case Offset::Top: return "top";
    case Offset::Left: return "left";
    case Offset::Right: return "right";
    case Offset::Front: return "front";
    case Offset::Back: return "back";
  }
  return "?";
}

inline std::optional<Offset> offset_from(std::string_view s) {
  if (s == "none") return Offset::None;
  for (auto o : kOffsets)
    if (to_string(o) == s) return o;
  return std::nullopt;
}

/// One composer call. MoveTo may carry a single distance parameter (move N
/// units above/beside the target); Rotate carries the angle in degrees.
struct ComposerStep {
  Verb verb = Verb::ResetPose;
  std::optional<std::string> target;
  Offset offset = Offset::None;
  std::vector<double> params;

  friend bool operator==(const ComposerStep&, const ComposerStep&) = default;
};

inline std::string describe(const ComposerStep& s) {
  std::string out(to_string(s.verb));
  if (s.target || !s.params.empty()) {
    out += "(";
    if (s.target) out += *s.target;
    if (s.offset != Offset::None) out += std::string("@") + std::string(to_string(s.offset));
    for (std::size_t i = 0; i < s.params.size(); ++i) {
      out += (i == 0 && !s.target) ? "" : ", ";
      out += format_number(s.params[i]);
    }
    out += ")";
  }
  return out;
}

struct Program {
  std::vector<std::string> context;
  std::vector<ComposerStep> steps;

  friend bool operator==(const Program&, const Program&) = default;
};

struct NonsenseRejection {
  Evidence evidence;
  int line = 0;  // 1-based; 0 when the whole completion is at fault

  friend bool operator==(const NonsenseRejection&, const NonsenseRejection&) = default;
};

struct Refusal {
  std::string text;
  friend bool operator==(const Refusal&, const Refusal&) = default;
};

using ParseResult = std::variant<Program, NonsenseRejection, Refusal>;

// ---------------------------------------------------------------------------
// Grammar

struct VerbRule {
  Verb verb;
  std::string canonical;
  std::vector<std::string> synonyms;
};

struct OffsetWords {
  std::vector<std::string> relative;  // "the top of the bin"
  std::vector<std::string> distance;  // "20 units above the bin"
};

struct Grammar {
  std::vector<VerbRule> verbs;
  std::map<Offset, OffsetWords> offsets;
  std::vector<std::string> distance_verbs;
  std::vector<std::string> distance_units;
  std::vector<std::string> articles;
  std::vector<std::string> effector_words;
  std::map<std::string, int> rotation_sense;
  std::vector<std::string> refusal_phrases;

  static Grammar from_json(const json& doc) {
    Grammar g;
    for (const auto& v : doc.at("verbs")) {
      auto verb = verb_from(v.at("verb").get<std::string>());
      if (!verb) throw Error(Errc::FixtureError, "unknown verb in grammar");
      g.verbs.push_back({*verb, v.at("canonical").get<std::string>(),
                         v.at("synonyms").get<std::vector<std::string>>()});
    }
    for (auto verb : kVerbs) {
      if (std::none_of(g.verbs.begin(), g.verbs.end(), [&](const VerbRule& r) { return r.verb == verb; }))
        throw Error(Errc::FixtureError, "grammar lacks verb " + std::string(to_string(verb)));
    }
    for (const auto& [key, value] : doc.at("offsets").items()) {
      auto off = offset_from(key);
      if (!off || *off == Offset::None) throw Error(Errc::FixtureError, "bad offset " + key);
      g.offsets[*off] = {value.at("relative").get<std::vector<std::string>>(),
                         value.at("distance").get<std::vector<std::string>>()};
    }
    for (auto off : kOffsets) {
      if (!g.offsets.count(off) || g.offsets[off].relative.empty() || g.offsets[off].distance.empty())
        throw Error(Errc::FixtureError, "grammar lacks words for offset " + std::string(to_string(off)));
    }
    g.distance_verbs = doc.at("distance_verbs").get<std::vector<std::string>>();
    g.distance_units = doc.at("distance_units").get<std::vector<std::string>>();
    g.articles = doc.at("articles").get<std::vector<std::string>>();
    g.effector_words = doc.at("effector_words").get<std::vector<std::string>>();
    g.rotation_sense = doc.at("rotation_sense").get<std::map<std::string, int>>();
    g.refusal_phrases = doc.at("refusal_phrases").get<std::vector<std::string>>();
    return g;
  }

  static Grammar load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

  const VerbRule& rule(Verb v) const {
    for (const auto& r : verbs)
      if (r.verb == v) return r;
    throw Error(Errc::FixtureError, "grammar lacks verb");
  }

  /// Machine-readable description: verbs, arities and the synonym map.
  json to_json() const {
    json out;
    auto arity = [](Verb v) -> json {
      switch (v) {
        case Verb::MoveTo: return {{"target", "required"}, {"params", "optional: distance"}};
        case Verb::Grasp: return {{"target", "required"}, {"params", "none"}};
        case Verb::Rotate: return {{"target", "optional"}, {"params", "required: degrees"}};
        default: return {{"target", "none"}, {"params", "none"}};
      }
    };
    for (const auto& r : verbs) {
      json v = arity(r.verb);
      v["verb"] = to_string(r.verb);
      v["canonical"] = r.canonical;
      v["synonyms"] = r.synonyms;
      out["verbs"].push_back(v);
    }
    for (const auto& [off, words] : offsets)
      out["offsets"][std::string(to_string(off))] = {{"relative", words.relative}, {"distance", words.distance}};
    out["distance_verbs"] = distance_verbs;
    out["distance_units"] = distance_units;
    out["articles"] = articles;
    out["effector_words"] = effector_words;
    out["rotation_sense"] = rotation_sense;
    out["refusal_phrases"] = refusal_phrases;
    return out;
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to, char sep = ' ') {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back(sep);
    out += words[i];
  }
  return out;
}

inline bool starts_with_words(const std::vector<std::string>& words, std::size_t at,
                              const std::vector<std::string>& phrase) {
  if (phrase.empty() || at + phrase.size() > words.size()) return false;
  for (std::size_t i = 0; i < phrase.size(); ++i)
    if (words[at + i] != phrase[i]) return false;
  return true;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline bool is_name_token(std::string_view w) {
  if (w.empty()) return false;
  return std::all_of(w.begin(), w.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

/// Strips a trailing `# comment` that is not inside a quoted string.
inline std::string_view strip_inline_comment(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

inline bool is_space_char(char c) { return c == ' ' || c == '\t'; }

inline bool is_import_line(std::string_view code) {
  auto keyword = [&](std::string_view kw) {
    return code.size() > kw.size() && code.substr(0, kw.size()) == kw && is_space_char(code[kw.size()]);
  };
  if (code == "import" || keyword("import")) return true;
  if (keyword("from")) {
    auto rest = code.substr(4);
    return rest.find(" import ") != std::string_view::npos || rest.find("\timport") != std::string_view::npos ||
           (rest.size() >= 7 && rest.substr(rest.size() - 7) == " import");
  }
  return false;
}

}  // namespace detail

class PolicyParser {
 public:
  explicit PolicyParser(Grammar grammar) : grammar_(std::move(grammar)) {
    for (const auto& rule : grammar_.verbs)
      for (const auto& syn : rule.synonyms) synonyms_.push_back({detail::split_words(detail::lower_ascii(syn)), rule.verb});
    std::stable_sort(synonyms_.begin(), synonyms_.end(),
                     [](const auto& a, const auto& b) { return a.words.size() > b.words.size(); });
    for (const auto& w : grammar_.articles) articles_.insert(detail::lower_ascii(w));
  }

  const Grammar& grammar() const noexcept { return grammar_; }

  ParseResult parse(const RawCompletion& raw) const { return parse(raw.text); }

  ParseResult parse(std::string_view text) const {
    if (detail::trim(text).empty()) {
      return NonsenseRejection{{"empty-completion", "line 0", "completion is empty"}, 0};
    }

    std::optional<std::pair<int, std::string>> first_import;
    std::optional<std::pair<int, std::string>> first_bad;
    std::string bad_reason;
    std::size_t composer_lines = 0;
    bool have_context = false;
    Program program;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
      ++line_no;

      auto s = detail::trim(line);
      if (s.empty() || s.front() == '#' || s.substr(0, 3) == "```") continue;
      auto code = detail::trim(detail::strip_inline_comment(s));
      if (code.empty()) continue;

      auto mark_bad = [&](std::string reason) {
        if (!first_bad) {
          first_bad = {line_no, std::string(s)};
          bad_reason = std::move(reason);
        }
      };

      if (detail::is_import_line(code)) {
        if (!first_import) first_import = {line_no, std::string(s)};
        continue;
      }
      if (auto arg = composer_argument(code)) {
        ++composer_lines;
        if (auto step = parse_phrase(*arg)) program.steps.push_back(std::move(*step));
        else mark_bad("unrecognized composer phrase");
        continue;
      }
      if (auto names = context_names(code)) {
        std::set<std::string> unique(names->begin(), names->end());
        if (have_context) mark_bad("duplicate planner context line");
        else if (unique.size() != names->size()) mark_bad("planner context repeats an object name");
        else {
          program.context = std::move(*names);
          have_context = true;
        }
        continue;
      }
      if (is_block_label(code)) continue;
      mark_bad("text outside the composer language");
    }

    if (first_import) {
      if (first_bad && first_bad->first < first_import->first)
        return NonsenseRejection{{"offending-line", "line " + std::to_string(first_bad->first),
                                  bad_reason + ": " + first_bad->second},
                                 first_bad->first};
      return NonsenseRejection{{"import-statement", "line " + std::to_string(first_import->first),
                                "import statement: " + first_import->second},
                               first_import->first};
    }
    if (composer_lines == 0 && is_refusal(text)) return Refusal{std::string(detail::trim(text))};
    if (first_bad) {
      return NonsenseRejection{{"offending-line", "line " + std::to_string(first_bad->first),
                                bad_reason + ": " + first_bad->second},
                               first_bad->first};
    }
    if (program.steps.empty()) {
      return NonsenseRejection{{"no-composer-calls", "line 0", "completion contains no composer calls"}, 0};
    }
    return program;
  }

  /// Parses a single composer phrase such as "move to the top of the bin".
  std::optional<ComposerStep> parse_phrase(std::string_view phrase) const {
    std::string norm = detail::lower_ascii(detail::trim(phrase));
    while (!norm.empty() && (norm.back() == '.' || norm.back() == ';')) norm.pop_back();
    auto words = detail::split_words(norm);
    if (words.empty()) return std::nullopt;

    if (auto step = parse_distance_move(words)) return step;

    for (const auto& syn : synonyms_) {
      if (!detail::starts_with_words(words, 0, syn.words)) continue;
      std::vector<std::string> rest(words.begin() + static_cast<std::ptrdiff_t>(syn.words.size()), words.end());
      if (auto step = parse_remainder(syn.verb, rest)) return step;
    }
    return std::nullopt;
  }

  std::string print(const ComposerStep& step) const {
    auto the = [](const std::string& t) { return "the " + t; };
    switch (step.verb) {
      case Verb::MoveTo: {
        const std::string& target = step.target.value_or("");
        if (!step.params.empty() && step.offset != Offset::None) {
          return grammar_.distance_verbs.front() + " " + format_number(step.params.front()) + " " +
                 grammar_.distance_units.back() + " " + grammar_.offsets.at(step.offset).distance.front() + " " +
                 the(target);
        }
        std::string out = grammar_.rule(Verb::MoveTo).canonical + " ";
        if (step.offset != Offset::None) out += the(grammar_.offsets.at(step.offset).relative.front()) + " of ";
        return out + the(target);
      }
      case Verb::Grasp: return grammar_.rule(Verb::Grasp).canonical + " " + the(step.target.value_or(""));
      case Verb::Rotate: {
        std::string out = grammar_.rule(Verb::Rotate).canonical + " ";
        if (step.target) out += the(*step.target) + " ";
        return out + "by " + format_number(step.params.empty() ? 0.0 : step.params.front()) + " degrees";
      }
      default: return grammar_.rule(step.verb).canonical;
    }
  }

  /// Canonical text for a program; parse(print(p)) == p.
  std::string print(const Program& program) const {
    std::string out;
    if (!program.context.empty()) {
      out += "objects = [";
      for (std::size_t i = 0; i < program.context.size(); ++i) {
        if (i) out += ", ";
        out += "'" + program.context[i] + "'";
      }
      out += "]\n";
    }
    for (const auto& step : program.steps) out += "composer(\"" + print(step) + "\")\n";
    return out;
  }

  bool is_refusal(std::string_view text) const {
    std::string lower = detail::lower_ascii(text);
    for (char& c : lower)
      if (c == '\n' || c == '\t' || c == '\r') c = ' ';
    for (const auto& phrase : grammar_.refusal_phrases) {
      if (lower.find(detail::lower_ascii(phrase)) != std::string::npos) return true;
    }
    return false;
  }

 private:
  struct Synonym {
    std::vector<std::string> words;
    Verb verb;
  };

  static std::optional<std::string_view> composer_argument(std::string_view code) {
    constexpr std::string_view kw = "composer";
    if (code.substr(0, kw.size()) != kw) return std::nullopt;
    auto rest = detail::trim(code.substr(kw.size()));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
    auto arg = detail::trim(rest.substr(1, rest.size() - 2));
    if (arg.size() >= 2 && (arg.front() == '"' || arg.front() == '\'') && arg.back() == arg.front()) {
      arg = arg.substr(1, arg.size() - 2);
      if (arg.find(rest[1]) != std::string_view::npos) return std::nullopt;
    }
    return arg;
  }

  // `"planner" generated code`: the label some completions put above the block.
  static bool is_block_label(std::string_view code) {
    constexpr std::string_view tail = "generated code";
    if (code.size() <= tail.size() || code.substr(code.size() - tail.size()) != tail) return false;
    auto head = detail::trim(code.substr(0, code.size() - tail.size()));
    if (head.size() >= 2 && head.front() == '"' && head.back() == '"') head = head.substr(1, head.size() - 2);
    return detail::is_name_token(head);
  }

  static std::optional<std::vector<std::string>> context_names(std::string_view code) {
    constexpr std::string_view wrapper = "context:";
    if (code.substr(0, wrapper.size()) == wrapper) {
      auto inner = detail::trim(code.substr(wrapper.size()));
      if (inner.size() < 2 || (inner.front() != '"' && inner.front() != '\'') || inner.back() != inner.front())
        return std::nullopt;
      return context_names(detail::trim(inner.substr(1, inner.size() - 2)));
    }
    constexpr std::string_view kw = "objects";
    if (code.substr(0, kw.size()) != kw) return std::nullopt;
    auto rest = detail::trim(code.substr(kw.size()));
    if (rest.empty() || rest.front() != '=') return std::nullopt;
    rest = detail::trim(rest.substr(1));
    if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') return std::nullopt;
    auto body = rest.substr(1, rest.size() - 2);
    std::vector<std::string> names;
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < body.size() && detail::is_space_char(body[i])) ++i;
    };
    skip_ws();
    while (i < body.size()) {
      char q = body[i];
      if (q != '\'' && q != '"') return std::nullopt;
      auto end = body.find(q, i + 1);
      if (end == std::string_view::npos) return std::nullopt;
      auto name = body.substr(i + 1, end - i - 1);
      if (name.empty()) return std::nullopt;
      names.emplace_back(name);
      i = end + 1;
      skip_ws();
      if (i < body.size()) {
        if (body[i] != ',') return std::nullopt;
        ++i;
        skip_ws();
      }
    }
    return names;
  }

  std::size_t skip_article(const std::vector<std::string>& w, std::size_t at) const {
    return (at < w.size() && articles_.count(w[at])) ? at + 1 : at;
  }

  // Target name from the remaining words: optional article, then one or more
  // name tokens joined with '_'.
  std::optional<std::string> target_name(const std::vector<std::string>& w, std::size_t from, std::size_t to) const {
    from = skip_article(w, from);
    if (from >= to) return std::nullopt;
    for (std::size_t i = from; i < to; ++i)
      if (!detail::is_name_token(w[i])) return std::nullopt;
    return detail::join(w, from, to, '_');
  }

  bool is_effector(const std::vector<std::string>& w, std::size_t from, std::size_t to) const {
    from = skip_article(w, from);
    std::string phrase = detail::join(w, from, to);
    return std::any_of(grammar_.effector_words.begin(), grammar_.effector_words.end(),
                       [&](const std::string& e) { return detail::lower_ascii(e) == phrase; });
  }

  // "move 20 units above the bin"
  std::optional<ComposerStep> parse_distance_move(const std::vector<std::string>& w) const {
    if (w.size() < 3) return std::nullopt;
    if (std::find(grammar_.distance_verbs.begin(), grammar_.distance_verbs.end(), w[0]) ==
        grammar_.distance_verbs.end())
      return std::nullopt;
    auto dist = detail::parse_number(w[1]);
    if (!dist) return std::nullopt;
    std::size_t at = 2;
    if (at < w.size() && std::find(grammar_.distance_units.begin(), grammar_.distance_units.end(), w[at]) !=
                             grammar_.distance_units.end())
      ++at;
    for (const auto& [off, words] : grammar_.offsets) {
      for (const auto& phrase : words.distance) {
        auto pw = detail::split_words(detail::lower_ascii(phrase));
        if (!detail::starts_with_words(w, at, pw)) continue;
        auto target = target_name(w, at + pw.size(), w.size());
        if (!target) continue;
        return ComposerStep{Verb::MoveTo, std::move(target), off, {*dist}};
      }
    }
    return std::nullopt;
  }

  std::optional<ComposerStep> parse_remainder(Verb verb, const std::vector<std::string>& w) const {
    switch (verb) {
      case Verb::OpenGripper:
      case Verb::CloseGripper:
      case Verb::ResetPose:
        if (!w.empty()) return std::nullopt;
        return ComposerStep{verb, std::nullopt, Offset::None, {}};
      case Verb::Grasp: {
        auto target = target_name(w, 0, w.size());
        if (!target) return std::nullopt;
        return ComposerStep{verb, std::move(target), Offset::None, {}};
      }
      case Verb::MoveTo: {
        std::size_t at = skip_article(w, 0);
        for (const auto& [off, words] : grammar_.offsets) {
          for (const auto& rel : words.relative) {
            auto rw = detail::split_words(detail::lower_ascii(rel));
            if (!detail::starts_with_words(w, at, rw)) continue;
            std::size_t of = at + rw.size();
            if (of >= w.size() || w[of] != "of") continue;
            auto target = target_name(w, of + 1, w.size());
            if (target) return ComposerStep{verb, std::move(target), off, {}};
          }
        }
        auto target = target_name(w, 0, w.size());
        if (!target) return std::nullopt;
        return ComposerStep{verb, std::move(target), Offset::None, {}};
      }
      case Verb::Rotate: {
        // [the <target>] [clockwise|counterclockwise] [by] <number> [degrees]
        std::size_t i = 0;
        while (i < w.size() && w[i] != "by" && !detail::parse_number(w[i]) && !grammar_.rotation_sense.count(w[i])) ++i;
        std::optional<std::string> target;
        if (i > 0 && !is_effector(w, 0, i)) {
          target = target_name(w, 0, i);
          if (!target) return std::nullopt;
        }
        double sense = 1.0;
        if (i < w.size() && grammar_.rotation_sense.count(w[i])) sense = grammar_.rotation_sense.at(w[i++]);
        if (i < w.size() && w[i] == "by") ++i;
        if (i >= w.size()) return std::nullopt;
        auto angle = detail::parse_number(w[i++]);
        if (!angle) return std::nullopt;
        if (i < w.size() && (w[i] == "degrees" || w[i] == "degree" || w[i] == "deg")) ++i;
        if (i < w.size() && grammar_.rotation_sense.count(w[i]) && sense == 1.0) sense = grammar_.rotation_sense.at(w[i++]);
        if (i != w.size()) return std::nullopt;
        return ComposerStep{verb, std::move(target), Offset::None, {sense * *angle}};
      }
    }
    return std::nullopt;
  }

  Grammar grammar_;
  std::vector<Synonym> synonyms_;
  std::set<std::string> articles_;
};

}  // namespace roboinspect
