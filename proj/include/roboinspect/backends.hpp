#pragma once

// Chat-completion backends: a remote HTTP client speaking the common
// chat-completions JSON shape, and a seeded mock that injects faults.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "roboinspect/core.hpp"
#include "roboinspect/hashing.hpp"
#include "roboinspect/instructions.hpp"
#include "roboinspect/policy_parse.hpp"
#include "roboinspect/prompting.hpp"
#include "roboinspect/simworld.hpp"

namespace roboinspect {

enum class BackendKind { Http, Mock };

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::string model_name = "mock";
  double temperature = 0.1;
  int timeout_ms = 30000;
  int max_retries = 3;
  int backoff_ms = 250;  // first retry delay; doubles each attempt
  std::string endpoint_url;
  std::string api_key_env;
  int max_in_flight = 4;
  std::string profile = "default";  // mock preset name

  void validate() const {
    if (!(temperature >= 0 && temperature <= 2)) throw Error(Errc::ConfigError, "temperature must lie in [0, 2]");
    if (timeout_ms <= 0) throw Error(Errc::ConfigError, "timeout_ms must be positive");
    if (max_retries < 0) throw Error(Errc::ConfigError, "max_retries must be >= 0");
    if (backoff_ms < 0) throw Error(Errc::ConfigError, "backoff_ms must be >= 0");
    if (max_in_flight <= 0) throw Error(Errc::ConfigError, "max_in_flight must be positive");
    if (model_name.empty()) throw Error(Errc::ConfigError, "model_name is empty");
    if (kind == BackendKind::Http && endpoint_url.empty()) throw Error(Errc::ConfigError, "http backend needs endpoint_url");
    if (kind == BackendKind::Http && api_key_env.empty()) throw Error(Errc::ConfigError, "http backend needs api_key_env");
  }

  static BackendConfig from_json(const json& j) {
    BackendConfig c;
    std::string kind = j.value("kind", std::string("mock"));
    if (kind == "http") c.kind = BackendKind::Http;
    else if (kind == "mock") c.kind = BackendKind::Mock;
    else throw Error(Errc::ConfigError, "unknown backend kind '" + kind + "'");
    c.model_name = j.value("model_name", c.model_name);
    c.temperature = j.value("temperature", c.temperature);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.profile = j.value("profile", c.profile);
    c.validate();
    return c;
  }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual RawCompletion complete(const PromptBundle& bundle) = 0;
  virtual const std::string& id() const = 0;
};

// ---------------------------------------------------------------------------
// HTTP

/// Request body for a bundle: {model, messages:[{role, content}], temperature}.
inline json chat_request_body(const PromptBundle& bundle, const BackendConfig& cfg) {
  json body;
  body["model"] = cfg.model_name;
  body["messages"] = json::array();
  for (const auto& m : bundle.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = cfg.temperature;
  return body;
}

inline std::string extract_completion(const std::string& payload) {
  json doc = json::parse(payload, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::MalformedResponse, "response is not JSON");
  const json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const auto& first = doc["choices"][0];
    if (first.is_object() && first.contains("message") && first["message"].is_object() &&
        first["message"].contains("content"))
      content = &first["message"]["content"];
  }
  if (!content || !content->is_string()) throw Error(Errc::MalformedResponse, "response lacks choices[0].message.content");
  return content->get<std::string>();
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;

  static Endpoint parse(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::ConfigError, "endpoint_url lacks a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
  }
};

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig cfg)
      : cfg_(std::move(cfg)), endpoint_(Endpoint::parse(cfg_.endpoint_url)), slots_(cfg_.max_in_flight) {
    cfg_.validate();
    id_ = "http:" + cfg_.model_name;
  }

  const std::string& id() const override { return id_; }
  const BackendConfig& config() const noexcept { return cfg_; }

  RawCompletion complete(const PromptBundle& bundle) override {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key) throw Error(Errc::MissingApiKey, "environment variable " + cfg_.api_key_env + " is not set");
    std::string body = chat_request_body(bundle, cfg_).dump();

    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    auto started = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0 && cfg_.backoff_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(cfg_.backoff_ms) << (attempt - 1)));
      }
      httplib::Client client(endpoint_.origin);
      auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
      auto res = client.Post(endpoint_.path, headers, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw Error(Errc::Transport, "HTTP status " + std::to_string(res->status));
      }
      auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
      return {extract_completion(res->body), id_, static_cast<std::int64_t>(elapsed.count())};
    }
    throw Error(Errc::Transport, last_error + " after " + std::to_string(cfg_.max_retries + 1) + " attempts");
  }

 private:
  BackendConfig cfg_;
  Endpoint endpoint_;
  std::counting_semaphore<> slots_;
  std::string id_;
};

// ---------------------------------------------------------------------------
// Mock

struct MockProfile {
  std::string name;
  std::map<UnreliableBehavior, double> base_fault_rates;
  std::map<UnreliableBehavior, double> feedback_suppression;
  std::map<int, double> competence_by_complexity;  // subtracted from the total fault rate
  std::map<int, double> granularity_bonus;         // subtracted from the total fault rate
  std::map<int, std::map<UnreliableBehavior, double>> level_mix;  // reshapes the fault mix per granularity
  double refusal_awareness = 0;           // chance to refuse a condition-level query whose target is out of reach
  double feedback_refusal_awareness = 0;  // same, after Infeasible feedback
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [&](double p, const std::string& what) {
      if (!(p >= 0 && p <= 1)) throw Error(Errc::ConfigError, "mock profile " + name + ": " + what + " outside [0, 1]");
    };
    double sum = 0;
    for (auto b : kBehaviors) {
      double r = rate_or(base_fault_rates, b, 0);
      prob(r, "base rate");
      sum += r;
      prob(rate_or(feedback_suppression, b, 1), "suppression");
    }
    if (sum > 1 + 1e-12) throw Error(Errc::ConfigError, "mock profile " + name + ": fault rates sum above 1");
    for (const auto& [k, v] : competence_by_complexity) prob(v, "competence");
    for (const auto& [k, v] : granularity_bonus) prob(v, "granularity bonus");
    for (const auto& [g, mix] : level_mix)
      for (const auto& [b, w] : mix)
        if (!(w >= 0)) throw Error(Errc::ConfigError, "mock profile " + name + ": negative mix weight");
    prob(refusal_awareness, "refusal_awareness");
    prob(feedback_refusal_awareness, "feedback_refusal_awareness");
  }

  /// Per-behavior fault probabilities for one draw.
  std::map<UnreliableBehavior, double> fault_rates(int complexity, int granularity,
                                                   std::optional<UnreliableBehavior> feedback_for) const {
    double base_total = 0, weight_total = 0;
    std::map<UnreliableBehavior, double> weights;
    for (auto b : kBehaviors) {
      double r = rate_or(base_fault_rates, b, 0);
      base_total += r;
      double mix = 1;
      if (auto it = level_mix.find(granularity); it != level_mix.end()) mix = rate_or(it->second, b, 1);
      weights[b] = r * mix;
      weight_total += weights[b];
    }
    double total = base_total - value_or(competence_by_complexity, complexity) - value_or(granularity_bonus, granularity);
    total = std::clamp(total, 0.0, 1.0);
    std::map<UnreliableBehavior, double> rates;
    for (auto b : kBehaviors) {
      double r = weight_total > 0 ? total * weights[b] / weight_total : 0.0;
      if (feedback_for && *feedback_for == b) r *= rate_or(feedback_suppression, b, 1);
      rates[b] = r;
    }
    return rates;
  }

  static MockProfile from_json(const std::string& name, const json& j) {
    MockProfile p;
    p.name = name;
    auto behavior_map = [&](const char* key) {
      std::map<UnreliableBehavior, double> out;
      if (!j.contains(key)) return out;
      for (const auto& [k, v] : j.at(key).items()) {
        auto b = behavior_from(k);
        if (!b) throw Error(Errc::ConfigError, "mock profile " + name + ": unknown behavior " + k);
        out[*b] = v.get<double>();
      }
      return out;
    };
    auto int_map = [&](const char* key) {
      std::map<int, double> out;
      if (!j.contains(key)) return out;
      for (const auto& [k, v] : j.at(key).items()) out[std::stoi(k)] = v.get<double>();
      return out;
    };
    p.base_fault_rates = behavior_map("base_fault_rates");
    p.feedback_suppression = behavior_map("feedback_suppression");
    p.competence_by_complexity = int_map("competence_by_complexity");
    p.granularity_bonus = int_map("granularity_bonus");
    if (j.contains("level_mix")) {
      for (const auto& [g, mix] : j.at("level_mix").items()) {
        for (const auto& [k, v] : mix.items()) {
          auto b = behavior_from(k);
          if (!b) throw Error(Errc::ConfigError, "mock profile " + name + ": unknown behavior " + k);
          p.level_mix[std::stoi(g)][*b] = v.get<double>();
        }
      }
    }
    p.refusal_awareness = j.value("refusal_awareness", 0.0);
    p.feedback_refusal_awareness = j.value("feedback_refusal_awareness", p.refusal_awareness);
    p.seed = j.value("seed", std::uint64_t{0});
    p.validate();
    return p;
  }

 private:
  template <class K>
  static double rate_or(const std::map<K, double>& m, K k, double fallback) {
    auto it = m.find(k);
    return it == m.end() ? fallback : it->second;
  }
  static double value_or(const std::map<int, double>& m, int k) { return rate_or(m, k, 0.0); }
};

class MockProfiles {
 public:
  static MockProfiles from_json(const json& doc) {
    MockProfiles out;
    for (const auto& [name, body] : doc.at("profiles").items()) out.profiles_[name] = MockProfile::from_json(name, body);
    return out;
  }
  static MockProfiles load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

  const MockProfile& find(const std::string& name) const {
    auto it = profiles_.find(name);
    if (it == profiles_.end()) throw Error(Errc::ConfigError, "unknown mock profile '" + name + "'");
    return it->second;
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : profiles_) out.push_back(n);
    return out;
  }

 private:
  std::map<std::string, MockProfile> profiles_;
};

/// Canned faulty completions per (behavior, task). Nonsense templates are
/// shared by all tasks and wrap the golden program via `{golden}`.
class FaultLibrary {
 public:
  static FaultLibrary from_json(const json& doc) {
    FaultLibrary lib;
    for (const auto& t : doc.at("nonsense")) lib.nonsense_.push_back(t.get<std::string>());
    for (const auto& [task, per] : doc.at("tasks").items()) {
      for (const auto& [name, variants] : per.items()) {
        auto b = behavior_from(name);
        if (!b || *b == UnreliableBehavior::Nonsense) throw Error(Errc::FixtureError, "bad behavior " + name);
        for (const auto& v : variants) lib.programs_[{task, *b}].push_back(v.get<std::vector<std::string>>());
      }
    }
    lib.refusal_ = doc.at("refusal").get<std::string>();
    if (lib.nonsense_.empty()) throw Error(Errc::FixtureError, "no nonsense templates");
    return lib;
  }
  static FaultLibrary load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

  std::size_t variants(const std::string& task, UnreliableBehavior b) const {
    if (b == UnreliableBehavior::Nonsense) return nonsense_.size();
    auto it = programs_.find({task, b});
    return it == programs_.end() ? 0 : it->second.size();
  }

  std::string render(const std::string& task, UnreliableBehavior b, std::size_t variant,
                     const SceneCatalog& scenes) const {
    if (b == UnreliableBehavior::Nonsense) {
      return detail::replace_all(nonsense_.at(variant % nonsense_.size()), "{golden}", scenes.golden_text(task));
    }
    auto it = programs_.find({task, b});
    if (it == programs_.end() || it->second.empty())
      throw Error(Errc::FixtureError, "no " + std::string(to_string(b)) + " completion for " + task);
    const auto& steps = it->second[variant % it->second.size()];
    std::string golden = scenes.golden_text(task);
    std::string out = golden.substr(0, golden.find('\n') + 1);
    for (const auto& s : steps) out += "composer(\"" + s + "\")\n";
    return out;
  }

  std::string refusal(const std::string& target) const { return detail::replace_all(refusal_, "{target}", target); }

 private:
  std::vector<std::string> nonsense_;
  std::map<std::pair<std::string, UnreliableBehavior>, std::vector<std::vector<std::string>>> programs_;
  std::string refusal_;
};

struct MockDraw {
  std::optional<UnreliableBehavior> injected;
  bool refused = false;
  std::string text;
};

class MockBackend final : public Backend {
 public:
  MockBackend(BackendConfig cfg, MockProfile profile, std::shared_ptr<const TaskRegistry> tasks,
              std::shared_ptr<const SceneCatalog> scenes, std::shared_ptr<const FaultLibrary> faults,
              std::shared_ptr<const PolicyParser> parser)
      : cfg_(std::move(cfg)),
        profile_(std::move(profile)),
        tasks_(std::move(tasks)),
        scenes_(std::move(scenes)),
        faults_(std::move(faults)),
        parser_(std::move(parser)) {
    cfg_.validate();
    profile_.validate();
    id_ = "mock:" + cfg_.model_name + ":" + profile_.name;
  }

  const std::string& id() const override { return id_; }
  const MockProfile& profile() const noexcept { return profile_; }

  RawCompletion complete(const PromptBundle& bundle) override { return {synthesize(bundle).text, id_, 0}; }

  /// The draw behind a completion, including which fault (if any) was injected.
  MockDraw synthesize(const PromptBundle& bundle) const {
    const auto& task = tasks_->find(bundle.task);
    std::uint64_t key = Fnv1a64{}.update(profile_.seed).separator().update(profile_.name).separator()
                            .update(bundle.digest()).digest();
    double u_fault = unit_interval(splitmix64(key ^ 0x1));
    double u_variant = unit_interval(splitmix64(key ^ 0x2));
    double u_refuse = unit_interval(splitmix64(key ^ 0x3));

    MockDraw draw;
    auto rates = profile_.fault_rates(complexity_of(task), bundle.granularity, bundle.feedback_for);
    double acc = 0;
    for (auto b : kBehaviors) {
      acc += rates[b];
      if (u_fault < acc) {
        draw.injected = b;
        break;
      }
    }
    if (draw.injected) {
      std::size_t n = faults_->variants(task.scene, *draw.injected);
      if (n > 0) {
        auto variant = static_cast<std::size_t>(u_variant * static_cast<double>(n));
        draw.text = faults_->render(task.scene, *draw.injected, variant, *scenes_);
        return draw;
      }
      draw.injected.reset();
    }
    if (auto missing = unreachable_referent(task, bundle)) {
      double awareness = bundle.feedback_for == UnreliableBehavior::Infeasible ? profile_.feedback_refusal_awareness
                                                                                : profile_.refusal_awareness;
      if (bundle.granularity >= 4 && u_refuse < awareness) {
        draw.refused = true;
        draw.text = faults_->refusal(*missing);
        return draw;
      }
    }
    draw.text = scenes_->golden_text(task.scene);
    return draw;
  }

 private:
  std::optional<std::string> unreachable_referent(const TaskSpec& task, const PromptBundle& bundle) const {
    if (!bundle.perception) return std::nullopt;
    for (const auto& phrase : scenes_->find(task.scene).golden) {
      auto step = parser_->parse_phrase(phrase);
      if (!step || !step->target) continue;
      for (const auto& [name, pos] : bundle.perception->objects) {
        if (name == *step->target && !bundle.perception->executable.contains(pos)) return name;
      }
    }
    return std::nullopt;
  }

  BackendConfig cfg_;
  MockProfile profile_;
  std::shared_ptr<const TaskRegistry> tasks_;
  std::shared_ptr<const SceneCatalog> scenes_;
  std::shared_ptr<const FaultLibrary> faults_;
  std::shared_ptr<const PolicyParser> parser_;
  std::string id_;
};

}  // namespace roboinspect
