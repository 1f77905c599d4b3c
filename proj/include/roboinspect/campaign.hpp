#pragma once

// Trial pipeline, feedback refinement loop and the campaign runner over the
// (task x level x backend) grid.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "roboinspect/backends.hpp"
#include "roboinspect/behavior_check.hpp"
#include "roboinspect/core.hpp"
#include "roboinspect/hashing.hpp"
#include "roboinspect/instructions.hpp"
#include "roboinspect/policy_parse.hpp"
#include "roboinspect/prompting.hpp"
#include "roboinspect/simworld.hpp"

#ifndef ROBOINSPECT_DATA_DIR
#define ROBOINSPECT_DATA_DIR "data"
#endif

namespace roboinspect {

inline constexpr int kRecordSchema = 1;

/// Data directory baked in at build time.
inline std::filesystem::path default_data_dir() { return ROBOINSPECT_DATA_DIR; }

struct FixturePaths {
  std::filesystem::path tasks, templates, scenes, constraints, grammar, behaviors, demo;
  std::filesystem::path mock_profiles, mock_completions, table2, table3, corpus;

  static FixturePaths in(const std::filesystem::path& dir) {
    return {dir / "tasks.json",         dir / "templates.json",     dir / "scenes.json",
            dir / "constraints.json",   dir / "grammar.json",       dir / "behaviors.json",
            dir / "demo.txt",           dir / "mock_profiles.json", dir / "mock_completions.json",
            dir / "table2.json",        dir / "table3.json",        dir / "corpus.jsonl"};
  }

  /// Reads the [fixtures] section. `data_dir` sets the base; any other key
  /// overrides a single file. Relative paths resolve against `base`.
  static FixturePaths from_json(const json& j, const std::filesystem::path& base) {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base / path;
    };
    FixturePaths f = in(j.contains("data_dir") ? resolve(j.at("data_dir").get<std::string>()) : default_data_dir());
    std::pair<const char*, std::filesystem::path*> keys[] = {
        {"tasks", &f.tasks},
        {"templates", &f.templates},
        {"scenes", &f.scenes},
        {"constraints", &f.constraints},
        {"grammar", &f.grammar},
        {"behaviors", &f.behaviors},
        {"demo", &f.demo},
        {"mock_profiles", &f.mock_profiles},
        {"mock_completions", &f.mock_completions},
        {"table2", &f.table2},
        {"table3", &f.table3},
        {"corpus", &f.corpus},
    };
    for (auto [key, slot] : keys)
      if (j.contains(key)) *slot = resolve(j.at(key).get<std::string>());
    return f;
  }
};

// ---------------------------------------------------------------------------
// Single-completion evaluation

struct Evaluation {
  ParseResult parsed;
  std::optional<OrderVerdict> order;
  std::optional<SimResult> sim;
  GroundTruth truth;
  TrialOutcome outcome;
};

/// Everything a trial needs, loaded once and shared read-only across threads.
class Harness {
 public:
  static Harness load(const FixturePaths& paths, const SimConfig& sim) {
    auto tasks = std::make_shared<const TaskRegistry>(TaskRegistry::load(paths.tasks));
    auto scenes = std::make_shared<const SceneCatalog>(SceneCatalog::load(paths.scenes));
    auto parser = std::make_shared<const PolicyParser>(Grammar::load(paths.grammar));
    return Harness(paths, tasks, scenes, parser, sim);
  }

  const FixturePaths& paths() const noexcept { return paths_; }
  const TaskRegistry& tasks() const noexcept { return *tasks_; }
  const InstructionTemplates& templates() const noexcept { return templates_; }
  const ConstraintSet& constraints() const noexcept { return constraints_; }
  const PolicyParser& parser() const noexcept { return *parser_; }
  const BehaviorCatalog& behaviors() const noexcept { return behaviors_; }
  const DemonstrationCode& demo() const noexcept { return demo_; }
  const Simulator& simulator() const noexcept { return sim_; }
  std::shared_ptr<const TaskRegistry> shared_tasks() const { return tasks_; }
  std::shared_ptr<const SceneCatalog> shared_scenes() const { return scenes_; }
  std::shared_ptr<const PolicyParser> shared_parser() const { return parser_; }

  PerceptionSnapshot perceive(const WorldState& w) const {
    PerceptionSnapshot p{w.workspace.executable, {}};
    for (const auto& o : w.objects) p.objects.emplace_back(o.name, o.position);
    return p;
  }

  /// parse -> referents/order -> execute -> classify against the spawned world.
  Evaluation evaluate(const TaskSpec& task, GranularityLevel level, const WorldState& spawned,
                      std::string_view completion) const {
    Evaluation ev{parser_->parse(completion), std::nullopt, std::nullopt, {}, Success{}};
    ev.truth.target_out_of_workspace = sim_.target_out_of_workspace(task, spawned, *parser_);
    if (const auto* prog = std::get_if<Program>(&ev.parsed)) {
      if (auto missing = check_referents(*prog, spawned.object_names())) {
        ev.order = *missing;
      } else {
        ev.order = validate_order(*prog, constraints_.find(task.ordering), task.ordering);
      }
      if (std::holds_alternative<OrderOk>(*ev.order)) ev.sim = sim_.execute(*prog, spawned);
    }
    ev.outcome = classify(ev.parsed, ev.order, ev.sim, level, ev.truth);
    return ev;
  }

 private:
  Harness(FixturePaths paths, std::shared_ptr<const TaskRegistry> tasks, std::shared_ptr<const SceneCatalog> scenes,
          std::shared_ptr<const PolicyParser> parser, const SimConfig& sim)
      : paths_(std::move(paths)),
        tasks_(std::move(tasks)),
        scenes_(std::move(scenes)),
        templates_(InstructionTemplates::load(paths_.templates)),
        constraints_(ConstraintSet::load(paths_.constraints)),
        parser_(std::move(parser)),
        behaviors_(BehaviorCatalog::load(paths_.behaviors)),
        demo_(DemonstrationCode::load(paths_.demo)),
        sim_(*scenes_, *tasks_, sim) {
    for (const auto& t : tasks_->tasks()) {
      templates_.find(t.name);
      constraints_.find(t.ordering);
      scenes_->find(t.scene);
    }
  }

  FixturePaths paths_;
  std::shared_ptr<const TaskRegistry> tasks_;
  std::shared_ptr<const SceneCatalog> scenes_;
  InstructionTemplates templates_;
  ConstraintSet constraints_;
  std::shared_ptr<const PolicyParser> parser_;
  BehaviorCatalog behaviors_;
  DemonstrationCode demo_;
  Simulator sim_;
};

// ---------------------------------------------------------------------------
// Records

inline json outcome_to_json(const TrialOutcome& o) {
  json j;
  if (std::holds_alternative<Success>(o)) {
    j["kind"] = "Success";
  } else if (const auto* s = std::get_if<SpecialSuccess>(&o)) {
    j["kind"] = "SpecialSuccess";
    j["refusal"] = s->refusal_text;
  } else {
    const auto& f = std::get<Failure>(o);
    j["kind"] = "Failure";
    j["behavior"] = to_string(f.behavior);
    j["phase"] = to_string(f.phase);
    j["evidence"] = {{"kind", f.evidence.kind}, {"location", f.evidence.location}, {"message", f.evidence.message}};
  }
  return j;
}

inline TrialOutcome outcome_from_json(const json& j) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "Success") return Success{};
  if (kind == "SpecialSuccess") return SpecialSuccess{j.value("refusal", "")};
  if (kind != "Failure") throw Error(Errc::InvalidArgument, "unknown outcome kind '" + kind + "'");
  auto b = behavior_from(j.at("behavior").get<std::string>());
  if (!b) throw Error(Errc::InvalidArgument, "unknown behavior in record");
  const auto& e = j.at("evidence");
  return Failure{*b, {e.at("kind").get<std::string>(), e.at("location").get<std::string>(), e.at("message").get<std::string>()},
                 phase_of(*b)};
}

struct CellKey {
  std::string task;
  GranularityLevel level = GranularityLevel::A;
  std::string model;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct Attempt {
  std::string prompt_digest;
  RawCompletion completion;
  TrialOutcome outcome;
};

struct TrialRecord {
  CellKey cell;
  int trial_index = 0;
  std::uint64_t seed = 0;
  std::string prompt_digest;
  RawCompletion completion;
  std::optional<TrialOutcome> outcome;  // empty only when aborted
  int feedback_rounds_used = 0;
  std::vector<Attempt> history;         // every attempt, first prompt included
  GroundTruth truth;
  std::int64_t wall_ms = 0;
  bool aborted = false;
  std::string error;

  json to_json() const {
    json j;
    j["schema"] = kRecordSchema;
    j["cell"] = {{"task", cell.task}, {"level", to_string(cell.level)}, {"model", cell.model}};
    j["trial_index"] = trial_index;
    j["seed"] = seed;
    j["prompt_digest"] = prompt_digest;
    j["completion"] = {{"text", completion.text}, {"backend_id", completion.backend_id}, {"latency_ms", completion.latency_ms}};
    j["outcome"] = outcome ? outcome_to_json(*outcome) : json(nullptr);
    j["feedback_rounds_used"] = feedback_rounds_used;
    j["history"] = json::array();
    for (const auto& a : history) {
      j["history"].push_back({{"prompt_digest", a.prompt_digest},
                              {"completion", a.completion.text},
                              {"latency_ms", a.completion.latency_ms},
                              {"outcome", outcome_to_json(a.outcome)}});
    }
    j["ground_truth"] = {{"target_out_of_workspace", truth.target_out_of_workspace}};
    j["wall_ms"] = wall_ms;
    j["aborted"] = aborted;
    j["error"] = error;
    return j;
  }

  static TrialRecord from_json(const json& j) {
    if (j.value("schema", 0) != kRecordSchema)
      throw Error(Errc::InvalidArgument, "unsupported record schema " + j.value("schema", json(nullptr)).dump());
    TrialRecord r;
    const auto& c = j.at("cell");
    auto level = level_from(c.at("level").get<std::string>());
    if (!level) throw Error(Errc::InvalidArgument, "bad level in record");
    r.cell = {c.at("task").get<std::string>(), *level, c.at("model").get<std::string>()};
    r.trial_index = j.at("trial_index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.prompt_digest = j.value("prompt_digest", "");
    const auto& comp = j.at("completion");
    r.completion = {comp.at("text").get<std::string>(), comp.value("backend_id", ""), comp.value("latency_ms", std::int64_t{0})};
    if (!j.at("outcome").is_null()) r.outcome = outcome_from_json(j.at("outcome"));
    r.feedback_rounds_used = j.value("feedback_rounds_used", 0);
    if (j.contains("history")) {
      for (const auto& a : j.at("history")) {
        r.history.push_back({a.value("prompt_digest", ""),
                             {a.at("completion").get<std::string>(), r.completion.backend_id, a.value("latency_ms", std::int64_t{0})},
                             outcome_from_json(a.at("outcome"))});
      }
    }
    if (j.contains("ground_truth")) r.truth.target_out_of_workspace = j["ground_truth"].value("target_out_of_workspace", false);
    r.wall_ms = j.value("wall_ms", std::int64_t{0});
    r.aborted = j.value("aborted", false);
    r.error = j.value("error", "");
    if (!r.aborted && !r.outcome) throw Error(Errc::InvalidArgument, "scored record without an outcome");
    return r;
  }
};

/// JSON Schema for one line of the record file.
inline json record_json_schema() {
  json evidence = {{"type", "object"},
                   {"required", {"kind", "location", "message"}},
                   {"properties", {{"kind", {{"type", "string"}}}, {"location", {{"type", "string"}}}, {"message", {{"type", "string"}}}}}};
  json outcome = {
      {"type", {"object", "null"}},
      {"required", {"kind"}},
      {"properties",
       {{"kind", {{"enum", {"Success", "SpecialSuccess", "Failure"}}}},
        {"behavior", {{"enum", {"Nonsense", "Disorder", "Infeasible", "Badpose"}}}},
        {"phase", {{"enum", {"parse", "static", "runtime"}}}},
        {"refusal", {{"type", "string"}}},
        {"evidence", evidence}}}};
  return {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"title", "TrialRecord"},
      {"type", "object"},
      {"required", {"schema", "cell", "trial_index", "seed", "prompt_digest", "completion", "outcome", "feedback_rounds_used",
                    "wall_ms", "aborted"}},
      {"properties",
       {{"schema", {{"const", kRecordSchema}}},
        {"cell",
         {{"type", "object"},
          {"required", {"task", "level", "model"}},
          {"properties", {{"task", {{"type", "string"}}}, {"level", {{"enum", {"A", "P", "C"}}}}, {"model", {{"type", "string"}}}}}}},
        {"trial_index", {{"type", "integer"}, {"minimum", 0}}},
        {"seed", {{"type", "integer"}}},
        {"prompt_digest", {{"type", "string"}}},
        {"completion",
         {{"type", "object"},
          {"properties", {{"text", {{"type", "string"}}}, {"backend_id", {{"type", "string"}}}, {"latency_ms", {{"type", "integer"}}}}}}},
        {"outcome", outcome},
        {"feedback_rounds_used", {{"type", "integer"}, {"minimum", 0}}},
        {"history", {{"type", "array"}}},
        {"ground_truth", {{"type", "object"}}},
        {"wall_ms", {{"type", "integer"}}},
        {"aborted", {{"type", "boolean"}}},
        {"error", {{"type", "string"}}}}}};
}

// ---------------------------------------------------------------------------
// Trials

struct FeedbackPolicy {
  bool enabled = true;
  int max_rounds = 1;
};

inline std::uint64_t trial_seed(std::uint64_t base_seed, const CellKey& cell, int trial_index) {
  Fnv1a64 h;
  h.update(base_seed).separator().update(cell.task).separator().update(to_string(cell.level)).separator();
  h.update(cell.model).separator().update(static_cast<std::uint64_t>(trial_index));
  return splitmix64(h.digest());
}

inline bool is_backend_error(Errc c) noexcept {
  return c == Errc::Transport || c == Errc::MissingApiKey || c == Errc::MalformedResponse;
}

/// One trial with up to `feedback.max_rounds` regenerate-and-retry rounds.
/// Each retry restarts from the identical spawn state. Backend errors mark
/// the record aborted; every other error propagates.
inline TrialRecord run_trial(const Harness& h, Backend& backend, const CellKey& cell, int trial_index,
                             std::uint64_t seed, const FeedbackPolicy& feedback) {
  auto started = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.cell = cell;
  rec.trial_index = trial_index;
  rec.seed = seed;
  const auto& task = h.tasks().find(cell.task);
  const auto& sim = h.simulator();
  Instruction ins = h.templates().render(task, cell.level, sim.config().workspace);

  auto ask = [&](PromptBundle bundle, const WorldState& world) {
    bundle.sampling_seed = seed;
    bundle.perception = h.perceive(world);
    rec.prompt_digest = hex64(bundle.message_digest());
    rec.completion = backend.complete(bundle);
    Evaluation ev = h.evaluate(task, cell.level, world, rec.completion.text);
    rec.truth = ev.truth;
    rec.outcome = ev.outcome;
    rec.history.push_back({rec.prompt_digest, rec.completion, ev.outcome});
  };

  try {
    ask(build_prompt(ins, h.demo()), sim.spawn_scene(task, seed));
    while (feedback.enabled && rec.feedback_rounds_used < feedback.max_rounds && !is_success(*rec.outcome)) {
      auto behavior = std::get<Failure>(*rec.outcome).behavior;
      auto prompt = build_feedback_prompt(rec.completion, behavior, ins, h.demo(), h.behaviors());
      ++rec.feedback_rounds_used;
      ask(std::move(prompt), sim.spawn_scene(task, seed));
    }
  } catch (const Error& e) {
    if (!is_backend_error(e.code())) throw;
    rec.aborted = true;
    rec.outcome.reset();
    rec.error = e.what();
  }
  rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Campaigns

struct NamedBackend {
  std::string name;
  BackendConfig config;
};

struct CampaignConfig {
  std::vector<std::string> tasks;
  std::vector<GranularityLevel> levels{GranularityLevel::A, GranularityLevel::P, GranularityLevel::C};
  std::vector<NamedBackend> backends;
  int trials_per_cell = 50;
  bool feedback_enabled = true;
  int max_feedback_rounds = 1;
  std::uint64_t base_seed = 0;
  int concurrency = 1;
  SimConfig sim;
  FixturePaths fixtures = FixturePaths::in(default_data_dir());

  void validate(const TaskRegistry& registry) const {
    if (trials_per_cell < 1) throw Error(Errc::ConfigError, "trials_per_cell must be >= 1");
    if (max_feedback_rounds < 0) throw Error(Errc::ConfigError, "max_feedback_rounds must be >= 0");
    if (concurrency < 1) throw Error(Errc::ConfigError, "concurrency must be >= 1");
    if (tasks.empty() || levels.empty() || backends.empty())
      throw Error(Errc::ConfigError, "campaign needs at least one task, level and backend");
    for (const auto& t : tasks)
      if (!registry.contains(t)) throw Error(Errc::ConfigError, "unknown task '" + t + "'");
    std::set<std::string> models;
    for (const auto& b : backends) {
      b.config.validate();
      if (!models.insert(b.config.model_name).second)
        throw Error(Errc::ConfigError, "two backends share model_name '" + b.config.model_name + "'");
    }
  }

  /// Sections: campaign, backend.<name>, simworld, fixtures. Relative
  /// fixture paths resolve against `base`.
  static CampaignConfig from_json(const json& doc, const std::filesystem::path& base) {
    CampaignConfig c;
    json camp = doc.value("campaign", json::object());
    if (camp.contains("tasks")) c.tasks = camp.at("tasks").get<std::vector<std::string>>();
    if (camp.contains("levels")) {
      c.levels.clear();
      for (const auto& l : camp.at("levels")) {
        auto level = level_from(l.get<std::string>());
        if (!level) throw Error(Errc::ConfigError, "unknown level '" + l.get<std::string>() + "'");
        c.levels.push_back(*level);
      }
    }
    c.trials_per_cell = camp.value("trials_per_cell", c.trials_per_cell);
    c.feedback_enabled = camp.value("feedback_enabled", c.feedback_enabled);
    c.max_feedback_rounds = camp.value("max_feedback_rounds", c.max_feedback_rounds);
    c.base_seed = camp.value("base_seed", c.base_seed);
    c.concurrency = camp.value("concurrency", c.concurrency);
    if (doc.contains("backend")) {
      for (const auto& [name, body] : doc.at("backend").items()) c.backends.push_back({name, BackendConfig::from_json(body)});
    }
    c.sim = SimConfig::from_json(doc.value("simworld", json::object()));
    c.fixtures = FixturePaths::from_json(doc.value("fixtures", json::object()), base);
    return c;
  }

  static CampaignConfig load(const std::filesystem::path& path) {
    try {
      return from_json(load_json_file(path), path.parent_path());
    } catch (const json::exception& e) {
      throw Error(Errc::ConfigError, path.string() + ": " + e.what());
    }
  }
};

inline std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, const Harness& h) {
  if (cfg.kind == BackendKind::Http) return std::make_unique<HttpBackend>(cfg);
  auto profiles = MockProfiles::load(h.paths().mock_profiles);
  auto faults = std::make_shared<const FaultLibrary>(FaultLibrary::load(h.paths().mock_completions));
  return std::make_unique<MockBackend>(cfg, profiles.find(cfg.profile), h.shared_tasks(), h.shared_scenes(), faults,
                                       h.shared_parser());
}

/// Runs every (task, level, backend, trial) and hands records to `sink` in
/// grid order, whatever order the workers finish in.
inline std::vector<TrialRecord> run_campaign(const CampaignConfig& cfg, const Harness& h,
                                             const std::function<void(const TrialRecord&)>& sink = {}) {
  cfg.validate(h.tasks());
  std::vector<std::unique_ptr<Backend>> backends;
  for (const auto& b : cfg.backends) backends.push_back(make_backend(b.config, h));

  struct Job {
    CellKey cell;
    std::size_t backend;
    int trial_index;
  };
  std::vector<Job> jobs;
  for (const auto& task : cfg.tasks)
    for (auto level : cfg.levels)
      for (std::size_t b = 0; b < cfg.backends.size(); ++b)
        for (int i = 0; i < cfg.trials_per_cell; ++i) jobs.push_back({{task, level, cfg.backends[b].config.model_name}, b, i});

  FeedbackPolicy feedback{cfg.feedback_enabled, cfg.max_feedback_rounds};
  std::vector<std::optional<TrialRecord>> slots(jobs.size());
  std::atomic<std::size_t> next_job{0};
  std::mutex flush_mutex;
  std::size_t next_flush = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next_job.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        const auto& job = jobs[i];
        auto rec = run_trial(h, *backends[job.backend], job.cell, job.trial_index,
                             trial_seed(cfg.base_seed, job.cell, job.trial_index), feedback);
        std::lock_guard lock(flush_mutex);
        slots[i] = std::move(rec);
        while (next_flush < slots.size() && slots[next_flush]) {
          if (sink) sink(*slots[next_flush]);
          ++next_flush;
        }
      } catch (...) {
        std::lock_guard lock(flush_mutex);
        if (!failure) failure = std::current_exception();
        next_job = jobs.size();
        return;
      }
    }
  };

  int n = std::min<int>(cfg.concurrency, static_cast<int>(jobs.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Append-only JSON-lines writer; one flushed line per record.
class JsonlSink {
 public:
  explicit JsonlSink(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(Errc::ConfigError, "cannot write " + path.string());
  }
  void operator()(const TrialRecord& r) {
    std::lock_guard lock(mutex_);
    out_ << r.to_json().dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::mutex mutex_;
};

inline std::vector<TrialRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path.string());
  std::vector<TrialRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(TrialRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// Cells of the published grid: primitive tasks are reported at levels A
/// and C only, the others at all three.
inline std::vector<CellKey> reported_cells(const TaskRegistry& registry, const std::vector<std::string>& models) {
  std::vector<CellKey> out;
  for (const auto& t : registry.tasks()) {
    for (auto level : kLevels) {
      if (t.primitive && level == GranularityLevel::P) continue;
      for (const auto& m : models) out.push_back({t.name, level, m});
    }
  }
  return out;
}

}  // namespace roboinspect
