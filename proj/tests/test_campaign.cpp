#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "test_support.hpp"

using namespace roboinspect;
using roboinspect::testing::harness;
using roboinspect::testing::source_dir;
using roboinspect::testing::without_timing;

namespace {

std::shared_ptr<const FaultLibrary> faults() {
  static auto lib = std::make_shared<const FaultLibrary>(FaultLibrary::load(roboinspect::testing::fixtures().mock_completions));
  return lib;
}

MockBackend mock(const MockProfile& p) {
  const auto& h = harness();
  BackendConfig c;
  c.model_name = "mock-test";
  return MockBackend(c, p, h.shared_tasks(), h.shared_scenes(), faults(), h.shared_parser());
}

MockProfile forced(UnreliableBehavior b, double suppression) {
  MockProfile p;
  p.name = "forced";
  for (auto x : kBehaviors) {
    p.base_fault_rates[x] = 0;
    p.feedback_suppression[x] = 1;
  }
  p.base_fault_rates[b] = 1;
  p.feedback_suppression[b] = suppression;
  return p;
}

CampaignConfig load_config(const std::string& name) { return CampaignConfig::load(source_dir() / "configs" / name); }

std::vector<std::string> lines_without_timing(const std::vector<TrialRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(without_timing(r));
  return out;
}

}  // namespace

TEST(Trial, ZeroFaultSucceedsWithoutFeedback) {
  const auto& h = harness();
  auto backend = mock(MockProfiles::load(roboinspect::testing::fixtures().mock_profiles).find("zero-fault"));
  for (const auto& t : h.tasks().tasks()) {
    for (auto level : kLevels) {
      CellKey cell{t.name, level, "mock-test"};
      auto r = run_trial(h, backend, cell, 0, trial_seed(1, cell, 0), {true, 1});
      ASSERT_TRUE(r.outcome);
      EXPECT_TRUE(std::holds_alternative<Success>(*r.outcome)) << t.name;
      EXPECT_EQ(r.feedback_rounds_used, 0);
      EXPECT_EQ(r.history.size(), 1u);
      EXPECT_FALSE(r.aborted);
    }
  }
}

TEST(Trial, ForcedNonsenseOnceThenSuccess) {
  const auto& h = harness();
  auto backend = mock(forced(UnreliableBehavior::Nonsense, 0.0));
  CellKey cell{"PutRubbishInBin", GranularityLevel::P, "mock-test"};
  for (int i = 0; i < 20; ++i) {
    auto r = run_trial(h, backend, cell, i, trial_seed(3, cell, i), {true, 1});
    ASSERT_EQ(r.history.size(), 2u);
    ASSERT_TRUE(std::holds_alternative<Failure>(r.history[0].outcome));
    EXPECT_EQ(std::get<Failure>(r.history[0].outcome).behavior, UnreliableBehavior::Nonsense);
    EXPECT_TRUE(std::holds_alternative<Success>(r.history[1].outcome));
    EXPECT_TRUE(std::holds_alternative<Success>(*r.outcome));
    EXPECT_EQ(r.feedback_rounds_used, 1);
    EXPECT_NE(r.history[0].prompt_digest, r.history[1].prompt_digest);
  }
}

TEST(Trial, FeedbackDisabledKeepsTheFirstFailure) {
  const auto& h = harness();
  auto backend = mock(forced(UnreliableBehavior::Disorder, 0.0));
  CellKey cell{"PutRubbishInBin", GranularityLevel::A, "mock-test"};
  auto r = run_trial(h, backend, cell, 0, 11, {false, 1});
  EXPECT_EQ(r.feedback_rounds_used, 0);
  EXPECT_EQ(std::get<Failure>(*r.outcome).behavior, UnreliableBehavior::Disorder);
}

TEST(Trial, RoundsNeverExceedTheLimit) {
  const auto& h = harness();
  auto backend = mock(forced(UnreliableBehavior::Badpose, 1.0));
  CellKey cell{"OpenWineBottle", GranularityLevel::C, "mock-test"};
  for (int rounds : {0, 1, 3}) {
    auto r = run_trial(h, backend, cell, 0, 5, {true, rounds});
    EXPECT_EQ(r.feedback_rounds_used, rounds);
    EXPECT_EQ(r.history.size(), static_cast<std::size_t>(rounds + 1));
  }
}

TEST(Trial, RetryRestartsFromTheSpawnState) {
  const auto& h = harness();
  const auto& t = h.tasks().find("PutRubbishInBin");
  auto spawned = h.simulator().spawn_scene(t, 21);
  auto copy = spawned;
  auto ev = h.evaluate(t, GranularityLevel::P, spawned, h.simulator().catalog().golden_text(t.scene));
  ASSERT_TRUE(ev.sim && ev.sim->completed());
  EXPECT_NE(std::get<Completed>(ev.sim->outcome).final, spawned);
  EXPECT_EQ(spawned, copy);
  EXPECT_EQ(h.simulator().spawn_scene(t, 21), spawned);

  auto backend = mock(forced(UnreliableBehavior::Nonsense, 0.0));
  CellKey cell{"PutRubbishInBin", GranularityLevel::P, "mock-test"};
  auto r = run_trial(h, backend, cell, 0, 21, {true, 1});
  auto replayed = h.evaluate(t, cell.level, h.simulator().spawn_scene(t, 21), r.history[1].completion.text);
  EXPECT_EQ(replayed.outcome, r.history[1].outcome);
}

TEST(Trial, BackendFailureAbortsTheRecord) {
  ::setenv("ROBOINSPECT_TEST_KEY", "sk", 1);
  BackendConfig c;
  c.kind = BackendKind::Http;
  c.model_name = "offline";
  c.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  c.api_key_env = "ROBOINSPECT_TEST_KEY";
  c.max_retries = 0;
  HttpBackend backend(c);
  CellKey cell{"Grasp", GranularityLevel::A, "offline"};
  auto r = run_trial(harness(), backend, cell, 0, 1, {true, 1});
  EXPECT_TRUE(r.aborted);
  EXPECT_FALSE(r.outcome);
  EXPECT_NE(r.error.find("Transport"), std::string::npos);
  auto j = r.to_json();
  EXPECT_TRUE(j["outcome"].is_null());
  auto back = TrialRecord::from_json(j);
  EXPECT_TRUE(back.aborted);
  ::unsetenv("ROBOINSPECT_TEST_KEY");
}

TEST(Campaign, DefaultGridHas1200Records) {
  auto cfg = load_config("mock-default.json");
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  auto records = run_campaign(cfg, h);
  ASSERT_EQ(records.size(), 1200u);
  std::map<CellKey, int> per_cell;
  for (const auto& r : records) ++per_cell[r.cell];
  EXPECT_EQ(per_cell.size(), 24u);
  for (const auto& [cell, n] : per_cell) EXPECT_EQ(n, 50);
  for (const auto& r : records) {
    EXPECT_TRUE(r.outcome.has_value());
    EXPECT_LE(r.feedback_rounds_used, cfg.max_feedback_rounds);
  }
}

TEST(Campaign, SameSeedSameRecordsAtAnyConcurrency) {
  auto cfg = load_config("mock-weak.json");
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  cfg.concurrency = 1;
  auto a = lines_without_timing(run_campaign(cfg, h));
  cfg.concurrency = 4;
  std::vector<std::string> streamed;
  auto b = lines_without_timing(run_campaign(cfg, h, [&](const TrialRecord& r) { streamed.push_back(without_timing(r)); }));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, streamed);
  cfg.base_seed += 1;
  EXPECT_NE(a, lines_without_timing(run_campaign(cfg, h)));
}

TEST(Campaign, SinkSeesGridOrder) {
  auto cfg = load_config("mock-default.json");
  cfg.trials_per_cell = 3;
  cfg.concurrency = 3;
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  std::vector<std::pair<CellKey, int>> seen;
  run_campaign(cfg, h, [&](const TrialRecord& r) { seen.emplace_back(r.cell, r.trial_index); });
  std::size_t k = 0;
  for (const auto& task : cfg.tasks)
    for (auto level : cfg.levels)
      for (int i = 0; i < 3; ++i, ++k) {
        ASSERT_LT(k, seen.size());
        EXPECT_EQ(seen[k].first.task, task);
        EXPECT_EQ(seen[k].first.level, level);
        EXPECT_EQ(seen[k].second, i);
      }
}

TEST(Campaign, TrialsAreIsolatedFromEachOther) {
  auto cfg = load_config("mock-default.json");
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  cfg.trials_per_cell = 6;
  auto full = run_campaign(cfg, h);
  auto backend = make_backend(cfg.backends[0].config, h);
  for (std::size_t k = 0; k < full.size(); k += 5) {
    const auto& r = full[k];
    auto alone = run_trial(h, *backend, r.cell, r.trial_index, trial_seed(cfg.base_seed, r.cell, r.trial_index),
                           {cfg.feedback_enabled, cfg.max_feedback_rounds});
    EXPECT_EQ(without_timing(alone), without_timing(r));
  }
  cfg.trials_per_cell = 3;
  auto fewer = run_campaign(cfg, h);
  std::map<std::pair<CellKey, int>, std::string> by_key;
  for (const auto& r : full) by_key[{r.cell, r.trial_index}] = without_timing(r);
  for (const auto& r : fewer) EXPECT_EQ(by_key.at({r.cell, r.trial_index}), without_timing(r));
}

TEST(Campaign, TrialSeedDependsOnEveryCoordinate) {
  CellKey c{"Grasp", GranularityLevel::A, "m"};
  std::set<std::uint64_t> seeds{trial_seed(1, c, 0), trial_seed(2, c, 0), trial_seed(1, c, 1),
                                trial_seed(1, {"Grasp", GranularityLevel::P, "m"}, 0),
                                trial_seed(1, {"Movement", GranularityLevel::A, "m"}, 0),
                                trial_seed(1, {"Grasp", GranularityLevel::A, "n"}, 0)};
  EXPECT_EQ(seeds.size(), 6u);
}

TEST(Campaign, FeedbackNeverDegradesACell) {
  auto cfg = load_config("mock-weak.json");
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  cfg.trials_per_cell = 50;
  cfg.feedback_enabled = false;
  auto without = run_campaign(cfg, h);
  cfg.feedback_enabled = true;
  auto with = run_campaign(cfg, h);
  ASSERT_GE(without.size(), 1000u);
  ASSERT_EQ(without.size(), with.size());
  auto a = aggregate(without), b = aggregate(with);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].cell, b[i].cell);
    EXPECT_GE(b[i].successes, a[i].successes) << a[i].cell.task << "/" << to_string(a[i].cell.level);
  }
  int gained = 0;
  for (std::size_t i = 0; i < a.size(); ++i) gained += b[i].successes - a[i].successes;
  EXPECT_GT(gained, 0);
}

TEST(Campaign, PublishedGridHas168Cells) {
  std::vector<std::string> models{"GPT-3.5-turbo", "GPT-4", "GPT-4o", "GPT-4o-mini",
                                  "Qwen-max", "Qwen-plus", "Qwen-turbo", "DeepSeek-V3"};
  auto cells = reported_cells(harness().tasks(), models);
  EXPECT_EQ(cells.size(), 168u);
  EXPECT_EQ(std::set<CellKey>(cells.begin(), cells.end()).size(), 168u);
  for (const auto& c : cells) {
    if (harness().tasks().find(c.task).primitive) {
      EXPECT_NE(c.level, GranularityLevel::P);
    }
  }
}

TEST(Campaign, HttpFailuresBecomeAbortedRecords) {
  ::setenv("ROBOINSPECT_TEST_KEY", "sk", 1);
  json doc = {{"campaign", {{"tasks", {"Grasp"}}, {"levels", {"A"}}, {"trials_per_cell", 2}, {"concurrency", 2}}},
              {"backend",
               {{"remote",
                 {{"kind", "http"},
                  {"model_name", "offline"},
                  {"endpoint_url", "http://127.0.0.1:1/v1/chat/completions"},
                  {"api_key_env", "ROBOINSPECT_TEST_KEY"},
                  {"max_retries", 0}}}}}};
  auto cfg = CampaignConfig::from_json(doc, source_dir());
  auto records = run_campaign(cfg, harness());
  ASSERT_EQ(records.size(), 2u);
  for (const auto& r : records) EXPECT_TRUE(r.aborted);
  try {
    aggregate(records);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyCell);
  }
  ::unsetenv("ROBOINSPECT_TEST_KEY");
}

TEST(CampaignConfig, Validation) {
  auto cfg = load_config("mock-default.json");
  const auto& tasks = harness().tasks();
  EXPECT_NO_THROW(cfg.validate(tasks));
  auto bad = cfg;
  bad.tasks.push_back("FoldLaundry");
  EXPECT_THROW(bad.validate(tasks), Error);
  bad = cfg;
  bad.trials_per_cell = 0;
  EXPECT_THROW(bad.validate(tasks), Error);
  bad = cfg;
  bad.backends.push_back(bad.backends.front());
  EXPECT_THROW(bad.validate(tasks), Error);
  EXPECT_THROW(CampaignConfig::from_json({{"campaign", {{"levels", {"Z"}}}}}, source_dir()), Error);
  EXPECT_THROW(CampaignConfig::load(source_dir() / "configs" / "missing.json"), Error);
}

TEST(CampaignConfig, ShippedConfigsLoad) {
  for (const char* name : {"mock-default.json", "mock-weak.json", "http-example.json"}) {
    auto cfg = load_config(name);
    EXPECT_NO_THROW(cfg.validate(harness().tasks())) << name;
  }
  auto http = load_config("http-example.json");
  for (const auto& b : http.backends) EXPECT_EQ(b.config.kind, BackendKind::Http);
}

TEST(Records, JsonRoundTrip) {
  auto cfg = load_config("mock-weak.json");
  cfg.trials_per_cell = 4;
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  for (const auto& r : run_campaign(cfg, h)) {
    auto j = r.to_json();
    auto back = TrialRecord::from_json(j);
    EXPECT_EQ(back.to_json(), j);
  }
  json bad = {{"schema", 99}};
  EXPECT_THROW(TrialRecord::from_json(bad), Error);
}

TEST(Records, SinkWritesOneLinePerRecordAndReadsBack) {
  auto dir = roboinspect::testing::scratch_dir("sink");
  auto cfg = load_config("mock-default.json");
  cfg.trials_per_cell = 2;
  auto h = Harness::load(cfg.fixtures, cfg.sim);
  std::vector<TrialRecord> records;
  {
    JsonlSink sink(dir / "r.jsonl");
    records = run_campaign(cfg, h, std::ref(sink));
  }
  auto back = read_records(dir / "r.jsonl");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].to_json(), records[i].to_json());
}
