#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

using namespace roboinspect;
using roboinspect::testing::harness;

namespace {

// Check marks per task row of the task table, counted by hand.
const std::map<std::string, int> kTableChecks = {
    {"Grasp", 1},       {"Movement", 1},     {"Rotation", 1},        {"SlideBlockToTarget", 1},
    {"ChangeClock", 2}, {"LightBulbOut", 2}, {"PutRubbishInBin", 2}, {"OpenWineBottle", 3},
};

}  // namespace

TEST(Complexity, Examples) {
  const auto& tasks = harness().tasks();
  EXPECT_EQ(complexity_of(tasks.find("Grasp")), 1);
  EXPECT_EQ(complexity_of(tasks.find("PutRubbishInBin")), 2);
  EXPECT_EQ(complexity_of(tasks.find("OpenWineBottle")), 3);
}

TEST(Complexity, MatchesTaskTableForEveryTask) {
  const auto& tasks = harness().tasks().tasks();
  ASSERT_EQ(tasks.size(), kTableChecks.size());
  for (const auto& t : tasks) {
    ASSERT_TRUE(kTableChecks.count(t.name)) << t.name;
    EXPECT_EQ(complexity_of(t), kTableChecks.at(t.name)) << t.name;
    EXPECT_GE(complexity_of(t), 1);
    EXPECT_LE(complexity_of(t), 3);
  }
}

TEST(Complexity, PrimitiveFlagMarksTheThreeAtomicTasks) {
  std::set<std::string> primitive;
  for (const auto& t : harness().tasks().tasks())
    if (t.primitive) primitive.insert(t.name);
  EXPECT_EQ(primitive, (std::set<std::string>{"Grasp", "Movement", "Rotation"}));
}

TEST(TaskRegistry, UnknownTaskThrows) {
  try {
    harness().tasks().find("FoldLaundry");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownTask);
  }
}

TEST(TaskRegistry, RejectsDuplicatesAndEmptyActionSets) {
  json dup = {{"tasks", {{{"name", "A"}, {"actions", {"Grasp"}}, {"goal", "g"}}, {{"name", "A"}, {"actions", {"Move"}}, {"goal", "g"}}}}};
  EXPECT_THROW(TaskRegistry::from_json(dup), Error);
  json empty = {{"tasks", {{{"name", "A"}, {"actions", json::array()}, {"goal", "g"}}}}};
  EXPECT_THROW(TaskRegistry::from_json(empty), Error);
  json bad = {{"tasks", {{{"name", "A"}, {"actions", {"Jump"}}, {"goal", "g"}}}}};
  EXPECT_THROW(TaskRegistry::from_json(bad), Error);
}

TEST(Granularity, Examples) {
  EXPECT_EQ(granularity_of(Instruction::make("rubbish", "throw", std::nullopt, std::nullopt)), 2);
  EXPECT_EQ(granularity_of(Instruction::make("rubbish", "drop", "into the bin", std::nullopt)), 3);
  EXPECT_EQ(granularity_of(Instruction::make("rubbish", "grasp", "place it in the bin",
                                             "with the executable space defined as (100, 100, 100)")),
            4);
}

TEST(Granularity, EmptyOptionalSlotsDoNotCount) {
  EXPECT_EQ(granularity_of(Instruction::make("rubbish", "throw", "", "")), 2);
}

TEST(Instruction, RejectsMissingCoreElements) {
  EXPECT_THROW(Instruction::make("", "throw", std::nullopt, std::nullopt), Error);
  EXPECT_THROW(Instruction::make("rubbish", "", std::nullopt, std::nullopt), Error);
  EXPECT_THROW(Instruction::make("rubbish", "throw", std::nullopt, "inside (1, 1, 1)"), Error);
}

TEST(Levels, ParseBothSpellings) {
  EXPECT_EQ(level_from("A"), GranularityLevel::A);
  EXPECT_EQ(level_from("I_C"), GranularityLevel::C);
  EXPECT_FALSE(level_from("B"));
  EXPECT_EQ(granularity_value(GranularityLevel::A), 2);
  EXPECT_EQ(granularity_value(GranularityLevel::P), 3);
  EXPECT_EQ(granularity_value(GranularityLevel::C), 4);
}

TEST(Behaviors, PhaseMapping) {
  EXPECT_EQ(phase_of(UnreliableBehavior::Nonsense), Phase::Parse);
  EXPECT_EQ(phase_of(UnreliableBehavior::Disorder), Phase::Static);
  EXPECT_EQ(phase_of(UnreliableBehavior::Infeasible), Phase::Runtime);
  EXPECT_EQ(phase_of(UnreliableBehavior::Badpose), Phase::Runtime);
}

TEST(Outcome, SpecialSuccessCountsAsSuccess) {
  EXPECT_TRUE(is_success(Success{}));
  EXPECT_TRUE(is_success(SpecialSuccess{"out of reach"}));
  EXPECT_FALSE(is_success(Failure{UnreliableBehavior::Badpose, {}, Phase::Runtime}));
}

TEST(Hashing, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Hashing, SeparatorDistinguishesFieldBoundaries) {
  auto a = Fnv1a64{}.update("ab").separator().update("c").digest();
  auto b = Fnv1a64{}.update("a").separator().update("bc").digest();
  EXPECT_NE(a, b);
}

TEST(Hashing, UnitIntervalStaysInRange) {
  EXPECT_EQ(unit_interval(0), 0.0);
  EXPECT_LT(unit_interval(~0ull), 1.0);
}

TEST(Geometry, FormatTuple) {
  EXPECT_EQ(format_tuple({100, 100, 100}), "(100, 100, 100)");
  EXPECT_EQ(format_tuple({0.5, -2, 1e-3}), "(0.5, -2, 0.001)");
}

TEST(Geometry, WorkspaceValidation) {
  WorkspaceBounds ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.executable_extents(), (Vec3{100, 100, 100}));
  WorkspaceBounds same;
  same.perception = same.executable;
  EXPECT_THROW(same.validate(), Error);
  WorkspaceBounds outside;
  outside.executable.center = {200, 0, 50};
  EXPECT_THROW(outside.validate(), Error);
}

TEST(Geometry, SegmentBoxEntry) {
  Box b{{0, 0, 0}, {1, 1, 1}};
  auto t = segment_hits_box({-3, 0, 0}, {3, 0, 0}, b);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 2.0 / 6.0, 1e-12);
  EXPECT_FALSE(segment_hits_box({-3, 2, 0}, {3, 2, 0}, b));
}

// ---------------------------------------------------------------------------
// Instructions

TEST(Instructions, PutRubbishInBinTexts) {
  const auto& h = harness();
  const auto& task = h.tasks().find("PutRubbishInBin");
  WorkspaceBounds ws;
  auto a = h.templates().render(task, GranularityLevel::A, ws);
  EXPECT_EQ(a.object(), "rubbish");
  EXPECT_EQ(a.action(), "throw the rubbish");
  EXPECT_EQ(a.text(), "throw the rubbish");
  EXPECT_EQ(h.templates().render(task, GranularityLevel::P, ws).text(), "drop the rubbish into the bin");
  EXPECT_EQ(h.templates().render(task, GranularityLevel::C, ws).text(),
            "Grasp the rubbish and place it in the bin, with the executable space defined as (100, 100, 100)");
}

TEST(Instructions, PrimitiveTasksShareLevelAAndPText) {
  const auto& h = harness();
  for (const char* name : {"Grasp", "Movement", "Rotation"}) {
    auto all = h.templates().render_all(h.tasks().find(name), WorkspaceBounds{});
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].second.text(), all[1].second.text()) << name;
    EXPECT_EQ(granularity_of(all[0].second), 2);
    EXPECT_EQ(granularity_of(all[1].second), 3);
  }
}

TEST(Instructions, PutRubbishInBinLevelsAllDistinct) {
  const auto& h = harness();
  auto all = h.templates().render_all(h.tasks().find("PutRubbishInBin"), WorkspaceBounds{});
  std::set<std::string> texts;
  for (const auto& [level, ins] : all) texts.insert(ins.text());
  EXPECT_EQ(texts.size(), 3u);
}

TEST(Instructions, UnknownTask) {
  TaskSpec ghost{"FoldLaundry", {PrimitiveAction::Grasp}, "FoldLaundry", "FoldLaundry", "g", false};
  try {
    harness().templates().render_all(ghost, WorkspaceBounds{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownTask);
  }
}

TEST(Instructions, GranularityChainForEveryTask) {
  const auto& h = harness();
  for (const auto& t : h.tasks().tasks()) {
    for (auto [level, ins] : h.templates().render_all(t, WorkspaceBounds{})) {
      EXPECT_EQ(granularity_of(ins), granularity_value(level)) << t.name;
      EXPECT_EQ(ins.task(), t.name);
      EXPECT_EQ(ins.level(), level);
    }
  }
}

TEST(Instructions, OnlyLevelCCarriesTheBounds) {
  const auto& h = harness();
  WorkspaceBounds ws;
  ws.executable.half = {40, 30, 20};
  ws.executable.center = {0, 0, 20};
  std::string bounds = "(80, 60, 40)";
  for (const auto& t : h.tasks().tasks()) {
    for (auto [level, ins] : h.templates().render_all(t, ws)) {
      bool has = ins.text().find(bounds) != std::string::npos;
      EXPECT_EQ(has, level == GranularityLevel::C) << t.name << " " << to_string(level);
      EXPECT_EQ(ins.text().find("{bounds}"), std::string::npos);
    }
  }
}

TEST(Instructions, RenderIsDeterministic) {
  const auto& h = harness();
  for (const auto& t : h.tasks().tasks()) {
    EXPECT_EQ(h.templates().render_all(t, WorkspaceBounds{}), h.templates().render_all(t, WorkspaceBounds{}));
  }
}

TEST(Instructions, TemplateValidation) {
  json doc = {{"tasks",
               {{{"task", "X"},
                 {"object", "x"},
                 {"levels",
                  {{"A", {{"action", "grab x"}, {"text", "grab x"}}},
                   {"P", {{"action", "grab x"}, {"purpose", "to lift it"}, {"text", "grab x"}}},
                   {"C", {{"action", "grab x"}, {"purpose", "to lift it"}, {"condition", "inside"}, {"text", "grab x"}}}}}}}}};
  EXPECT_THROW(InstructionTemplates::from_json(doc), Error);
}
