#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

using namespace roboinspect;
using roboinspect::testing::harness;
using roboinspect::testing::wide_harness;

namespace {

Program parse_program(const Harness& h, const std::string& text) {
  auto r = h.parser().parse(text);
  EXPECT_TRUE(std::holds_alternative<Program>(r)) << text;
  return std::get<Program>(r);
}

Program golden(const Harness& h, const TaskSpec& t) {
  return parse_program(h, h.simulator().catalog().golden_text(t.scene));
}

std::string program_text(const std::vector<std::string>& phrases) {
  std::string out;
  for (const auto& p : phrases) out += "composer(\"" + p + "\")\n";
  return out;
}

bool inside(const Vec3& p, const Box& b) {
  Vec3 lo = b.center - b.half, hi = b.center + b.half;
  return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
}

}  // namespace

TEST(Spawn, SameSeedSameWorld) {
  const auto& h = harness();
  for (const auto& t : h.tasks().tasks()) {
    EXPECT_EQ(h.simulator().spawn_scene(t, 42), h.simulator().spawn_scene(t, 42));
    EXPECT_NE(h.simulator().spawn_scene(t, 42), h.simulator().spawn_scene(t, 43));
  }
}

TEST(Spawn, MarginZeroKeepsEveryObjectReachable) {
  const auto& h = harness();
  const auto& exec = h.simulator().config().workspace.executable;
  for (const auto& t : h.tasks().tasks()) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto w = h.simulator().spawn_scene(t, seed);
      for (const auto& o : w.objects) EXPECT_TRUE(inside(o.position, exec)) << t.name << " " << o.name << " " << seed;
    }
  }
}

TEST(Spawn, PositiveMarginPlacesSomeObjectsOutOfReach) {
  const auto& h = wide_harness();
  const auto& t = h.tasks().find("PutRubbishInBin");
  int unreachable = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    unreachable += h.simulator().target_out_of_workspace(t, h.simulator().spawn_scene(t, seed), h.parser());
  EXPECT_GT(unreachable, 0);
  EXPECT_LT(unreachable, 200);
}

TEST(Spawn, PutRubbishInBinObjects) {
  const auto& h = harness();
  auto w = h.simulator().spawn_scene(h.tasks().find("PutRubbishInBin"), 1);
  auto names = w.object_names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()),
            (std::set<std::string>{"bin", "rubbish", "tomato1", "tomato2"}));
}

TEST(Spawn, NoOverlapAndValidObjects) {
  const auto& h = wide_harness();
  for (const auto& t : h.tasks().tasks()) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto w = h.simulator().spawn_scene(t, seed);
      for (std::size_t i = 0; i < w.objects.size(); ++i) {
        const auto& a = w.objects[i];
        EXPECT_GT(a.half.x, 0);
        EXPECT_NEAR(a.orientation.norm(), 1.0, 1e-9);
        EXPECT_EQ(a.approach.has_value(), h.simulator().catalog().find(t.scene).objects[i].approach.has_value());
        for (std::size_t j = i + 1; j < w.objects.size(); ++j) {
          const auto& b = w.objects[j];
          bool attached = h.simulator().catalog().find(t.scene).objects[j].attach_to.has_value();
          if (attached) continue;
          bool overlap = std::abs(a.position.x - b.position.x) < a.half.x + b.half.x &&
                         std::abs(a.position.y - b.position.y) < a.half.y + b.half.y;
          EXPECT_FALSE(overlap) << t.name << " " << a.name << "/" << b.name;
        }
      }
    }
  }
}

TEST(Spawn, PlacementExhausted) {
  SimConfig c;
  c.spawn_inset = 49;
  c.placement_attempts = 50;
  auto h = Harness::load(roboinspect::testing::fixtures(), c);
  try {
    h.simulator().spawn_scene(h.tasks().find("PutRubbishInBin"), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PlacementExhausted);
  }
}

TEST(SimConfig, Validation) {
  SimConfig c;
  c.spawn_inset = 60;
  EXPECT_THROW(c.validate(), Error);
  SimConfig d;
  d.waypoint_spacing = 0;
  EXPECT_THROW(d.validate(), Error);
  SimConfig e;
  e.home = {0, 0, 200};
  EXPECT_THROW(e.validate(), Error);
  EXPECT_THROW(SimConfig::from_json({{"spawn_margin", -1}}), Error);
}

TEST(Execute, UnreachableBinHaltsInfeasible) {
  const auto& h = harness();
  const auto& t = h.tasks().find("PutRubbishInBin");
  auto w = h.simulator().spawn_scene(t, 5);
  auto* bin = w.find("bin");
  bin->position.x = 90;
  bin->initial_position = bin->position;
  auto r = h.simulator().execute(golden(h, t), w);
  ASSERT_TRUE(std::holds_alternative<InfeasibleHalt>(r.outcome));
  const auto& halt = std::get<InfeasibleHalt>(r.outcome);
  EXPECT_FALSE(inside(halt.waypoint, w.workspace.executable));
  EXPECT_TRUE(inside(halt.waypoint, w.workspace.perception));
  EXPECT_EQ(halt.step_index, 3);
  for (const auto& p : r.trace) EXPECT_TRUE(inside(p.ee, w.workspace.executable));
}

TEST(Execute, InfeasibleHaltsLieBetweenTheTwoBoxes) {
  const auto& h = wide_harness();
  int halts = 0;
  for (const auto& t : h.tasks().tasks()) {
    auto prog = golden(h, t);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      auto w = h.simulator().spawn_scene(t, seed);
      auto r = h.simulator().execute(prog, w);
      for (const auto& p : r.trace) ASSERT_TRUE(inside(p.ee, w.workspace.executable));
      if (const auto* halt = std::get_if<InfeasibleHalt>(&r.outcome)) {
        ++halts;
        EXPECT_FALSE(inside(halt->waypoint, w.workspace.executable));
        EXPECT_TRUE(inside(halt->waypoint, w.workspace.perception));
      }
    }
  }
  EXPECT_GT(halts, 0);
}

TEST(Execute, SideApproachOnTheCapIsMisaligned) {
  const auto& h = harness();
  const auto& t = h.tasks().find("OpenWineBottle");
  auto prog = parse_program(h, program_text({"move to the front of the cap", "grasp the cap", "rotate the cap by 90 degrees",
                                             "back to default pose"}));
  int misaligned = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = h.simulator().execute(prog, h.simulator().spawn_scene(t, seed));
    ASSERT_TRUE(std::holds_alternative<BadposeEvent>(r.outcome)) << seed;
    const auto& e = std::get<BadposeEvent>(r.outcome);
    EXPECT_EQ(e.object, "cap");
    if (e.kind == BadposeKind::Misaligned) {
      ++misaligned;
      EXPECT_GT(e.measure, 15);
    }
  }
  EXPECT_EQ(misaligned, 20);
}

TEST(Execute, GoldenPutRubbishInBinMeetsTheGoal) {
  const auto& h = harness();
  const auto& t = h.tasks().find("PutRubbishInBin");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto r = h.simulator().execute(golden(h, t), h.simulator().spawn_scene(t, seed));
    ASSERT_TRUE(std::holds_alternative<Completed>(r.outcome)) << seed;
    const auto& c = std::get<Completed>(r.outcome);
    // Oracle: rubbish center inside the bin box and the gripper open.
    bool oracle = inside(c.final.at("rubbish").position, c.final.at("bin").box()) && c.final.gripper == Gripper::Open;
    EXPECT_TRUE(oracle);
    EXPECT_EQ(c.goal_met, oracle);
  }
}

TEST(Execute, GoldenProgramsSucceedWhenEverythingIsReachable) {
  const auto& h = harness();
  for (const auto& t : h.tasks().tasks()) {
    auto prog = golden(h, t);
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      auto r = h.simulator().execute(prog, h.simulator().spawn_scene(t, seed));
      ASSERT_TRUE(std::holds_alternative<Completed>(r.outcome)) << t.name << " " << seed;
      EXPECT_TRUE(std::get<Completed>(r.outcome).goal_met) << t.name << " " << seed;
    }
  }
}

TEST(Execute, UnknownTarget) {
  const auto& h = harness();
  const auto& t = h.tasks().find("Grasp");
  auto prog = parse_program(h, program_text({"grasp the banana"}));
  try {
    h.simulator().execute(prog, h.simulator().spawn_scene(t, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownTarget);
  }
}

TEST(Execute, PureFunctionOfArguments) {
  const auto& h = wide_harness();
  for (const auto& t : h.tasks().tasks()) {
    auto prog = golden(h, t);
    auto w = h.simulator().spawn_scene(t, 77);
    auto a = h.simulator().execute(prog, w);
    auto b = h.simulator().execute(prog, w);
    EXPECT_EQ(a.outcome.index(), b.outcome.index());
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].ee, b.trace[i].ee);
    if (a.completed()) {
      EXPECT_EQ(std::get<Completed>(a.outcome).final, std::get<Completed>(b.outcome).final);
    }
  }
}

TEST(Execute, HeldObjectIsRigidAndQuaternionsStayNormalized) {
  const auto& h = harness();
  for (const auto& t : h.tasks().tasks()) {
    auto prog = golden(h, t);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      auto r = h.simulator().execute(prog, h.simulator().spawn_scene(t, seed));
      std::optional<std::string> held;
      Vec3 rel;
      Quat rel_q;
      for (const auto& p : r.trace) {
        EXPECT_NEAR(p.ee_orientation.norm(), 1.0, 1e-9);
        if (!p.held) {
          held.reset();
          continue;
        }
        EXPECT_NEAR(p.held_orientation.norm(), 1.0, 1e-9);
        Vec3 now = p.ee_orientation.conjugate().rotate(p.held_position - p.ee);
        Quat now_q = p.ee_orientation.conjugate() * p.held_orientation;
        if (held == p.held) {
          EXPECT_NEAR(now.x, rel.x, 1e-9);
          EXPECT_NEAR(now.y, rel.y, 1e-9);
          EXPECT_NEAR(now.z, rel.z, 1e-9);
          EXPECT_NEAR(std::abs(now_q.w * rel_q.w + now_q.x * rel_q.x + now_q.y * rel_q.y + now_q.z * rel_q.z), 1.0, 1e-9);
        }
        held = p.held;
        rel = now;
        rel_q = now_q;
      }
      if (const auto* c = std::get_if<Completed>(&r.outcome)) {
        for (const auto& o : c->final.objects) EXPECT_NEAR(o.orientation.norm(), 1.0, 1e-9);
      }
    }
  }
}

TEST(Execute, BadposeIsMonotoneInTolerance) {
  const auto& h = harness();
  std::vector<std::pair<std::string, std::vector<std::string>>> programs = {
      {"Grasp", {"move to the top of the block", "grasp the block", "back to default pose"}},
      {"Grasp", {"move to the left of the block", "grasp the block", "back to default pose"}},
      {"Grasp", {"move 8 units above the block", "grasp the block", "back to default pose"}},
      {"OpenWineBottle", {"move to the top of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"}},
      {"OpenWineBottle", {"move to the back of the cap", "grasp the cap", "rotate the cap by 90 degrees", "back to default pose"}},
      {"LightBulbOut",
       {"move to the top of the bulb", "grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose",
        "move to the top of the holder", "open gripper"}},
      {"LightBulbOut",
       {"grasp the bulb", "rotate the bulb by 90 degrees", "back to default pose", "move to the top of the holder",
        "open gripper"}},
      {"ChangeClock",
       {"move to the front of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees", "open gripper"}},
      {"ChangeClock", {"move to the top of the clock hand", "grasp the clock hand", "rotate the clock hand by 90 degrees",
                       "open gripper"}},
  };
  const double scales[] = {4.0, 1.0, 0.5, 0.1, 0.01, 0.0};
  int flipped = 0;
  for (const auto& [task, phrases] : programs) {
    const auto& t = h.tasks().find(task);
    auto prog = parse_program(h, program_text(phrases));
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      auto base = h.simulator().spawn_scene(t, seed);
      bool previous_completed = true;
      for (double s : scales) {
        auto w = base;
        for (auto& o : w.objects)
          if (o.approach) o.approach->tolerance_rad *= s;
        auto r = h.simulator().execute(prog, w);
        bool done = r.completed();
        EXPECT_FALSE(done && !previous_completed) << task << " seed " << seed << " scale " << s;
        flipped += previous_completed && !done;
        previous_completed = done;
      }
    }
  }
  EXPECT_GT(flipped, 0);
}

TEST(Goal, UnmetAtSpawnForEveryTask) {
  const auto& h = wide_harness();
  for (const auto& t : h.tasks().tasks())
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      EXPECT_FALSE(h.simulator().goal_met(t, h.simulator().spawn_scene(t, seed))) << t.name << " " << seed;
}

TEST(Goal, RubbishTeleportedIntoTheBin) {
  const auto& h = harness();
  const auto& t = h.tasks().find("PutRubbishInBin");
  auto w = h.simulator().spawn_scene(t, 9);
  w.find("rubbish")->position = w.at("bin").position;
  w.gripper = Gripper::Open;
  EXPECT_TRUE(h.simulator().goal_met(t, w));
  w.gripper = Gripper::Closed;
  EXPECT_FALSE(h.simulator().goal_met(t, w));
}
