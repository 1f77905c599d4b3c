#pragma once

// Seeded tabletop world: scene spawning, step-by-step program execution and
// goal predicates. The end effector is a free-flying point gripper; objects
// are axis-aligned boxes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "roboinspect/core.hpp"
#include "roboinspect/geometry.hpp"
#include "roboinspect/hashing.hpp"
#include "roboinspect/policy_parse.hpp"

namespace roboinspect {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct ApproachSpec {
  Vec3 axis;                // direction of gripper travel when closing on the object
  double tolerance_rad = 0;

  friend bool operator==(const ApproachSpec&, const ApproachSpec&) = default;
};

struct SceneObject {
  std::string name;
  Vec3 position;
  Quat orientation;
  Vec3 half;
  std::optional<ApproachSpec> approach;
  bool sensitive = false;  // displaced when the gripper sweeps through it
  bool fragile = false;    // damaged by a fast sweep, displaced by a slow one
  bool pushable = false;   // carried along by the gripper instead of failing
  bool container = false;  // released objects above it land inside
  bool anchored = false;   // stays in place when released
  double yaw_deg = 0;      // cumulative rotation about z
  Vec3 initial_position;
  Quat initial_orientation;

  Box box() const noexcept { return {position, half}; }

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

enum class Gripper { Open, Closed };

struct WorldState {
  std::string task;
  std::string scene;
  std::vector<SceneObject> objects;
  Vec3 ee_position;
  Quat ee_orientation;
  double ee_yaw_deg = 0;
  Gripper gripper = Gripper::Open;
  std::optional<std::string> held;
  Vec3 held_offset;  // held object position in the ee frame
  Quat held_rotation;
  Vec3 last_motion{0, 0, -1};
  WorkspaceBounds workspace;
  std::uint64_t rng_seed = 0;

  const SceneObject* find(std::string_view name) const {
    for (const auto& o : objects)
      if (o.name == name) return &o;
    return nullptr;
  }
  SceneObject* find(std::string_view name) {
    for (auto& o : objects)
      if (o.name == name) return &o;
    return nullptr;
  }
  const SceneObject& at(std::string_view name) const {
    if (auto* o = find(name)) return *o;
    throw Error(Errc::UnknownTarget, std::string(name));
  }
  std::vector<std::string> object_names() const {
    std::vector<std::string> out;
    for (const auto& o : objects) out.push_back(o.name);
    return out;
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct TracePoint {
  int step = 0;
  Vec3 ee;
  Quat ee_orientation;
  std::optional<std::string> held;
  Vec3 held_position;
  Quat held_orientation;
};

struct Completed {
  WorldState final;
  bool goal_met = false;
};

struct InfeasibleHalt {
  Vec3 waypoint;
  int step_index = 0;
};

enum class BadposeKind { Misaligned, Displaced, Damaged };

constexpr std::string_view to_string(BadposeKind k) noexcept {
  switch (k) {
    case BadposeKind::Misaligned: return "misaligned";
    case BadposeKind::Displaced: return "displaced";
    case BadposeKind::Damaged: return "damaged";
  }
  return "?";
}

struct BadposeEvent {
  std::string object;
  BadposeKind kind = BadposeKind::Misaligned;
  int step_index = 0;
  double measure = 0;  // approach error in degrees, or step length for sweeps
};

struct SimResult {
  std::variant<Completed, InfeasibleHalt, BadposeEvent> outcome;
  std::vector<TracePoint> trace;

  bool completed() const noexcept { return std::holds_alternative<Completed>(outcome); }
};

// ---------------------------------------------------------------------------
// Scene fixtures

struct ObjectTemplate {
  std::string name;
  Vec3 half;
  std::optional<ApproachSpec> approach;
  bool sensitive = false, fragile = false, pushable = false, container = false, anchored = false;
  std::optional<std::string> attach_to;
  Vec3 offset;
};

/// Parameters of a task's goal predicate; which fields matter depends on `kind`.
struct GoalSpec {
  std::string kind;
  std::string object;
  std::string other;  // zone, container or base object
  double lift = 10;
  double max_height = 30;
  double angle = 90;
  double tolerance_deg = 5;
  double min_angle = 45;
  double max_shift = 3;
  double clearance = 5;
};

struct SceneTemplate {
  std::string task;
  std::vector<ObjectTemplate> objects;
  GoalSpec goal;
  std::vector<std::string> golden;  // composer phrases
};

inline Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::FixtureError, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

class SceneCatalog {
 public:
  static SceneCatalog from_json(const json& doc) {
    SceneCatalog c;
    for (const auto& s : doc.at("scenes")) {
      SceneTemplate t;
      t.task = s.at("task").get<std::string>();
      std::set<std::string> names;
      for (const auto& o : s.at("objects")) {
        ObjectTemplate ot;
        ot.name = o.at("name").get<std::string>();
        ot.half = vec3_from(o.at("half"));
        if (!(ot.half.x > 0 && ot.half.y > 0 && ot.half.z > 0))
          throw Error(Errc::FixtureError, "object " + ot.name + " has non-positive extents");
        if (o.contains("approach")) {
          const auto& a = o.at("approach");
          ot.approach = ApproachSpec{vec3_from(a.at("axis")).normalized(),
                                     a.at("tolerance_deg").get<double>() * kDegToRad};
        }
        ot.sensitive = o.value("sensitive", false);
        ot.fragile = o.value("fragile", false);
        ot.pushable = o.value("pushable", false);
        ot.container = o.value("container", false);
        ot.anchored = o.value("anchored", false);
        if (o.contains("attach_to")) {
          ot.attach_to = o.at("attach_to").get<std::string>();
          if (!names.count(*ot.attach_to))
            throw Error(Errc::FixtureError, ot.name + " is attached to an object declared later or missing");
          ot.offset = vec3_from(o.at("offset"));
        }
        if (!names.insert(ot.name).second) throw Error(Errc::FixtureError, "duplicate object " + ot.name);
        t.objects.push_back(std::move(ot));
      }
      const auto& g = s.at("goal");
      t.goal.object = g.at("object").get<std::string>();
      for (const char* key : {"zone", "container", "base"})
        if (g.contains(key)) t.goal.other = g.at(key).get<std::string>();
      t.goal.lift = g.value("lift", t.goal.lift);
      t.goal.max_height = g.value("max_height", t.goal.max_height);
      t.goal.angle = g.value("angle", t.goal.angle);
      t.goal.tolerance_deg = g.value("tolerance_deg", t.goal.tolerance_deg);
      t.goal.min_angle = g.value("min_angle", t.goal.min_angle);
      t.goal.max_shift = g.value("max_shift", t.goal.max_shift);
      t.goal.clearance = g.value("clearance", t.goal.clearance);
      if (!names.count(t.goal.object) || (!t.goal.other.empty() && !names.count(t.goal.other)))
        throw Error(Errc::FixtureError, "goal of " + t.task + " names an unknown object");
      t.golden = s.at("golden").get<std::vector<std::string>>();
      if (t.golden.empty()) throw Error(Errc::FixtureError, "empty golden program for " + t.task);
      std::string key = t.task;
      c.scenes_.emplace(std::move(key), std::move(t));
    }
    return c;
  }

  static SceneCatalog load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

  const SceneTemplate& find(std::string_view task) const {
    auto it = scenes_.find(std::string(task));
    if (it == scenes_.end()) throw Error(Errc::UnknownTask, "no scene for task " + std::string(task));
    return it->second;
  }

  bool contains(std::string_view task) const { return scenes_.count(std::string(task)) > 0; }

  /// Golden program as a policy completion: context line plus composer calls.
  std::string golden_text(std::string_view task) const {
    const auto& t = find(task);
    std::string out = "objects = [";
    for (std::size_t i = 0; i < t.objects.size(); ++i) {
      if (i) out += ", ";
      out += "'" + t.objects[i].name + "'";
    }
    out += "]\n";
    for (const auto& step : t.golden) out += "composer(\"" + step + "\")\n";
    return out;
  }

  /// Copies goal kinds from the task registry onto the scenes the tasks use.
  void bind_goals(const TaskRegistry& registry) {
    for (const auto& task : registry.tasks()) {
      auto it = scenes_.find(task.scene);
      if (it != scenes_.end()) it->second.goal.kind = task.goal;
    }
  }

 private:
  std::map<std::string, SceneTemplate, std::less<>> scenes_;
};

// ---------------------------------------------------------------------------
// Goal predicates

inline bool undisplaced(const SceneObject& o, double tolerance) {
  return (o.position - o.initial_position).norm() <= tolerance;
}

inline bool ee_above(const WorldState& w, const SceneObject& o, double max_height) {
  double h = w.ee_position.z - (o.position.z + o.half.z);
  return std::abs(w.ee_position.x - o.position.x) <= o.half.x && std::abs(w.ee_position.y - o.position.y) <= o.half.y &&
         h > 0 && h <= max_height && undisplaced(o, 1e-6);
}

inline bool evaluate_goal(const GoalSpec& g, const WorldState& w) {
  const SceneObject* o = w.find(g.object);
  if (!o) return false;
  const SceneObject* other = g.other.empty() ? nullptr : w.find(g.other);
  bool open = w.gripper == Gripper::Open;
  bool holding = w.held && *w.held == g.object;
  if (g.kind == "holding_lifted") {
    return holding && w.gripper == Gripper::Closed && o->position.z - o->initial_position.z >= g.lift;
  }
  if (g.kind == "ee_above") return ee_above(w, *o, g.max_height);
  if (g.kind == "rotated_above") {
    return ee_above(w, *o, g.max_height) && std::abs(w.ee_yaw_deg - g.angle) <= g.tolerance_deg;
  }
  if (g.kind == "in_zone") {
    return other && !holding && std::abs(o->position.x - other->position.x) <= other->half.x &&
           std::abs(o->position.y - other->position.y) <= other->half.y;
  }
  if (g.kind == "object_rotated_released") {
    return open && std::abs(o->yaw_deg) >= g.min_angle && undisplaced(*o, g.max_shift);
  }
  if (g.kind == "unscrewed_and_placed") {
    return other && open && std::abs(o->yaw_deg) >= g.min_angle && other->box().contains(o->position);
  }
  if (g.kind == "inside_container") return other && open && other->box().contains(o->position);
  if (g.kind == "rotated_removed") {
    return other && std::abs(o->yaw_deg) >= g.min_angle &&
           o->position.z - o->half.z >= other->position.z + other->half.z + g.clearance;
  }
  throw Error(Errc::FixtureError, "unknown goal predicate '" + g.kind + "'");
}

// ---------------------------------------------------------------------------

struct SimConfig {
  WorkspaceBounds workspace;
  double spawn_inset = 25;    // spawn region edge sits this far inside the executable box...
  double spawn_margin = 0;    // ...then is pushed outwards by this much
  int placement_attempts = 1000;
  double placement_gap = 4;
  double clearance = 15;      // standoff used by "top of" / "left of" targets
  double waypoint_spacing = 2;
  double damage_step_length = 40;
  Vec3 home{0, 0, 60};

  void validate() const {
    workspace.validate();
    if (placement_attempts < 1) throw Error(Errc::ConfigError, "placement_attempts must be positive");
    if (!(waypoint_spacing > 0)) throw Error(Errc::ConfigError, "waypoint_spacing must be positive");
    if (spawn_margin < 0 || spawn_inset < 0) throw Error(Errc::ConfigError, "spawn inset and margin must be >= 0");
    for (int i = 0; i < 2; ++i) {
      if (!(workspace.executable.half[i] - spawn_inset + spawn_margin > 0))
        throw Error(Errc::ConfigError, "spawn region is empty");
    }
    if (!workspace.executable.contains(home)) throw Error(Errc::ConfigError, "home pose outside executable box");
  }

  /// Half-size of the square spawn region (x, y) around the executable center.
  Vec3 spawn_half() const noexcept {
    return {workspace.executable.half.x - spawn_inset + spawn_margin,
            workspace.executable.half.y - spawn_inset + spawn_margin, 0};
  }

  static SimConfig from_json(const json& j) {
    SimConfig c;
    if (j.contains("executable_center")) c.workspace.executable.center = vec3_from(j.at("executable_center"));
    if (j.contains("executable_half")) c.workspace.executable.half = vec3_from(j.at("executable_half"));
    if (j.contains("perception_center")) c.workspace.perception.center = vec3_from(j.at("perception_center"));
    if (j.contains("perception_half")) c.workspace.perception.half = vec3_from(j.at("perception_half"));
    c.spawn_inset = j.value("spawn_inset", c.spawn_inset);
    c.spawn_margin = j.value("spawn_margin", c.spawn_margin);
    c.placement_attempts = j.value("placement_attempts", c.placement_attempts);
    c.placement_gap = j.value("placement_gap", c.placement_gap);
    c.clearance = j.value("clearance", c.clearance);
    c.waypoint_spacing = j.value("waypoint_spacing", c.waypoint_spacing);
    c.damage_step_length = j.value("damage_step_length", c.damage_step_length);
    if (j.contains("home")) c.home = vec3_from(j.at("home"));
    c.validate();
    return c;
  }
};

inline Vec3 offset_direction(Offset o) noexcept {
  switch (o) {
    case Offset::Top: return {0, 0, 1};
    case Offset::Left: return {0, -1, 0};
    case Offset::Right: return {0, 1, 0};
    case Offset::Front: return {-1, 0, 0};
    case Offset::Back: return {1, 0, 0};
    case Offset::None: break;
  }
  return {};
}

class Simulator {
 public:
  Simulator(SceneCatalog catalog, const TaskRegistry& registry, SimConfig config)
      : catalog_(std::move(catalog)), config_(config) {
    config_.validate();
    catalog_.bind_goals(registry);
  }

  const SimConfig& config() const noexcept { return config_; }
  const SceneCatalog& catalog() const noexcept { return catalog_; }

  WorldState spawn_scene(const TaskSpec& task, std::uint64_t seed) const {
    const auto& scene = catalog_.find(task.scene);
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit_interval(rng()); };

    WorldState w;
    w.task = task.name;
    w.scene = task.scene;
    w.workspace = config_.workspace;
    w.rng_seed = seed;
    w.ee_position = config_.home;
    const Box& exec = config_.workspace.executable;
    double table = exec.min().z;
    Vec3 region = config_.spawn_half();

    std::vector<Box> footprints;
    for (const auto& ot : scene.objects) {
      SceneObject o;
      o.name = ot.name;
      o.half = ot.half;
      o.approach = ot.approach;
      o.sensitive = ot.sensitive;
      o.fragile = ot.fragile;
      o.pushable = ot.pushable;
      o.container = ot.container;
      o.anchored = ot.anchored;
      if (ot.attach_to) {
        o.position = w.at(*ot.attach_to).position + ot.offset;
      } else {
        bool placed = false;
        for (int attempt = 0; attempt < config_.placement_attempts && !placed; ++attempt) {
          Vec3 p{exec.center.x + uniform(-region.x, region.x), exec.center.y + uniform(-region.y, region.y),
                 table + ot.half.z};
          Box fp{{p.x, p.y, 0}, {ot.half.x + config_.placement_gap / 2, ot.half.y + config_.placement_gap / 2, 1}};
          bool clash = false;
          for (const auto& other : footprints) {
            if (std::abs(fp.center.x - other.center.x) < fp.half.x + other.half.x &&
                std::abs(fp.center.y - other.center.y) < fp.half.y + other.half.y) {
              clash = true;
              break;
            }
          }
          if (!clash) {
            o.position = p;
            footprints.push_back(fp);
            placed = true;
          }
        }
        if (!placed) {
          throw Error(Errc::PlacementExhausted, "could not place " + ot.name + " for task " + task.name + " after " +
                                                    std::to_string(config_.placement_attempts) + " attempts");
        }
      }
      o.initial_position = o.position;
      o.initial_orientation = o.orientation;
      w.objects.push_back(std::move(o));
    }
    return w;
  }

  bool goal_met(const TaskSpec& task, const WorldState& world) const {
    GoalSpec g = catalog_.find(task.scene).goal;
    g.kind = task.goal;
    return evaluate_goal(g, world);
  }

  /// Objects the task's golden program refers to.
  std::vector<std::string> referents(const TaskSpec& task, const PolicyParser& parser) const {
    std::vector<std::string> out;
    for (const auto& phrase : catalog_.find(task.scene).golden) {
      auto step = parser.parse_phrase(phrase);
      if (step && step->target && std::find(out.begin(), out.end(), *step->target) == out.end())
        out.push_back(*step->target);
    }
    return out;
  }

  /// True when any object the task needs lies outside the executable box.
  bool target_out_of_workspace(const TaskSpec& task, const WorldState& world, const PolicyParser& parser) const {
    for (const auto& name : referents(task, parser)) {
      const auto* o = world.find(name);
      if (o && !world.workspace.executable.contains(o->position)) return true;
    }
    return false;
  }

  SimResult execute(const Program& prog, WorldState world) const {
    Run run{*this, std::move(world), {}};
    for (std::size_t i = 0; i < prog.steps.size(); ++i) {
      if (auto stop = run.step(prog.steps[i], static_cast<int>(i))) {
        return {std::move(*stop), std::move(run.trace)};
      }
    }
    bool met = evaluate_goal(goal_for(run.world.scene), run.world);
    return {Completed{std::move(run.world), met}, std::move(run.trace)};
  }

  GoalSpec goal_for(std::string_view scene) const {
    GoalSpec g = catalog_.find(scene).goal;
    if (g.kind.empty()) throw Error(Errc::FixtureError, "goal kind for scene " + std::string(scene) + " is not bound");
    return g;
  }

 private:
  using Stop = std::variant<Completed, InfeasibleHalt, BadposeEvent>;

  struct Run {
    const Simulator& sim;
    WorldState world;
    std::vector<TracePoint> trace;

    const SimConfig& cfg() const { return sim.config_; }

    SceneObject& object(const std::optional<std::string>& name) {
      if (!name) throw Error(Errc::UnknownTarget, "step has no target");
      if (auto* o = world.find(*name)) return *o;
      throw Error(Errc::UnknownTarget, *name);
    }

    void sync_held() {
      if (!world.held) return;
      auto& o = *world.find(*world.held);
      o.position = world.ee_position + world.ee_orientation.rotate(world.held_offset);
      o.orientation = (world.ee_orientation * world.held_rotation).normalized();
    }

    void record(int step) {
      TracePoint p{step, world.ee_position, world.ee_orientation, world.held, {}, {}};
      if (world.held) {
        const auto& o = world.at(*world.held);
        p.held_position = o.position;
        p.held_orientation = o.orientation;
      }
      trace.push_back(std::move(p));
    }

    std::vector<Vec3> plan(const Vec3& from, const Vec3& to) const {
      double len = (to - from).norm();
      int n = std::max(1, static_cast<int>(std::ceil(len / cfg().waypoint_spacing)));
      std::vector<Vec3> pts;
      pts.reserve(n);
      for (int i = 1; i <= n; ++i) pts.push_back(from + (to - from) * (static_cast<double>(i) / n));
      pts.back() = to;
      return pts;
    }

    // Moves the ee along straight segments through `legs`. Infeasibility is
    // decided on the whole planned path before anything moves.
    std::optional<Stop> travel(const std::vector<Vec3>& legs, int step, const std::string* exclude) {
      const Box& exec = world.workspace.executable;
      std::vector<std::vector<Vec3>> planned;
      Vec3 cursor = world.ee_position;
      for (const auto& leg : legs) {
        planned.push_back(plan(cursor, leg));
        cursor = leg;
      }
      for (std::size_t k = 0; k < planned.size(); ++k) {
        for (std::size_t i = 0; i < planned[k].size(); ++i) {
          if (exec.contains(planned[k][i])) continue;
          // The robot runs up to the boundary and stops there.
          for (std::size_t j = 0; j < k; ++j)
            for (const auto& q : planned[j]) move_to(q, step);
          for (std::size_t j = 0; j < i; ++j) move_to(planned[k][j], step);
          return InfeasibleHalt{planned[k][i], step};
        }
      }

      std::set<std::string> pushed;
      for (const auto& pts : planned) {
        Vec3 start = world.ee_position;
        double length = pts.empty() ? 0 : (pts.back() - start).norm();
        for (const auto& p : pts) {
          Vec3 a = world.ee_position;
          for (auto& o : world.objects) {
            if ((world.held && o.name == *world.held) || (exclude && o.name == *exclude)) continue;
            if (!(o.sensitive || o.fragile || o.pushable)) continue;
            if (!segment_hits_box(a, p, o.box())) continue;
            if (o.pushable) {
              pushed.insert(o.name);
              continue;
            }
            bool fast = length > cfg().damage_step_length;
            auto kind = (o.fragile && fast) ? BadposeKind::Damaged : BadposeKind::Displaced;
            return BadposeEvent{o.name, kind, step, length};
          }
          move_to(p, step);
        }
      }
      for (const auto& name : pushed) {
        auto& o = *world.find(name);
        o.position.x = world.ee_position.x;
        o.position.y = world.ee_position.y;
      }
      return std::nullopt;
    }

    void move_to(const Vec3& p, int step) {
      Vec3 d = p - world.ee_position;
      if (d.norm() > 1e-12) world.last_motion = d.normalized();
      world.ee_position = p;
      sync_held();
      record(step);
    }

    void release() {
      if (world.held) {
        auto& o = *world.find(*world.held);
        if (!o.anchored) {
          double floor = world.workspace.executable.min().z;
          for (const auto& c : world.objects) {
            if (!c.container || c.name == o.name) continue;
            if (std::abs(o.position.x - c.position.x) <= c.half.x && std::abs(o.position.y - c.position.y) <= c.half.y) {
              floor = c.position.z - c.half.z;
              break;
            }
          }
          o.position.z = floor + o.half.z;
        }
        world.held.reset();
      }
      world.gripper = Gripper::Open;
    }

    Vec3 target_point(const SceneObject& o, const ComposerStep& s) const {
      if (s.offset == Offset::None) return o.position;
      Vec3 dir = offset_direction(s.offset);
      double extent = std::abs(dir.x) * o.half.x + std::abs(dir.y) * o.half.y + std::abs(dir.z) * o.half.z;
      double standoff = s.params.empty() ? cfg().clearance : s.params.front();
      return o.position + dir * (extent + standoff);
    }

    std::optional<Stop> step(const ComposerStep& s, int index) {
      switch (s.verb) {
        case Verb::MoveTo: {
          const auto& o = object(s.target);
          return travel({target_point(o, s)}, index, nullptr);
        }
        case Verb::Grasp: {
          auto& target = object(s.target);
          release();
          std::string name = target.name;
          Vec3 goal = target.position;
          if (auto stop = travel({goal}, index, &name)) return stop;
          auto& o = *world.find(name);
          if (o.approach) {
            double err = angle_between(world.last_motion, o.approach->axis);
            if (err > o.approach->tolerance_rad) {
              return BadposeEvent{name, BadposeKind::Misaligned, index, err / kDegToRad};
            }
          }
          world.gripper = Gripper::Closed;
          world.held = name;
          world.held_offset = world.ee_orientation.conjugate().rotate(o.position - world.ee_position);
          world.held_rotation = world.ee_orientation.conjugate() * o.orientation;
          record(index);
          return std::nullopt;
        }
        case Verb::OpenGripper:
          release();
          record(index);
          return std::nullopt;
        case Verb::CloseGripper:
          if (!world.held) world.gripper = Gripper::Closed;
          record(index);
          return std::nullopt;
        case Verb::Rotate: {
          if (s.target) object(s.target);
          double deg = s.params.empty() ? 0.0 : s.params.front();
          world.ee_orientation = (Quat::about_z(deg) * world.ee_orientation).normalized();
          world.ee_yaw_deg += deg;
          if (world.held) world.find(*world.held)->yaw_deg += deg;
          sync_held();
          record(index);
          return std::nullopt;
        }
        case Verb::ResetPose: {
          Vec3 lift{world.ee_position.x, world.ee_position.y, cfg().home.z};
          return travel({lift, cfg().home}, index, nullptr);
        }
      }
      return std::nullopt;
    }
  };

  SceneCatalog catalog_;
  SimConfig config_;
};

}  // namespace roboinspect
