#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "belt/demos.hpp"
#include "belt/policy.hpp"

using namespace belt;

namespace {

PolicyConfig noiseless() {
  PolicyConfig pc;
  pc.action_noise = 0.0;
  return pc;
}

State run_to(const State& start, const Task& task, const PolicyConfig& pc, const EnvConfig& ec,
             int steps, RandomStream& rng) {
  State s = start;
  for (int k = 0; k < steps; ++k) s = step(s, policy_step(s, task, pc, ec, rng), ec);
  return s;
}

}  // namespace

TEST_CASE("goal state is a fixed point at zero noise") {
  EnvConfig ec;
  PolicyConfig pc = noiseless();
  RandomStream rng(1);
  State s = canonical_init(ec);
  Action a = policy_step(s, Task{s}, pc, ec, rng);
  CHECK(a.dx == 0.0);
  CHECK(a.dy == 0.0);
  CHECK(a.dtheta == 0.0);
  CHECK(a.grip == GripCmd::None);
}

TEST_CASE("pure effector goals walk the straight line") {
  EnvConfig ec;
  PolicyConfig pc = noiseless();
  RandomStream rng(2);
  State s = canonical_init(ec);
  State goal = s;
  goal.effector = Vec2(8.0, 9.0);
  Action a = policy_step(s, Task{goal}, pc, ec, rng);
  CHECK(a.dx == doctest::Approx(0.25));
  CHECK(a.dy == doctest::Approx(0.25));

  // Distance to the goal effector position never increases along the way.
  double last = (s.effector - goal.effector).norm();
  for (int k = 0; k < 60; ++k) {
    s = step(s, policy_step(s, Task{goal}, pc, ec, rng), ec);
    double d = (s.effector - goal.effector).norm();
    CHECK(d <= last + 1e-12);
    last = d;
  }
  CHECK(last < pc.tol_pos);
}

TEST_CASE("drawer goals reach the handle within the geometric step bound") {
  EnvConfig ec;
  PolicyConfig pc = noiseless();
  RandomStream rng(3);
  State s = canonical_init(ec);
  s.effector = Vec2(8.0, 6.0);
  State goal = s;
  goal.drawer_ext = 1.0;
  goal.effector = ec.drawer_handle(1.0);
  goal.gripper_closed = true;

  // Straight-line steps to the handle, then one grab step, then the pull.
  Vec2 delta = ec.drawer_handle(0.0) - s.effector;
  int travel_steps = static_cast<int>(
      std::ceil(std::max(std::abs(delta.x()), std::abs(delta.y())) / ec.max_step));
  int budget = travel_steps + 4;

  State cur = s;
  bool reached = false;
  for (int k = 0; k < budget && !reached; ++k) {
    cur = step(cur, policy_step(cur, Task{goal}, pc, ec, rng), ec);
    reached = (cur.effector - ec.drawer_handle(cur.drawer_ext)).norm() <=
              ec.interaction_radius;
  }
  CHECK(reached);

  // And the drawer actually opens shortly after.
  cur = run_to(cur, Task{goal}, pc, ec, 20, rng);
  CHECK(cur.drawer_ext >= ec.open_threshold);
}

TEST_CASE("noise stays within action bounds after clamping") {
  EnvConfig ec;
  PolicyConfig pc;
  pc.action_noise = 0.5;  // larger than the bound on purpose
  RandomStream rng(4);
  State s = canonical_init(ec);
  State goal = s;
  goal.effector = Vec2(9.5, 0.5);
  for (int k = 0; k < 200; ++k) {
    Action a = policy_step(s, Task{goal}, pc, ec, rng);
    CHECK(std::abs(a.dx) <= ec.max_step);
    CHECK(std::abs(a.dy) <= ec.max_step);
    CHECK(std::abs(a.dtheta) <= ec.max_dtheta);
    s = step(s, a, ec);
  }
}

TEST_CASE("policy achieves each subtask's canonical goal at zero noise") {
  EnvConfig ec;
  PolicyConfig pc = noiseless();
  RandomStream rng(5);
  int achieved = 0, total = 0;
  for (SubtaskId id : all_subtasks()) {
    for (int trial = 0; trial < 6; ++trial) {
      State start = random_start(ec, rng);
      if (!subtask_applicable(id, start, ec)) continue;
      Task task{subtask_goal(id, start, ec, rng)};
      State end = run_to(start, task, pc, ec, 96, rng);
      ++total;
      if (goal_achieved(end, task.goal, pc, ec)) ++achieved;
      else MESSAGE("missed: ", subtask_name(id));
    }
  }
  CHECK(total > 40);
  // Calibration bound for the stand-in controller.
  CHECK(static_cast<double>(achieved) / total >= 0.9);
}

TEST_CASE("held block with a sealed-drawer goal converges") {
  // Goal: block inside the drawer with the drawer closed again. The policy
  // must open the drawer for access, deposit the block, then close it.
  EnvConfig ec;
  PolicyConfig pc = noiseless();
  RandomStream rng(6);
  State s = canonical_init(ec);
  State goal = s;
  goal.drawer_ext = 0.0;
  goal.block_zone = Zone::Drawer;
  goal.block = ec.drawer_anchor(0.0);
  goal.effector = ec.drawer_handle(0.0);
  goal.gripper_closed = true;

  State end = run_to(s, Task{goal}, pc, ec, 200, rng);
  CHECK(end.block_zone == Zone::Drawer);
  CHECK(end.drawer_ext <= pc.tol_frac);
}

TEST_CASE("config validation") {
  PolicyConfig pc;
  pc.action_noise = -0.1;
  CHECK_THROWS(pc.validate());
  CHECK_NOTHROW(PolicyConfig{}.validate());
}
