#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belt/demos.hpp"
#include "belt/env.hpp"

using namespace belt;

namespace {

Action random_action(RandomStream& rng) {
  Action a;
  a.dx = rng.uniform(-0.4, 0.4);
  a.dy = rng.uniform(-0.4, 0.4);
  a.dtheta = rng.uniform(-0.4, 0.4);
  a.grip = static_cast<GripCmd>(rng.uniform_int(0, 2));
  return a;
}

}  // namespace

TEST_CASE("free-space motion and clamping") {
  EnvConfig c;
  State s;
  s.effector = Vec2(5.0, 5.0);

  State next = step(s, Action{0.1, 0.0, GripCmd::None, 0.0}, c);
  CHECK(next.effector.x() == doctest::Approx(5.1));
  CHECK(next.effector.y() == doctest::Approx(5.0));
  CHECK(next.t == 1);

  next = step(s, Action{0.9, 0.0, GripCmd::None, 0.0}, c);
  CHECK(next.effector.x() == doctest::Approx(5.25));
}

TEST_CASE("drawer pull matches the hand-simulated step") {
  // Effector latched on the closed drawer handle at (2, 1); pulling dy=0.25
  // along the +y axis moves ext by 0.25 / travel(2.0) = 0.125 and carries the
  // effector with the handle to (2, 1.25).
  EnvConfig c;
  State s;
  s.effector = c.drawer_handle(0.0);
  s.gripper_closed = true;
  State next = step(s, Action{0.0, 0.25, GripCmd::None, 0.0}, c);
  CHECK(next.drawer_ext == doctest::Approx(0.125));
  CHECK(next.effector.x() == doctest::Approx(2.0));
  CHECK(next.effector.y() == doctest::Approx(1.25));

  // Perpendicular motion is dropped while latched.
  next = step(s, Action{0.25, 0.0, GripCmd::None, 0.0}, c);
  CHECK(next.drawer_ext == doctest::Approx(0.0));
  CHECK(next.effector == s.effector);
}

TEST_CASE("grasp, carry, and drop transitions") {
  EnvConfig c;
  State s;
  s.effector = Vec2(6.0, 3.0);
  s.block = Vec2(6.1, 3.0);

  State held = step(s, Action{0.0, 0.0, GripCmd::Close, 0.0}, c);
  CHECK(held.block_zone == Zone::Held);
  CHECK(held.block == held.effector);

  State carried = step(held, Action{0.2, 0.1, GripCmd::None, 0.1}, c);
  CHECK(carried.block == carried.effector);
  CHECK(carried.block_angle == doctest::Approx(0.1));

  State dropped = step(carried, Action{0.0, 0.0, GripCmd::Open, 0.0}, c);
  CHECK(dropped.block_zone == Zone::Table);
  CHECK(dropped.block == carried.block);
}

TEST_CASE("narrow passage: closed drawer rejects the block in one step") {
  EnvConfig c;
  RandomStream rng(11);
  int attempts = 0;
  for (int i = 0; i < 2000; ++i) {
    State s = random_start(c, rng);
    if (s.drawer_ext >= c.open_threshold || s.block_zone == Zone::Drawer) continue;
    ++attempts;
    Action a = random_action(rng);
    State next = step(s, a, c);
    CHECK(next.block_zone != Zone::Drawer);
  }
  CHECK(attempts > 200);
}

TEST_CASE("drop into an open drawer near the anchor is captured") {
  EnvConfig c;
  State s;
  s.drawer_ext = 1.0;
  s.effector = c.drawer_anchor(1.0);
  s.block = s.effector;
  s.block_zone = Zone::Held;
  s.gripper_closed = true;
  State next = step(s, Action{0.0, 0.0, GripCmd::Open, 0.0}, c);
  CHECK(next.block_zone == Zone::Drawer);
  CHECK(next.block == c.drawer_anchor(next.drawer_ext));

  // Same drop with the drawer short of the threshold lands on the table.
  s.drawer_ext = 0.69;
  s.effector = c.drawer_anchor(0.69);
  s.block = s.effector;
  State table = step(s, Action{0.0, 0.0, GripCmd::Open, 0.0}, c);
  CHECK(table.block_zone == Zone::Table);
}

TEST_CASE("staticity: a no-op changes nothing but the clock") {
  EnvConfig c;
  RandomStream rng(12);
  for (int i = 0; i < 500; ++i) {
    State s = random_start(c, rng);
    State next = step(s, Action{}, c);
    State expect = s;
    expect.t = s.t + 1;
    CHECK(next == expect);
  }
}

TEST_CASE("determinism: identical inputs give identical successors") {
  EnvConfig c;
  RandomStream rng(13);
  for (int i = 0; i < 200; ++i) {
    State s = random_start(c, rng);
    Action a = random_action(rng);
    CHECK(step(s, a, c) == step(s, a, c));
  }
}

TEST_CASE("transience: lights exactly track press proximity along rollouts") {
  EnvConfig c;
  RandomStream rng(14);
  for (int r = 0; r < 50; ++r) {
    State s = random_start(c, rng);
    for (int k = 0; k < 40; ++k) {
      s = step(s, random_action(rng), c);
      for (int i = 0; i < 3; ++i)
        CHECK(s.lights[i] == ((s.effector - c.buttons[i]).norm() <= c.press_radius));
    }
  }
}

TEST_CASE("observe: determinism and single-component sensitivity") {
  EnvConfig c;
  State s;
  CHECK(observe(s, c) == observe(s, c));

  State g = s;
  g.gripper_closed = true;
  FeatureVector a = observe(s, c), b = observe(g, c);
  int differing = 0;
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) ++differing;
  CHECK(differing == 1);
}

TEST_CASE("observe round-trips through de_flatten") {
  EnvConfig c;
  RandomStream rng(15);
  for (int i = 0; i < 500; ++i) {
    State s = random_start(c, rng);
    s.t = rng.uniform_int(0, 100);
    State back = de_flatten(observe(s, c), c, s.t);
    CHECK(back == s);
  }

  EnvConfig wrapped = c;
  wrapped.wrapped_angle = true;
  for (int i = 0; i < 200; ++i) {
    State s = random_start(wrapped, rng);
    State back = de_flatten(observe(s, wrapped), wrapped, s.t);
    CHECK(back.block_angle == doctest::Approx(s.block_angle).epsilon(1e-9));
    back.block_angle = s.block_angle;
    CHECK(back == s);
  }
}

TEST_CASE("de_flatten projects invalid vectors onto valid states") {
  EnvConfig c;
  RandomStream rng(16);
  for (int i = 0; i < 500; ++i) {
    FeatureVector v(feature_dim(c));
    for (int k = 0; k < v.size(); ++k) v[k] = rng.uniform(-4.0, 14.0);
    State s = de_flatten(v, c, 0);
    CHECK(check_invariants(s, c));
  }
}

TEST_CASE("config validation rejects bad constants") {
  EnvConfig c;
  c.open_threshold = 0.0;
  CHECK_THROWS(c.validate());
  c = EnvConfig{};
  c.press_radius = -1.0;
  CHECK_THROWS(c.validate());
  CHECK_NOTHROW(EnvConfig{}.validate());
}

TEST_CASE("feature names match the layout") {
  EnvConfig c;
  auto names = feature_names(c);
  CHECK(static_cast<int>(names.size()) == feature_dim(c));
  CHECK(names[2] == "gripper_closed");
  c.wrapped_angle = true;
  names = feature_names(c);
  CHECK(static_cast<int>(names.size()) == feature_dim(c));
  CHECK(names[8] == "block_angle_sin");
}
