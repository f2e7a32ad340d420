#include "belt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace belt {

void PolicyConfig::validate() const {
  if (action_noise < 0.0) throw std::invalid_argument("PolicyConfig: noise must be >= 0");
  if (tol_pos <= 0.0 || tol_frac <= 0.0 || tol_angle <= 0.0)
    throw std::invalid_argument("PolicyConfig: tolerances must be positive");
}

SalientDiffs salient_diffs(const State& s, const State& g, const PolicyConfig& pc,
                           const EnvConfig& ec) {
  SalientDiffs d;
  d.slider = std::abs(s.slider_pos - g.slider_pos) > pc.tol_frac;
  d.drawer = std::abs(s.drawer_ext - g.drawer_ext) > pc.tol_frac;
  d.zone = s.block_zone != g.block_zone;
  d.angle = std::abs(angle_diff(g.block_angle, s.block_angle)) > pc.tol_angle;
  d.block_pos = !d.zone &&
                (s.block_zone == Zone::Table || s.block_zone == Zone::Held) &&
                (s.block - g.block).norm() > pc.tol_pos;
  d.effector = (s.effector - g.effector).norm() > pc.tol_pos;
  for (int i = 0; i < 3; ++i)
    if (g.lights[i] && !s.lights[i]) d.lights = true;
  return d;
}

bool goal_achieved(const State& s, const State& g, const PolicyConfig& pc,
                   const EnvConfig& ec) {
  return !salient_diffs(s, g, pc, ec).any();
}

namespace {

bool near(const Vec2& a, const Vec2& b, double r) { return (a - b).norm() <= r; }

Vec2 toward(const Vec2& from, const Vec2& to, double max_step) {
  Vec2 d = to - from;
  return Vec2(std::clamp(d.x(), -max_step, max_step), std::clamp(d.y(), -max_step, max_step));
}

bool near_any_handle(const State& s, const EnvConfig& ec, double r) {
  return near(s.effector, ec.drawer_handle(s.drawer_ext), r) ||
         near(s.effector, ec.slider_handle(s.slider_pos), r);
}

// Plain travel. Keeps the gripper open while moving so handles are not
// caught in passing.
Action travel(const State& s, const Vec2& dest, const EnvConfig& ec) {
  Action a;
  Vec2 d = toward(s.effector, dest, ec.max_step);
  a.dx = d.x();
  a.dy = d.y();
  if (s.gripper_closed && s.block_zone != Zone::Held) a.grip = GripCmd::Open;
  return a;
}

// Approach a handle, latch on, then slide it toward the target fraction.
Action manipulate_handle(const State& s, const Vec2& handle, const Vec2& axis, double travel_len,
                         double current, double target, const EnvConfig& ec) {
  if (s.block_zone == Zone::Held) return Action{0, 0, GripCmd::Open, 0};  // free the gripper
  if (!near(s.effector, handle, ec.interaction_radius * 0.8)) return travel(s, handle, ec);
  if (!s.gripper_closed) return Action{0, 0, GripCmd::Close, 0};
  Action a;
  double want = (target - current) * travel_len;
  Vec2 d = axis * want;
  a.dx = std::clamp(d.x(), -ec.max_step, ec.max_step);
  a.dy = std::clamp(d.y(), -ec.max_step, ec.max_step);
  return a;
}

// Grasp, rotate, carry and release the block to match the goal.
Action block_maneuver(const State& s, const State& g, const SalientDiffs& d,
                      const PolicyConfig& pc, const EnvConfig& ec) {
  if (s.block_zone != Zone::Held) {
    if (!near(s.effector, s.block, ec.interaction_radius * 0.8)) return travel(s, s.block, ec);
    if (s.gripper_closed) return Action{0, 0, GripCmd::Open, 0};  // re-open to grab
    return Action{0, 0, GripCmd::Close, 0};
  }

  Action a;
  if (d.angle) a.dtheta = std::clamp(angle_diff(g.block_angle, s.block_angle),
                                     -ec.max_dtheta, ec.max_dtheta);

  Vec2 dest;
  double drop_tol;
  switch (g.block_zone) {
    case Zone::Drawer:
      dest = ec.drawer_anchor(s.drawer_ext);
      drop_tol = ec.capture_radius * 0.7;
      break;
    case Zone::Shelf:
      dest = ec.shelf_anchor;
      drop_tol = 0.15;
      break;
    default:
      dest = g.block;
      drop_tol = pc.tol_pos * 0.8;
      break;
  }

  if (!near(s.effector, dest, drop_tol)) {
    Vec2 step = toward(s.effector, dest, ec.max_step);
    a.dx = step.x();
    a.dy = step.y();
    return a;
  }
  if (d.angle) return a;  // finish rotating before releasing
  if (g.block_zone != Zone::Held) return Action{0, 0, GripCmd::Open, 0};
  return a;
}

}  // namespace

Action policy_step(const State& s, const Task& task, const PolicyConfig& pc,
                   const EnvConfig& ec, RandomStream& rng) {
  const State& g = task.goal;
  const SalientDiffs d = salient_diffs(s, g, pc, ec);

  Action a;
  if (d.any()) {
    // Containers the block maneuver must pass through are held open until
    // the block is settled, then chased back to the goal fraction.
    const bool pending = d.block_pending();
    const bool shelf_access =
        pending && (s.block_zone == Zone::Shelf || g.block_zone == Zone::Shelf);
    const bool drawer_access =
        pending && (s.block_zone == Zone::Drawer || g.block_zone == Zone::Drawer);
    const double slider_target =
        shelf_access ? std::max(g.slider_pos, pc.access_open) : g.slider_pos;
    const double drawer_target =
        drawer_access ? std::max(g.drawer_ext, pc.access_open) : g.drawer_ext;

    if (std::abs(s.slider_pos - slider_target) > pc.tol_frac) {
      a = manipulate_handle(s, ec.slider_handle(s.slider_pos), ec.slider_axis, ec.slider_travel,
                            s.slider_pos, slider_target, ec);
    } else if (std::abs(s.drawer_ext - drawer_target) > pc.tol_frac) {
      a = manipulate_handle(s, ec.drawer_handle(s.drawer_ext), ec.drawer_axis, ec.drawer_travel,
                            s.drawer_ext, drawer_target, ec);
    } else if (pending) {
      a = block_maneuver(s, g, d, pc, ec);
    } else if (d.effector) {
      a = travel(s, g.effector, ec);
    } else if (d.lights) {
      for (int i = 0; i < 3; ++i) {
        if (g.lights[i] && !s.lights[i]) {
          a = travel(s, ec.buttons[i], ec);
          break;
        }
      }
    }
  }

  if (pc.action_noise > 0.0) {
    a.dx += rng.uniform(-pc.action_noise, pc.action_noise);
    a.dy += rng.uniform(-pc.action_noise, pc.action_noise);
    a.dtheta += rng.uniform(-pc.action_noise, pc.action_noise);
  }
  return clamp_action(a, ec);
}

}  // namespace belt
