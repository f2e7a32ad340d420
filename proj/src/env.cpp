#include "belt/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace belt {

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d < -kTwoPi / 2.0) d += kTwoPi;
  if (d >= kTwoPi / 2.0) d -= kTwoPi;
  return d;
}

bool State::operator==(const State& o) const {
  return effector == o.effector && gripper_closed == o.gripper_closed &&
         drawer_ext == o.drawer_ext && slider_pos == o.slider_pos && block == o.block &&
         block_angle == o.block_angle && block_zone == o.block_zone && lights == o.lights &&
         t == o.t;
}

Vec2 EnvConfig::clamp_to_workspace(const Vec2& p) const {
  return Vec2(std::clamp(p.x(), workspace_lo, workspace_hi),
              std::clamp(p.y(), workspace_lo, workspace_hi));
}

void EnvConfig::validate() const {
  auto in01 = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in01(open_threshold) || !in01(closed_threshold))
    throw std::invalid_argument("EnvConfig: thresholds must lie in (0, 1]");
  if (interaction_radius <= 0.0 || press_radius <= 0.0 || capture_radius <= 0.0)
    throw std::invalid_argument("EnvConfig: radii must be positive");
  if (workspace_hi <= workspace_lo)
    throw std::invalid_argument("EnvConfig: empty workspace");
  if (max_step <= 0.0 || max_dtheta <= 0.0)
    throw std::invalid_argument("EnvConfig: action bounds must be positive");
  if (drawer_travel <= 0.0 || slider_travel <= 0.0)
    throw std::invalid_argument("EnvConfig: travels must be positive");
}

Action clamp_action(const Action& a, const EnvConfig& c) {
  Action out = a;
  out.dx = std::clamp(a.dx, -c.max_step, c.max_step);
  out.dy = std::clamp(a.dy, -c.max_step, c.max_step);
  out.dtheta = std::clamp(a.dtheta, -c.max_dtheta, c.max_dtheta);
  return out;
}

namespace {

bool within(const Vec2& a, const Vec2& b, double r) { return (a - b).norm() <= r; }

void recompute_lights(State& s, const EnvConfig& c) {
  for (int i = 0; i < 3; ++i) s.lights[i] = within(s.effector, c.buttons[i], c.press_radius);
}

void apply_pins(State& s, const EnvConfig& c) {
  switch (s.block_zone) {
    case Zone::Held: s.block = s.effector; break;
    case Zone::Drawer: s.block = c.drawer_anchor(s.drawer_ext); break;
    case Zone::Shelf: s.block = c.shelf_anchor; break;
    case Zone::Table: break;
  }
}

bool block_graspable(const State& s, const EnvConfig& c) {
  switch (s.block_zone) {
    case Zone::Table: return true;
    case Zone::Drawer: return s.drawer_ext >= c.open_threshold;
    case Zone::Shelf: return s.slider_pos >= c.open_threshold;
    case Zone::Held: return false;
  }
  return false;
}

}  // namespace

State step(const State& state, const Action& action, const EnvConfig& c) {
  const Action a = clamp_action(action, c);
  State s = state;

  // Gripper transitions happen before motion, at the current positions.
  if (a.grip == GripCmd::Open && s.gripper_closed) {
    s.gripper_closed = false;
    if (s.block_zone == Zone::Held) {
      // Drop resolution at the release point.
      if (s.drawer_ext >= c.open_threshold &&
          within(s.effector, c.drawer_anchor(s.drawer_ext), c.capture_radius)) {
        s.block_zone = Zone::Drawer;
      } else if (s.slider_pos >= c.open_threshold && c.in_shelf_region(s.effector)) {
        s.block_zone = Zone::Shelf;
      } else {
        s.block_zone = Zone::Table;
        s.block = s.effector;
      }
    }
  } else if (a.grip == GripCmd::Close && !s.gripper_closed) {
    s.gripper_closed = true;
    if (block_graspable(s, c) && within(s.effector, s.block, c.interaction_radius)) {
      s.block_zone = Zone::Held;
      s.block = s.effector;
    }
  }

  // Motion. A closed gripper near a handle constrains the effector to the
  // handle's track; holding the block moves it along and enables rotation.
  const Vec2 d(a.dx, a.dy);
  if (s.block_zone == Zone::Held) {
    s.effector = c.clamp_to_workspace(s.effector + d);
    s.block = s.effector;
    s.block_angle = wrap_angle(s.block_angle + a.dtheta);
  } else if (s.gripper_closed &&
             within(s.effector, c.drawer_handle(s.drawer_ext), c.interaction_radius)) {
    double next = std::clamp(s.drawer_ext + d.dot(c.drawer_axis) / c.drawer_travel, 0.0, 1.0);
    s.effector += c.drawer_axis * ((next - s.drawer_ext) * c.drawer_travel);
    s.drawer_ext = next;
  } else if (s.gripper_closed &&
             within(s.effector, c.slider_handle(s.slider_pos), c.interaction_radius)) {
    double next = std::clamp(s.slider_pos + d.dot(c.slider_axis) / c.slider_travel, 0.0, 1.0);
    s.effector += c.slider_axis * ((next - s.slider_pos) * c.slider_travel);
    s.slider_pos = next;
  } else {
    s.effector = c.clamp_to_workspace(s.effector + d);
  }

  apply_pins(s, c);
  recompute_lights(s, c);
  s.t = state.t + 1;
  return s;
}

int feature_dim(const EnvConfig& c) { return c.wrapped_angle ? 16 : 15; }

std::vector<std::string> feature_names(const EnvConfig& c) {
  std::vector<std::string> n{"effector_x", "effector_y", "gripper_closed",
                             "drawer_ext", "slider_pos", "block_x",
                             "block_y"};
  if (c.wrapped_angle) {
    n.push_back("block_angle_cos");
    n.push_back("block_angle_sin");
  } else {
    n.push_back("block_angle");
  }
  for (const char* z : {"zone_table", "zone_drawer", "zone_shelf", "zone_held"})
    n.push_back(z);
  for (const char* l : {"light_r", "light_g", "light_b"}) n.push_back(l);
  return n;
}

FeatureVector observe(const State& s, const EnvConfig& c) {
  FeatureVector v(feature_dim(c));
  int k = 0;
  v[k++] = s.effector.x();
  v[k++] = s.effector.y();
  v[k++] = s.gripper_closed ? 1.0 : 0.0;
  v[k++] = s.drawer_ext;
  v[k++] = s.slider_pos;
  v[k++] = s.block.x();
  v[k++] = s.block.y();
  if (c.wrapped_angle) {
    v[k++] = std::cos(s.block_angle);
    v[k++] = std::sin(s.block_angle);
  } else {
    v[k++] = s.block_angle;
  }
  for (int z = 0; z < 4; ++z) v[k++] = (static_cast<int>(s.block_zone) == z) ? 1.0 : 0.0;
  for (int i = 0; i < 3; ++i) v[k++] = s.lights[i] ? 1.0 : 0.0;
  return v;
}

State de_flatten(const FeatureVector& v, const EnvConfig& c, int t) {
  if (v.size() != feature_dim(c)) throw std::invalid_argument("de_flatten: wrong dimension");
  State s;
  int k = 0;
  s.effector = c.clamp_to_workspace(Vec2(v[k], v[k + 1]));
  k += 2;
  s.gripper_closed = v[k++] > 0.5;
  s.drawer_ext = std::clamp(v[k++], 0.0, 1.0);
  s.slider_pos = std::clamp(v[k++], 0.0, 1.0);
  s.block = c.clamp_to_workspace(Vec2(v[k], v[k + 1]));
  k += 2;
  if (c.wrapped_angle) {
    double cs = v[k], sn = v[k + 1];
    k += 2;
    s.block_angle = (cs == 0.0 && sn == 0.0) ? 0.0 : wrap_angle(std::atan2(sn, cs));
  } else {
    s.block_angle = wrap_angle(v[k++]);
  }
  int zone = 0;
  double best = v[k];
  for (int z = 1; z < 4; ++z)
    if (v[k + z] > best) best = v[k + z], zone = z;
  s.block_zone = static_cast<Zone>(zone);
  k += 4;
  for (int i = 0; i < 3; ++i) {
    bool predicted = v[k++] > 0.5;
    s.lights[i] = predicted && (s.effector - c.buttons[i]).norm() <= c.press_radius;
  }
  apply_pins(s, c);
  s.t = t;
  return s;
}

bool check_invariants(const State& s, const EnvConfig& c) {
  auto in_ws = [&](const Vec2& p) {
    return p.x() >= c.workspace_lo && p.x() <= c.workspace_hi && p.y() >= c.workspace_lo &&
           p.y() <= c.workspace_hi;
  };
  if (!in_ws(s.effector) || !in_ws(s.block)) return false;
  if (s.drawer_ext < 0.0 || s.drawer_ext > 1.0) return false;
  if (s.slider_pos < 0.0 || s.slider_pos > 1.0) return false;
  if (s.block_angle < 0.0 || s.block_angle >= kTwoPi) return false;
  if (s.block_zone == Zone::Held && s.block != s.effector) return false;
  if (s.block_zone == Zone::Drawer && s.block != c.drawer_anchor(s.drawer_ext)) return false;
  if (s.block_zone == Zone::Shelf && s.block != c.shelf_anchor) return false;
  for (int i = 0; i < 3; ++i)
    if (s.lights[i] && (s.effector - c.buttons[i]).norm() > c.press_radius) return false;
  return true;
}

}  // namespace belt
