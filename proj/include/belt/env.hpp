#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace belt {

using Vec2 = Eigen::Vector2d;
using FeatureVector = Eigen::VectorXd;

enum class Zone : int { Table = 0, Drawer = 1, Shelf = 2, Held = 3 };
enum class GripCmd : int { None = 0, Open = 1, Close = 2 };

constexpr double kTwoPi = 6.283185307179586476925286766559;

// wrap into [0, 2*pi)
double wrap_angle(double a);
// signed minimal difference a-b, in [-pi, pi)
double angle_diff(double a, double b);

// Full observation of the planar playground. The block angle is kept as a
// raw scalar in [0, 2*pi); rotations that cross zero therefore jump by ~2*pi
// in the stored value (see EnvConfig::wrapped_angle for the alternative
// sine/cosine feature encoding).
struct State {
  Vec2 effector{5.0, 5.0};
  bool gripper_closed = false;
  double drawer_ext = 0.0;   // fraction of travel, 0 = closed
  double slider_pos = 0.0;   // fraction of travel, 0 = closed
  Vec2 block{6.0, 3.0};
  double block_angle = 0.0;  // radians, [0, 2*pi)
  Zone block_zone = Zone::Table;
  std::array<bool, 3> lights{false, false, false};  // r, g, b
  int t = 0;

  bool operator==(const State& o) const;
};

struct Action {
  double dx = 0.0;
  double dy = 0.0;
  GripCmd grip = GripCmd::None;
  double dtheta = 0.0;  // effective only while holding the block
};

// Geometry and interaction constants. Distances are in workspace length
// units; the workspace is the square [lo, hi]^2.
struct EnvConfig {
  double workspace_lo = 0.0;
  double workspace_hi = 10.0;
  double max_step = 0.25;    // per-component displacement bound
  double max_dtheta = 0.2;   // rotation bound per step
  double interaction_radius = 0.3;
  double press_radius = 0.2;
  double open_threshold = 0.7;    // drawer/slider count as open at or above
  double closed_threshold = 0.3;  // ... and as closed at or below

  Vec2 drawer_handle_base{2.0, 1.0};  // handle position at ext = 0
  Vec2 drawer_axis{0.0, 1.0};
  double drawer_travel = 2.0;
  // Block rest point relative to the handle. Kept well outside the
  // interaction radius so reaching for the handle never grabs the block.
  Vec2 drawer_anchor_offset{0.0, -0.75};

  Vec2 slider_handle_base{4.0, 8.0};
  Vec2 slider_axis{1.0, 0.0};
  double slider_travel = 2.0;

  Vec2 shelf_lo{4.2, 8.6};
  Vec2 shelf_hi{5.8, 9.8};
  Vec2 shelf_anchor{5.0, 9.2};

  std::array<Vec2, 3> buttons{Vec2{7.0, 9.2}, Vec2{8.0, 9.2}, Vec2{9.0, 9.2}};
  double capture_radius = 0.35;  // drop-into-drawer radius around the anchor

  bool wrapped_angle = false;  // observe() emits cos/sin instead of the raw angle
  uint64_t seed = 0;

  Vec2 drawer_handle(double ext) const {
    return drawer_handle_base + drawer_axis * (ext * drawer_travel);
  }
  Vec2 drawer_anchor(double ext) const {
    return drawer_handle(ext) + drawer_anchor_offset;
  }
  Vec2 slider_handle(double pos) const {
    return slider_handle_base + slider_axis * (pos * slider_travel);
  }
  bool in_shelf_region(const Vec2& p) const {
    return p.x() >= shelf_lo.x() && p.x() <= shelf_hi.x() && p.y() >= shelf_lo.y() &&
           p.y() <= shelf_hi.y();
  }
  Vec2 clamp_to_workspace(const Vec2& p) const;

  void validate() const;  // throws std::invalid_argument on bad constants
};

// Deterministic single-step dynamics. Invalid motion is clamped, never
// rejected. Lights are recomputed from scratch from the post-motion state.
State step(const State& state, const Action& action, const EnvConfig& config);

Action clamp_action(const Action& a, const EnvConfig& config);

// Feature vector layout (raw angle encoding, dimension 15):
//   0 effector_x   1 effector_y   2 gripper_closed   3 drawer_ext
//   4 slider_pos   5 block_x      6 block_y          7 block_angle
//   8..11 block_zone one-hot (table, drawer, shelf, held)
//   12 light_r     13 light_g     14 light_b
// With wrapped_angle the single angle component is replaced by
// (cos, sin) at indices 7, 8 and everything after shifts by one (dim 16).
// The timestep t is not part of the observation.
int feature_dim(const EnvConfig& config);
std::vector<std::string> feature_names(const EnvConfig& config);
FeatureVector observe(const State& state, const EnvConfig& config);

// Inverse of observe. Projects arbitrary real vectors back onto valid
// states: ranges are clipped, booleans thresholded at 0.5, the zone taken as
// the one-hot argmax, held/drawer/shelf block positions pinned, and lights
// kept only where the effector is actually within press radius.
State de_flatten(const FeatureVector& v, const EnvConfig& config, int t);

// True when the state satisfies the representable invariants (bounds, pin
// consistency, light transience). Historical invariants (how the block got
// into a zone) are not checkable pointwise.
bool check_invariants(const State& state, const EnvConfig& config);

}  // namespace belt
