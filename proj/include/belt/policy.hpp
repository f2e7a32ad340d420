#pragma once

#include "belt/env.hpp"
#include "belt/random.hpp"

namespace belt {

// A task is a goal state; the policy is conditioned on it.
struct Task {
  State goal;
};

struct PolicyConfig {
  double action_noise = 0.02;  // uniform half-width added per action component
  double tol_pos = 0.08;       // positions within this count as matched
  double tol_frac = 0.05;      // drawer/slider fractions
  double tol_angle = 0.1;      // block angle, radians
  double access_open = 0.85;   // how far to open a container for block access

  void validate() const;  // throws on negative noise
};

// Which salient features of the goal are not yet satisfied. Priority order:
// slider, drawer, block zone/grasp, block angle, block position, effector
// position, buttons.
struct SalientDiffs {
  bool slider = false;
  bool drawer = false;
  bool zone = false;
  bool angle = false;
  bool block_pos = false;
  bool effector = false;
  bool lights = false;

  bool any() const { return slider || drawer || zone || angle || block_pos || effector || lights; }
  bool block_pending() const { return zone || angle || block_pos; }
};

SalientDiffs salient_diffs(const State& state, const State& goal, const PolicyConfig& pc,
                           const EnvConfig& ec);

bool goal_achieved(const State& state, const State& goal, const PolicyConfig& pc,
                   const EnvConfig& ec);

// One step of the scripted goal-conditioned controller. Pure given the
// random stream; emits a no-op (plus noise) when the goal is already
// satisfied on all salient features.
Action policy_step(const State& state, const Task& task, const PolicyConfig& pc,
                   const EnvConfig& ec, RandomStream& rng);

}  // namespace belt
