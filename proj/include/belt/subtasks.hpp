#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "belt/env.hpp"
#include "belt/random.hpp"

namespace belt {

// Core short-horizon manipulation subtasks. Chains of these form the
// long-horizon evaluation problems; a trajectory solves a chain when the
// subtask completions fire in order.
enum class SubtaskId : int {
  OpenDrawer = 0,
  CloseDrawer,
  OpenSlider,
  CloseSlider,
  Grasp,
  PlaceOnTable,
  RotateLeft,
  RotateRight,
  PushButtonR,
  PushButtonG,
  PushButtonB,
  PutIntoShelf,
  PullFromShelf,
  SweepIntoDrawer,
};
constexpr int kNumSubtasks = 14;
constexpr double kRotateTarget = kTwoPi / 4.0;  // quarter turn
constexpr double kRotateTolerance = 0.15;       // radians

const std::vector<SubtaskId>& all_subtasks();
const std::string& subtask_name(SubtaskId id);
std::optional<SubtaskId> subtask_from_name(const std::string& name);

// Concrete precondition used when sampling demonstration goals.
bool subtask_applicable(SubtaskId id, const State& state, const EnvConfig& config);

// Canonical post-state of the subtask applied to `start`: only the fields
// the subtask is about change, dependent fields (pins, lights, effector
// placement) are made consistent. Randomized placements draw from `rng`.
State subtask_goal(SubtaskId id, const State& start, const EnvConfig& config,
                   RandomStream& rng);

// A light press leaves no persistent state change.
bool subtask_transient(SubtaskId id);

// Per-subtask completion automaton over a stored state sequence. Completion
// predicates are windowed (an "enter" state followed by an "exit" state, not
// necessarily adjacent) so they work on both dense simulator trajectories
// and two-point task-model edges.
class SubtaskMatcher {
 public:
  SubtaskMatcher() = default;
  SubtaskMatcher(SubtaskId id, const EnvConfig* config);

  // Feed the next stored state; returns true once the subtask has completed
  // (and keeps returning true afterwards).
  bool advance(const State& s);
  bool done() const { return done_; }
  SubtaskId id() const { return id_; }

 private:
  SubtaskId id_ = SubtaskId::OpenDrawer;
  const EnvConfig* config_ = nullptr;
  bool done_ = false;
  bool entered_ = false;     // threshold/zone automata: enter phase seen
  bool have_last_ = false;   // rotation automata
  double last_angle_ = 0.0;
  double cum_rotation_ = 0.0;
  std::vector<double> rotation_refs_;  // deduplicated cumulative-rotation samples
};

struct ChainSpec {
  std::vector<SubtaskId> subtasks;

  std::string to_string() const;                       // comma-separated names
  static ChainSpec parse(const std::string& text);     // throws on unknown names
  bool contains(SubtaskId id) const;
  bool contains_button() const;
  bool operator==(const ChainSpec&) const = default;
};

// Ordered-completion matcher for a chain. Value type: copy it to branch the
// match state between trajectory prefixes.
class ChainMatcher {
 public:
  ChainMatcher() = default;
  ChainMatcher(const ChainSpec& chain, const EnvConfig* config);

  void advance(const State& s);
  bool done() const;
  int progress() const { return index_; }  // subtasks completed so far

 private:
  const EnvConfig* config_ = nullptr;
  std::vector<SubtaskId> subtasks_;
  int index_ = 0;
  SubtaskMatcher current_;
};

// Black-box trajectory success indicator for one chain.
struct SuccessDetector {
  ChainSpec chain;
  EnvConfig config;

  ChainMatcher matcher() const { return ChainMatcher(chain, &config); }
};

bool detect(const SuccessDetector& detector, std::span<const State> trajectory);

// Whether subtask `b` may directly follow subtask `a`: never the same task
// twice in a row, and a's abstract postcondition must not contradict b's
// abstract precondition.
bool compatible(SubtaskId a, SubtaskId b);

// Exhaustive enumeration of valid chains of the given length, in
// deterministic lexicographic order over SubtaskId.
std::vector<ChainSpec> generate_chains(int length);

}  // namespace belt
