#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "belt/policy.hpp"
#include "belt/subtasks.hpp"

namespace belt {

struct DemoRollout {
  std::vector<State> states;    // length = actions.size() + 1
  std::vector<Action> actions;
  Task task;                    // the goal the policy pursued
  SubtaskId subtask;            // which canonical effect produced the goal
};

// Demonstration dataset: policy rollouts toward sampled subtask goals, plus
// a flat index over every visited state for goal sampling.
struct DemoDataset {
  std::vector<DemoRollout> rollouts;
  uint64_t seed = 0;
  int horizon = 0;

  size_t num_states() const;
  // k-th visited state in rollout-major order
  const State& state_at(size_t k) const;

  void validate() const;  // throws if any rollout is malformed
};

// Random reachable start for a demonstration rollout: effector anywhere,
// containers biased to their extremes, block mostly on the table with a
// near-zero angle bias (rotations to the left then tend to cross the raw
// angle wrap).
State random_start(const EnvConfig& config, RandomStream& rng);

// Canonical initial state for evaluation problems: everything closed, block
// flat on the table.
State canonical_init(const EnvConfig& config);

// Roll out the policy toward `task` for `horizon` steps through the exact
// simulator. Returns the visited states (horizon + 1) and actions.
DemoRollout run_policy(const State& start, const Task& task, const PolicyConfig& pc,
                       const EnvConfig& ec, int horizon, RandomStream& rng);

// Generate `num_rollouts` demonstrations of `horizon` steps each. Each
// rollout samples a random start, picks an applicable subtask uniformly, and
// chases its canonical goal. Reproducible from the seed. Throws if a rollout
// ever violates the state invariants (which would indicate a simulator bug).
DemoDataset generate_demos(const EnvConfig& ec, const PolicyConfig& pc, int num_rollouts,
                           int horizon, uint64_t seed);

// Uniform sample over all visited states, returned as a goal.
Task sample_task(const DemoDataset& dataset, RandomStream& rng);

// Line-delimited persistence; first line is a schema header.
void save_demos(const DemoDataset& dataset, std::ostream& out);
void save_demos_file(const DemoDataset& dataset, const std::string& path);
DemoDataset load_demos(std::istream& in);
DemoDataset load_demos_file(const std::string& path);

}  // namespace belt
