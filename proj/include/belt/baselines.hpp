#pragma once

#include "belt/search.hpp"

namespace belt {

struct CemConfig {
  int population = 64;
  double elite_fraction = 0.125;
  int iterations = 10;
  int sequence_length = 4;
  int goal_pool = 256;   // candidate goals drawn from the demo dataset
  int edge_horizon = 64;
  double smoothing = 0.5;  // additive smoothing when refitting
  ModelKind model = ModelKind::TaskModel;
  uint64_t seed = 0;

  void validate() const;
};

// Cross-entropy method over task sequences: per-slot categorical
// distributions over a sampled goal pool, refit each iteration to successful
// sequences (or, when none succeed, to the sequences with the most matcher
// progress).
SearchResult cem_plan(const State& x_init, const SuccessDetector& detector,
                      const SearchDeps& deps, const CemConfig& config);

struct SingleGoalOutcome {
  bool applicable = false;  // a single satisfying goal state exists in the dataset
  Task goal;
  bool success = false;
  std::vector<State> trajectory;
};

// Whether a state satisfies every (non-transient) subtask postcondition of
// the chain simultaneously. Rotations are judged by the chain's net quarter
// turns relative to x_init.
bool satisfies_all_postconditions(const State& candidate, const ChainSpec& chain,
                                  const State& x_init, const EnvConfig& ec);

// Execute the policy toward one dataset state that satisfies all subtask
// postconditions of the chain; not applicable for chains with transient
// (button) subtasks or when no such state exists.
SingleGoalOutcome single_goal_baseline(const State& x_init, const ChainSpec& chain,
                                       const DemoDataset& dataset, const PolicyConfig& pc,
                                       const EnvConfig& ec, int horizon, RandomStream& rng);

struct OracleOutcome {
  bool success = false;
  std::vector<State> trajectory;
};

// Upper-bound executor: chases each subtask's canonical goal in sequence
// through the exact simulator (the goal of each stage is the subtask effect
// applied to the state reached so far).
OracleOutcome chain_oracle(const State& x_init, const ChainSpec& chain, const PolicyConfig& pc,
                           const EnvConfig& ec, int per_subtask_horizon, RandomStream& rng);

}  // namespace belt
