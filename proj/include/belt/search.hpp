#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "belt/models.hpp"
#include "belt/subtasks.hpp"
#include "belt/tdc.hpp"

namespace belt {

// Tree of policy-rollout edges. Node 0 is the root; every other node has
// exactly one parent edge, and cost-to-come accumulates edge horizons.
struct PlanTree {
  struct Node {
    State state;
    int cost_to_come = 0;
    int parent_edge = -1;  // -1 for the root
    bool success = false;  // Success over the root-to-here trajectory
  };
  struct Edge {
    int parent_node = -1;
    int child_node = -1;
    Task task;
    int horizon = 0;
    std::vector<State> trajectory;  // starts at parent state, ends at child state
    bool success = false;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;

  static PlanTree with_root(const State& x_init);
  // Throws std::logic_error when any tree invariant is broken.
  void validate() const;
  // Stored states of the root-to-node path (edge endpoints deduplicated).
  std::vector<State> path_states(int node_id) const;
};

enum class BiasMode : int { Tdc = 0, Random = 1, L2 = 2 };
std::string bias_mode_name(BiasMode mode);
BiasMode bias_mode_from_name(const std::string& name);

struct SearchConfig {
  int num_samples = 2500;
  std::vector<int> horizons{32, 64, 96};
  int d_cutoff = 64;  // steps; must be a temporal-distance bin boundary
  BiasMode bias = BiasMode::Tdc;
  ModelKind model = ModelKind::Simulator;
  uint64_t seed = 0;
  bool record_iterations = false;

  void validate() const;
};

struct IterationRecord {
  int iteration;
  uint64_t goal_digest;
  int expanded_node;
  int horizon;
  bool success;
};

struct SearchResult {
  bool solved = false;
  std::vector<State> trajectory;  // concatenated root-to-leaf states when solved
  std::vector<Task> tasks;        // per-edge goals along the solution
  std::vector<int> horizons;      // per-edge horizons along the solution
  int cost = 0;                   // timesteps (cost-to-come of the solution leaf)
  int node_count = 0;
  std::vector<IterationRecord> log;
};

struct SearchDeps {
  const DemoDataset* dataset = nullptr;
  const TemporalDistanceClassifier* tdc = nullptr;  // may be null for non-TDC bias
  const DynamicsModel* model = nullptr;
  PolicyConfig policy;
  EnvConfig env;
};

// TDC-biased node selection: among nodes whose predicted bin to the sample
// is strictly below the cutoff bin, the lowest cost-to-come wins (ties to
// the smallest id). With no candidates, the node with the smallest predicted
// bin (ties: cost-to-come, then id).
int select_expand_node(const PlanTree& tree, const Task& sample,
                       const TemporalDistanceClassifier& tdc, int d_cutoff,
                       const EnvConfig& ec);
// Same rule over precomputed bins (used by the batched search loop and by
// brute-force checks in tests).
int select_expand_node_from_bins(const PlanTree& tree, const std::vector<int>& bins,
                                 int cutoff_bin);

// Grow the tree by one policy-rollout edge; returns the new edge id.
int expand(PlanTree& tree, int node_id, const Task& task, int horizon,
           const DynamicsModel& model, const PolicyConfig& pc, const EnvConfig& ec,
           RandomStream& rng, const SuccessDetector& detector);

// Algorithm: for exactly N iterations, sample a task, pick an expansion node
// (Voronoi-style bias via temporal distance), roll the policy out under the
// model, and record Success over the root-to-new-node state sequence. The
// minimum-cost successful node is returned after all iterations.
SearchResult search(const State& x_init, const SuccessDetector& detector,
                    const SearchDeps& deps, const SearchConfig& config);

// Ground-truth re-execution of a plan's task sequence through the exact
// simulator with the stochastic policy.
std::vector<State> replay_plan(const State& x_init, const std::vector<Task>& tasks,
                               const std::vector<int>& horizons, const PolicyConfig& pc,
                               const EnvConfig& ec, RandomStream& rng);

uint64_t state_digest(const State& s, const EnvConfig& ec);

}  // namespace belt
