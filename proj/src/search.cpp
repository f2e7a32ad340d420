#include "belt/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace belt {

PlanTree PlanTree::with_root(const State& x_init) {
  PlanTree tree;
  Node root;
  root.state = x_init;
  tree.nodes.push_back(root);
  return tree;
}

void PlanTree::validate() const {
  if (nodes.empty()) throw std::logic_error("PlanTree: no root");
  if (nodes[0].parent_edge != -1) throw std::logic_error("PlanTree: root has a parent");
  if (nodes[0].cost_to_come != 0) throw std::logic_error("PlanTree: root cost != 0");
  for (size_t i = 1; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (n.parent_edge < 0 || n.parent_edge >= static_cast<int>(edges.size()))
      throw std::logic_error("PlanTree: bad parent edge");
    const Edge& e = edges[n.parent_edge];
    if (e.child_node != static_cast<int>(i)) throw std::logic_error("PlanTree: edge/child mismatch");
    if (e.parent_node < 0 || e.parent_node >= static_cast<int>(i))
      throw std::logic_error("PlanTree: parent must precede child");
    if (n.cost_to_come != nodes[e.parent_node].cost_to_come + e.horizon)
      throw std::logic_error("PlanTree: cost bookkeeping broken");
    if (e.trajectory.empty() || !(e.trajectory.front() == nodes[e.parent_node].state) ||
        !(e.trajectory.back() == n.state))
      throw std::logic_error("PlanTree: edge trajectory endpoints mismatch");
  }
}

std::vector<State> PlanTree::path_states(int node_id) const {
  std::vector<const Edge*> chain;
  for (int id = node_id; nodes[id].parent_edge != -1;) {
    const Edge& e = edges[nodes[id].parent_edge];
    chain.push_back(&e);
    id = e.parent_node;
  }
  std::vector<State> out;
  out.push_back(nodes[0].state);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    out.insert(out.end(), (*it)->trajectory.begin() + 1, (*it)->trajectory.end());
  return out;
}

std::string bias_mode_name(BiasMode mode) {
  switch (mode) {
    case BiasMode::Tdc: return "tdc";
    case BiasMode::Random: return "random";
    case BiasMode::L2: return "l2";
  }
  return "?";
}

BiasMode bias_mode_from_name(const std::string& name) {
  if (name == "tdc") return BiasMode::Tdc;
  if (name == "random") return BiasMode::Random;
  if (name == "l2") return BiasMode::L2;
  throw std::invalid_argument("unknown bias mode: " + name);
}

void SearchConfig::validate() const {
  if (num_samples < 1) throw std::invalid_argument("SearchConfig: num_samples must be >= 1");
  if (horizons.empty()) throw std::invalid_argument("SearchConfig: horizons must be non-empty");
  TdcBins::cutoff_bin(d_cutoff);  // throws unless a bin boundary
}

int select_expand_node_from_bins(const PlanTree& tree, const std::vector<int>& bins,
                                 int cutoff_bin) {
  int best = -1;
  int best_cost = std::numeric_limits<int>::max();
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (bins[i] < cutoff_bin && tree.nodes[i].cost_to_come < best_cost) {
      best = static_cast<int>(i);
      best_cost = tree.nodes[i].cost_to_come;
    }
  }
  if (best >= 0) return best;
  int best_bin = std::numeric_limits<int>::max();
  best_cost = std::numeric_limits<int>::max();
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (bins[i] < best_bin ||
        (bins[i] == best_bin && tree.nodes[i].cost_to_come < best_cost)) {
      best = static_cast<int>(i);
      best_bin = bins[i];
      best_cost = tree.nodes[i].cost_to_come;
    }
  }
  return best;
}

int select_expand_node(const PlanTree& tree, const Task& sample,
                       const TemporalDistanceClassifier& tdc, int d_cutoff,
                       const EnvConfig& ec) {
  if (tree.nodes.empty()) throw std::invalid_argument("select_expand_node: empty tree");
  std::vector<int> bins(tree.nodes.size());
  for (size_t i = 0; i < tree.nodes.size(); ++i)
    bins[i] = predict_bin(tdc, tree.nodes[i].state, sample.goal, ec).bin;
  return select_expand_node_from_bins(tree, bins, TdcBins::cutoff_bin(d_cutoff));
}

int expand(PlanTree& tree, int node_id, const Task& task, int horizon,
           const DynamicsModel& model, const PolicyConfig& pc, const EnvConfig& ec,
           RandomStream& rng, const SuccessDetector& detector) {
  std::vector<State> traj =
      rollout(model, tree.nodes[node_id].state, task, horizon, pc, ec, rng);

  PlanTree::Edge edge;
  edge.parent_node = node_id;
  edge.child_node = static_cast<int>(tree.nodes.size());
  edge.task = task;
  edge.horizon = horizon;
  edge.trajectory = std::move(traj);

  // Success over the concatenated root-to-new-node sequence.
  std::vector<State> path = tree.path_states(node_id);
  ChainMatcher matcher = detector.matcher();
  for (const State& s : path) matcher.advance(s);
  for (size_t i = 1; i < edge.trajectory.size(); ++i) matcher.advance(edge.trajectory[i]);
  edge.success = matcher.done();

  PlanTree::Node node;
  node.state = edge.trajectory.back();
  node.cost_to_come = tree.nodes[node_id].cost_to_come + horizon;
  node.parent_edge = static_cast<int>(tree.edges.size());
  node.success = edge.success;

  tree.edges.push_back(std::move(edge));
  tree.nodes.push_back(std::move(node));
  return static_cast<int>(tree.edges.size()) - 1;
}

uint64_t state_digest(const State& s, const EnvConfig& ec) {
  FeatureVector v = observe(s, ec);
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (size_t i = 0; i < sizeof(double) * v.size(); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

SearchResult search(const State& x_init, const SuccessDetector& detector,
                    const SearchDeps& deps, const SearchConfig& config) {
  config.validate();
  if (!deps.dataset) throw std::invalid_argument("search: missing demo dataset");
  if (!deps.model) throw std::invalid_argument("search: missing dynamics model");
  if (config.bias == BiasMode::Tdc && !deps.tdc)
    throw std::invalid_argument("search: TDC bias requires a trained classifier");

  const EnvConfig& ec = deps.env;
  const int cutoff_bin = TdcBins::cutoff_bin(config.d_cutoff);
  RandomStream rng(config.seed);

  PlanTree tree = PlanTree::with_root(x_init);

  // Per-node incremental caches: success matchers (cloned down the tree so
  // each expansion only scans its new edge) and observation features. The
  // bare root is never a solution candidate; success is evaluated on the
  // trajectories the iterations add.
  std::vector<ChainMatcher> matchers;
  {
    ChainMatcher root = detector.matcher();
    root.advance(x_init);
    matchers.push_back(std::move(root));
  }

  std::optional<TdcBatch> batch;
  if (config.bias == BiasMode::Tdc)
    batch.emplace(*deps.tdc, config.num_samples + 1);
  std::vector<Vector> node_obs;
  node_obs.push_back(observe_f(x_init, ec));
  if (batch) batch->add_node(node_obs[0]);

  SearchResult result;
  if (config.record_iterations) result.log.reserve(config.num_samples);
  std::vector<int> bins;

  for (int iter = 0; iter < config.num_samples; ++iter) {
    Task task = sample_task(*deps.dataset, rng);
    Vector goal_obs = observe_f(task.goal, ec);

    int expand_id = 0;
    switch (config.bias) {
      case BiasMode::Tdc:
        batch->predict_bins(goal_obs, bins);
        expand_id = select_expand_node_from_bins(tree, bins, cutoff_bin);
        break;
      case BiasMode::Random:
        expand_id = static_cast<int>(rng.index(tree.nodes.size()));
        break;
      case BiasMode::L2: {
        float best = std::numeric_limits<float>::max();
        for (size_t i = 0; i < node_obs.size(); ++i) {
          float d = (node_obs[i] - goal_obs).squaredNorm();
          if (d < best) {
            best = d;
            expand_id = static_cast<int>(i);
          }
        }
        break;
      }
    }

    const int horizon = config.horizons[rng.index(config.horizons.size())];
    std::vector<State> traj =
        rollout(*deps.model, tree.nodes[expand_id].state, task, horizon, deps.policy, ec, rng);

    PlanTree::Edge edge;
    edge.parent_node = expand_id;
    edge.child_node = static_cast<int>(tree.nodes.size());
    edge.task = task;
    edge.horizon = horizon;
    edge.trajectory = std::move(traj);

    ChainMatcher matcher = matchers[expand_id];
    for (size_t i = 1; i < edge.trajectory.size(); ++i) matcher.advance(edge.trajectory[i]);

    PlanTree::Node node;
    node.state = edge.trajectory.back();
    node.cost_to_come = tree.nodes[expand_id].cost_to_come + horizon;
    node.parent_edge = static_cast<int>(tree.edges.size());
    node.success = matcher.done();
    edge.success = node.success;

    node_obs.push_back(observe_f(node.state, ec));
    if (batch) batch->add_node(node_obs.back());
    matchers.push_back(std::move(matcher));
    tree.edges.push_back(std::move(edge));
    tree.nodes.push_back(std::move(node));

    if (config.record_iterations)
      result.log.push_back({iter, state_digest(task.goal, ec), expand_id, horizon,
                            tree.nodes.back().success});
  }

  result.node_count = static_cast<int>(tree.nodes.size());

  int best = -1;
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!tree.nodes[i].success) continue;
    if (best < 0 || tree.nodes[i].cost_to_come < tree.nodes[best].cost_to_come)
      best = static_cast<int>(i);
  }
  if (best >= 0) {
    result.solved = true;
    result.cost = tree.nodes[best].cost_to_come;
    result.trajectory = tree.path_states(best);
    for (int id = best; tree.nodes[id].parent_edge != -1;) {
      const PlanTree::Edge& e = tree.edges[tree.nodes[id].parent_edge];
      result.tasks.push_back(e.task);
      result.horizons.push_back(e.horizon);
      id = e.parent_node;
    }
    std::reverse(result.tasks.begin(), result.tasks.end());
    std::reverse(result.horizons.begin(), result.horizons.end());
  }
  return result;
}

std::vector<State> replay_plan(const State& x_init, const std::vector<Task>& tasks,
                               const std::vector<int>& horizons, const PolicyConfig& pc,
                               const EnvConfig& ec, RandomStream& rng) {
  std::vector<State> traj{x_init};
  State s = x_init;
  for (size_t e = 0; e < tasks.size(); ++e) {
    for (int k = 0; k < horizons[e]; ++k) {
      s = step(s, policy_step(s, tasks[e], pc, ec, rng), ec);
      traj.push_back(s);
    }
  }
  return traj;
}

}  // namespace belt
