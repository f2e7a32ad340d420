#include "belt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace belt {

void CemConfig::validate() const {
  if (elite_fraction <= 0.0 || elite_fraction >= 1.0)
    throw std::invalid_argument("CemConfig: elite fraction must lie in (0, 1)");
  if (population < 1 || iterations < 1 || sequence_length < 1 || goal_pool < 1)
    throw std::invalid_argument("CemConfig: counts must be positive");
}

SearchResult cem_plan(const State& x_init, const SuccessDetector& detector,
                      const SearchDeps& deps, const CemConfig& config) {
  config.validate();
  if (!deps.dataset || deps.dataset->num_states() == 0)
    throw std::invalid_argument("cem_plan: empty goal pool source");

  RandomStream rng(config.seed);
  const EnvConfig& ec = deps.env;

  std::vector<Task> pool;
  pool.reserve(config.goal_pool);
  for (int i = 0; i < config.goal_pool; ++i) pool.push_back(sample_task(*deps.dataset, rng));

  const int L = config.sequence_length;
  std::vector<std::vector<double>> dist(L, std::vector<double>(pool.size(), 1.0 / pool.size()));

  auto sample_slot = [&](const std::vector<double>& d) {
    double u = rng.uniform();
    double acc = 0.0;
    for (size_t k = 0; k < d.size(); ++k) {
      acc += d[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(d.size()) - 1;
  };

  struct Candidate {
    std::vector<int> picks;
    int progress = 0;
    bool success = false;
    std::vector<State> trajectory;
  };

  Candidate best;
  bool have_best = false;
  int evaluated = 0;

  for (int it = 0; it < config.iterations; ++it) {
    std::vector<Candidate> population(config.population);
    for (Candidate& cand : population) {
      cand.picks.resize(L);
      for (int s = 0; s < L; ++s) cand.picks[s] = sample_slot(dist[s]);

      cand.trajectory.push_back(x_init);
      ChainMatcher matcher = detector.matcher();
      matcher.advance(x_init);
      State s = x_init;
      for (int e = 0; e < L; ++e) {
        std::vector<State> edge = rollout(*deps.model, s, pool[cand.picks[e]],
                                          config.edge_horizon, deps.policy, ec, rng);
        for (size_t k = 1; k < edge.size(); ++k) {
          matcher.advance(edge[k]);
          cand.trajectory.push_back(edge[k]);
        }
        s = edge.back();
      }
      cand.progress = matcher.progress();
      cand.success = matcher.done();
      ++evaluated;
    }

    // Elites: successful sequences when any exist, otherwise the top
    // fraction by matcher progress.
    std::vector<int> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (population[a].success != population[b].success) return population[a].success;
      return population[a].progress > population[b].progress;
    });
    int num_elite = 0;
    for (const Candidate& cand : population)
      if (cand.success) ++num_elite;
    if (num_elite == 0)
      num_elite = std::max(1, static_cast<int>(std::round(config.population *
                                                          config.elite_fraction)));

    for (int s = 0; s < L; ++s) {
      std::vector<double> counts(pool.size(), config.smoothing);
      for (int e = 0; e < num_elite; ++e) counts[population[order[e]].picks[s]] += 1.0;
      double total = std::accumulate(counts.begin(), counts.end(), 0.0);
      for (size_t k = 0; k < counts.size(); ++k) dist[s][k] = counts[k] / total;
    }

    const Candidate& top = population[order[0]];
    if (!have_best || std::make_pair(top.success, top.progress) >
                          std::make_pair(best.success, best.progress)) {
      best = top;
      have_best = true;
    }
  }

  SearchResult result;
  result.node_count = evaluated;
  result.solved = best.success;
  result.cost = L * config.edge_horizon;
  result.trajectory = best.trajectory;
  for (int s = 0; s < L; ++s) {
    result.tasks.push_back(pool[best.picks[s]]);
    result.horizons.push_back(config.edge_horizon);
  }
  if (!result.solved) result.trajectory.clear();
  return result;
}

bool satisfies_all_postconditions(const State& cand, const ChainSpec& chain,
                                  const State& x_init, const EnvConfig& ec) {
  double net_rotation = 0.0;
  for (SubtaskId id : chain.subtasks) {
    switch (id) {
      case SubtaskId::OpenDrawer:
        if (cand.drawer_ext < ec.open_threshold) return false;
        break;
      case SubtaskId::CloseDrawer:
        if (cand.drawer_ext > ec.closed_threshold) return false;
        break;
      case SubtaskId::OpenSlider:
        if (cand.slider_pos < ec.open_threshold) return false;
        break;
      case SubtaskId::CloseSlider:
        if (cand.slider_pos > ec.closed_threshold) return false;
        break;
      case SubtaskId::Grasp:
        if (cand.block_zone != Zone::Held) return false;
        break;
      case SubtaskId::PlaceOnTable:
      case SubtaskId::PullFromShelf:
        if (cand.block_zone != Zone::Table) return false;
        break;
      case SubtaskId::RotateLeft: net_rotation -= kRotateTarget; break;
      case SubtaskId::RotateRight: net_rotation += kRotateTarget; break;
      case SubtaskId::PushButtonR:
      case SubtaskId::PushButtonG:
      case SubtaskId::PushButtonB:
        return false;  // transient: no persistent goal state exists
      case SubtaskId::PutIntoShelf:
        if (cand.block_zone != Zone::Shelf) return false;
        break;
      case SubtaskId::SweepIntoDrawer:
        if (cand.block_zone != Zone::Drawer) return false;
        break;
    }
  }
  if (std::abs(angle_diff(cand.block_angle, wrap_angle(x_init.block_angle + net_rotation))) >
      kRotateTolerance)
    return false;
  return true;
}

SingleGoalOutcome single_goal_baseline(const State& x_init, const ChainSpec& chain,
                                       const DemoDataset& dataset, const PolicyConfig& pc,
                                       const EnvConfig& ec, int horizon, RandomStream& rng) {
  SingleGoalOutcome out;
  if (chain.contains_button()) return out;

  // Zone postconditions may contradict each other (e.g. grasp then place);
  // the scan simply finds nothing in that case.
  bool nontrivial = false;
  for (SubtaskId id : chain.subtasks)
    if (id != SubtaskId::RotateLeft && id != SubtaskId::RotateRight) nontrivial = true;
  (void)nontrivial;

  for (const auto& r : dataset.rollouts) {
    for (const State& s : r.states) {
      if (satisfies_all_postconditions(s, chain, x_init, ec)) {
        out.applicable = true;
        out.goal = Task{s};
        break;
      }
    }
    if (out.applicable) break;
  }
  if (!out.applicable) return out;

  DemoRollout run = run_policy(x_init, out.goal, pc, ec, horizon, rng);
  out.trajectory = std::move(run.states);
  SuccessDetector detector{chain, ec};
  out.success = detect(detector, out.trajectory);
  return out;
}

OracleOutcome chain_oracle(const State& x_init, const ChainSpec& chain, const PolicyConfig& pc,
                           const EnvConfig& ec, int per_subtask_horizon, RandomStream& rng) {
  OracleOutcome out;
  out.trajectory.push_back(x_init);
  State s = x_init;
  for (SubtaskId id : chain.subtasks) {
    Task stage{subtask_goal(id, s, ec, rng)};
    for (int k = 0; k < per_subtask_horizon; ++k) {
      s = step(s, policy_step(s, stage, pc, ec, rng), ec);
      out.trajectory.push_back(s);
      if (goal_achieved(s, stage.goal, pc, ec)) break;
    }
  }
  SuccessDetector detector{chain, ec};
  out.success = detect(detector, out.trajectory);
  return out;
}

}  // namespace belt
