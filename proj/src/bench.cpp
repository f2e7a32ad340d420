#include "belt/bench.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace belt {

namespace fs = std::filesystem;

std::string PlannerSpec::algo_name() const {
  switch (algo) {
    case Planner::Belt: return "belt";
    case Planner::Cem: return "cem";
    case Planner::Oracle: return "oracle";
    case Planner::SingleGoal: return "single_goal";
  }
  return "?";
}

std::string PlannerSpec::model_name() const {
  return has_model ? model_kind_name(model) : "-";
}

std::string PlannerSpec::name() const {
  return has_model ? algo_name() + ":" + model_name() : algo_name();
}

PlannerSpec PlannerSpec::parse(const std::string& text) {
  PlannerSpec spec;
  auto colon = text.find(':');
  std::string algo = text.substr(0, colon);
  if (algo == "belt") spec.algo = Planner::Belt;
  else if (algo == "cem") spec.algo = Planner::Cem;
  else if (algo == "oracle") spec.algo = Planner::Oracle, spec.has_model = false;
  else if (algo == "single_goal") spec.algo = Planner::SingleGoal, spec.has_model = false;
  else throw std::invalid_argument("unknown planner: " + text);
  if (spec.has_model) {
    if (colon == std::string::npos)
      throw std::invalid_argument("planner needs a model kind: " + text);
    spec.model = model_kind_from_name(text.substr(colon + 1));
  }
  return spec;
}

void ExperimentConfig::validate() const {
  env.validate();
  policy.validate();
  search.validate();
  cem.validate();
  if (replays < 1) throw std::invalid_argument("ExperimentConfig: replays must be >= 1");
  if (seeds < 1) throw std::invalid_argument("ExperimentConfig: seeds must be >= 1");
  if (demo_rollouts < 1) throw std::invalid_argument("ExperimentConfig: demo_rollouts >= 1");
  for (const std::string& p : planners) PlannerSpec::parse(p);
  for (int cutoff : bias_cutoffs) TdcBins::cutoff_bin(cutoff);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["env"] = env_to_json(c.env);
  j["policy"] = policy_to_json(c.policy);
  j["demos"] = {{"rollouts", c.demo_rollouts}, {"horizon", c.demo_horizon}};
  j["models"] = {{"hidden", c.models.hidden},
                 {"epochs", c.models.epochs},
                 {"task_epochs", c.models.task_epochs},
                 {"batch_size", c.models.batch_size},
                 {"learning_rate", c.models.learning_rate},
                 {"holdout_rollouts", c.models.holdout_rollouts},
                 {"sample_stride", c.models.sample_stride},
                 {"horizons", c.models.horizons},
                 {"seed", c.models.seed}};
  j["tdc"] = {{"hidden", c.tdc.hidden},
              {"epochs", c.tdc.epochs},
              {"batch_size", c.tdc.batch_size},
              {"learning_rate", c.tdc.learning_rate},
              {"holdout_fraction", c.tdc.holdout_fraction},
              {"pairs_per_rollout", c.tdc.pairs_per_rollout},
              {"max_cross_pairs", c.tdc.max_cross_pairs},
              {"seed", c.tdc.seed}};
  j["search"] = {{"num_samples", c.search.num_samples},
                 {"horizons", c.search.horizons},
                 {"d_cutoff", c.search.d_cutoff},
                 {"bias", bias_mode_name(c.search.bias)}};
  j["cem"] = {{"population", c.cem.population},
              {"elite_fraction", c.cem.elite_fraction},
              {"iterations", c.cem.iterations},
              {"sequence_length", c.cem.sequence_length},
              {"goal_pool", c.cem.goal_pool},
              {"edge_horizon", c.cem.edge_horizon},
              {"smoothing", c.cem.smoothing}};
  j["suite"] = {{"chains", c.suite_chains},
                {"planners", c.planners},
                {"replays", c.replays},
                {"seeds", c.seeds},
                {"single_goal_horizon", c.single_goal_horizon},
                {"oracle_horizon", c.oracle_horizon}};
  j["bias_sweep"] = {{"chains", c.bias_chains}, {"cutoffs", c.bias_cutoffs}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

namespace {
template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("env")) c.env = env_from_json(j["env"]);
  if (j.contains("policy")) c.policy = policy_from_json(j["policy"]);
  if (j.contains("demos")) {
    maybe(j["demos"], "rollouts", c.demo_rollouts);
    maybe(j["demos"], "horizon", c.demo_horizon);
  }
  if (j.contains("models")) {
    const auto& m = j["models"];
    maybe(m, "hidden", c.models.hidden);
    maybe(m, "epochs", c.models.epochs);
    maybe(m, "task_epochs", c.models.task_epochs);
    maybe(m, "batch_size", c.models.batch_size);
    maybe(m, "learning_rate", c.models.learning_rate);
    maybe(m, "holdout_rollouts", c.models.holdout_rollouts);
    maybe(m, "sample_stride", c.models.sample_stride);
    maybe(m, "horizons", c.models.horizons);
    maybe(m, "seed", c.models.seed);
  }
  if (j.contains("tdc")) {
    const auto& t = j["tdc"];
    maybe(t, "hidden", c.tdc.hidden);
    maybe(t, "epochs", c.tdc.epochs);
    maybe(t, "batch_size", c.tdc.batch_size);
    maybe(t, "learning_rate", c.tdc.learning_rate);
    maybe(t, "holdout_fraction", c.tdc.holdout_fraction);
    maybe(t, "pairs_per_rollout", c.tdc.pairs_per_rollout);
    maybe(t, "max_cross_pairs", c.tdc.max_cross_pairs);
    maybe(t, "seed", c.tdc.seed);
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    maybe(s, "num_samples", c.search.num_samples);
    maybe(s, "horizons", c.search.horizons);
    maybe(s, "d_cutoff", c.search.d_cutoff);
    if (s.contains("bias")) c.search.bias = bias_mode_from_name(s["bias"]);
  }
  if (j.contains("cem")) {
    const auto& m = j["cem"];
    maybe(m, "population", c.cem.population);
    maybe(m, "elite_fraction", c.cem.elite_fraction);
    maybe(m, "iterations", c.cem.iterations);
    maybe(m, "sequence_length", c.cem.sequence_length);
    maybe(m, "goal_pool", c.cem.goal_pool);
    maybe(m, "edge_horizon", c.cem.edge_horizon);
    maybe(m, "smoothing", c.cem.smoothing);
  }
  if (j.contains("suite")) {
    const auto& s = j["suite"];
    maybe(s, "chains", c.suite_chains);
    maybe(s, "planners", c.planners);
    maybe(s, "replays", c.replays);
    maybe(s, "seeds", c.seeds);
    maybe(s, "single_goal_horizon", c.single_goal_horizon);
    maybe(s, "oracle_horizon", c.oracle_horizon);
  }
  if (j.contains("bias_sweep")) {
    maybe(j["bias_sweep"], "chains", c.bias_chains);
    maybe(j["bias_sweep"], "cutoffs", c.bias_cutoffs);
  }
  maybe(j, "seed", c.seed);
  maybe(j, "out_dir", c.out_dir);
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  return config_from_json(nlohmann::json::parse(read_text_file(path)));
}

DemoDataset build_demos(const ExperimentConfig& c) {
  return generate_demos(c.env, c.policy, c.demo_rollouts, c.demo_horizon, c.seed);
}

Artifacts build_artifacts(const ExperimentConfig& c) {
  Artifacts a;
  if (c.verbose) std::cerr << "[belt] generating " << c.demo_rollouts << " demos\n";
  a.dataset = build_demos(c);
  a.simulator.kind = ModelKind::Simulator;
  if (c.verbose) std::cerr << "[belt] training action model\n";
  a.action_model = train_action_model(a.dataset, c.env, c.models);
  if (c.verbose) std::cerr << "[belt] training task models\n";
  a.task_model = train_task_model(a.dataset, c.env, c.models);
  if (c.verbose) std::cerr << "[belt] training temporal distance classifier\n";
  RandomStream rng(RandomStream(c.seed).derive(101).seed());
  TdcPairs pairs =
      make_tdc_pairs(a.dataset, c.env, c.tdc.pairs_per_rollout, c.tdc.max_cross_pairs, rng);
  a.tdc = train_tdc(pairs, c.tdc, &a.tdc_eval);
  if (c.verbose)
    std::cerr << "[belt] tdc holdout accuracy exact=" << a.tdc_eval.accuracy_exact
              << " within_one=" << a.tdc_eval.accuracy_within_one << "\n";
  return a;
}

void save_artifacts(const Artifacts& a, const std::string& dir) {
  ensure_dir(dir);
  save_demos_file(a.dataset, dir + "/demos.txt");
  save_model(a.action_model, dir);
  save_model(a.task_model, dir);
  save_tdc(a.tdc, dir + "/tdc.net");

  Csv conf({"true_bin", "predicted_bin", "count"});
  for (int t = 0; t < TdcBins::K; ++t)
    for (int p = 0; p < TdcBins::K; ++p)
      conf.row({std::to_string(t), std::to_string(p),
                std::to_string(a.tdc_eval.confusion[t][p])});
  conf.write_file(dir + "/tdc_confusion.csv");

  auto report_csv = [&](const TrainReport& r, const std::string& path) {
    Csv csv({"epoch", "train_loss", "holdout_loss", "holdout_accuracy"});
    for (const EpochMetrics& e : r.epochs)
      csv.row({std::to_string(e.epoch), fmt(e.train_loss), fmt(e.holdout_loss),
               fmt(e.holdout_accuracy)});
    csv.write_file(path);
  };
  for (const auto& [name, report] : a.action_model.reports)
    report_csv(report, dir + "/metrics_" + name + ".csv");
  for (const auto& [name, report] : a.task_model.reports)
    report_csv(report, dir + "/metrics_" + name + ".csv");
}

Artifacts load_artifacts(const ExperimentConfig& c, const std::string& dir) {
  Artifacts a;
  std::string demos = dir + "/demos.txt";
  if (!fs::exists(demos))
    throw std::runtime_error("missing " + demos + " - run `belt gen-demos` first");
  a.dataset = load_demos_file(demos);
  a.simulator.kind = ModelKind::Simulator;
  a.action_model = load_model(ModelKind::ActionModel, dir);
  a.task_model = load_model(ModelKind::TaskModel, dir);
  std::string tdc = dir + "/tdc.net";
  if (!fs::exists(tdc))
    throw std::runtime_error("missing " + tdc + " - run `belt train-tdc` first");
  a.tdc = load_tdc(tdc);
  return a;
}

std::vector<ChainSpec> make_suite(const ExperimentConfig& c) {
  std::vector<ChainSpec> all = generate_chains(4);
  RandomStream rng(RandomStream(c.seed).derive(7001).seed());
  rng.shuffle(all);
  if (static_cast<int>(all.size()) > c.suite_chains) all.resize(c.suite_chains);
  return all;
}

SuiteReport::SuiteReport()
    : results_csv({"chain_id", "chain", "planner", "model", "seed", "solution_found",
                   "success_rate", "feasible", "cost", "wall_time_s"}),
      summary_csv({"planner", "model", "records", "solution_found_rate",
                   "success_rate_chain_mean", "success_rate_pooled", "feasible_rate",
                   "mean_cost_solved"}),
      tasks_csv({"task", "chains", "sim_solution_found", "task_solution_found",
                 "solution_ratio", "sim_feasible", "task_feasible", "feasible_ratio"}) {}

namespace {

struct PlanOutcome {
  bool solution_found = false;
  std::vector<Task> tasks;
  std::vector<int> horizons;
  int cost = 0;
  Task single_goal;  // single-goal planner only
};

SearchDeps make_deps(const ExperimentConfig& c, const Artifacts& a, ModelKind kind) {
  SearchDeps deps;
  deps.dataset = &a.dataset;
  deps.tdc = &a.tdc;
  deps.policy = c.policy;
  deps.env = c.env;
  switch (kind) {
    case ModelKind::Simulator: deps.model = &a.simulator; break;
    case ModelKind::ActionModel: deps.model = &a.action_model; break;
    case ModelKind::TaskModel: deps.model = &a.task_model; break;
  }
  return deps;
}

}  // namespace

SuiteReport run_suite(const ExperimentConfig& c, const Artifacts& a,
                      const std::vector<ChainSpec>& chains) {
  c.validate();
  SuiteReport report;
  RandomStream master(c.seed);

  std::vector<PlannerSpec> specs;
  for (const std::string& p : c.planners) specs.push_back(PlannerSpec::parse(p));

  const State x_init = canonical_init(c.env);

  for (int chain_id = 0; chain_id < static_cast<int>(chains.size()); ++chain_id) {
    const ChainSpec& chain = chains[chain_id];
    const SuccessDetector detector{chain, c.env};
    if (c.verbose)
      std::cerr << "[belt] chain " << chain_id + 1 << "/" << chains.size() << " "
                << chain.to_string() << "\n";

    for (int planner_id = 0; planner_id < static_cast<int>(specs.size()); ++planner_id) {
      const PlannerSpec& spec = specs[planner_id];
      for (int seed_idx = 0; seed_idx < c.seeds; ++seed_idx) {
        RandomStream task_rng = master.derive(chain_id, planner_id, seed_idx);
        auto t0 = std::chrono::steady_clock::now();

        PlanOutcome plan;
        switch (spec.algo) {
          case Planner::Belt: {
            SearchConfig sc = c.search;
            sc.model = spec.model;
            sc.seed = task_rng.derive(1).seed();
            SearchResult r = search(x_init, detector, make_deps(c, a, spec.model), sc);
            plan.solution_found = r.solved;
            plan.tasks = std::move(r.tasks);
            plan.horizons = std::move(r.horizons);
            plan.cost = r.cost;
            break;
          }
          case Planner::Cem: {
            CemConfig cc = c.cem;
            cc.model = spec.model;
            cc.seed = task_rng.derive(1).seed();
            SearchResult r = cem_plan(x_init, detector, make_deps(c, a, spec.model), cc);
            plan.solution_found = r.solved;
            plan.tasks = std::move(r.tasks);
            plan.horizons = std::move(r.horizons);
            plan.cost = r.solved ? r.cost : 0;
            break;
          }
          case Planner::Oracle:
            plan.solution_found = true;
            plan.cost = static_cast<int>(chain.subtasks.size()) * c.oracle_horizon;
            break;
          case Planner::SingleGoal: {
            RandomStream rng = task_rng.derive(1);
            SingleGoalOutcome out = single_goal_baseline(
                x_init, chain, a.dataset, c.policy, c.env, c.single_goal_horizon, rng);
            plan.solution_found = out.applicable;
            plan.single_goal = out.goal;
            plan.cost = out.applicable ? c.single_goal_horizon : 0;
            break;
          }
        }

        int successes = 0;
        if (plan.solution_found) {
          for (int replay = 0; replay < c.replays; ++replay) {
            RandomStream rng = task_rng.derive(100 + replay);
            bool ok = false;
            switch (spec.algo) {
              case Planner::Belt:
              case Planner::Cem: {
                std::vector<State> traj =
                    replay_plan(x_init, plan.tasks, plan.horizons, c.policy, c.env, rng);
                ok = detect(detector, traj);
                break;
              }
              case Planner::Oracle:
                ok = chain_oracle(x_init, chain, c.policy, c.env, c.oracle_horizon, rng)
                         .success;
                break;
              case Planner::SingleGoal: {
                DemoRollout run = run_policy(x_init, plan.single_goal, c.policy, c.env,
                                             c.single_goal_horizon, rng);
                ok = detect(detector, run.states);
                break;
              }
            }
            if (ok) ++successes;
          }
        }

        auto t1 = std::chrono::steady_clock::now();
        MetricsRecord rec;
        rec.chain_id = chain_id;
        rec.chain = chain.to_string();
        rec.planner = spec.algo_name();
        rec.model = spec.model_name();
        rec.seed_index = seed_idx;
        rec.solution_found = plan.solution_found;
        rec.success_rate =
            plan.solution_found ? static_cast<double>(successes) / c.replays : 0.0;
        rec.feasible = successes > 0;
        rec.cost = plan.cost;
        rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
        report.records.push_back(std::move(rec));
      }
    }
  }

  for (const MetricsRecord& r : report.records) {
    report.results_csv.row({std::to_string(r.chain_id), r.chain, r.planner, r.model,
                            std::to_string(r.seed_index), r.solution_found ? "1" : "0",
                            fmt(r.success_rate), r.feasible ? "1" : "0",
                            std::to_string(r.cost), fmt(r.wall_time_s, 3)});
  }

  // Summary rows in the configured planner order.
  for (const PlannerSpec& spec : specs) {
    long n = 0, found = 0, feasible = 0, cost_sum = 0;
    double rate_sum = 0.0;
    long replay_ok = 0, replay_total = 0;
    for (const MetricsRecord& r : report.records) {
      if (r.planner != spec.algo_name() || r.model != spec.model_name()) continue;
      ++n;
      if (!r.solution_found) continue;
      ++found;
      rate_sum += r.success_rate;
      replay_ok += static_cast<long>(std::lround(r.success_rate * c.replays));
      replay_total += c.replays;
      cost_sum += r.cost;
      if (r.feasible) ++feasible;
    }
    report.summary_csv.row(
        {spec.algo_name(), spec.model_name(), std::to_string(n),
         fmt(n ? static_cast<double>(found) / n : 0.0),
         fmt(found ? rate_sum / found : 0.0),
         fmt(replay_total ? static_cast<double>(replay_ok) / replay_total : 0.0),
         fmt(found ? static_cast<double>(feasible) / found : 0.0),
         fmt(found ? static_cast<double>(cost_sum) / found : 0.0)});
  }

  // Table-style per-subtask breakdown for the two tree planners.
  auto group_rates = [&](auto&& contains) {
    struct Rates {
      double sim_found = 0, task_found = 0, sim_feas = 0, task_feas = 0;
      long n_sim = 0, n_task = 0;
    } rates;
    for (const MetricsRecord& r : report.records) {
      if (r.planner != "belt") continue;
      int chain_id = r.chain_id;
      if (!contains(chains[chain_id])) continue;
      if (r.model == "simulator") {
        ++rates.n_sim;
        rates.sim_found += r.solution_found;
        rates.sim_feas += r.feasible;
      } else if (r.model == "task_model") {
        ++rates.n_task;
        rates.task_found += r.solution_found;
        rates.task_feas += r.feasible;
      }
    }
    if (rates.n_sim) {
      rates.sim_found /= rates.n_sim;
      rates.sim_feas /= rates.n_sim;
    }
    if (rates.n_task) {
      rates.task_found /= rates.n_task;
      rates.task_feas /= rates.n_task;
    }
    return rates;
  };
  auto emit_group = [&](const std::string& name, auto&& contains) {
    auto rates = group_rates(contains);
    long chains_in = 0;
    for (const ChainSpec& chain : chains)
      if (contains(chain)) ++chains_in;
    if (chains_in == 0) return;
    report.tasks_csv.row(
        {name, std::to_string(chains_in), fmt(rates.sim_found), fmt(rates.task_found),
         fmt(rates.sim_found > 0 ? rates.task_found / rates.sim_found : 0.0),
         fmt(rates.sim_feas), fmt(rates.task_feas),
         fmt(rates.sim_feas > 0 ? rates.task_feas / rates.sim_feas : 0.0)});
  };
  emit_group("overall", [](const ChainSpec&) { return true; });
  emit_group("push_button_any", [](const ChainSpec& ch) { return ch.contains_button(); });
  for (SubtaskId id : all_subtasks())
    emit_group(subtask_name(id), [id](const ChainSpec& ch) { return ch.contains(id); });

  return report;
}

BiasReport::BiasReport()
    : sweep_csv({"mode", "cutoff", "solve_rate", "mean_cost"}),
      detail_csv({"mode", "cutoff", "chain_id", "solved", "cost"}) {}

BiasReport bias_sweep(const ExperimentConfig& c, const Artifacts& a,
                      const std::vector<ChainSpec>& chains) {
  BiasReport report;
  RandomStream master(RandomStream(c.seed).derive(909).seed());

  struct Mode {
    BiasMode bias;
    int cutoff;
  };
  std::vector<Mode> modes;
  for (int cutoff : c.bias_cutoffs) modes.push_back({BiasMode::Tdc, cutoff});
  modes.push_back({BiasMode::Random, 0});
  modes.push_back({BiasMode::L2, 0});

  const State x_init = canonical_init(c.env);
  SearchDeps deps = make_deps(c, a, ModelKind::TaskModel);

  for (const Mode& mode : modes) {
    long solved = 0;
    long cost_sum = 0;
    for (int chain_id = 0; chain_id < static_cast<int>(chains.size()); ++chain_id) {
      SuccessDetector detector{chains[chain_id], c.env};
      SearchConfig sc = c.search;
      sc.model = ModelKind::TaskModel;
      sc.bias = mode.bias;
      if (mode.bias == BiasMode::Tdc) sc.d_cutoff = mode.cutoff;
      // Same seed across modes so per-chain costs pair up.
      sc.seed = master.derive(chain_id).seed();
      SearchResult r = search(x_init, detector, deps, sc);
      report.rows.push_back({bias_mode_name(mode.bias), mode.cutoff, chain_id, r.solved,
                             r.solved ? r.cost : 0});
      if (r.solved) {
        ++solved;
        cost_sum += r.cost;
      }
      if (c.verbose)
        std::cerr << "[belt] bias " << bias_mode_name(mode.bias) << "/" << mode.cutoff
                  << " chain " << chain_id << (r.solved ? " solved\n" : " failed\n");
    }
    report.sweep_csv.row({bias_mode_name(mode.bias), std::to_string(mode.cutoff),
                          fmt(chains.empty() ? 0.0
                                             : static_cast<double>(solved) / chains.size()),
                          fmt(solved ? static_cast<double>(cost_sum) / solved : 0.0)});
  }
  for (const BiasRow& row : report.rows)
    report.detail_csv.row({row.mode, std::to_string(row.cutoff), std::to_string(row.chain_id),
                           row.solved ? "1" : "0", std::to_string(row.cost)});
  return report;
}

ModelReportOut::ModelReportOut()
    : table_csv({"model", "horizon", "mean_l2_error"}),
      per_subtask_csv({"subtask", "task_model_error"}) {}

ModelReportOut model_report(const ExperimentConfig& c, const Artifacts& a) {
  ModelReportOut out;
  std::vector<int> holdout = holdout_rollouts(a.dataset, c.models.holdout_rollouts);

  for (int horizon : {32, 64, 96}) {
    out.table_csv.row({"simulator", std::to_string(horizon), fmt(0.0)});
    out.values["simulator_" + std::to_string(horizon)] = 0.0;
  }
  {
    double e1 = action_one_step_error(a.action_model, a.dataset, c.env, holdout);
    out.table_csv.row({"action_model", "1", fmt(e1)});
    out.values["action_1"] = e1;
  }
  for (int horizon : {8, 32, 64, 96}) {
    double e = action_recursive_error(a.action_model, a.dataset, c.env, horizon, holdout);
    out.table_csv.row({"action_model", std::to_string(horizon), fmt(e)});
    out.values["action_" + std::to_string(horizon)] = e;
  }
  for (int horizon : {32, 64, 96}) {
    double e = task_one_shot_error(a.task_model, a.dataset, c.env, horizon, holdout);
    out.table_csv.row({"task_model", std::to_string(horizon), fmt(e)});
    out.values["task_" + std::to_string(horizon)] = e;
  }

  out.per_subtask = task_error_by_subtask(a.task_model, a.dataset, c.env, 64, holdout);
  for (const auto& [id, err] : out.per_subtask)
    out.per_subtask_csv.row({subtask_name(id), fmt(err)});
  return out;
}

}  // namespace belt
