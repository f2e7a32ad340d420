// Command-line harness: demo generation, model/TDC training, planning,
// replay evaluation, the benchmark suite, the bias sweep, and model reports.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "belt/bench.hpp"

namespace {

belt::ExperimentConfig load_config(const std::string& config_path, const std::string& out_dir,
                                   uint64_t seed, bool have_seed, bool verbose) {
  belt::ExperimentConfig config;
  if (!config_path.empty()) config = belt::load_config_file(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (have_seed) config.seed = seed;
  config.verbose = verbose;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BELT: broadly-exploring local-policy trees on a planar playground"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool have_seed = false;
  bool verbose = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_dir, "output/artifact directory");
  app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    have_seed = true;
  });
  app.add_flag("--verbose", verbose, "progress output on stderr");

  auto* gen = app.add_subcommand("gen-demos", "generate the demonstration dataset");
  int gen_rollouts = -1, gen_horizon = -1;
  gen->add_option("--rollouts", gen_rollouts, "number of rollouts");
  gen->add_option("--horizon", gen_horizon, "steps per rollout");

  auto* train_models = app.add_subcommand("train-models", "train action and task models");
  auto* train_tdc_cmd = app.add_subcommand("train-tdc", "train the temporal distance classifier");

  auto* plan = app.add_subcommand("plan", "plan one chain and write the plan file");
  std::string plan_chain, plan_planner = "belt:simulator", plan_out = "plan.json";
  std::string plan_log;
  plan->add_option("--chain", plan_chain, "comma-separated subtasks")->required();
  plan->add_option("--planner", plan_planner, "belt:<model> or cem:<model>");
  plan->add_option("--plan-out", plan_out, "plan file to write");
  plan->add_option("--iteration-log", plan_log, "per-iteration CSV to write");

  auto* replay = app.add_subcommand("replay", "replay a plan file through the simulator");
  std::string replay_plan_path = "plan.json";
  int replay_count = 9;
  replay->add_option("--plan", replay_plan_path, "plan file");
  replay->add_option("--replays", replay_count, "number of stochastic replays");

  auto* suite = app.add_subcommand("suite", "run the full chain benchmark");
  auto* bias = app.add_subcommand("bias-sweep", "compare node-selection biases");
  auto* model_rep = app.add_subcommand("model-report", "held-out model error tables");
  auto* chains_cmd = app.add_subcommand("chains", "enumerate valid chains");
  int chains_length = 4;
  chains_cmd->add_option("--length", chains_length, "chain length");

  CLI11_PARSE(app, argc, argv);

  try {
    belt::ExperimentConfig config = load_config(config_path, out_dir, seed, have_seed, verbose);
    belt::ensure_dir(config.out_dir);

    if (gen->parsed()) {
      if (gen_rollouts > 0) config.demo_rollouts = gen_rollouts;
      if (gen_horizon > 0) config.demo_horizon = gen_horizon;
      belt::DemoDataset ds = belt::build_demos(config);
      belt::save_demos_file(ds, config.out_dir + "/demos.txt");
      belt::write_text_file(config.out_dir + "/env.json",
                            belt::env_to_json(config.env).dump(1) + "\n");
      belt::write_text_file(config.out_dir + "/policy.json",
                            belt::policy_to_json(config.policy).dump(1) + "\n");
      std::cout << "wrote " << ds.rollouts.size() << " rollouts to " << config.out_dir
                << "/demos.txt\n";
    } else if (train_models->parsed()) {
      belt::DemoDataset ds = belt::load_demos_file(config.out_dir + "/demos.txt");
      belt::DynamicsModel action = belt::train_action_model(ds, config.env, config.models);
      belt::DynamicsModel task = belt::train_task_model(ds, config.env, config.models);
      belt::save_model(action, config.out_dir);
      belt::save_model(task, config.out_dir);
      std::cout << "action holdout mse " << belt::fmt(action.reports.at("action").holdout_loss)
                << "\n";
      for (const auto& [name, report] : task.reports)
        std::cout << name << " holdout mse " << belt::fmt(report.holdout_loss) << "\n";
    } else if (train_tdc_cmd->parsed()) {
      belt::DemoDataset ds = belt::load_demos_file(config.out_dir + "/demos.txt");
      belt::RandomStream rng(belt::RandomStream(config.seed).derive(101).seed());
      belt::TdcPairs pairs = belt::make_tdc_pairs(ds, config.env, config.tdc.pairs_per_rollout,
                                                  config.tdc.max_cross_pairs, rng);
      belt::TdcEval eval;
      belt::TemporalDistanceClassifier tdc = belt::train_tdc(pairs, config.tdc, &eval);
      belt::save_tdc(tdc, config.out_dir + "/tdc.net");
      belt::Csv conf({"true_bin", "predicted_bin", "count"});
      for (int t = 0; t < belt::TdcBins::K; ++t)
        for (int p = 0; p < belt::TdcBins::K; ++p)
          conf.row({std::to_string(t), std::to_string(p),
                    std::to_string(eval.confusion[t][p])});
      conf.write_file(config.out_dir + "/tdc_confusion.csv");
      std::cout << "tdc accuracy exact " << belt::fmt(eval.accuracy_exact) << " within-one "
                << belt::fmt(eval.accuracy_within_one) << "\n";
    } else if (plan->parsed()) {
      belt::Artifacts artifacts = belt::load_artifacts(config, config.out_dir);
      belt::ChainSpec chain = belt::ChainSpec::parse(plan_chain);
      belt::SuccessDetector detector{chain, config.env};
      belt::PlannerSpec spec = belt::PlannerSpec::parse(plan_planner);
      belt::SearchDeps deps;
      deps.dataset = &artifacts.dataset;
      deps.tdc = &artifacts.tdc;
      deps.policy = config.policy;
      deps.env = config.env;
      deps.model = spec.model == belt::ModelKind::Simulator ? &artifacts.simulator
                   : spec.model == belt::ModelKind::ActionModel ? &artifacts.action_model
                                                                : &artifacts.task_model;
      belt::State x_init = belt::canonical_init(config.env);
      belt::SearchResult result;
      if (spec.algo == belt::Planner::Belt) {
        belt::SearchConfig sc = config.search;
        sc.model = spec.model;
        sc.seed = config.seed;
        sc.record_iterations = !plan_log.empty();
        result = belt::search(x_init, detector, deps, sc);
        if (!plan_log.empty()) belt::iteration_log_csv(result.log).write_file(plan_log);
      } else if (spec.algo == belt::Planner::Cem) {
        belt::CemConfig cc = config.cem;
        cc.model = spec.model;
        cc.seed = config.seed;
        result = belt::cem_plan(x_init, detector, deps, cc);
      } else {
        throw std::invalid_argument("plan supports belt:* and cem:* planners");
      }
      belt::PlanFile file;
      file.planner = spec.algo_name();
      file.model = spec.model_name();
      file.chain = chain.to_string();
      file.x_init = x_init;
      file.solved = result.solved;
      file.cost = result.cost;
      file.tasks = result.tasks;
      file.horizons = result.horizons;
      belt::save_plan(file, plan_out);
      std::cout << (result.solved ? "solved" : "failed") << " cost " << result.cost
                << " nodes " << result.node_count << "\n";
      if (!result.solved) return 1;
    } else if (replay->parsed()) {
      belt::PlanFile file = belt::load_plan(replay_plan_path);
      if (!file.solved) throw std::runtime_error("plan file holds no solution");
      belt::ChainSpec chain = belt::ChainSpec::parse(file.chain);
      belt::SuccessDetector detector{chain, config.env};
      belt::RandomStream master(config.seed);
      int ok = 0;
      for (int r = 0; r < replay_count; ++r) {
        belt::RandomStream rng = master.derive(300 + r);
        std::vector<belt::State> traj = belt::replay_plan(
            file.x_init, file.tasks, file.horizons, config.policy, config.env, rng);
        bool success = belt::detect(detector, traj);
        std::cout << "replay " << r << " " << (success ? "success" : "failure") << "\n";
        if (success) ++ok;
      }
      std::cout << "success_rate " << belt::fmt(static_cast<double>(ok) / replay_count)
                << " feasible " << (ok > 0 ? 1 : 0) << "\n";
    } else if (suite->parsed()) {
      belt::Artifacts artifacts = belt::load_artifacts(config, config.out_dir);
      std::vector<belt::ChainSpec> chains = belt::make_suite(config);
      std::string manifest;
      for (const belt::ChainSpec& chain : chains) manifest += chain.to_string() + "\n";
      belt::write_text_file(config.out_dir + "/chains.txt", manifest);
      belt::SuiteReport report = belt::run_suite(config, artifacts, chains);
      report.results_csv.write_file(config.out_dir + "/results.csv");
      report.summary_csv.write_file(config.out_dir + "/summary.csv");
      report.tasks_csv.write_file(config.out_dir + "/tasks.csv");
      std::cout << report.summary_csv.str();
    } else if (bias->parsed()) {
      belt::Artifacts artifacts = belt::load_artifacts(config, config.out_dir);
      std::vector<belt::ChainSpec> chains = belt::make_suite(config);
      if (static_cast<int>(chains.size()) > config.bias_chains)
        chains.resize(config.bias_chains);
      belt::BiasReport report = belt::bias_sweep(config, artifacts, chains);
      report.sweep_csv.write_file(config.out_dir + "/bias_sweep.csv");
      report.detail_csv.write_file(config.out_dir + "/bias_results.csv");
      std::cout << report.sweep_csv.str();
    } else if (model_rep->parsed()) {
      belt::Artifacts artifacts = belt::load_artifacts(config, config.out_dir);
      belt::ModelReportOut report = belt::model_report(config, artifacts);
      report.table_csv.write_file(config.out_dir + "/model_report.csv");
      report.per_subtask_csv.write_file(config.out_dir + "/task_errors_by_subtask.csv");
      std::cout << report.table_csv.str();
    } else if (chains_cmd->parsed()) {
      std::vector<belt::ChainSpec> chains = belt::generate_chains(chains_length);
      std::string manifest;
      for (const belt::ChainSpec& chain : chains) manifest += chain.to_string() + "\n";
      belt::write_text_file(config.out_dir + "/chains.txt", manifest);
      std::cout << chains.size() << " chains written to " << config.out_dir << "/chains.txt\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
