#pragma once

#include <map>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "belt/baselines.hpp"
#include "belt/io.hpp"

namespace belt {

enum class Planner : int { Belt = 0, Cem = 1, Oracle = 2, SingleGoal = 3 };

// "belt:simulator", "cem:task_model", "oracle", "single_goal", ...
struct PlannerSpec {
  Planner algo = Planner::Belt;
  ModelKind model = ModelKind::Simulator;
  bool has_model = true;

  std::string algo_name() const;
  std::string model_name() const;  // "-" when the planner has no model
  std::string name() const;
  static PlannerSpec parse(const std::string& text);
};

struct ExperimentConfig {
  EnvConfig env;
  PolicyConfig policy;
  int demo_rollouts = 5000;
  int demo_horizon = 96;
  ModelHyperparams models;
  TdcHyperparams tdc;
  SearchConfig search;
  CemConfig cem;

  int suite_chains = 100;
  std::vector<std::string> planners{"belt:simulator", "belt:task_model", "cem:task_model",
                                    "oracle", "single_goal"};
  int replays = 9;
  int seeds = 1;
  int single_goal_horizon = 384;
  int oracle_horizon = 96;
  int bias_chains = 24;
  std::vector<int> bias_cutoffs{2, 16, 64, 128};
  uint64_t seed = 7;
  std::string out_dir = "out";
  bool verbose = false;

  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// Everything the planners consume, trained once per configuration.
struct Artifacts {
  DemoDataset dataset;
  DynamicsModel simulator;
  DynamicsModel action_model;
  DynamicsModel task_model;
  TemporalDistanceClassifier tdc;
  TdcEval tdc_eval;
};

DemoDataset build_demos(const ExperimentConfig& config);
Artifacts build_artifacts(const ExperimentConfig& config);
void save_artifacts(const Artifacts& artifacts, const std::string& dir);
// Throws with the missing build step named when files are absent.
Artifacts load_artifacts(const ExperimentConfig& config, const std::string& dir);

// Deterministic suite: seeded sample of the generated chain set.
std::vector<ChainSpec> make_suite(const ExperimentConfig& config);

struct MetricsRecord {
  int chain_id = 0;
  std::string chain;
  std::string planner;
  std::string model;
  int seed_index = 0;
  bool solution_found = false;
  double success_rate = 0.0;  // fraction of replays passing ground-truth detection
  bool feasible = false;      // at least one successful replay
  int cost = 0;               // timesteps
  double wall_time_s = 0.0;
};

struct SuiteReport {
  std::vector<MetricsRecord> records;
  Csv results_csv;  // per record, includes wall time
  Csv summary_csv;  // per planner, deterministic bytes for a fixed seed
  Csv tasks_csv;    // per-subtask breakdown for the two tree planners

  SuiteReport();
};

// Plan, replay through the exact simulator, and aggregate, for every
// chain x planner x seed in the configuration.
SuiteReport run_suite(const ExperimentConfig& config, const Artifacts& artifacts,
                      const std::vector<ChainSpec>& chains);

struct BiasRow {
  std::string mode;  // "tdc", "random", "l2"
  int cutoff;        // steps; 0 for non-TDC modes
  int chain_id;
  bool solved;
  int cost;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  Csv sweep_csv;   // mode,cutoff,solve_rate,mean_cost
  Csv detail_csv;  // per chain

  BiasReport();
};

// Node-selection comparison for the task-model search: the TDC bias at each
// cutoff against fully random and L2-nearest selection.
BiasReport bias_sweep(const ExperimentConfig& config, const Artifacts& artifacts,
                      const std::vector<ChainSpec>& chains);

struct ModelReportOut {
  Csv table_csv;        // model,horizon,mean_l2_error
  Csv per_subtask_csv;  // subtask,task_model_error (horizon 64)
  std::map<std::string, double> values;
  std::map<SubtaskId, double> per_subtask;

  ModelReportOut();
};

ModelReportOut model_report(const ExperimentConfig& config, const Artifacts& artifacts);

}  // namespace belt
