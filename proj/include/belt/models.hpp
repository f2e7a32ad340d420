#pragma once

#include <map>
#include <string>
#include <vector>

#include "belt/demos.hpp"
#include "belt/mlp.hpp"

namespace belt {

enum class ModelKind : int { Simulator = 0, ActionModel = 1, TaskModel = 2 };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelHyperparams {
  int hidden = 128;
  int epochs = 4;
  int task_epochs = 24;       // task models see far fewer samples
  int batch_size = 256;
  float learning_rate = 1e-3f;
  float holdout_rollouts = 0.1f;  // rollout-level split for honest evaluation
  int sample_stride = 4;          // start offsets for task-model samples
  std::vector<int> horizons{32, 64, 96};
  uint64_t seed = 3;
};

// One of the three transition models the search can plan with. The
// simulator kind delegates to the exact environment dynamics; the action
// kind is a one-step regressor applied recursively; the task kind predicts
// the state after a fixed number of policy steps toward a goal and exists
// per supported horizon.
struct DynamicsModel {
  ModelKind kind = ModelKind::Simulator;
  Mlp action_net;
  std::map<int, Mlp> task_nets;  // keyed by horizon
  std::map<std::string, TrainReport> reports;
};

constexpr int kActionEncodingDim = 6;  // dx, dy, dtheta, grip one-hot
Vector encode_action(const Action& a);

Vector observe_f(const State& s, const EnvConfig& ec);  // float features

// Deterministic rollout-level holdout: the trailing fraction of rollouts.
std::vector<int> holdout_rollouts(const DemoDataset& dataset, float fraction);
std::vector<int> training_rollouts(const DemoDataset& dataset, float fraction);

DynamicsModel train_action_model(const DemoDataset& dataset, const EnvConfig& ec,
                                 const ModelHyperparams& hp);
DynamicsModel train_task_model(const DemoDataset& dataset, const EnvConfig& ec,
                               const ModelHyperparams& hp);

// Propagate the policy for `horizon` steps under the model. Simulator and
// action kinds return horizon+1 states; the task kind returns the two-state
// edge {start, predicted end} and throws if the horizon has no trained net.
std::vector<State> rollout(const DynamicsModel& model, const State& start, const Task& task,
                           int horizon, const PolicyConfig& pc, const EnvConfig& ec,
                           RandomStream& rng);

// --- held-out error measurements (raw feature units, mean L2) ---

// One-step prediction error over the given rollouts.
double action_one_step_error(const DynamicsModel& model, const DemoDataset& dataset,
                             const EnvConfig& ec, const std::vector<int>& rollout_ids);
// Recursive prediction from each rollout start over the recorded actions.
double action_recursive_error(const DynamicsModel& model, const DemoDataset& dataset,
                              const EnvConfig& ec, int horizon,
                              const std::vector<int>& rollout_ids);
// One-shot task-model prediction error from rollout starts.
double task_one_shot_error(const DynamicsModel& model, const DemoDataset& dataset,
                           const EnvConfig& ec, int horizon,
                           const std::vector<int>& rollout_ids);
// Task-model error grouped by the subtask that generated each rollout.
std::map<SubtaskId, double> task_error_by_subtask(const DynamicsModel& model,
                                                  const DemoDataset& dataset,
                                                  const EnvConfig& ec, int horizon,
                                                  const std::vector<int>& rollout_ids);
// Error of predicting the mean target (the best constant predictor).
double constant_predictor_error(const DemoDataset& dataset, const EnvConfig& ec,
                                const std::vector<int>& rollout_ids);

void save_model(const DynamicsModel& model, const std::string& dir);
DynamicsModel load_model(ModelKind kind, const std::string& dir);

}  // namespace belt
