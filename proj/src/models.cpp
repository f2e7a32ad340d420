#include "belt/models.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

namespace belt {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Simulator: return "simulator";
    case ModelKind::ActionModel: return "action_model";
    case ModelKind::TaskModel: return "task_model";
  }
  return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "simulator") return ModelKind::Simulator;
  if (name == "action_model") return ModelKind::ActionModel;
  if (name == "task_model") return ModelKind::TaskModel;
  throw std::invalid_argument("unknown model kind: " + name);
}

Vector encode_action(const Action& a) {
  Vector v(kActionEncodingDim);
  v << static_cast<float>(a.dx), static_cast<float>(a.dy), static_cast<float>(a.dtheta),
      a.grip == GripCmd::None ? 1.0f : 0.0f, a.grip == GripCmd::Open ? 1.0f : 0.0f,
      a.grip == GripCmd::Close ? 1.0f : 0.0f;
  return v;
}

Vector observe_f(const State& s, const EnvConfig& ec) {
  return observe(s, ec).cast<float>();
}

std::vector<int> holdout_rollouts(const DemoDataset& ds, float fraction) {
  int n = static_cast<int>(ds.rollouts.size());
  int k = std::min(n - 1, std::max(1, static_cast<int>(std::round(n * fraction))));
  std::vector<int> ids(k);
  std::iota(ids.begin(), ids.end(), n - k);
  return ids;
}

std::vector<int> training_rollouts(const DemoDataset& ds, float fraction) {
  int n = static_cast<int>(ds.rollouts.size());
  int k = std::min(n - 1, std::max(1, static_cast<int>(std::round(n * fraction))));
  std::vector<int> ids(n - k);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

DynamicsModel train_action_model(const DemoDataset& ds, const EnvConfig& ec,
                                 const ModelHyperparams& hp) {
  ds.validate();
  const int fd = feature_dim(ec);
  std::vector<int> train_ids = training_rollouts(ds, hp.holdout_rollouts);

  long total = 0;
  for (int id : train_ids) total += static_cast<long>(ds.rollouts[id].actions.size());
  if (total < 1) throw std::invalid_argument("train_action_model: no transitions");

  Matrix inputs(fd + kActionEncodingDim, total);
  Matrix targets(fd, total);
  long k = 0;
  for (int id : train_ids) {
    const DemoRollout& r = ds.rollouts[id];
    for (size_t t = 0; t < r.actions.size(); ++t, ++k) {
      inputs.col(k).head(fd) = observe_f(r.states[t], ec);
      inputs.col(k).tail(kActionEncodingDim) = encode_action(r.actions[t]);
      targets.col(k) = observe_f(r.states[t + 1], ec);
    }
  }

  DynamicsModel model;
  model.kind = ModelKind::ActionModel;
  model.action_net = Mlp::make(fd + kActionEncodingDim, hp.hidden, fd, hp.seed);
  TrainOptions opt;
  opt.epochs = hp.epochs;
  opt.batch_size = hp.batch_size;
  opt.learning_rate = hp.learning_rate;
  opt.seed = hp.seed;
  model.reports["action"] = train(model.action_net, inputs, targets, opt);
  return model;
}

DynamicsModel train_task_model(const DemoDataset& ds, const EnvConfig& ec,
                               const ModelHyperparams& hp) {
  ds.validate();
  const int fd = feature_dim(ec);
  std::vector<int> train_ids = training_rollouts(ds, hp.holdout_rollouts);

  DynamicsModel model;
  model.kind = ModelKind::TaskModel;
  for (int horizon : hp.horizons) {
    // Trajectories stop shortly after the goal is reached; the policy holds
    // there, so targets past the end clamp to the final state.
    std::vector<std::pair<int, int>> samples;  // (rollout, start)
    for (int id : train_ids) {
      const int len = static_cast<int>(ds.rollouts[id].states.size());
      for (int t = 0; t < len - 1; t += hp.sample_stride) samples.emplace_back(id, t);
    }
    if (samples.empty())
      throw std::invalid_argument("train_task_model: no samples for horizon " +
                                  std::to_string(horizon));
    Matrix inputs(2 * fd, samples.size());
    Matrix targets(fd, samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      const DemoRollout& r = ds.rollouts[samples[i].first];
      const int last = static_cast<int>(r.states.size()) - 1;
      inputs.col(i).head(fd) = observe_f(r.states[samples[i].second], ec);
      inputs.col(i).tail(fd) = observe_f(r.task.goal, ec);
      targets.col(i) = observe_f(r.states[std::min(samples[i].second + horizon, last)], ec);
    }
    Mlp net = Mlp::make(2 * fd, hp.hidden, fd, hp.seed + horizon);
    TrainOptions opt;
    opt.epochs = hp.task_epochs;
    opt.batch_size = hp.batch_size;
    opt.learning_rate = hp.learning_rate;
    opt.seed = hp.seed + horizon;
    model.reports["task_" + std::to_string(horizon)] = train(net, inputs, targets, opt);
    model.task_nets.emplace(horizon, std::move(net));
  }
  return model;
}

namespace {

State predict_next(const Mlp& net, const State& s, const Action& a, const EnvConfig& ec) {
  const int fd = feature_dim(ec);
  Vector in(fd + kActionEncodingDim);
  in.head(fd) = observe_f(s, ec);
  in.tail(kActionEncodingDim) = encode_action(a);
  Vector out = net.forward1(in);
  return de_flatten(out.cast<double>(), ec, s.t + 1);
}

}  // namespace

std::vector<State> rollout(const DynamicsModel& model, const State& start, const Task& task,
                           int horizon, const PolicyConfig& pc, const EnvConfig& ec,
                           RandomStream& rng) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  std::vector<State> traj;
  switch (model.kind) {
    case ModelKind::Simulator: {
      traj.reserve(horizon + 1);
      traj.push_back(start);
      State s = start;
      for (int k = 0; k < horizon; ++k) {
        s = step(s, policy_step(s, task, pc, ec, rng), ec);
        traj.push_back(s);
      }
      break;
    }
    case ModelKind::ActionModel: {
      traj.reserve(horizon + 1);
      traj.push_back(start);
      State s = start;
      for (int k = 0; k < horizon; ++k) {
        s = predict_next(model.action_net, s, policy_step(s, task, pc, ec, rng), ec);
        traj.push_back(s);
      }
      break;
    }
    case ModelKind::TaskModel: {
      auto it = model.task_nets.find(horizon);
      if (it == model.task_nets.end())
        throw std::invalid_argument("rollout: no task model for horizon " +
                                    std::to_string(horizon));
      const int fd = feature_dim(ec);
      Vector in(2 * fd);
      in.head(fd) = observe_f(start, ec);
      in.tail(fd) = observe_f(task.goal, ec);
      Vector out = it->second.forward1(in);
      traj.push_back(start);
      traj.push_back(de_flatten(out.cast<double>(), ec, start.t + horizon));
      break;
    }
  }
  return traj;
}

double action_one_step_error(const DynamicsModel& model, const DemoDataset& ds,
                             const EnvConfig& ec, const std::vector<int>& ids) {
  double sum = 0.0;
  long n = 0;
  const int fd = feature_dim(ec);
  for (int id : ids) {
    const DemoRollout& r = ds.rollouts[id];
    for (size_t t = 0; t < r.actions.size(); ++t, ++n) {
      Vector in(fd + kActionEncodingDim);
      in.head(fd) = observe_f(r.states[t], ec);
      in.tail(kActionEncodingDim) = encode_action(r.actions[t]);
      sum += (model.action_net.forward1(in) - observe_f(r.states[t + 1], ec)).norm();
    }
  }
  return n ? sum / n : 0.0;
}

double action_recursive_error(const DynamicsModel& model, const DemoDataset& ds,
                              const EnvConfig& ec, int horizon,
                              const std::vector<int>& ids) {
  double sum = 0.0;
  long n = 0;
  for (int id : ids) {
    const DemoRollout& r = ds.rollouts[id];
    const int last = static_cast<int>(r.states.size()) - 1;
    State s = r.states[0];
    for (int t = 0; t < horizon; ++t) {
      // Past the recorded end the policy idles at the goal.
      const Action a = t < static_cast<int>(r.actions.size()) ? r.actions[t] : Action{};
      s = predict_next(model.action_net, s, a, ec);
    }
    sum += (observe_f(s, ec) - observe_f(r.states[std::min(horizon, last)], ec)).norm();
    ++n;
  }
  return n ? sum / n : 0.0;
}

double task_one_shot_error(const DynamicsModel& model, const DemoDataset& ds,
                           const EnvConfig& ec, int horizon, const std::vector<int>& ids) {
  auto it = model.task_nets.find(horizon);
  if (it == model.task_nets.end())
    throw std::invalid_argument("task_one_shot_error: horizon not trained");
  const int fd = feature_dim(ec);
  double sum = 0.0;
  long n = 0;
  for (int id : ids) {
    const DemoRollout& r = ds.rollouts[id];
    const int last = static_cast<int>(r.states.size()) - 1;
    Vector in(2 * fd);
    in.head(fd) = observe_f(r.states[0], ec);
    in.tail(fd) = observe_f(r.task.goal, ec);
    sum += (it->second.forward1(in) - observe_f(r.states[std::min(horizon, last)], ec)).norm();
    ++n;
  }
  return n ? sum / n : 0.0;
}

std::map<SubtaskId, double> task_error_by_subtask(const DynamicsModel& model,
                                                  const DemoDataset& ds, const EnvConfig& ec,
                                                  int horizon, const std::vector<int>& ids) {
  auto it = model.task_nets.find(horizon);
  if (it == model.task_nets.end())
    throw std::invalid_argument("task_error_by_subtask: horizon not trained");
  const int fd = feature_dim(ec);
  std::map<SubtaskId, std::pair<double, long>> acc;
  for (int id : ids) {
    const DemoRollout& r = ds.rollouts[id];
    const int last = static_cast<int>(r.states.size()) - 1;
    Vector in(2 * fd);
    in.head(fd) = observe_f(r.states[0], ec);
    in.tail(fd) = observe_f(r.task.goal, ec);
    double err =
        (it->second.forward1(in) - observe_f(r.states[std::min(horizon, last)], ec)).norm();
    auto& slot = acc[r.subtask];
    slot.first += err;
    slot.second += 1;
  }
  std::map<SubtaskId, double> out;
  for (auto& [id, slot] : acc) out[id] = slot.first / slot.second;
  return out;
}

double constant_predictor_error(const DemoDataset& ds, const EnvConfig& ec,
                                const std::vector<int>& ids) {
  const int fd = feature_dim(ec);
  Vector mean = Vector::Zero(fd);
  long n = 0;
  for (int id : ids) {
    const DemoRollout& r = ds.rollouts[id];
    for (size_t t = 1; t < r.states.size(); ++t, ++n) mean += observe_f(r.states[t], ec);
  }
  if (n == 0) return 0.0;
  mean /= static_cast<float>(n);
  double sum = 0.0;
  for (int id : ids) {
    const DemoRollout& r = ds.rollouts[id];
    for (size_t t = 1; t < r.states.size(); ++t) sum += (observe_f(r.states[t], ec) - mean).norm();
  }
  return sum / n;
}

void save_model(const DynamicsModel& model, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  if (model.kind == ModelKind::ActionModel) {
    save_mlp(model.action_net, dir + "/action_model.net", R"({"kind":"action_model"})");
  } else if (model.kind == ModelKind::TaskModel) {
    for (const auto& [horizon, net] : model.task_nets) {
      save_mlp(net, dir + "/task_model_" + std::to_string(horizon) + ".net",
               std::string(R"({"kind":"task_model","horizon":)") + std::to_string(horizon) + "}");
    }
  }
}

DynamicsModel load_model(ModelKind kind, const std::string& dir) {
  namespace fs = std::filesystem;
  DynamicsModel model;
  model.kind = kind;
  if (kind == ModelKind::ActionModel) {
    std::string path = dir + "/action_model.net";
    if (!fs::exists(path))
      throw std::runtime_error("missing " + path + " - run `belt train-models` first");
    model.action_net = load_mlp(path);
  } else if (kind == ModelKind::TaskModel) {
    for (int horizon : {32, 64, 96}) {
      std::string path = dir + "/task_model_" + std::to_string(horizon) + ".net";
      if (fs::exists(path)) model.task_nets.emplace(horizon, load_mlp(path));
    }
    if (model.task_nets.empty())
      throw std::runtime_error("no task models in " + dir + " - run `belt train-models` first");
  }
  return model;
}

}  // namespace belt
