#include "belt/demos.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace belt {

size_t DemoDataset::num_states() const {
  size_t n = 0;
  for (const auto& r : rollouts) n += r.states.size();
  return n;
}

const State& DemoDataset::state_at(size_t k) const {
  for (const auto& r : rollouts) {
    if (k < r.states.size()) return r.states[k];
    k -= r.states.size();
  }
  throw std::out_of_range("DemoDataset::state_at");
}

void DemoDataset::validate() const {
  for (const auto& r : rollouts) {
    if (r.states.empty()) throw std::runtime_error("DemoDataset: empty trajectory");
    if (r.states.size() != r.actions.size() + 1)
      throw std::runtime_error("DemoDataset: trajectory/action length mismatch");
  }
}

State random_start(const EnvConfig& c, RandomStream& rng) {
  State s;
  const double lo = c.workspace_lo + 0.2, hi = c.workspace_hi - 0.2;
  s.effector = Vec2(rng.uniform(lo, hi), rng.uniform(lo, hi));
  s.gripper_closed = false;

  auto frac = [&](double p_closed, double p_open) {
    double u = rng.uniform();
    if (u < p_closed) return 0.0;
    if (u < p_closed + p_open) return 1.0;
    return rng.uniform(0.0, 1.0);
  };
  s.drawer_ext = frac(0.5, 0.3);
  s.slider_pos = frac(0.5, 0.3);

  double uz = rng.uniform();
  if (uz < 0.7) {
    s.block_zone = Zone::Table;
    for (int attempt = 0; attempt < 64; ++attempt) {
      Vec2 p(rng.uniform(lo + 0.3, hi - 0.3), rng.uniform(lo + 0.3, hi - 0.3));
      if (!c.in_shelf_region(p)) {
        s.block = p;
        break;
      }
    }
  } else if (uz < 0.85) {
    s.block_zone = Zone::Drawer;
    s.block = c.drawer_anchor(s.drawer_ext);
  } else {
    s.block_zone = Zone::Shelf;
    s.block = c.shelf_anchor;
  }

  // Mostly near-zero angles so that left quarter-turns tend to cross the
  // raw-angle wrap while right turns do not.
  s.block_angle = rng.bernoulli(0.85) ? rng.uniform(0.0, 0.6) : rng.uniform(0.0, kTwoPi);

  for (int i = 0; i < 3; ++i)
    s.lights[i] = (s.effector - c.buttons[i]).norm() <= c.press_radius;
  s.t = 0;
  return s;
}

State canonical_init(const EnvConfig& c) {
  State s;
  s.effector = Vec2(5.0, 5.0);
  s.block = Vec2(6.0, 3.0);
  s.block_zone = Zone::Table;
  for (int i = 0; i < 3; ++i)
    s.lights[i] = (s.effector - c.buttons[i]).norm() <= c.press_radius;
  return s;
}

DemoRollout run_policy(const State& start, const Task& task, const PolicyConfig& pc,
                       const EnvConfig& ec, int horizon, RandomStream& rng) {
  DemoRollout r;
  r.task = task;
  r.states.reserve(horizon + 1);
  r.actions.reserve(horizon);
  r.states.push_back(start);
  State s = start;
  for (int k = 0; k < horizon; ++k) {
    Action a = policy_step(s, task, pc, ec, rng);
    s = step(s, a, ec);
    r.actions.push_back(a);
    r.states.push_back(s);
  }
  return r;
}

DemoDataset generate_demos(const EnvConfig& ec, const PolicyConfig& pc, int num_rollouts,
                           int horizon, uint64_t seed) {
  if (num_rollouts < 1) throw std::invalid_argument("generate_demos: need >= 1 rollout");
  ec.validate();
  pc.validate();
  DemoDataset ds;
  ds.seed = seed;
  ds.horizon = horizon;
  ds.rollouts.reserve(num_rollouts);
  RandomStream root(seed);
  for (int i = 0; i < num_rollouts; ++i) {
    RandomStream rng = root.derive(static_cast<uint64_t>(i));
    State start = random_start(ec, rng);

    std::vector<SubtaskId> applicable;
    for (SubtaskId id : all_subtasks())
      if (subtask_applicable(id, start, ec)) applicable.push_back(id);
    SubtaskId chosen = applicable[rng.index(applicable.size())];
    Task task{subtask_goal(chosen, start, ec, rng)};

    // Stop shortly after the goal is achieved; long idle tails carry no
    // temporal-distance signal.
    const int tail = rng.uniform_int(2, 6);
    DemoRollout r;
    r.task = task;
    r.subtask = chosen;
    r.states.push_back(start);
    State s = start;
    int since_achieved = -1;
    for (int k = 0; k < horizon; ++k) {
      Action a = policy_step(s, task, pc, ec, rng);
      s = step(s, a, ec);
      r.actions.push_back(a);
      r.states.push_back(s);
      if (since_achieved < 0 && goal_achieved(s, task.goal, pc, ec)) since_achieved = 0;
      else if (since_achieved >= 0 && ++since_achieved >= tail) break;
    }
    for (const State& s : r.states) {
      if (!check_invariants(s, ec))
        throw std::runtime_error("generate_demos: invariant violation in rollout " +
                                 std::to_string(i));
    }
    ds.rollouts.push_back(std::move(r));
  }
  return ds;
}

Task sample_task(const DemoDataset& dataset, RandomStream& rng) {
  size_t n = dataset.num_states();
  if (n == 0) throw std::runtime_error("sample_task: empty dataset");
  return Task{dataset.state_at(rng.index(n))};
}

namespace {

void put_num(std::string& line, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
  line.push_back(' ');
}

void put_state(std::string& line, const State& s) {
  put_num(line, s.effector.x());
  put_num(line, s.effector.y());
  put_num(line, s.gripper_closed ? 1 : 0);
  put_num(line, s.drawer_ext);
  put_num(line, s.slider_pos);
  put_num(line, s.block.x());
  put_num(line, s.block.y());
  put_num(line, s.block_angle);
  put_num(line, static_cast<int>(s.block_zone));
  for (int i = 0; i < 3; ++i) put_num(line, s.lights[i] ? 1 : 0);
}

struct Cursor {
  const char* p;
  const char* end;

  double num() {
    while (p < end && *p == ' ') ++p;
    double v = 0;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) throw std::runtime_error("demo file: bad number");
    p = res.ptr;
    return v;
  }
};

State read_state(Cursor& c, int t) {
  State s;
  s.effector.x() = c.num();
  s.effector.y() = c.num();
  s.gripper_closed = c.num() > 0.5;
  s.drawer_ext = c.num();
  s.slider_pos = c.num();
  s.block.x() = c.num();
  s.block.y() = c.num();
  s.block_angle = c.num();
  s.block_zone = static_cast<Zone>(static_cast<int>(c.num()));
  for (int i = 0; i < 3; ++i) s.lights[i] = c.num() > 0.5;
  s.t = t;
  return s;
}

}  // namespace

void save_demos(const DemoDataset& ds, std::ostream& out) {
  // One rollout per line: subtask, goal state, N, N+1 states, N actions.
  out << "belt-demos v1 state_fields=12 action_fields=4 rollouts=" << ds.rollouts.size()
      << " horizon=" << ds.horizon << " seed=" << ds.seed << "\n";
  std::string line;
  for (const auto& r : ds.rollouts) {
    line.clear();
    line += subtask_name(r.subtask);
    line.push_back(' ');
    put_state(line, r.task.goal);
    put_num(line, static_cast<double>(r.actions.size()));
    for (const State& s : r.states) put_state(line, s);
    for (const Action& a : r.actions) {
      put_num(line, a.dx);
      put_num(line, a.dy);
      put_num(line, static_cast<int>(a.grip));
      put_num(line, a.dtheta);
    }
    line.back() = '\n';
    out << line;
  }
}

void save_demos_file(const DemoDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  save_demos(ds, f);
}

DemoDataset load_demos(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("belt-demos v1", 0) != 0)
    throw std::runtime_error("demo file: missing or unsupported schema header");
  DemoDataset ds;
  {
    auto grab = [&](const std::string& key) -> uint64_t {
      auto pos = header.find(key + "=");
      if (pos == std::string::npos) return 0;
      return std::strtoull(header.c_str() + pos + key.size() + 1, nullptr, 10);
    };
    ds.horizon = static_cast<int>(grab("horizon"));
    ds.seed = grab("seed");
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    DemoRollout r;
    size_t sp = line.find(' ');
    auto id = subtask_from_name(line.substr(0, sp));
    if (!id) throw std::runtime_error("demo file: unknown subtask");
    r.subtask = *id;
    Cursor c{line.data() + sp, line.data() + line.size()};
    r.task.goal = read_state(c, 0);
    int n = static_cast<int>(c.num());
    r.states.reserve(n + 1);
    r.actions.reserve(n);
    for (int i = 0; i <= n; ++i) r.states.push_back(read_state(c, i));
    for (int i = 0; i < n; ++i) {
      Action a;
      a.dx = c.num();
      a.dy = c.num();
      a.grip = static_cast<GripCmd>(static_cast<int>(c.num()));
      a.dtheta = c.num();
      r.actions.push_back(a);
    }
    ds.rollouts.push_back(std::move(r));
  }
  ds.validate();
  return ds;
}

DemoDataset load_demos_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return load_demos(f);
}

}  // namespace belt
