#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "belt/demos.hpp"

using namespace belt;

TEST_CASE("single tiny rollout has the right shape") {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset ds = generate_demos(ec, pc, 1, 1, 42);
  REQUIRE(ds.rollouts.size() == 1);
  CHECK(ds.rollouts[0].states.size() == 2);
  CHECK(ds.rollouts[0].actions.size() == 1);
  CHECK_NOTHROW(ds.validate());
  CHECK_THROWS(generate_demos(ec, pc, 0, 1, 42));
}

TEST_CASE("generation is reproducible and serialization byte-identical") {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset a = generate_demos(ec, pc, 20, 24, 7);
  DemoDataset b = generate_demos(ec, pc, 20, 24, 7);
  std::ostringstream sa, sb;
  save_demos(a, sa);
  save_demos(b, sb);
  CHECK(sa.str() == sb.str());

  DemoDataset c = generate_demos(ec, pc, 20, 24, 8);
  std::ostringstream sc;
  save_demos(c, sc);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("save/load round-trips exactly") {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset ds = generate_demos(ec, pc, 12, 30, 9);
  std::ostringstream out;
  save_demos(ds, out);
  std::istringstream in(out.str());
  DemoDataset back = load_demos(in);
  REQUIRE(back.rollouts.size() == ds.rollouts.size());
  CHECK(back.horizon == ds.horizon);
  CHECK(back.seed == ds.seed);
  for (size_t r = 0; r < ds.rollouts.size(); ++r) {
    CHECK(back.rollouts[r].subtask == ds.rollouts[r].subtask);
    CHECK(back.rollouts[r].task.goal == ds.rollouts[r].task.goal);
    REQUIRE(back.rollouts[r].states.size() == ds.rollouts[r].states.size());
    for (size_t t = 0; t < ds.rollouts[r].states.size(); ++t)
      CHECK(back.rollouts[r].states[t] == ds.rollouts[r].states[t]);
  }

  std::istringstream bad("not a demo file\n");
  CHECK_THROWS(load_demos(bad));
}

TEST_CASE("sample_task is uniform over visited states") {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset ds = generate_demos(ec, pc, 1, 1, 3);  // exactly two states
  REQUIRE(ds.num_states() == 2);

  RandomStream rng(99);
  int first = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Task t = sample_task(ds, rng);
    if (t.goal == ds.rollouts[0].states[0]) ++first;
  }
  // Binomial five-sigma band around n/2.
  double sigma = std::sqrt(0.25 * n);
  CHECK(std::abs(first - n / 2.0) <= 5.0 * sigma);

  DemoDataset empty;
  CHECK_THROWS(sample_task(empty, rng));
}

TEST_CASE("sampled goals satisfy the state invariants") {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset ds = generate_demos(ec, pc, 30, 40, 4);
  RandomStream rng(5);
  for (int i = 0; i < 300; ++i) CHECK(check_invariants(sample_task(ds, rng).goal, ec));
}

TEST_CASE("noiseless demos achieve their goals at the calibration rate") {
  EnvConfig ec;
  PolicyConfig pc;
  pc.action_noise = 0.0;
  DemoDataset ds = generate_demos(ec, pc, 120, 96, 11);
  int achieved = 0;
  for (const DemoRollout& r : ds.rollouts)
    if (goal_achieved(r.states.back(), r.task.goal, pc, ec)) ++achieved;
  CHECK(static_cast<double>(achieved) / ds.rollouts.size() >= 0.9);
}

TEST_CASE("coverage: every subtask's detector fires in some rollout") {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset ds = generate_demos(ec, pc, 400, 96, 13);
  for (SubtaskId id : all_subtasks()) {
    SuccessDetector detector{ChainSpec{{id}}, ec};
    bool fired = false;
    for (const DemoRollout& r : ds.rollouts) {
      if (detect(detector, r.states)) {
        fired = true;
        break;
      }
    }
    CHECK_MESSAGE(fired, "no rollout covers ", subtask_name(id));
  }
}
