#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belt/tdc.hpp"

using namespace belt;

namespace {

struct Fixture {
  EnvConfig ec;
  PolicyConfig pc;
  DemoDataset ds;
  TemporalDistanceClassifier tdc;
  TdcEval eval;

  Fixture() {
    ds = generate_demos(ec, pc, 2500, 96, 51);
    RandomStream rng(52);
    TdcPairs pairs = make_tdc_pairs(ds, ec, 24, 10000, rng);
    TdcHyperparams hp;
    tdc = train_tdc(pairs, hp, &eval);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("bins form an ordered partition of [0, 256)") {
  CHECK(TdcBins::bin_of(0) == 0);
  CHECK(TdcBins::bin_of(1) == 1);
  CHECK(TdcBins::bin_of(3) == 2);
  CHECK(TdcBins::bin_of(64) == 7);
  CHECK(TdcBins::bin_of(127) == 7);
  CHECK(TdcBins::bin_of(128) == 8);
  CHECK(TdcBins::bin_of(255) == 8);
  CHECK(TdcBins::bin_of(400) == 8);  // clamped into the top bin
  CHECK_THROWS(TdcBins::bin_of(-1));
  for (int d = 0; d < 256; ++d) {
    int b = TdcBins::bin_of(d);
    REQUIRE(b >= 0);
    REQUIRE(b < TdcBins::K);
    CHECK(d >= TdcBins::edges[b]);
    CHECK(d < TdcBins::edges[b + 1]);
  }
}

TEST_CASE("cutoffs map to bin boundaries") {
  CHECK(TdcBins::cutoff_bin(64) == 7);  // distance < 64 means bins 0..6
  CHECK(TdcBins::cutoff_bin(2) == 2);
  CHECK(TdcBins::cutoff_bin(1) == 1);
  CHECK(TdcBins::cutoff_bin(256) == TdcBins::K);
  CHECK(TdcBins::is_boundary(128));
  CHECK(!TdcBins::is_boundary(3));
  CHECK_THROWS(TdcBins::cutoff_bin(100));
}

TEST_CASE("pair construction: labels, histogram coverage, errors") {
  Fixture& f = fixture();
  RandomStream rng(61);
  TdcPairs pairs = make_tdc_pairs(f.ds, f.ec, 8, 500, rng);
  long total = 0;
  int covered = 0;
  for (long h : pairs.histogram) {
    total += h;
    if (h > 0) ++covered;
  }
  CHECK(total == static_cast<long>(pairs.inputs.cols()));
  CHECK(covered >= 7);
  CHECK(pairs.histogram[TdcBins::K - 1] >= 500);  // cross pairs go to the top bin
  for (int label : pairs.labels) {
    CHECK(label >= 0);
    CHECK(label < TdcBins::K);
  }

  DemoDataset empty;
  CHECK_THROWS(make_tdc_pairs(empty, f.ec, 8, 10, rng));
}

TEST_CASE("two separable classes train to near-perfect accuracy") {
  RandomStream rng(62);
  TdcPairs pairs;
  pairs.feature_dim = 2;
  const int n = 1200;
  pairs.inputs.resize(4, n);
  for (int i = 0; i < n; ++i) {
    int label = i % 2 ? 0 : TdcBins::K - 1;
    for (int k = 0; k < 4; ++k)
      pairs.inputs(k, i) = static_cast<float>(rng.uniform(-0.3, 0.3) + (label ? 3.0 : -3.0));
    pairs.labels.push_back(label);
    pairs.histogram[label] += 1;
  }
  TdcHyperparams hp;
  hp.hidden = 16;
  hp.epochs = 60;
  hp.batch_size = 64;
  TdcEval eval;
  train_tdc(pairs, hp, &eval);
  CHECK(eval.accuracy_exact >= 0.99);
}

TEST_CASE("training requires at least two classes") {
  TdcPairs pairs;
  pairs.feature_dim = 1;
  pairs.inputs = Matrix::Zero(2, 10);
  for (int i = 0; i < 10; ++i) pairs.labels.push_back(0);
  pairs.histogram[0] = 10;
  CHECK_THROWS(train_tdc(pairs, TdcHyperparams{}, nullptr));
}

TEST_CASE("medium-scale accuracy and adjacent-bin confusion structure") {
  Fixture& f = fixture();
  MESSAGE("exact ", f.eval.accuracy_exact, " within-one ", f.eval.accuracy_within_one);
  CHECK(f.eval.accuracy_exact >= 0.6);
  CHECK(f.eval.accuracy_within_one >= 0.85);

  long errors = 0, adjacent = 0;
  for (int t = 0; t < TdcBins::K; ++t) {
    for (int p = 0; p < TdcBins::K; ++p) {
      if (t == p) continue;
      errors += f.eval.confusion[t][p];
      if (std::abs(t - p) == 1) adjacent += f.eval.confusion[t][p];
    }
  }
  MESSAGE("adjacent ", adjacent, " of ", errors);
  CHECK(adjacent * 2 >= errors);  // off-by-one bins dominate the mistakes
}

TEST_CASE("self pairs land in the zero bin") {
  Fixture& f = fixture();
  RandomStream rng(63);
  int zero = 0;
  const int n = 300;
  for (int i = 0; i < n; ++i) {
    State s = sample_task(f.ds, rng).goal;
    BinPrediction p = predict_bin(f.tdc, s, s, f.ec);
    if (p.bin == 0) ++zero;
  }
  CHECK(static_cast<double>(zero) / n >= 0.9);
}

TEST_CASE("predictions are valid distributions and deterministic") {
  Fixture& f = fixture();
  RandomStream rng(64);
  for (int i = 0; i < 50; ++i) {
    State a = sample_task(f.ds, rng).goal;
    State b = sample_task(f.ds, rng).goal;
    BinPrediction p = predict_bin(f.tdc, a, b, f.ec);
    CHECK(p.proba.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.proba.minCoeff() >= 0.0f);
    CHECK(predict_bin(f.tdc, a, b, f.ec).bin == p.bin);
  }
}

TEST_CASE("argmax is invariant to positive logit scaling") {
  Fixture& f = fixture();
  RandomStream rng(65);
  for (int i = 0; i < 50; ++i) {
    const int fd = feature_dim(f.ec);
    Vector in(2 * fd);
    in.head(fd) = observe_f(sample_task(f.ds, rng).goal, f.ec);
    in.tail(fd) = observe_f(sample_task(f.ds, rng).goal, f.ec);
    Vector logits = f.tdc.net.forward1(in);
    int a = 0, b = 0;
    softmax(logits).maxCoeff(&a);
    softmax(Vector(3.0f * logits)).maxCoeff(&b);
    CHECK(a == b);
  }
}

TEST_CASE("asymmetric pairs are allowed") {
  Fixture& f = fixture();
  State desk = canonical_init(f.ec);
  State sealed = desk;  // block inside the closed drawer: nearby in L2, far in time
  sealed.block_zone = Zone::Drawer;
  sealed.block = f.ec.drawer_anchor(sealed.drawer_ext);
  BinPrediction ab = predict_bin(f.tdc, desk, sealed, f.ec);
  BinPrediction ba = predict_bin(f.tdc, sealed, desk, f.ec);
  // Nothing forces symmetry; the distributions generally differ.
  CHECK((ab.proba - ba.proba).norm() > 0.0f);
  MESSAGE("desk->sealed bin ", ab.bin, ", sealed->desk bin ", ba.bin);
}

TEST_CASE("monotone tendency: nearer pairs get smaller bins on average") {
  Fixture& f = fixture();
  double near = 0, mid = 0, far = 0;
  int n_near = 0, n_mid = 0, n_far = 0;
  const int start = static_cast<int>(f.ds.rollouts.size()) - 200;  // held-out tail
  for (size_t id = start; id < f.ds.rollouts.size(); ++id) {
    const auto& r = f.ds.rollouts[id];
    const int len = static_cast<int>(r.states.size());
    for (int t = 0; t + 8 < len; t += 7) {
      near += predict_bin(f.tdc, r.states[t], r.states[t + 8], f.ec).bin;
      ++n_near;
    }
    for (int t = 0; t + 28 < len; t += 7) {
      mid += predict_bin(f.tdc, r.states[t], r.states[t + 28], f.ec).bin;
      ++n_mid;
    }
    // Far pairs live across rollouts (within-rollout deltas of 128 do not
    // exist once trajectories stop at their goals).
    far += predict_bin(f.tdc, r.states[0],
                       f.ds.rollouts[id - 100].states[0], f.ec)
               .bin;
    ++n_far;
  }
  near /= n_near;
  mid /= n_mid;
  far /= n_far;
  MESSAGE("mean bin: delta8 ", near, " delta28 ", mid, " cross ", far);
  CHECK(near < mid);
  CHECK(mid < far);
}

TEST_CASE("batched predictions match the single-pair path") {
  Fixture& f = fixture();
  RandomStream rng(66);
  TdcBatch batch(f.tdc, 64);
  std::vector<State> nodes;
  for (int i = 0; i < 100; ++i) {
    nodes.push_back(sample_task(f.ds, rng).goal);
    batch.add_node(observe_f(nodes.back(), f.ec));
  }
  std::vector<int> bins;
  for (int trial = 0; trial < 20; ++trial) {
    State goal = sample_task(f.ds, rng).goal;
    batch.predict_bins(observe_f(goal, f.ec), bins);
    REQUIRE(bins.size() == nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i)
      CHECK(bins[i] == predict_bin(f.tdc, nodes[i], goal, f.ec).bin);
  }
}

TEST_CASE("save/load keeps predictions") {
  Fixture& f = fixture();
  save_tdc(f.tdc, "/tmp/belt_tdc_test.net");
  TemporalDistanceClassifier back = load_tdc("/tmp/belt_tdc_test.net");
  RandomStream rng(67);
  for (int i = 0; i < 20; ++i) {
    State a = sample_task(f.ds, rng).goal;
    State b = sample_task(f.ds, rng).goal;
    CHECK(predict_bin(back, a, b, f.ec).bin == predict_bin(f.tdc, a, b, f.ec).bin);
  }
}
