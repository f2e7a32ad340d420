#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "belt/mlp.hpp"

using namespace belt;

TEST_CASE("regression learns a linear map") {
  RandomStream rng(1);
  const int n = 2000;
  Matrix x(3, n), y(2, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) x(k, i) = static_cast<float>(rng.uniform(-2.0, 2.0));
    y(0, i) = 2.0f * x(0, i) - x(1, i);
    y(1, i) = 0.5f * x(2, i) + 1.0f;
  }
  Mlp net = Mlp::make(3, 32, 2, 4);
  TrainOptions opt;
  opt.epochs = 40;
  TrainReport rep = train(net, x, y, opt);
  CHECK(rep.holdout_loss < 1e-2);
  CHECK(mean_l2_error(net, x, y) < 0.2);
  CHECK(net.finite());
}

TEST_CASE("classification separates two blobs") {
  RandomStream rng(2);
  const int n = 1500;
  Matrix x(2, n), y(1, n);
  for (int i = 0; i < n; ++i) {
    int label = i % 2;
    x(0, i) = static_cast<float>(rng.uniform(-0.5, 0.5) + (label ? 2.0 : -2.0));
    x(1, i) = static_cast<float>(rng.uniform(-0.5, 0.5));
    y(0, i) = static_cast<float>(label);
  }
  Mlp net = Mlp::make(2, 16, 2, 5);
  TrainOptions opt;
  opt.epochs = 20;
  opt.classification = true;
  TrainReport rep = train(net, x, y, opt);
  CHECK(rep.holdout_accuracy >= 0.99);

  Matrix proba = net.predict_proba(x.leftCols(10));
  for (int i = 0; i < proba.cols(); ++i)
    CHECK(proba.col(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("training is deterministic for a fixed seed") {
  RandomStream rng(3);
  Matrix x(2, 300), y(1, 300);
  for (int i = 0; i < 300; ++i) {
    x(0, i) = static_cast<float>(rng.uniform(-1, 1));
    x(1, i) = static_cast<float>(rng.uniform(-1, 1));
    y(0, i) = x(0, i) * x(1, i);
  }
  TrainOptions opt;
  opt.epochs = 5;
  Mlp a = Mlp::make(2, 8, 1, 9);
  Mlp b = Mlp::make(2, 8, 1, 9);
  train(a, x, y, opt);
  train(b, x, y, opt);
  CHECK(a.w1 == b.w1);
  CHECK(a.w3 == b.w3);
  CHECK(a.b3 == b.b3);
}

TEST_CASE("save/load round-trips parameters exactly") {
  Mlp net = Mlp::make(4, 8, 3, 11);
  net.classifier = true;
  std::string path = "/tmp/belt_test_net.net";
  save_mlp(net, path, R"({"kind":"test"})");
  std::string meta;
  Mlp back = load_mlp(path, &meta);
  CHECK(back.w1 == net.w1);
  CHECK(back.w2 == net.w2);
  CHECK(back.w3 == net.w3);
  CHECK(back.b2 == net.b2);
  CHECK(back.classifier);
  CHECK(meta.find("test") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("non-finite data raises a training error") {
  Matrix x(1, 4), y(1, 4);
  x << 1.0f, 2.0f, 3.0f, 4.0f;
  y << 1.0f, std::numeric_limits<float>::quiet_NaN(), 3.0f, 4.0f;
  Mlp net = Mlp::make(1, 4, 1, 1);
  TrainOptions opt;
  opt.epochs = 2;
  opt.batch_size = 4;
  CHECK_THROWS(train(net, x, y, opt));
}
