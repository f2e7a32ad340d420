#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "belt/random.hpp"

namespace belt {

using Matrix = Eigen::MatrixXf;
using Vector = Eigen::VectorXf;

// Per-dimension standardization fitted on training data.
struct Normalizer {
  Vector mean;
  Vector stddev;  // floored away from zero

  void fit(const Matrix& samples);                 // samples in columns
  Matrix apply(const Matrix& samples) const;
  Matrix invert(const Matrix& samples) const;
  Vector apply(const Vector& v) const;
  Vector invert(const Vector& v) const;
};

// Small feedforward network, two ReLU hidden layers, linear head. Samples
// are matrix columns throughout.
struct Mlp {
  Matrix w1, w2, w3;
  Vector b1, b2, b3;
  Normalizer in_norm;
  Normalizer out_norm;     // used only for regression heads
  bool classifier = false;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int output_dim() const { return static_cast<int>(w3.rows()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }

  static Mlp make(int in, int hidden, int out, uint64_t seed);

  // Raw head outputs (denormalized for regression; logits for classifiers).
  Matrix forward(const Matrix& inputs) const;
  Vector forward1(const Vector& input) const;

  // Class probabilities (classifier heads only).
  Matrix predict_proba(const Matrix& inputs) const;

  bool finite() const;
};

Vector softmax(const Vector& logits);

struct TrainOptions {
  int epochs = 10;
  int batch_size = 256;
  float learning_rate = 1e-3f;
  float holdout_fraction = 0.1f;
  uint64_t seed = 1;
  bool classification = false;
  bool verbose = false;
};

struct EpochMetrics {
  int epoch;
  double train_loss;
  double holdout_loss;
  double holdout_accuracy;  // classifiers only, else 0
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  double holdout_loss = 0.0;
  double holdout_accuracy = 0.0;
  int holdout_count = 0;
};

// Adam minibatch training. Regression minimizes mean squared error on
// standardized targets; classification minimizes softmax cross-entropy with
// integer labels in targets(0, i). Throws on non-finite loss.
TrainReport train(Mlp& net, const Matrix& inputs, const Matrix& targets,
                  const TrainOptions& options);

// Mean L2 distance between predictions and targets in raw units.
double mean_l2_error(const Mlp& net, const Matrix& inputs, const Matrix& targets);

void save_mlp(const Mlp& net, const std::string& path, const std::string& meta_json);
Mlp load_mlp(const std::string& path, std::string* meta_json = nullptr);

}  // namespace belt
