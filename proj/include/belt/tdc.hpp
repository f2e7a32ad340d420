#pragma once

#include <array>
#include <string>
#include <vector>

#include "belt/demos.hpp"
#include "belt/models.hpp"

namespace belt {

// Exponential temporal-distance bins: [0,1), [1,2), [2,4), ..., [128,256).
struct TdcBins {
  static constexpr int K = 9;
  static constexpr std::array<int, K + 1> edges{0, 1, 2, 4, 8, 16, 32, 64, 128, 256};

  static int bin_of(int delta);               // delta clamped into the top bin
  static bool is_boundary(int cutoff_steps);  // valid d_cutoff values
  // Bins entirely below `cutoff` steps are indices < this value.
  static int cutoff_bin(int cutoff_steps);
};

struct TdcHyperparams {
  int hidden = 64;  // ample for the 30-dim pair input, and cheap inside the search loop
  int epochs = 12;
  int batch_size = 256;
  float learning_rate = 1e-3f;
  float holdout_fraction = 0.1f;
  int pairs_per_rollout = 24;
  int max_cross_pairs = 20000;
  uint64_t seed = 5;
};

// Labeled state pairs for classifier training. Inputs are the two feature
// vectors concatenated; labels are bin indices.
struct TdcPairs {
  Matrix inputs;
  std::vector<int> labels;
  std::array<long, TdcBins::K> histogram{};
  int feature_dim = 0;
};

// Within-rollout pairs (x_t, x_{t+delta}) labeled by the bin containing
// delta (delta stratified over the representable bins); cross-rollout pairs
// labeled with the top bin as a conservative "far" signal.
TdcPairs make_tdc_pairs(const DemoDataset& dataset, const EnvConfig& ec, int pairs_per_rollout,
                        int max_cross_pairs, RandomStream& rng);

struct TemporalDistanceClassifier {
  Mlp net;
};

struct TdcEval {
  double accuracy_exact = 0.0;
  double accuracy_within_one = 0.0;
  std::array<std::array<long, TdcBins::K>, TdcBins::K> confusion{};  // [true][predicted]
  int holdout_count = 0;
};

// Cross-entropy training over the pairs; throws unless at least two classes
// are present or if the loss goes non-finite. Held-out metrics returned via
// `eval` when non-null.
TemporalDistanceClassifier train_tdc(const TdcPairs& pairs, const TdcHyperparams& hp,
                                     TdcEval* eval = nullptr);

struct BinPrediction {
  int bin = 0;
  Vector proba;  // full distribution over the K bins
};

BinPrediction predict_bin(const TemporalDistanceClassifier& tdc, const State& from,
                          const State& to, const EnvConfig& ec);

// Incremental batch predictor used by the tree search: caches the per-node
// half of the first layer so each iteration only pays one small GEMM over
// all nodes.
class TdcBatch {
 public:
  TdcBatch(const TemporalDistanceClassifier& tdc, int reserve);

  int size() const { return count_; }
  void add_node(const Vector& node_features);
  // Predicted bin per cached node for one goal.
  void predict_bins(const Vector& goal_features, std::vector<int>& bins) const;

 private:
  const Mlp* net_;
  int half_;  // per-state feature dimension
  Matrix w1a_, w1b_;
  Matrix cache_;  // hidden x capacity, per-node first-layer contributions
  int count_ = 0;
};

void save_tdc(const TemporalDistanceClassifier& tdc, const std::string& path);
TemporalDistanceClassifier load_tdc(const std::string& path);

}  // namespace belt
