#include "belt/tdc.hpp"

#include <algorithm>
#include <stdexcept>

namespace belt {

int TdcBins::bin_of(int delta) {
  if (delta < 0) throw std::invalid_argument("bin_of: negative delta");
  for (int k = 0; k < K; ++k)
    if (delta < edges[k + 1]) return k;
  return K - 1;
}

bool TdcBins::is_boundary(int cutoff) {
  for (int k = 1; k <= K; ++k)
    if (edges[k] == cutoff) return true;
  return false;
}

int TdcBins::cutoff_bin(int cutoff) {
  if (!is_boundary(cutoff))
    throw std::invalid_argument("d_cutoff must be a bin boundary, got " +
                                std::to_string(cutoff));
  for (int k = 1; k <= K; ++k)
    if (edges[k] == cutoff) return k;
  return K;
}

TdcPairs make_tdc_pairs(const DemoDataset& ds, const EnvConfig& ec, int pairs_per_rollout,
                        int max_cross_pairs, RandomStream& rng) {
  if (ds.rollouts.empty()) throw std::invalid_argument("make_tdc_pairs: empty dataset");
  const int fd = feature_dim(ec);

  struct PairRef {
    int r1, t1, r2, t2, label;
  };
  std::vector<PairRef> refs;

  for (int r = 0; r < static_cast<int>(ds.rollouts.size()); ++r) {
    const int len = static_cast<int>(ds.rollouts[r].states.size());
    const int max_delta = len - 1;
    // Bins representable within this rollout.
    int top_bin = TdcBins::bin_of(max_delta);
    for (int p = 0; p < pairs_per_rollout; ++p) {
      int bin = rng.uniform_int(0, top_bin);
      int lo = TdcBins::edges[bin];
      int hi = std::min(TdcBins::edges[bin + 1] - 1, max_delta);
      int delta = rng.uniform_int(lo, hi);
      int t = rng.uniform_int(0, max_delta - delta);
      refs.push_back({r, t, r, t + delta, TdcBins::bin_of(delta)});
    }
  }
  const int cross = std::min<long>(max_cross_pairs, static_cast<long>(refs.size()));
  if (ds.rollouts.size() > 1) {
    for (int p = 0; p < cross; ++p) {
      int r1 = static_cast<int>(rng.index(ds.rollouts.size()));
      int r2 = static_cast<int>(rng.index(ds.rollouts.size() - 1));
      if (r2 >= r1) ++r2;
      int t1 = static_cast<int>(rng.index(ds.rollouts[r1].states.size()));
      int t2 = static_cast<int>(rng.index(ds.rollouts[r2].states.size()));
      refs.push_back({r1, t1, r2, t2, TdcBins::K - 1});
    }
  }

  TdcPairs pairs;
  pairs.feature_dim = fd;
  pairs.inputs.resize(2 * fd, refs.size());
  pairs.labels.reserve(refs.size());
  for (size_t i = 0; i < refs.size(); ++i) {
    const PairRef& p = refs[i];
    pairs.inputs.col(i).head(fd) = observe_f(ds.rollouts[p.r1].states[p.t1], ec);
    pairs.inputs.col(i).tail(fd) = observe_f(ds.rollouts[p.r2].states[p.t2], ec);
    pairs.labels.push_back(p.label);
    pairs.histogram[p.label] += 1;
  }
  return pairs;
}

TemporalDistanceClassifier train_tdc(const TdcPairs& pairs, const TdcHyperparams& hp,
                                     TdcEval* eval) {
  long classes = 0;
  for (long c : pairs.histogram)
    if (c > 0) ++classes;
  if (classes < 2) throw std::invalid_argument("train_tdc: need at least 2 classes present");

  Matrix labels(1, pairs.labels.size());
  for (size_t i = 0; i < pairs.labels.size(); ++i) labels(0, i) = pairs.labels[i];

  TemporalDistanceClassifier tdc;
  tdc.net = Mlp::make(static_cast<int>(pairs.inputs.rows()), hp.hidden, TdcBins::K, hp.seed);
  TrainOptions opt;
  opt.epochs = hp.epochs;
  opt.batch_size = hp.batch_size;
  opt.learning_rate = hp.learning_rate;
  opt.holdout_fraction = hp.holdout_fraction;
  opt.seed = hp.seed;
  opt.classification = true;
  train(tdc.net, pairs.inputs, labels, opt);

  if (eval) {
    // Rebuild the same deterministic holdout split for the confusion matrix.
    const int n = static_cast<int>(pairs.inputs.cols());
    RandomStream rng(opt.seed);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    const int holdout = std::min(n - 1, static_cast<int>(std::round(n * opt.holdout_fraction)));
    const int ntrain = n - holdout;
    *eval = TdcEval{};
    eval->holdout_count = holdout;
    long exact = 0, within = 0;
    for (int i = ntrain; i < n; ++i) {
      Vector p = softmax(tdc.net.forward1(pairs.inputs.col(perm[i])));
      int arg = 0;
      p.maxCoeff(&arg);
      int truth = pairs.labels[perm[i]];
      eval->confusion[truth][arg] += 1;
      if (arg == truth) ++exact;
      if (std::abs(arg - truth) <= 1) ++within;
    }
    if (holdout > 0) {
      eval->accuracy_exact = static_cast<double>(exact) / holdout;
      eval->accuracy_within_one = static_cast<double>(within) / holdout;
    }
  }
  return tdc;
}

BinPrediction predict_bin(const TemporalDistanceClassifier& tdc, const State& from,
                          const State& to, const EnvConfig& ec) {
  const int fd = feature_dim(ec);
  Vector in(2 * fd);
  in.head(fd) = observe_f(from, ec);
  in.tail(fd) = observe_f(to, ec);
  BinPrediction out;
  out.proba = softmax(tdc.net.forward1(in));
  out.proba.maxCoeff(&out.bin);
  return out;
}

TdcBatch::TdcBatch(const TemporalDistanceClassifier& tdc, int reserve)
    : net_(&tdc.net), half_(tdc.net.input_dim() / 2) {
  // Split the first layer (and the input normalizer) into the node half and
  // the goal half; per-node contributions are cached once.
  Matrix w1n(net_->w1.rows(), net_->w1.cols());
  for (int j = 0; j < net_->w1.cols(); ++j)
    w1n.col(j) = net_->w1.col(j) / net_->in_norm.stddev[j];
  w1a_ = w1n.leftCols(half_);
  w1b_ = w1n.rightCols(half_);
  cache_.resize(net_->w1.rows(), std::max(reserve, 16));
}

void TdcBatch::add_node(const Vector& node_features) {
  if (count_ == cache_.cols()) cache_.conservativeResize(Eigen::NoChange, cache_.cols() * 2);
  cache_.col(count_) =
      w1a_ * (node_features - net_->in_norm.mean.head(half_));
  ++count_;
}

void TdcBatch::predict_bins(const Vector& goal_features, std::vector<int>& bins) const {
  Vector goal_bias =
      w1b_ * (goal_features - net_->in_norm.mean.tail(half_)) + net_->b1;
  Matrix h1 = ((cache_.leftCols(count_).colwise() + goal_bias).cwiseMax(0.0f));
  Matrix h2 = ((net_->w2 * h1).colwise() + net_->b2).cwiseMax(0.0f);
  Matrix logits = (net_->w3 * h2).colwise() + net_->b3;
  bins.resize(count_);
  for (int i = 0; i < count_; ++i) {
    int arg = 0;
    logits.col(i).maxCoeff(&arg);
    bins[i] = arg;
  }
}

void save_tdc(const TemporalDistanceClassifier& tdc, const std::string& path) {
  save_mlp(tdc.net, path, R"({"kind":"tdc"})");
}

TemporalDistanceClassifier load_tdc(const std::string& path) {
  TemporalDistanceClassifier tdc;
  tdc.net = load_mlp(path);
  return tdc;
}

}  // namespace belt
