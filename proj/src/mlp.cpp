#include "belt/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace belt {

void Normalizer::fit(const Matrix& samples) {
  mean = samples.rowwise().mean();
  Matrix centered = samples.colwise() - mean;
  stddev = (centered.array().square().rowwise().mean()).sqrt().matrix();
  for (int i = 0; i < stddev.size(); ++i)
    if (stddev[i] < 1e-6f) stddev[i] = 1.0f;
}

Matrix Normalizer::apply(const Matrix& s) const {
  return (s.colwise() - mean).array().colwise() / stddev.array();
}
Matrix Normalizer::invert(const Matrix& s) const {
  return (s.array().colwise() * stddev.array()).matrix().colwise() + mean;
}
Vector Normalizer::apply(const Vector& v) const {
  return ((v - mean).array() / stddev.array()).matrix();
}
Vector Normalizer::invert(const Vector& v) const {
  return (v.array() * stddev.array()).matrix() + mean;
}

Mlp Mlp::make(int in, int hidden, int out, uint64_t seed) {
  Mlp net;
  RandomStream rng(seed);
  auto init = [&](Matrix& w, int rows, int cols) {
    w.resize(rows, cols);
    const float limit = std::sqrt(6.0f / static_cast<float>(cols));
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i)
        w(i, j) = static_cast<float>(rng.uniform(-limit, limit));
  };
  init(net.w1, hidden, in);
  init(net.w2, hidden, hidden);
  init(net.w3, out, hidden);
  net.b1 = Vector::Zero(hidden);
  net.b2 = Vector::Zero(hidden);
  net.b3 = Vector::Zero(out);
  net.in_norm.mean = Vector::Zero(in);
  net.in_norm.stddev = Vector::Ones(in);
  net.out_norm.mean = Vector::Zero(out);
  net.out_norm.stddev = Vector::Ones(out);
  return net;
}

namespace {

inline Matrix relu(const Matrix& x) { return x.cwiseMax(0.0f); }

// Head outputs in normalized space.
Matrix forward_normalized(const Mlp& net, const Matrix& x) {
  Matrix h1 = relu((net.w1 * x).colwise() + net.b1);
  Matrix h2 = relu((net.w2 * h1).colwise() + net.b2);
  return (net.w3 * h2).colwise() + net.b3;
}

}  // namespace

Matrix Mlp::forward(const Matrix& inputs) const {
  Matrix y = forward_normalized(*this, in_norm.apply(inputs));
  return classifier ? y : out_norm.invert(y);
}

Vector Mlp::forward1(const Vector& input) const {
  Matrix y = forward(Matrix(input));
  return y.col(0);
}

Vector softmax(const Vector& logits) {
  Vector z = logits.array() - logits.maxCoeff();
  Vector e = z.array().exp();
  return e / e.sum();
}

Matrix Mlp::predict_proba(const Matrix& inputs) const {
  Matrix logits = forward(inputs);
  Matrix out(logits.rows(), logits.cols());
  for (int i = 0; i < logits.cols(); ++i) out.col(i) = softmax(logits.col(i));
  return out;
}

bool Mlp::finite() const {
  auto ok = [](const Matrix& m) { return m.allFinite(); };
  return ok(w1) && ok(w2) && ok(w3) && b1.allFinite() && b2.allFinite() && b3.allFinite();
}

namespace {

struct Adam {
  Matrix mw1, mw2, mw3, vw1, vw2, vw3;
  Vector mb1, mb2, mb3, vb1, vb2, vb3;
  float lr;
  float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
  long step = 0;

  explicit Adam(const Mlp& net, float learning_rate) : lr(learning_rate) {
    auto zm = [](const Matrix& w) { return Matrix::Zero(w.rows(), w.cols()); };
    auto zv = [](const Vector& b) { return Vector::Zero(b.size()); };
    mw1 = zm(net.w1); vw1 = zm(net.w1);
    mw2 = zm(net.w2); vw2 = zm(net.w2);
    mw3 = zm(net.w3); vw3 = zm(net.w3);
    mb1 = zv(net.b1); vb1 = zv(net.b1);
    mb2 = zv(net.b2); vb2 = zv(net.b2);
    mb3 = zv(net.b3); vb3 = zv(net.b3);
  }

  template <typename P, typename G, typename M>
  void update_one(P& p, const G& g, M& m, M& v) {
    m = beta1 * m + (1.0f - beta1) * g;
    v = beta2 * v + (1.0f - beta2) * g.cwiseProduct(g);
    const float c1 = 1.0f - std::pow(beta1, static_cast<float>(step));
    const float c2 = 1.0f - std::pow(beta2, static_cast<float>(step));
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

TrainReport train(Mlp& net, const Matrix& inputs, const Matrix& targets,
                  const TrainOptions& opt) {
  const int n = static_cast<int>(inputs.cols());
  if (n < 1) throw std::invalid_argument("train: no samples");
  net.classifier = opt.classification;

  RandomStream rng(opt.seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);

  const int holdout = std::min(n - 1, static_cast<int>(std::round(n * opt.holdout_fraction)));
  const int ntrain = n - holdout;

  Matrix xtrain(inputs.rows(), ntrain), xhold(inputs.rows(), std::max(holdout, 1));
  Matrix ytrain(targets.rows(), ntrain), yhold(targets.rows(), std::max(holdout, 1));
  for (int i = 0; i < ntrain; ++i) {
    xtrain.col(i) = inputs.col(perm[i]);
    ytrain.col(i) = targets.col(perm[i]);
  }
  for (int i = 0; i < holdout; ++i) {
    xhold.col(i) = inputs.col(perm[ntrain + i]);
    yhold.col(i) = targets.col(perm[ntrain + i]);
  }
  if (holdout == 0) {
    xhold = xtrain.leftCols(1);
    yhold = ytrain.leftCols(1);
  }

  net.in_norm.fit(xtrain);
  Matrix xn = net.in_norm.apply(xtrain);
  Matrix yn;
  if (opt.classification) {
    yn = ytrain;
  } else {
    net.out_norm.fit(ytrain);
    yn = net.out_norm.apply(ytrain);
  }

  auto holdout_eval = [&](double* accuracy) -> double {
    Matrix logits = forward_normalized(net, net.in_norm.apply(xhold));
    if (opt.classification) {
      double loss = 0.0;
      int correct = 0;
      for (int i = 0; i < logits.cols(); ++i) {
        Vector p = softmax(logits.col(i));
        int label = static_cast<int>(yhold(0, i));
        loss -= std::log(std::max(p[label], 1e-12f));
        int arg = 0;
        p.maxCoeff(&arg);
        if (arg == label) ++correct;
      }
      *accuracy = static_cast<double>(correct) / logits.cols();
      return loss / logits.cols();
    }
    Matrix yh = opt.classification ? yhold : net.out_norm.apply(yhold);
    *accuracy = 0.0;
    return (logits - yh).array().square().mean();
  };

  Adam adam(net, opt.learning_rate);
  TrainReport report;
  const int batches = (ntrain + opt.batch_size - 1) / opt.batch_size;
  std::vector<int> order(ntrain);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    // step decay late in training
    adam.lr = opt.learning_rate;
    if (epoch >= (opt.epochs * 6) / 10) adam.lr *= 0.3f;
    if (epoch >= (opt.epochs * 17) / 20) adam.lr *= 0.3f;
    rng.shuffle(order);
    double epoch_loss = 0.0;
    long seen = 0;
    for (int b = 0; b < batches; ++b) {
      const int lo = b * opt.batch_size;
      const int bs = std::min(opt.batch_size, ntrain - lo);
      Matrix x(xn.rows(), bs), y(yn.rows(), bs);
      for (int i = 0; i < bs; ++i) {
        x.col(i) = xn.col(order[lo + i]);
        y.col(i) = yn.col(order[lo + i]);
      }

      // forward
      Matrix z1 = (net.w1 * x).colwise() + net.b1;
      Matrix h1 = relu(z1);
      Matrix z2 = (net.w2 * h1).colwise() + net.b2;
      Matrix h2 = relu(z2);
      Matrix out = (net.w3 * h2).colwise() + net.b3;

      Matrix dout(out.rows(), bs);
      double loss = 0.0;
      if (opt.classification) {
        for (int i = 0; i < bs; ++i) {
          Vector p = softmax(out.col(i));
          int label = static_cast<int>(y(0, i));
          loss -= std::log(std::max(p[label], 1e-12f));
          dout.col(i) = p;
          dout(label, i) -= 1.0f;
        }
        loss /= bs;
        dout /= static_cast<float>(bs);
      } else {
        Matrix diff = out - y;
        loss = diff.array().square().mean();
        dout = diff * (2.0f / static_cast<float>(bs * out.rows()));
      }
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(b));
      epoch_loss += loss * bs;
      seen += bs;

      // backward
      Matrix dh2 = net.w3.transpose() * dout;
      Matrix dz2 = (z2.array() > 0.0f).select(dh2, Matrix::Zero(dh2.rows(), dh2.cols()));
      Matrix dh1 = net.w2.transpose() * dz2;
      Matrix dz1 = (z1.array() > 0.0f).select(dh1, Matrix::Zero(dh1.rows(), dh1.cols()));

      ++adam.step;
      adam.update_one(net.w3, Matrix(dout * h2.transpose()), adam.mw3, adam.vw3);
      adam.update_one(net.b3, Vector(dout.rowwise().sum()), adam.mb3, adam.vb3);
      adam.update_one(net.w2, Matrix(dz2 * h1.transpose()), adam.mw2, adam.vw2);
      adam.update_one(net.b2, Vector(dz2.rowwise().sum()), adam.mb2, adam.vb2);
      adam.update_one(net.w1, Matrix(dz1 * x.transpose()), adam.mw1, adam.vw1);
      adam.update_one(net.b1, Vector(dz1.rowwise().sum()), adam.mb1, adam.vb1);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = epoch_loss / seen;
    em.holdout_loss = holdout_eval(&em.holdout_accuracy);
    report.epochs.push_back(em);
  }

  if (!net.finite()) throw std::runtime_error("train: non-finite parameters after training");
  if (!report.epochs.empty()) {
    report.holdout_loss = report.epochs.back().holdout_loss;
    report.holdout_accuracy = report.epochs.back().holdout_accuracy;
  }
  report.holdout_count = holdout;
  return report;
}

double mean_l2_error(const Mlp& net, const Matrix& inputs, const Matrix& targets) {
  Matrix pred = net.forward(inputs);
  return (pred - targets).colwise().norm().mean();
}

void save_mlp(const Mlp& net, const std::string& path, const std::string& meta_json) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  nlohmann::json header;
  header["format"] = "belt-net";
  header["version"] = 1;
  header["shape"] = {net.input_dim(), net.hidden_dim(), net.output_dim()};
  header["classifier"] = net.classifier;
  header["meta"] = meta_json.empty() ? nlohmann::json::object()
                                     : nlohmann::json::parse(meta_json);
  std::string h = header.dump();
  uint64_t hlen = h.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  f.write(h.data(), hlen);
  auto put_m = [&](const Matrix& m) {
    f.write(reinterpret_cast<const char*>(m.data()), sizeof(float) * m.size());
  };
  auto put_v = [&](const Vector& v) {
    f.write(reinterpret_cast<const char*>(v.data()), sizeof(float) * v.size());
  };
  put_m(net.w1); put_v(net.b1);
  put_m(net.w2); put_v(net.b2);
  put_m(net.w3); put_v(net.b3);
  put_v(net.in_norm.mean); put_v(net.in_norm.stddev);
  put_v(net.out_norm.mean); put_v(net.out_norm.stddev);
}

Mlp load_mlp(const std::string& path, std::string* meta_json) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string h(hlen, '\0');
  f.read(h.data(), hlen);
  nlohmann::json header = nlohmann::json::parse(h);
  if (header.value("format", "") != "belt-net")
    throw std::runtime_error("not a belt-net file: " + path);
  auto shape = header["shape"];
  Mlp net = Mlp::make(shape[0], shape[1], shape[2], 0);
  net.classifier = header.value("classifier", false);
  if (meta_json) *meta_json = header["meta"].dump();
  auto get_m = [&](Matrix& m) {
    f.read(reinterpret_cast<char*>(m.data()), sizeof(float) * m.size());
  };
  auto get_v = [&](Vector& v) {
    f.read(reinterpret_cast<char*>(v.data()), sizeof(float) * v.size());
  };
  get_m(net.w1); get_v(net.b1);
  get_m(net.w2); get_v(net.b2);
  get_m(net.w3); get_v(net.b3);
  get_v(net.in_norm.mean); get_v(net.in_norm.stddev);
  get_v(net.out_norm.mean); get_v(net.out_norm.stddev);
  if (!f) throw std::runtime_error("truncated belt-net file: " + path);
  return net;
}

}  // namespace belt
