#include "capimac/repr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace capimac::repr {

namespace {

std::span<const double> row_span(const RowVector& r) {
  return {r.data(), static_cast<std::size_t>(r.size())};
}

void check_batch(const PairBatch& batch) {
  const std::size_t n = batch.y.size();
  if (n < 1) throw Error("pair batch is empty");
  if (static_cast<std::size_t>(batch.left.rows()) != n || static_cast<std::size_t>(batch.right.rows()) != n) {
    throw Error("pair batch: left, right and labels differ in length");
  }
  if (batch.left.cols() != batch.right.cols()) throw Error("pair batch: left and right widths differ");
  for (int y : batch.y) {
    if (y != 0 && y != 1) throw Error("pair batch: labels must be 0 or 1");
  }
}

void check_loss_params(double margin, double range) {
  if (!(margin > 0.0)) throw Error("margin must be positive");
  if (!(range > 0.0)) throw Error("range factor must be positive");
}

// dLoss/dD for one pair, without the 1/(2n) factor.
double term_slope(double d, int label, double margin, double range) {
  if (label == 1) return 2.0 * d;
  const double g = range * margin * d - d * d * d;
  if (g <= 0.0) return 0.0;
  return 2.0 * g * (range * margin - 3.0 * d * d) / margin;
}

struct Forward {
  Matrix pre;     // x W1 + b1
  Matrix hidden;  // relu(pre)
  Matrix out;
};

Forward forward(const EncoderParams& p, const Matrix& x) {
  Forward f;
  f.pre.noalias() = x * p.w1;
  f.pre.rowwise() += p.b1;
  f.hidden = f.pre.cwiseMax(0.0);
  f.out.noalias() = f.hidden * p.w2;
  f.out.rowwise() += p.b2;
  return f;
}

EncoderParams backward(const EncoderParams& p, const Matrix& x, const Forward& f, const Matrix& grad_out) {
  EncoderParams g;
  g.w2.noalias() = f.hidden.transpose() * grad_out;
  g.b2 = grad_out.colwise().sum();
  Matrix grad_hidden = grad_out * p.w2.transpose();
  grad_hidden = grad_hidden.cwiseProduct((f.pre.array() > 0.0).cast<double>().matrix());
  g.w1.noalias() = x.transpose() * grad_hidden;
  g.b1 = grad_hidden.colwise().sum();
  return g;
}

void check_shape(const EncoderParams& p, Eigen::Index input_width) {
  if (p.w1.rows() != input_width) {
    throw Error("encode: input width " + std::to_string(input_width) + " does not match encoder width " +
                std::to_string(p.w1.rows()));
  }
  if (p.b1.size() != p.w1.cols() || p.w2.rows() != p.w1.cols() || p.b2.size() != p.w2.cols()) {
    throw Error("encode: inconsistent encoder shapes");
  }
}

}  // namespace

EncoderParams EncoderParams::random(std::size_t input, std::size_t hidden, std::size_t latent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&rng](auto& m, std::size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-s, s);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  };
  EncoderParams p = zeros(input, hidden, latent);
  fill(p.w1, input);
  fill(p.b1, input);
  fill(p.w2, hidden);
  fill(p.b2, hidden);
  return p;
}

EncoderParams EncoderParams::zeros(std::size_t input, std::size_t hidden, std::size_t latent) {
  const auto in = static_cast<Eigen::Index>(input);
  const auto hid = static_cast<Eigen::Index>(hidden);
  const auto lat = static_cast<Eigen::Index>(latent);
  return {Matrix::Zero(in, hid), RowVector::Zero(hid), Matrix::Zero(hid, lat), RowVector::Zero(lat)};
}

std::size_t EncoderParams::parameter_count() const noexcept {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

std::vector<double> EncoderParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  out.insert(out.end(), w1.data(), w1.data() + w1.size());
  out.insert(out.end(), b1.data(), b1.data() + b1.size());
  out.insert(out.end(), w2.data(), w2.data() + w2.size());
  out.insert(out.end(), b2.data(), b2.data() + b2.size());
  return out;
}

void EncoderParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw Error("EncoderParams::assign: wrong parameter count");
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.data());
  it += w1.size();
  std::copy_n(it, b1.size(), b1.data());
  it += b1.size();
  std::copy_n(it, w2.size(), w2.data());
  it += w2.size();
  std::copy_n(it, b2.size(), b2.data());
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error("euclidean_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(sum);
}

double euclidean_distance(const RowVector& u, const RowVector& v) {
  return euclidean_distance(row_span(u), row_span(v));
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error("cosine_distance: length mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw Error("cosine_distance: zero vector");
  const double c = std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
  return 1.0 - c;
}

double cosine_distance(const RowVector& u, const RowVector& v) { return cosine_distance(row_span(u), row_span(v)); }

double contrastive_loss(const PairBatch& batch, double margin) {
  check_batch(batch);
  if (!(margin > 0.0)) throw Error("margin must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double d = (batch.left.row(r) - batch.right.row(r)).norm();
    if (batch.y[i] == 1) {
      total += d * d;
    } else {
      const double hinge = std::max(margin - d, 0.0);
      total += hinge * hinge;
    }
  }
  return total / static_cast<double>(batch.size());
}

double noise_contrastive_term(double distance, int label, double margin, double range) {
  if (label == 1) return distance * distance;
  const double g = std::max(range * margin * distance - distance * distance * distance, 0.0);
  return g * g / margin;
}

double noise_contrastive_loss(const PairBatch& batch, double margin, double range) {
  check_batch(batch);
  check_loss_params(margin, range);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double d = cosine_distance(RowVector(batch.left.row(r)), RowVector(batch.right.row(r)));
    total += noise_contrastive_term(d, batch.y[i], margin, range);
  }
  return total / (2.0 * static_cast<double>(batch.size()));
}

PairBatch sample_pairs(const Matrix& left, const Matrix& right, double neg_ratio, std::uint64_t seed) {
  const auto a = static_cast<std::size_t>(left.rows());
  if (a < 2) throw Error("sample_pairs: need at least two aligned rows");
  if (static_cast<std::size_t>(right.rows()) != a) throw Error("sample_pairs: aligned blocks differ in length");
  if (!(neg_ratio >= 0.0)) throw Error("sample_pairs: neg_ratio must be >= 0");

  const auto negatives = static_cast<std::size_t>(std::floor(neg_ratio * static_cast<double>(a) + 1e-9));
  PairBatch batch;
  batch.left_index.reserve(a + negatives);
  batch.right_index.reserve(a + negatives);
  for (std::size_t i = 0; i < a; ++i) {
    batch.left_index.push_back(i);
    batch.right_index.push_back(i);
    batch.y.push_back(1);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, a - 1);
  std::uniform_int_distribution<std::size_t> other(0, a - 2);
  for (std::size_t n = 0; n < negatives; ++n) {
    const std::size_t i = pick(rng);
    std::size_t j = other(rng);
    if (j >= i) ++j;
    batch.left_index.push_back(i);
    batch.right_index.push_back(j);
    batch.y.push_back(0);
  }
  const auto total = static_cast<Eigen::Index>(batch.y.size());
  batch.left.resize(total, left.cols());
  batch.right.resize(total, right.cols());
  for (Eigen::Index r = 0; r < total; ++r) {
    batch.left.row(r) = left.row(static_cast<Eigen::Index>(batch.left_index[static_cast<std::size_t>(r)]));
    batch.right.row(r) = right.row(static_cast<Eigen::Index>(batch.right_index[static_cast<std::size_t>(r)]));
  }
  return batch;
}

Matrix encode(const EncoderParams& params, const Matrix& x) {
  check_shape(params, x.cols());
  return forward(params, x).out;
}

LossAndGradient loss_gradient(const EncoderParams& left, const EncoderParams& right, const PairBatch& batch,
                              const LossConfig& config) {
  check_batch(batch);
  check_loss_params(config.margin, config.range);
  check_shape(left, batch.left.cols());
  check_shape(right, batch.right.cols());
  if (left.latent_width() != right.latent_width()) throw Error("loss_gradient: encoders differ in latent width");

  const Forward fl = forward(left, batch.left);
  const Forward fr = forward(right, batch.right);
  const Eigen::Index n = fl.out.rows();
  const double scale = 1.0 / (2.0 * static_cast<double>(n));

  Matrix grad_u = Matrix::Zero(n, fl.out.cols());
  Matrix grad_v = Matrix::Zero(n, fr.out.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = fl.out.row(i);
    const auto v = fr.out.row(i);
    const double nu = u.norm();
    const double nv = v.norm();
    if (!(nu > 0.0) || !(nv > 0.0)) {
      throw Error("loss_gradient: encoded pair " + std::to_string(i) + " has a zero vector");
    }
    const double c = u.dot(v) / (nu * nv);
    const double d = 1.0 - c;
    const int label = batch.y[static_cast<std::size_t>(i)];
    loss += noise_contrastive_term(d, label, config.margin, config.range);
    const double slope = scale * term_slope(d, label, config.margin, config.range);
    if (slope == 0.0) continue;
    // dD/du = -(v / (|u||v|) - c u / |u|^2), symmetric for v.
    grad_u.row(i) = -slope * (v / (nu * nv) - c * u / (nu * nu));
    grad_v.row(i) = -slope * (u / (nu * nv) - c * v / (nv * nv));
  }

  LossAndGradient out;
  out.loss = loss * scale;
  out.grad_left = backward(left, batch.left, fl, grad_u);
  out.grad_right = backward(right, batch.right, fr, grad_v);
  return out;
}

TrainedEncoders train_encoders(const Matrix& left_aligned, const Matrix& right_aligned, const LossConfig& config,
                               std::size_t latent_width) {
  if (left_aligned.rows() == 0 || right_aligned.rows() == 0) throw Error("train_encoders: aligned block is empty");
  if (left_aligned.cols() != right_aligned.cols()) throw Error("train_encoders: input widths differ");
  if (!(config.learning_rate > 0.0)) throw Error("train_encoders: learning rate must be positive");
  if (config.epochs < 1) throw Error("train_encoders: epochs must be >= 1");
  if (latent_width < 1) throw Error("train_encoders: latent width must be >= 1");
  check_loss_params(config.margin, config.range);

  const auto input = static_cast<std::size_t>(left_aligned.cols());
  const PairBatch batch = sample_pairs(left_aligned, right_aligned, config.neg_ratio, derive_seed(config.seed, 1));

  TrainedEncoders out;
  out.left = EncoderParams::random(input, 2 * latent_width, latent_width, derive_seed(config.seed, 0));
  out.right = out.left;
  out.loss_history.reserve(config.epochs);

  const double lr = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const LossAndGradient step = loss_gradient(out.left, out.right, batch, config);
    if (!std::isfinite(step.loss)) {
      throw Error("train_encoders: loss became non-finite at epoch " + std::to_string(epoch));
    }
    out.loss_history.push_back(step.loss);
    out.left.w1 -= lr * step.grad_left.w1;
    out.left.b1 -= lr * step.grad_left.b1;
    out.left.w2 -= lr * step.grad_left.w2;
    out.left.b2 -= lr * step.grad_left.b2;
    out.right.w1 -= lr * step.grad_right.w1;
    out.right.b1 -= lr * step.grad_right.b1;
    out.right.w2 -= lr * step.grad_right.w2;
    out.right.b2 -= lr * step.grad_right.b2;
    if (!out.left.w1.allFinite() || !out.right.w1.allFinite() || !out.left.w2.allFinite() ||
        !out.right.w2.allFinite()) {
      throw Error("train_encoders: parameters became non-finite at epoch " + std::to_string(epoch));
    }
  }
  return out;
}

std::size_t default_latent_width(std::size_t input_width) { return std::min<std::size_t>(input_width, 64); }

}  // namespace capimac::repr
