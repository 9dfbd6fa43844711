#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "capimac/types.hpp"

namespace capimac::repr {

/// Paired rows with a correspondence label (1 = positive, 0 = negative).
struct PairBatch {
  Matrix left;
  Matrix right;
  std::vector<int> y;
  IndexList left_index;
  IndexList right_index;

  std::size_t size() const noexcept { return y.size(); }
};

struct LossConfig {
  double margin = 1.0;          // m
  double range = 2.0;           // a, false-negative range factor
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  double neg_ratio = 1.0;
  std::uint64_t seed = 0;
};

/// Two affine layers with a rectifier in between:
/// y = relu(x W1 + b1) W2 + b2, applied row-wise.
struct EncoderParams {
  Matrix w1;     // input x hidden
  RowVector b1;  // hidden
  Matrix w2;     // hidden x latent
  RowVector b2;  // latent

  std::size_t input_width() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  std::size_t hidden_width() const noexcept { return static_cast<std::size_t>(w1.cols()); }
  std::size_t latent_width() const noexcept { return static_cast<std::size_t>(w2.cols()); }

  /// Uniform(-s, s) weights and biases with s = 1 / sqrt(fan_in).
  static EncoderParams random(std::size_t input, std::size_t hidden, std::size_t latent, std::uint64_t seed);
  static EncoderParams zeros(std::size_t input, std::size_t hidden, std::size_t latent);

  /// Flattened view order: w1, b1, w2, b2.
  std::size_t parameter_count() const noexcept;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

struct LossAndGradient {
  double loss = 0.0;
  EncoderParams grad_left;
  EncoderParams grad_right;
};

struct TrainedEncoders {
  EncoderParams left;
  EncoderParams right;
  /// Loss evaluated before each update; one entry per epoch.
  std::vector<double> loss_history;
};

double euclidean_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(const RowVector& u, const RowVector& v);

/// 1 - cos(u, v), in [0, 2].
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_distance(const RowVector& u, const RowVector& v);

/// Margin-based Euclidean contrastive loss; kept as the baseline the
/// pipeline does not use.
double contrastive_loss(const PairBatch& batch, double margin);

/// Cosine-distance noise-contrastive loss:
/// (1/2n) sum [ y D^2 + (1 - y) (1/m) max(a m D - D^3, 0)^2 ].
/// The negative term vanishes once D^2 >= a m, and it is small for nearby
/// negatives, which is what damps false negatives.
double noise_contrastive_loss(const PairBatch& batch, double margin, double range);

/// Per-pair term of noise_contrastive_loss without the 1/(2n) factor.
double noise_contrastive_term(double distance, int label, double margin, double range);

/// All aligned positives (i, i) followed by floor(neg_ratio * A) negatives
/// (i, j), j != i.
PairBatch sample_pairs(const Matrix& left, const Matrix& right, double neg_ratio, std::uint64_t seed);

Matrix encode(const EncoderParams& params, const Matrix& x);

/// noise_contrastive_loss of the encoded batch and its exact gradient with
/// respect to both encoders.
LossAndGradient loss_gradient(const EncoderParams& left, const EncoderParams& right, const PairBatch& batch,
                              const LossConfig& config);

/// Full-batch gradient descent on pairs drawn from the aligned block. Both
/// encoders start from the same seeded initialisation because their inputs
/// share one anchor basis.
TrainedEncoders train_encoders(const Matrix& left_aligned, const Matrix& right_aligned, const LossConfig& config,
                               std::size_t latent_width);

/// min(input, 64)
std::size_t default_latent_width(std::size_t input_width);

}  // namespace capimac::repr
