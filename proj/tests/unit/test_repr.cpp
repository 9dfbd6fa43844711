#include <cmath>
#include <random>

#include "capimac/repr.hpp"
#include "doctest.h"

using namespace capimac;
using namespace capimac::repr;

namespace {

PairBatch single(const RowVector& u, const RowVector& v, int y) {
  PairBatch b;
  b.left = u;
  b.right = v;
  b.y = {y};
  b.left_index = {0};
  b.right_index = {0};
  return b;
}

// Unit vectors in the plane whose cosine distance is exactly `d`.
PairBatch at_cosine_distance(double d, int y) {
  const double c = 1.0 - d;
  return single(RowVector{{1.0, 0.0}}, RowVector{{c, std::sqrt(std::max(0.0, 1.0 - c * c))}}, y);
}

Matrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("distances") {
  const RowVector a{{3.0, 4.0}}, b{{0.0, 0.0}};
  CHECK(euclidean_distance(a, b) == doctest::Approx(5.0));
  CHECK(cosine_distance(a, a * 2.0) == doctest::Approx(0.0));
  CHECK(cosine_distance(a, -a) == doctest::Approx(2.0));
  CHECK(cosine_distance(RowVector{{1.0, 0.0}}, RowVector{{0.0, 1.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cosine_distance(a, b), Error);
}

TEST_CASE("contrastive baseline") {
  const RowVector u{{1.0, 2.0}};
  CHECK(contrastive_loss(single(u, u, 1), 1.0) == 0.0);
  CHECK(contrastive_loss(single(RowVector{{0.0}}, RowVector{{1.5}}, 0), 1.0) == 0.0);
  CHECK(contrastive_loss(single(RowVector{{0.0}}, RowVector{{0.4}}, 0), 1.0) == doctest::Approx(0.36));
}

TEST_CASE("noise contrastive loss") {
  CHECK(noise_contrastive_loss(at_cosine_distance(0.0, 1), 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(noise_contrastive_loss(at_cosine_distance(1.2, 0), 1.0, 1.0) == 0.0);
  CHECK(noise_contrastive_loss(at_cosine_distance(0.5, 0), 1.0, 1.0) == doctest::Approx(0.0703125));
  CHECK(noise_contrastive_term(0.5, 0, 1.0, 1.0) == doctest::Approx(0.140625));
  CHECK(noise_contrastive_term(0.3, 1, 1.0, 1.0) == doctest::Approx(0.09));

  // The negative term vanishes at D^2 = a m and stays zero beyond it.
  const double edge = std::sqrt(2.0 * 0.75);
  CHECK(noise_contrastive_term(edge, 0, 0.75, 2.0) == doctest::Approx(0.0));
  CHECK(noise_contrastive_term(edge + 0.1, 0, 0.75, 2.0) == 0.0);
  CHECK_THROWS_AS(noise_contrastive_loss(single(RowVector{{0.0, 0.0}}, RowVector{{1.0, 0.0}}, 1), 1.0, 1.0), Error);
}

TEST_CASE("sample pairs") {
  const Matrix l = random_rows(5, 3, 1), r = random_rows(5, 3, 2);
  const auto b = sample_pairs(l, r, 1.0, 9);
  REQUIRE(b.size() == 10);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(b.y[i] == 1);
    CHECK(b.left_index[i] == i);
    CHECK(b.right_index[i] == i);
  }
  for (std::size_t i = 5; i < 10; ++i) {
    CHECK(b.y[i] == 0);
    CHECK(b.left_index[i] != b.right_index[i]);
    CHECK(b.left.row(static_cast<Eigen::Index>(i)) == l.row(static_cast<Eigen::Index>(b.left_index[i])));
    CHECK(b.right.row(static_cast<Eigen::Index>(i)) == r.row(static_cast<Eigen::Index>(b.right_index[i])));
  }
  CHECK(sample_pairs(l, r, 0.0, 9).size() == 5);
  CHECK(sample_pairs(l, r, 0.0, 9).y == std::vector<int>(5, 1));
  CHECK_THROWS_AS(sample_pairs(l.topRows(1), r.topRows(1), 1.0, 9), Error);
}

TEST_CASE("encoder") {
  const Matrix x = random_rows(6, 4, 3).cwiseAbs();
  CHECK(encode(EncoderParams::zeros(4, 8, 3), x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(encode(EncoderParams::zeros(4, 8, 3), x).rows() == 6);

  auto id = EncoderParams::zeros(4, 4, 4);
  id.w1.setIdentity();
  id.w2.setIdentity();
  CHECK(encode(id, x) == x);

  const auto p = EncoderParams::random(4, 8, 3, 5);
  CHECK(p.parameter_count() == 4 * 8 + 8 + 8 * 3 + 3);
  auto q = EncoderParams::zeros(4, 8, 3);
  q.assign(p.flatten());
  CHECK(q.w1 == p.w1);
  CHECK(q.b2 == p.b2);
  CHECK_THROWS_AS(encode(p, random_rows(2, 5, 1)), Error);
}

TEST_CASE("gradient") {
  SUBCASE("finite differences") {
    const Matrix l = random_rows(6, 4, 7), r = random_rows(6, 4, 8);
    const auto batch = sample_pairs(l, r, 2.0, 3);
    LossConfig cfg;
    cfg.margin = 0.8;
    cfg.range = 1.5;
    const auto pl = EncoderParams::random(4, 6, 3, 1);
    const auto pr = EncoderParams::random(4, 6, 3, 2);
    const auto g = loss_gradient(pl, pr, batch, cfg);

    auto loss_with = [&](std::vector<double> fl) {
      auto a = pl;
      a.assign(fl);
      PairBatch enc = batch;
      enc.left = encode(a, batch.left);
      enc.right = encode(pr, batch.right);
      return noise_contrastive_loss(enc, cfg.margin, cfg.range);
    };
    const auto flat = pl.flatten();
    const auto grad = g.grad_left.flatten();
    CHECK(g.loss == doctest::Approx(loss_with(flat)));
    for (std::size_t k = 0; k < flat.size(); ++k) {
      auto up = flat, down = flat;
      up[k] += 1e-5;
      down[k] -= 1e-5;
      CHECK(grad[k] == doctest::Approx((loss_with(up) - loss_with(down)) / 2e-5).epsilon(1e-4).scale(1e-6));
    }
  }
  SUBCASE("flat region") {
    // Positives coincide and negatives sit beyond the zero-loss distance.
    auto id = EncoderParams::zeros(2, 2, 2);
    id.w1.setIdentity();
    id.w2.setIdentity();
    PairBatch b;
    b.left = Matrix{{1.0, 0.0}, {1.0, 0.0}};
    b.right = Matrix{{1.0, 0.0}, {0.0, 1.0}};
    b.y = {1, 0};
    b.left_index = {0, 0};
    b.right_index = {0, 1};
    LossConfig cfg;
    cfg.margin = 1.0;
    cfg.range = 0.5;
    const auto g = loss_gradient(id, id, b, cfg);
    CHECK(g.loss == doctest::Approx(0.0));
    for (double v : g.grad_left.flatten()) CHECK(v == doctest::Approx(0.0));
    for (double v : g.grad_right.flatten()) CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("training") {
  const Matrix l = random_rows(20, 6, 4).cwiseAbs(), r = random_rows(20, 6, 5).cwiseAbs();
  LossConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 60;
  cfg.seed = 12;
  const auto t = train_encoders(l, r, cfg, 4);
  REQUIRE(t.loss_history.size() == 60);
  CHECK(t.loss_history.back() < t.loss_history.front());
  CHECK(t.left.latent_width() == 4);

  const auto again = train_encoders(l, r, cfg, 4);
  CHECK(again.loss_history == t.loss_history);
  CHECK(again.right.w2 == t.right.w2);

  CHECK(default_latent_width(10) == 10);
  CHECK(default_latent_width(300) == 64);
}
