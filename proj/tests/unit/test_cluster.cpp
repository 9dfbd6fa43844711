#include <cmath>
#include <random>
#include <set>

#include "capimac/cluster.hpp"
#include "doctest.h"

using namespace capimac;
using namespace capimac::cluster;

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

// Adjusted Rand index straight from the pair definition, no contingency table.
double ari_by_pairs(const Labels& a, const Labels& b) {
  const std::size_t n = a.size();
  double both = 0.0, in_a = 0.0, in_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
    }
  }
  const double pairs = choose2(double(n));
  const double expected = in_a * in_b / pairs;
  return (both - expected) / (0.5 * (in_a + in_b) - expected);
}

Matrix two_clouds(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) x.row(i) << u(rng) + (i < 10 ? 0.0 : 500.0), u(rng);
  return x;
}

}  // namespace

TEST_CASE("kmeans") {
  SUBCASE("separated clouds") {
    const auto r = kmeans(two_clouds(1), 2, 3);
    for (Eigen::Index i = 1; i < 20; ++i) CHECK((r.labels[i] == r.labels[0]) == (i < 10));
  }
  SUBCASE("one point per cluster") {
    const Matrix x{{0.0, 0.0}, {1.0, 5.0}, {3.0, 2.0}};
    const auto r = kmeans(x, 3, 4);
    CHECK(r.inertia == doctest::Approx(0.0));
    CHECK(std::set<int>(r.labels.begin(), r.labels.end()).size() == 3);
  }
  SUBCASE("deterministic") {
    const Matrix x = two_clouds(2);
    CHECK(kmeans(x, 3, 9).labels == kmeans(x, 3, 9).labels);
  }
  SUBCASE("inertia never increases") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    Matrix x(80, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = kmeans(x, 4, seed, 1);
      REQUIRE_FALSE(r.inertia_trace.empty());
      for (std::size_t t = 1; t < r.inertia_trace.size(); ++t) {
        CHECK(r.inertia_trace[t] <= r.inertia_trace[t - 1] + 1e-9);
      }
      CHECK(r.inertia == doctest::Approx(r.inertia_trace.back()));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(kmeans(Matrix{{1.0}, {2.0}}, 3, 0), Error);
    CHECK_THROWS_AS(kmeans(Matrix{{1.0}, {2.0}}, 1, 0), Error);
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy({0, 1, 2, 1}, {0, 1, 2, 1}) == 1.0);
  CHECK(accuracy({1, 0, 2, 0}, {0, 1, 2, 1}) == 1.0);
  CHECK(accuracy({0, 1, 0, 1}, {0, 0, 1, 1}) == 0.5);
  CHECK(accuracy({0, 0, 0, 0, 0}, {0, 1, 1, 1, 2}) == doctest::Approx(0.6));
  CHECK_THROWS_AS(accuracy({0, 1}, {0}), Error);
  CHECK_THROWS_AS(accuracy({0, -1}, {0, 1}), Error);
}

TEST_CASE("nmi") {
  CHECK(nmi({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}) == doctest::Approx(1.0));
  CHECK(nmi({0, 0, 0}, {1, 1, 1}) == 1.0);
  // Every cell of the contingency table is 1: independent balanced partitions.
  CHECK(nmi({0, 1, 0, 1}, {0, 0, 1, 1}) == doctest::Approx(0.0));
  const Labels a{0, 1, 1, 2, 2, 2, 0}, b{1, 1, 0, 0, 2, 2, 2};
  CHECK(nmi(a, b) == doctest::Approx(nmi(b, a)));
  // Entropies by hand: H(a)=H(b)=log 2, I = log 2.
  CHECK(nmi({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("ari") {
  CHECK(ari({2, 2, 0, 0, 1}, {0, 0, 1, 1, 2}) == doctest::Approx(1.0));
  CHECK(ari({0, 1, 0, 1}, {0, 0, 1, 1}) == doctest::Approx(ari_by_pairs({0, 1, 0, 1}, {0, 0, 1, 1})));
  CHECK(ari({0, 1, 0, 1}, {0, 0, 1, 1}) == doctest::Approx(-0.5));

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    Labels a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) a[i] = lab(rng), b[i] = lab(rng) % 3;
    CHECK(ari(a, b) == doctest::Approx(ari_by_pairs(a, b)));
  }

  double mean = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 r(static_cast<std::uint64_t>(seed));
    Labels a(1000), b(1000);
    for (std::size_t i = 0; i < 1000; ++i) a[i] = lab(r), b[i] = lab(r);
    mean += ari(a, b) / 100.0;
  }
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("weighted f1") {
  CHECK(f1_weighted({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(0.75 * 0.8 + 0.25 * (2.0 / 3.0)));
  CHECK(f1_weighted({3, 3, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(f1_weighted({0, 1, 2}, {0, 1, 2}) == 1.0);
}

TEST_CASE("evaluate") {
  const auto r = evaluate({0, 1, 1, 0}, {0, 1, 1, 0}, 7, 2);
  CHECK(r.acc == 1.0);
  CHECK(r.nmi == doctest::Approx(1.0));
  CHECK(r.ari == doctest::Approx(1.0));
  CHECK(r.f1_weighted == doctest::Approx(1.0));
  CHECK(r.seed == 7);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> lab(0, 2);
  for (int trial = 0; trial < 30; ++trial) {
    Labels p(25), t(25);
    for (std::size_t i = 0; i < 25; ++i) p[i] = lab(rng), t[i] = lab(rng);
    const auto e = evaluate(p, t, 0, 3);
    CHECK(e.acc >= 0.0);
    CHECK(e.acc <= 1.0);
    CHECK(e.nmi >= 0.0);
    CHECK(e.nmi <= 1.0);
    CHECK(e.ari >= -1.0);
    CHECK(e.ari <= 1.0);
    CHECK(e.f1_weighted >= 0.0);
    CHECK(e.f1_weighted <= 1.0);
    const auto again = evaluate(p, t, 0, 3);
    CHECK(again.nmi == e.nmi);
  }
}
