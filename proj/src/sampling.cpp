#include "capimac/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace capimac {

std::vector<double> sample_pair_distances(const Matrix& x, std::size_t cap, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> out;
  if (n < 2) return out;
  const std::size_t total = n * (n - 1) / 2;
  if (total <= cap) {
    out.reserve(total);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        out.push_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm());
      }
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  out.reserve(cap);
  while (out.size() < cap) {
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    if (i == j) continue;
    out.push_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm());
  }
  return out;
}

double quantile(std::vector<double>& values, double q) {
  if (values.empty()) throw Error("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace capimac
