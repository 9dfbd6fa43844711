#pragma once

#include <cstdint>
#include <vector>

#include "capimac/types.hpp"

namespace capimac {

/// Euclidean distances between row pairs of `x`: every pair when there are at
/// most `cap` of them, otherwise `cap` distinct-row pairs drawn with `seed`.
std::vector<double> sample_pair_distances(const Matrix& x, std::size_t cap, std::uint64_t seed);

/// Linearly interpolated quantile, q in [0, 1]. Sorts `values` in place.
double quantile(std::vector<double>& values, double q);

}  // namespace capimac
