#pragma once

#include <cstdint>
#include <vector>

#include "capimac/types.hpp"

namespace capimac::cluster {

struct KMeansResult {
  Labels labels;
  Matrix centroids;
  double inertia = 0.0;
  /// Inertia after every Lloyd assignment step of the winning restart.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
};

struct ClusteringReport {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double f1_weighted = 0.0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
};

/// Lloyd's algorithm from k-means++ seeds; best inertia over `restarts`,
/// ties to the earlier restart. Stops when no centroid moves more than 1e-8
/// or after 300 iterations.
KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts = 10);

/// Best one-to-one mapping from predicted clusters to true classes,
/// maximising agreement. mapping[c] is the class for cluster c, or -1.
std::vector<int> match_clusters(const Labels& pred, const Labels& truth);

double accuracy(const Labels& pred, const Labels& truth);

/// Mutual information over the arithmetic mean of the two entropies.
double nmi(const Labels& pred, const Labels& truth);

double ari(const Labels& pred, const Labels& truth);

/// Support-weighted one-vs-rest F1 after the same relabelling as accuracy().
double f1_weighted(const Labels& pred, const Labels& truth);

ClusteringReport evaluate(const Labels& pred, const Labels& truth, std::uint64_t seed, std::size_t k);

}  // namespace capimac::cluster
