#include "capimac/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "capimac/hungarian.hpp"

namespace capimac::cluster {

namespace {

constexpr std::size_t kMaxIterations = 300;
constexpr double kShiftTolerance = 1e-8;

struct Dense {
  std::vector<std::size_t> ids;
  std::size_t count = 0;
};

// Ids follow first appearance, so a relabelled partition densifies identically
// and tie-breaks in the cluster matching do not depend on label values.
Dense densify(const Labels& labels) {
  std::map<int, std::size_t> index;
  Dense d;
  d.ids.reserve(labels.size());
  for (int l : labels) d.ids.push_back(index.emplace(l, index.size()).first->second);
  d.count = index.size();
  return d;
}

void check_lengths(const Labels& pred, const Labels& truth) {
  if (pred.size() != truth.size()) throw Error("metric: prediction and truth lengths differ");
  if (pred.empty()) throw Error("metric: empty label vectors");
  const auto negative = [](int l) { return l < 0; };
  if (std::any_of(pred.begin(), pred.end(), negative) || std::any_of(truth.begin(), truth.end(), negative)) {
    throw Error("metric: labels must be non-negative");
  }
}

struct Contingency {
  Dense pred;
  Dense truth;
  std::vector<std::vector<double>> table;  // [pred][truth]
};

Contingency contingency(const Labels& pred, const Labels& truth) {
  Contingency c{densify(pred), densify(truth), {}};
  c.table.assign(c.pred.count, std::vector<double>(c.truth.count, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i) c.table[c.pred.ids[i]][c.truth.ids[i]] += 1.0;
  return c;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

double squared_distance(const Matrix& x, Eigen::Index i, const Matrix& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

double assign(const Matrix& x, const Matrix& centroids, Labels& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
      const double d = squared_distance(x, i, centroids, j);
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    inertia += best;
  }
  return inertia;
}

Matrix plus_plus_seeds(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Matrix centroids(static_cast<Eigen::Index>(k), x.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index pick = first(rng);
  chosen[static_cast<std::size_t>(pick)] = true;
  centroids.row(0) = x.row(pick);
  Vector nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest[i] = squared_distance(x, i, centroids, 0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = nearest.sum();
    if (total > 0.0) {
      double target = unit(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (nearest[pick] <= 0.0 && pick > 0) --pick;
    } else {
      // Every point coincides with a seed; take the first unused one.
      pick = 0;
      while (chosen[static_cast<std::size_t>(pick)]) ++pick;
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    const auto row = static_cast<Eigen::Index>(c);
    centroids.row(row) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(x, i, centroids, row));
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& x, Matrix centroids) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = centroids.rows();
  KMeansResult r;
  r.labels.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    r.inertia_trace.push_back(assign(x, centroids, r.labels));
    ++r.iterations;

    Matrix updated = Matrix::Zero(k, x.cols());
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = r.labels[static_cast<std::size_t>(i)];
      updated.row(c) += x.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        updated.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = 0;
      double worst = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const double d = squared_distance(x, i, centroids, r.labels[static_cast<std::size_t>(i)]);
        if (d > worst) {
          worst = d;
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = true;
      updated.row(c) = x.row(far);
    }
    const double shift = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(updated);
    if (shift < kShiftTolerance) break;
  }
  r.inertia = assign(x, centroids, r.labels);
  r.inertia_trace.push_back(r.inertia);
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts) {
  if (k < 2) throw Error("kmeans: k must be >= 2");
  if (static_cast<std::size_t>(x.rows()) < k) throw Error("kmeans: fewer rows than clusters");
  if (!x.allFinite()) throw Error("kmeans: non-finite feature");
  restarts = std::max<std::size_t>(restarts, 1);

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    KMeansResult candidate = lloyd(x, plus_plus_seeds(x, k, rng));
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

std::vector<int> match_clusters(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  const Contingency c = contingency(pred, truth);
  Matrix cost(static_cast<Eigen::Index>(c.pred.count), static_cast<Eigen::Index>(c.truth.count));
  for (std::size_t p = 0; p < c.pred.count; ++p) {
    for (std::size_t t = 0; t < c.truth.count; ++t) {
      cost(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(t)) = -c.table[p][t];
    }
  }
  const Assignment a = hungarian(cost);

  // Express the mapping in the caller's label values.
  std::map<std::size_t, int> truth_value;
  for (std::size_t i = 0; i < truth.size(); ++i) truth_value.emplace(c.truth.ids[i], truth[i]);
  std::map<std::size_t, int> pred_value;
  for (std::size_t i = 0; i < pred.size(); ++i) pred_value.emplace(c.pred.ids[i], pred[i]);

  const int max_pred = *std::max_element(pred.begin(), pred.end());
  std::vector<int> mapping(static_cast<std::size_t>(max_pred) + 1, -1);
  for (const auto& [p, t] : a.pairs) mapping[static_cast<std::size_t>(pred_value.at(p))] = truth_value.at(t);
  return mapping;
}

double accuracy(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  const std::vector<int> mapping = match_clusters(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mapping[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double nmi(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  const Contingency c = contingency(pred, truth);
  const double n = static_cast<double>(pred.size());
  std::vector<double> rows(c.pred.count, 0.0), cols(c.truth.count, 0.0);
  for (std::size_t p = 0; p < c.pred.count; ++p) {
    for (std::size_t t = 0; t < c.truth.count; ++t) {
      rows[p] += c.table[p][t];
      cols[t] += c.table[p][t];
    }
  }
  const double hp = entropy(rows, n);
  const double ht = entropy(cols, n);
  if (c.pred.count == 1 && c.truth.count == 1) return 1.0;
  if (c.pred.count == 1 || c.truth.count == 1) return 0.0;
  double mi = 0.0;
  for (std::size_t p = 0; p < c.pred.count; ++p) {
    for (std::size_t t = 0; t < c.truth.count; ++t) {
      const double nij = c.table[p][t];
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (rows[p] * cols[t]));
    }
  }
  return std::clamp(mi / (0.5 * (hp + ht)), 0.0, 1.0);
}

double ari(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  const Contingency c = contingency(pred, truth);
  const double n = static_cast<double>(pred.size());
  std::vector<double> rows(c.pred.count, 0.0), cols(c.truth.count, 0.0);
  double index = 0.0;
  for (std::size_t p = 0; p < c.pred.count; ++p) {
    for (std::size_t t = 0; t < c.truth.count; ++t) {
      rows[p] += c.table[p][t];
      cols[t] += c.table[p][t];
      index += choose2(c.table[p][t]);
    }
  }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (double r : rows) sum_rows += choose2(r);
  for (double t : cols) sum_cols += choose2(t);
  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double f1_weighted(const Labels& pred, const Labels& truth) {
  check_lengths(pred, truth);
  const std::vector<int> mapping = match_clusters(pred, truth);
  std::map<int, double> support, predicted, hits;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int mapped = mapping[static_cast<std::size_t>(pred[i])];
    support[truth[i]] += 1.0;
    if (mapped >= 0) predicted[mapped] += 1.0;
    if (mapped == truth[i]) hits[truth[i]] += 1.0;
  }
  double total = 0.0;
  for (const auto& [cls, count] : support) {
    const double tp = hits.count(cls) ? hits.at(cls) : 0.0;
    const double pc = predicted.count(cls) ? predicted.at(cls) : 0.0;
    const double precision = pc > 0.0 ? tp / pc : 0.0;
    const double recall = tp / count;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    total += count * f1;
  }
  return total / static_cast<double>(pred.size());
}

ClusteringReport evaluate(const Labels& pred, const Labels& truth, std::uint64_t seed, std::size_t k) {
  ClusteringReport r;
  r.acc = accuracy(pred, truth);
  r.nmi = nmi(pred, truth);
  r.ari = ari(pred, truth);
  r.f1_weighted = f1_weighted(pred, truth);
  r.seed = seed;
  r.k = k;
  return r;
}

}  // namespace capimac::cluster
