#include "capimac/anchor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "capimac/sampling.hpp"

namespace capimac::anchor {

WalkSchedule walk_schedule(std::size_t node_count) {
  if (node_count < 100) return {20, 3};
  if (node_count < 1000) return {10, 5};
  if (node_count < 10000) return {5, 10};
  return {3, 20};
}

TransitionMatrix transition_matrix(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw Error("transition_matrix: need at least two rows");
  const Vector norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms[i] > 0.0)) {
      throw Error("transition_matrix: row " + std::to_string(i) + " is all zero, cosine undefined");
    }
  }
  const Matrix unit = norms.cwiseInverse().asDiagonal() * x;

  TransitionMatrix t;
  t.p.noalias() = unit * unit.transpose();
  t.p = t.p.cwiseMax(0.0);
  t.p.diagonal().setZero();
  const double uniform = 1.0 / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = t.p.row(i);
    const double sum = row.sum();
    if (sum > 0.0) {
      row /= sum;
    } else {
      row.setConstant(uniform);
      row(i) = 0.0;
    }
  }
  return t;
}

double decay_factor(double x, double mu, double alpha) {
  if (!(x > 0.0) || !(mu > 0.0)) throw Error("decay_factor: visit counts must be positive");
  if (alpha < 0.0) throw Error("decay_factor: alpha must be >= 0");
  if (alpha == 0.0) return 1.0;
  return std::pow(x / mu, -alpha);
}

VisitScores self_repellent_visit_scores(const TransitionMatrix& transition, const WalkConfig& config) {
  const Matrix& p = transition.p;
  const Eigen::Index n = p.rows();
  if (n < 1 || p.cols() != n) throw Error("self_repellent_visit_scores: transition matrix must be square");
  if (!(config.alpha >= 0.0)) throw Error("self_repellent_visit_scores: alpha must be >= 0");

  Vector pi;
  if (config.initial_distribution.size() == 0) {
    pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  } else {
    pi = config.initial_distribution;
    if (pi.size() != n) throw Error("self_repellent_visit_scores: initial distribution has wrong length");
    if ((pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > 1e-9) {
      throw Error("self_repellent_visit_scores: initial distribution must be a probability vector");
    }
  }
  const WalkSchedule schedule = config.schedule_override.value_or(walk_schedule(static_cast<std::size_t>(n)));

  Vector visits = Vector::Zero(n);
  Vector scale(n);
  Vector row_mass(n);
  Vector mass(n);
  for (std::size_t w = 0; w < schedule.walks; ++w) {
    const double mu = visits.mean() + 1.0;
    for (Eigen::Index j = 0; j < n; ++j) scale[j] = decay_factor(visits[j] + 1.0, mu, config.alpha);
    // P' = diag(1 / (P s)) P diag(s); only its action on a mass vector is needed.
    row_mass.noalias() = p * scale;
    mass = pi;
    for (std::size_t t = 0; t < schedule.length; ++t) {
      const Vector flow = mass.cwiseQuotient(row_mass);
      mass.noalias() = p.transpose() * flow;
      mass.array() *= scale.array();
      visits += mass;
    }
  }
  return {visits};
}

IndexList greedy_expand(const Matrix& x, const VisitScores& scores, double radius, std::size_t count) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (static_cast<std::size_t>(scores.v.size()) != n) throw Error("greedy_expand: score length mismatch");
  if (count < 1 || count > n) throw Error("greedy_expand: anchor count must lie in [1, rows]");
  if (!(radius > 0.0)) throw Error("greedy_expand: radius must be positive");

  IndexList order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores.v[static_cast<Eigen::Index>(a)] > scores.v[static_cast<Eigen::Index>(b)];
  });

  const double radius_sq = radius * radius;
  std::vector<bool> selected(n, false);
  std::vector<bool> marked(n, false);
  IndexList picks;
  picks.reserve(count);
  std::size_t cursor = 0;
  while (picks.size() < count) {
    while (cursor < n && (marked[order[cursor]] || selected[order[cursor]])) ++cursor;
    if (cursor == n) {
      // Sweep exhausted: reset marks and start over on the nodes not yet chosen.
      std::fill(marked.begin(), marked.end(), false);
      cursor = 0;
      continue;
    }
    const Index pick = order[cursor];
    selected[pick] = true;
    picks.push_back(pick);
    const auto centre = x.row(static_cast<Eigen::Index>(pick));
    for (std::size_t j = 0; j < n; ++j) {
      if (!marked[j] && (x.row(static_cast<Eigen::Index>(j)) - centre).squaredNorm() <= radius_sq) {
        marked[j] = true;
      }
    }
  }
  return picks;
}

IndexList unify_indices(const std::vector<IndexList>& lists, std::size_t bound) {
  IndexList out;
  for (const auto& list : lists) {
    for (Index i : list) {
      if (i >= bound) throw Error("unify_indices: index " + std::to_string(i) + " outside aligned block");
      out.push_back(i);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Matrix rerepresent(const Matrix& x, const Matrix& anchors) {
  if (x.cols() != anchors.cols()) {
    throw Error("rerepresent: feature dimension mismatch (" + std::to_string(x.cols()) + " vs " +
                std::to_string(anchors.cols()) + ")");
  }
  Matrix out(x.rows(), anchors.rows());
  out.noalias() = x * anchors.transpose();
  return out;
}

double default_radius(const Matrix& x, std::uint64_t seed) {
  auto distances = sample_pair_distances(x, 2000, seed);
  if (distances.empty()) return 1.0;
  const double q = quantile(distances, 0.25);
  if (q > 0.0) return q;
  // Heavy duplication: fall back to the smallest positive sampled distance.
  const auto positive = std::find_if(distances.begin(), distances.end(), [](double d) { return d > 0.0; });
  return positive == distances.end() ? 1.0 : *positive;
}

std::size_t default_anchor_count(std::size_t aligned, std::size_t k) {
  const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(aligned))));
  return std::min(aligned, std::max(2 * k, root));
}

AnchorSet select_anchors(const data::CorruptedDataset& corrupted, std::size_t count, const WalkConfig& config,
                         std::optional<double> radius) {
  const std::size_t aligned = corrupted.aligned_count;
  if (count < 1) throw Error("select_anchors: anchor count must be >= 1");
  if (aligned < count) {
    throw Error("select_anchors: aligned block (" + std::to_string(aligned) + " rows) smaller than anchor count " +
                std::to_string(count));
  }
  if (aligned < 2) throw Error("select_anchors: aligned block needs at least two rows");
  if (radius && !(*radius > 0.0)) throw Error("select_anchors: radius must be positive");

  AnchorSet set;
  for (std::size_t v = 0; v < corrupted.views.size(); ++v) {
    const Matrix block = corrupted.views[v].topRows(static_cast<Eigen::Index>(aligned));
    const TransitionMatrix transition = transition_matrix(block);
    VisitScores scores = self_repellent_visit_scores(transition, config);
    const double d = radius.value_or(default_radius(block, derive_seed(config.seed, v)));
    set.per_view_indices.push_back(greedy_expand(block, scores, d, count));
    set.per_view_scores.push_back(std::move(scores));
    set.radius.push_back(d);
  }
  set.unified = unify_indices(set.per_view_indices, aligned);
  for (const Matrix& view : corrupted.views) {
    Matrix a(static_cast<Eigen::Index>(set.unified.size()), view.cols());
    for (std::size_t r = 0; r < set.unified.size(); ++r) {
      a.row(static_cast<Eigen::Index>(r)) = view.row(static_cast<Eigen::Index>(set.unified[r]));
    }
    set.anchors.push_back(std::move(a));
  }
  return set;
}

}  // namespace capimac::anchor
