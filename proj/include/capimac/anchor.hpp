#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "capimac/data.hpp"
#include "capimac/types.hpp"

namespace capimac::anchor {

struct WalkSchedule {
  std::size_t walks = 0;   // n_w
  std::size_t length = 0;  // w_l, steps per walk

  bool operator==(const WalkSchedule&) const = default;
};

struct WalkConfig {
  /// Self-repellent strength; 0 disables the decay.
  double alpha = 0.5;
  std::optional<WalkSchedule> schedule_override;
  /// Starting distribution over nodes; empty means uniform.
  Vector initial_distribution;
  std::uint64_t seed = 0;
};

/// Row-stochastic similarity walk matrix with zero diagonal.
struct TransitionMatrix {
  Matrix p;

  std::size_t size() const noexcept { return static_cast<std::size_t>(p.rows()); }
};

struct VisitScores {
  Vector v;
};

struct AnchorSet {
  std::vector<IndexList> per_view_indices;
  std::vector<VisitScores> per_view_scores;
  std::vector<double> radius;
  /// Sorted union of the per-view indices, all inside the aligned block.
  IndexList unified;
  /// Per view, the aligned rows at `unified`.
  std::vector<Matrix> anchors;
};

/// Walk count and length as a function of node count.
WalkSchedule walk_schedule(std::size_t node_count);

/// Pairwise cosine similarity with negatives clipped to zero, zero diagonal,
/// rows normalised to one. A row with no positive similarity becomes uniform
/// over the other nodes. Throws on an all-zero feature row.
TransitionMatrix transition_matrix(const Matrix& x);

/// (x / mu)^(-alpha).
double decay_factor(double x, double mu, double alpha);

/// Accumulated visit mass of a self-repellent walk.
///
/// Each step pushes probability mass along the transition rows,
/// p_{t+1}(j) = sum_i p_t(i) P'(i, j), starting from p_0 = pi, and every step
/// p_1..p_{w_l} of every walk is added to the score. Before each walk the
/// columns of P are scaled by decay_factor(V_j + 1, mean(V) + 1, alpha) and
/// the rows renormalised, so nodes that already hold a lot of mass become less
/// attractive. With alpha = 0 the result is sum_w sum_t (P^T)^t pi.
VisitScores self_repellent_visit_scores(const TransitionMatrix& transition, const WalkConfig& config);

/// Greedy radius-d max-separation sweep ordered by descending score (ties to
/// the lower index). Marks reset when every node is covered; returns exactly
/// `count` distinct indices in selection order.
IndexList greedy_expand(const Matrix& x, const VisitScores& scores, double radius, std::size_t count);

/// Sorted, deduplicated union. Every index must be < `bound`.
IndexList unify_indices(const std::vector<IndexList>& lists, std::size_t bound);

/// X * A^T: similarity of every row to every anchor.
Matrix rerepresent(const Matrix& x, const Matrix& anchors);

/// 25th percentile of Euclidean distances over a seeded sample of at most
/// 2000 row pairs (all pairs when there are fewer).
double default_radius(const Matrix& x, std::uint64_t seed);

/// max(2k, ceil(sqrt(aligned))), capped at `aligned`.
std::size_t default_anchor_count(std::size_t aligned, std::size_t k);

/// Runs the walk and greedy sweep on each view's aligned block and unifies the
/// resulting indices. `radius` overrides the per-view default radius.
AnchorSet select_anchors(const data::CorruptedDataset& corrupted, std::size_t count, const WalkConfig& config,
                         std::optional<double> radius = std::nullopt);

}  // namespace capimac::anchor
