#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "capimac/hungarian.hpp"
#include "capimac/types.hpp"

namespace capimac::align {

/// Cross-view distance matrix. Rows belong to the smaller view (view 0 on a
/// tie), columns to the larger.
struct CostMatrix {
  Matrix z;
  /// Index (0 or 1) of the input whose rows index `z`.
  int row_view = 0;

  std::size_t short_size() const noexcept { return static_cast<std::size_t>(z.rows()); }
  std::size_t long_size() const noexcept { return static_cast<std::size_t>(z.cols()); }
};

/// Rows of Z sorted by assigned-pair distance.
struct SortedCost {
  Matrix z_sorted;
  /// order[r] is the original row placed at sorted position r.
  IndexList order;
  /// Assigned distance of each sorted row, non-decreasing.
  std::vector<double> distances;
  /// Assigned column of each sorted row.
  IndexList columns;
};

struct KernelConfig {
  /// Bandwidth; unset means median pairwise distance of the short view.
  std::optional<double> sigma;
  std::uint64_t seed = 0;
};

struct Interpolation {
  RowVector point;
  std::vector<double> weights;
};

struct PaddedAlignment {
  /// Short view in sorted order with synthesized rows inserted; n_l rows.
  Matrix padded_short;
  /// Original short-view row for each padded row, kUnassigned if synthesized.
  IndexList padded_origin;
  std::vector<bool> synth_flags;
  /// n_l x n_l, rows follow padded_short, columns the long view.
  Matrix z_bar;
  /// final_pairs[l] is the padded_short row matched to long-view row l.
  IndexList final_pairs;
  /// Insertion slots used, in the order they were selected.
  IndexList slots;
  double sigma = 0.0;

  std::size_t synthesized() const noexcept;
};

struct Fused {
  Matrix features;
  Labels labels;
};

/// Cosine similarities clipped to [0, 1], rows normalised to one, then Z = 1 - Z'.
CostMatrix build_cost_matrix(const Matrix& latent0, const Matrix& latent1);

/// Cost rows for `points` against `columns` with the same normalisation.
Matrix cosine_cost_rows(const Matrix& points, const Matrix& columns);

/// Stable ascending sort of rows by their assigned distance.
SortedCost reorder_rows(const CostMatrix& cost, const Assignment& assignment);

/// Permutation matrix U with U * Z = Z sorted.
Matrix permutation_matrix(const IndexList& order);

/// Slots j (meaning between sorted rows j and j+1) with the largest distance
/// jumps, largest first, ties to the smaller j. When more slots are needed
/// than exist, the ranking is reused round-robin.
IndexList select_gap_indices(std::span<const double> sorted_distances, std::size_t count);

double gaussian_kernel(double distance, double sigma);
double gaussian_kernel(const RowVector& x, const RowVector& xi, double sigma);

/// Kernel-weighted average of the bounding rows evaluated at their midpoint.
/// The midpoint is equidistant from both rows, so the two weights are equal.
Interpolation interpolate_point(const Matrix& bounding_rows, double sigma);

/// Median pairwise distance over at most 2000 sampled row pairs; 1 when degenerate.
double default_sigma(const Matrix& rows, std::uint64_t seed);

/// Fills the short view up to n_l rows by interpolating at the largest
/// distance gaps, extends the sorted cost to a square matrix, and matches long
/// rows to padded rows with a second Hungarian pass on its transpose.
PaddedAlignment pad_and_realign(const Matrix& latent_short, const Matrix& latent_long, const SortedCost& sorted,
                                const KernelConfig& kernel);

/// Concatenates padded-short ‖ long row for every long row; labels are the
/// long view's.
Fused fuse(const PaddedAlignment& padded, const Matrix& latent_long, const Labels& long_labels);

/// Without padding: each short row is concatenated with its assigned long
/// row, and unmatched long rows are dropped. Rows follow long-view order.
Fused fuse_matched(const Matrix& latent_short, const Matrix& latent_long, const Assignment& assignment,
                   const Labels& long_labels);

}  // namespace capimac::align
