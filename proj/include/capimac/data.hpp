#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "capimac/types.hpp"

namespace capimac::data {

/// A multimodal dataset: one feature matrix per view, all views sharing the
/// same sample order, and a ground-truth class per sample.
struct MultimodalDataset {
  std::vector<Matrix> views;
  Labels labels;
  std::size_t k = 0;

  std::size_t n() const noexcept { return labels.size(); }
};

/// Per-view shuffle and missing mask. `shuffle[v][p]` is the original sample
/// placed at position p; `keep_mask[v][p]` says whether position p survives.
struct CorruptionPlan {
  double align_rate = 1.0;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<IndexList> shuffle;
  std::vector<std::vector<bool>> keep_mask;

  std::size_t aligned_count() const noexcept;
  std::size_t misaligned_count() const noexcept { return n - aligned_count(); }
  std::size_t removed_per_view() const noexcept;

  bool operator==(const CorruptionPlan&) const = default;
};

/// Views after shuffle then removal. Row counts may differ per view; the first
/// `aligned_count` rows of every view are the same samples in the same order.
struct CorruptedDataset {
  std::vector<Matrix> views;
  std::size_t aligned_count = 0;
  std::vector<Labels> virtual_labels;
  /// Original sample index of every surviving row, per view.
  std::vector<IndexList> origin;
  std::size_t k = 0;
};

/// floor(rate * n), tolerant of representation error in `rate`.
std::size_t block_size(double rate, std::size_t n);

/// Reads `view0.csv`, `view1.csv`, ... and `labels.csv` from `dir`.
MultimodalDataset load_dataset(const std::filesystem::path& dir);

/// Writes `dataset` in the same layout `load_dataset` reads.
void save_dataset(const MultimodalDataset& dataset, const std::filesystem::path& dir);

/// Balanced isotropic Gaussian blobs, unit within-cluster std. Class c has its
/// mean on axis (c mod dim) at distance separation * (1 + c / dim) from the
/// origin, so any two means are at least `separation` apart.
MultimodalDataset generate_synthetic(std::size_t k, std::size_t n, const std::vector<std::size_t>& dims,
                                     double separation, std::uint64_t seed);

CorruptionPlan make_corruption_plan(const MultimodalDataset& dataset, double align_rate, double missing_rate,
                                    std::uint64_t seed);

CorruptedDataset apply_corruption(const MultimodalDataset& dataset, const CorruptionPlan& plan);

void validate(const MultimodalDataset& dataset);

}  // namespace capimac::data
