#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capimac/align.hpp"
#include "capimac/anchor.hpp"
#include "capimac/cluster.hpp"
#include "capimac/config.hpp"
#include "capimac/data.hpp"
#include "capimac/repr.hpp"

namespace capimac {

/// Fixed offsets mixed into the run seed, one per stochastic stage.
enum class Stage : std::uint64_t { corruption = 10, anchors = 20, training = 30, kernel = 40, clustering = 50 };

std::uint64_t stage_seed(std::uint64_t run_seed, Stage stage);

struct StageTimings {
  double corrupt_ms = 0.0;
  double anchor_ms = 0.0;
  double train_ms = 0.0;
  double align_ms = 0.0;
  double cluster_ms = 0.0;
};

struct AnchorSummary {
  std::size_t unified = 0;
  std::vector<std::size_t> per_view;
  std::vector<double> radius;
  /// Distinct ground-truth classes among the unified anchors.
  std::size_t classes_covered = 0;
};

struct RunRecord {
  std::string dataset;
  double align_rate = 0.0;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  bool ipt = true;
  cluster::ClusteringReport report;
  StageTimings timings;
  AnchorSummary anchors;
  std::size_t short_rows = 0;
  std::size_t long_rows = 0;
  std::size_t fused_rows = 0;
  /// Fraction of matched real short rows paired with their true counterpart.
  double correspondence_recovery = 0.0;
  std::optional<double> final_loss;
};

/// Everything up to the first Hungarian pass; shared by both ablation arms.
struct AlignmentInputs {
  data::CorruptionPlan plan;
  data::CorruptedDataset corrupted;
  anchor::AnchorSet anchors;
  std::vector<Matrix> rerepresented;
  std::optional<repr::TrainedEncoders> encoders;
  std::vector<Matrix> latents;
  align::CostMatrix cost;
  Assignment assignment;
  align::SortedCost sorted;
  StageTimings timings;
};

AlignmentInputs prepare_alignment(const data::MultimodalDataset& dataset, double align_rate, double missing_rate,
                                  const ExperimentConfig& config, std::uint64_t seed);

/// Finishes one arm: padding and realignment (ipt) or dropping unmatched long
/// rows, then fusion, k-means and evaluation.
RunRecord finish_run(const AlignmentInputs& inputs, const data::MultimodalDataset& dataset,
                     const ExperimentConfig& config, std::uint64_t seed, bool ipt,
                     const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

RunRecord run_pipeline(const data::MultimodalDataset& dataset, double align_rate, double missing_rate,
                       const ExperimentConfig& config, std::uint64_t seed);

struct AblationPair {
  RunRecord ipt;
  RunRecord no_ipt;
};

/// Both arms per (align rate, seed), sharing corruption, anchors and encoders.
std::vector<AblationPair> run_ablation(const data::MultimodalDataset& dataset, const ExperimentConfig& config);

/// One record per (align rate, seed) with config.ipt.
std::vector<RunRecord> run_experiment(const data::MultimodalDataset& dataset, const ExperimentConfig& config);

/// Dataset from config: the directory when set, otherwise the synthetic spec.
data::MultimodalDataset load_experiment_dataset(const ExperimentConfig& config);

}  // namespace capimac
