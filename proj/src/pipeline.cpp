#include "capimac/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>

#include "capimac/report.hpp"

namespace capimac {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void write_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

std::string run_tag(double align_rate, std::uint64_t seed) {
  std::ostringstream tag;
  tag << "align" << std::fixed << std::setprecision(2) << align_rate << "_seed" << seed;
  return tag.str();
}

void dump_inputs(const AlignmentInputs& in, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_csv(in.cost.z, dir / "z.csv");
  write_csv(in.sorted.z_sorted, dir / "z_sorted.csv");
  for (std::size_t v = 0; v < in.anchors.per_view_scores.size(); ++v) {
    std::ofstream out(dir / ("anchors_view" + std::to_string(v) + ".csv"));
    out << "index,score,selected\n" << std::setprecision(17);
    const auto& scores = in.anchors.per_view_scores[v].v;
    std::set<Index> chosen(in.anchors.per_view_indices[v].begin(), in.anchors.per_view_indices[v].end());
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      out << i << ',' << scores[i] << ',' << (chosen.count(static_cast<Index>(i)) ? 1 : 0) << '\n';
    }
  }
  if (in.encoders) write_training_log(in.encoders->loss_history, dir / "training_log.csv");
}

// Runs one stage, prefixing any failure with the stage name.
template <class F>
auto in_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

}  // namespace

std::uint64_t stage_seed(std::uint64_t run_seed, Stage stage) {
  return derive_seed(run_seed, static_cast<std::uint64_t>(stage));
}

AlignmentInputs prepare_alignment(const data::MultimodalDataset& dataset, double align_rate, double missing_rate,
                                  const ExperimentConfig& config, std::uint64_t seed) {
  if (dataset.views.size() != 2) {
    throw Error("pipeline: expected exactly two views, dataset has " + std::to_string(dataset.views.size()));
  }
  AlignmentInputs in;

  auto start = Clock::now();
  in_stage("corruption", [&] {
    in.plan = data::make_corruption_plan(dataset, align_rate, missing_rate, stage_seed(seed, Stage::corruption));
    in.corrupted = data::apply_corruption(dataset, in.plan);
  });
  in.timings.corrupt_ms = elapsed_ms(start);

  start = Clock::now();
  const std::size_t aligned = in.corrupted.aligned_count;
  in_stage("anchors", [&] {
    const std::size_t count = config.anchors.value_or(anchor::default_anchor_count(aligned, dataset.k));
    anchor::WalkConfig walk;
    walk.alpha = config.alpha;
    walk.schedule_override = config.schedule;
    walk.seed = stage_seed(seed, Stage::anchors);
    in.anchors = anchor::select_anchors(in.corrupted, count, walk, config.radius);
    for (std::size_t v = 0; v < 2; ++v) {
      in.rerepresented.push_back(anchor::rerepresent(in.corrupted.views[v], in.anchors.anchors[v]));
    }
  });
  in.timings.anchor_ms = elapsed_ms(start);

  start = Clock::now();
  in_stage("training", [&] {
    if (config.train_encoder) {
      const auto width = static_cast<std::size_t>(in.rerepresented[0].cols());
      repr::LossConfig loss = config.loss;
      loss.seed = stage_seed(seed, Stage::training);
      const auto a = static_cast<Eigen::Index>(aligned);
      in.encoders = repr::train_encoders(in.rerepresented[0].topRows(a), in.rerepresented[1].topRows(a), loss,
                                         config.latent_width.value_or(repr::default_latent_width(width)));
      in.latents.push_back(repr::encode(in.encoders->left, in.rerepresented[0]));
      in.latents.push_back(repr::encode(in.encoders->right, in.rerepresented[1]));
    } else {
      in.latents = in.rerepresented;
    }
  });
  in.timings.train_ms = elapsed_ms(start);

  start = Clock::now();
  in_stage("alignment", [&] {
    in.cost = align::build_cost_matrix(in.latents[0], in.latents[1]);
    in.assignment = hungarian(in.cost.z);
    in.sorted = align::reorder_rows(in.cost, in.assignment);
  });
  in.timings.align_ms = elapsed_ms(start);
  return in;
}

RunRecord finish_run(const AlignmentInputs& in, const data::MultimodalDataset& dataset, const ExperimentConfig& config,
                     std::uint64_t seed, bool ipt, const std::optional<std::filesystem::path>& dump_dir) {
  const auto short_view = static_cast<std::size_t>(in.cost.row_view);
  const std::size_t long_view = 1 - short_view;
  const Matrix& latent_short = in.latents[short_view];
  const Matrix& latent_long = in.latents[long_view];
  const Labels& long_labels = in.corrupted.virtual_labels[long_view];
  const IndexList& short_origin = in.corrupted.origin[short_view];
  const IndexList& long_origin = in.corrupted.origin[long_view];

  RunRecord rec;
  rec.dataset = config.dataset_name();
  rec.align_rate = in.plan.align_rate;
  rec.missing_rate = in.plan.missing_rate;
  rec.seed = seed;
  rec.ipt = ipt;
  rec.timings = in.timings;
  rec.short_rows = static_cast<std::size_t>(latent_short.rows());
  rec.long_rows = static_cast<std::size_t>(latent_long.rows());
  if (in.encoders && !in.encoders->loss_history.empty()) rec.final_loss = in.encoders->loss_history.back();

  rec.anchors.unified = in.anchors.unified.size();
  for (const auto& idx : in.anchors.per_view_indices) rec.anchors.per_view.push_back(idx.size());
  rec.anchors.radius = in.anchors.radius;
  std::set<int> covered;
  for (Index i : in.anchors.unified) covered.insert(in.corrupted.virtual_labels[0][i]);
  rec.anchors.classes_covered = covered.size();

  // Correspondence recovery over short rows whose true partner survived in the long view.
  std::vector<Index> long_position(dataset.n(), kUnassigned);
  for (std::size_t l = 0; l < long_origin.size(); ++l) long_position[long_origin[l]] = l;
  std::size_t recoverable = 0;
  std::size_t recovered = 0;
  auto score_pair = [&](Index short_row, Index long_row) {
    const Index truth = long_position[short_origin[short_row]];
    if (truth == kUnassigned) return;
    ++recoverable;
    if (truth == long_row) ++recovered;
  };

  const auto start = Clock::now();
  align::Fused fused;
  if (ipt) {
    const align::PaddedAlignment padded = in_stage("padding", [&] {
      return align::pad_and_realign(latent_short, latent_long, in.sorted,
                                    align::KernelConfig{config.sigma, stage_seed(seed, Stage::kernel)});
    });
    fused = in_stage("fusion", [&] { return align::fuse(padded, latent_long, long_labels); });
    for (std::size_t l = 0; l < padded.final_pairs.size(); ++l) {
      const Index origin = padded.padded_origin[padded.final_pairs[l]];
      if (origin != kUnassigned) score_pair(origin, l);
    }
    if (dump_dir) {
      dump_inputs(in, *dump_dir);
      write_csv(padded.z_bar, *dump_dir / "z_bar.csv");
      std::ofstream out(*dump_dir / "matching.csv");
      out << "long_row,padded_row,short_row,synthesized\n";
      for (std::size_t l = 0; l < padded.final_pairs.size(); ++l) {
        const Index p = padded.final_pairs[l];
        const Index origin = padded.padded_origin[p];
        out << l << ',' << p << ',' << (origin == kUnassigned ? std::string("") : std::to_string(origin)) << ','
            << (padded.synth_flags[p] ? 1 : 0) << '\n';
      }
    }
  } else {
    fused = in_stage("fusion", [&] { return align::fuse_matched(latent_short, latent_long, in.assignment, long_labels); });
    for (const auto& [s, l] : in.assignment.pairs) score_pair(s, l);
    if (dump_dir) {
      dump_inputs(in, *dump_dir);
      std::ofstream out(*dump_dir / "matching.csv");
      out << "long_row,short_row\n";
      for (const auto& [s, l] : in.assignment.pairs) out << l << ',' << s << '\n';
    }
  }
  rec.timings.align_ms += elapsed_ms(start);
  rec.fused_rows = static_cast<std::size_t>(fused.features.rows());
  rec.correspondence_recovery = recoverable ? static_cast<double>(recovered) / static_cast<double>(recoverable) : 0.0;

  const auto cluster_start = Clock::now();
  rec.report = in_stage("clustering", [&] {
    const cluster::KMeansResult km =
        cluster::kmeans(fused.features, dataset.k, stage_seed(seed, Stage::clustering), config.restarts);
    return cluster::evaluate(km.labels, fused.labels, seed, dataset.k);
  });
  rec.timings.cluster_ms = elapsed_ms(cluster_start);
  return rec;
}

RunRecord run_pipeline(const data::MultimodalDataset& dataset, double align_rate, double missing_rate,
                       const ExperimentConfig& config, std::uint64_t seed) {
  const AlignmentInputs inputs = prepare_alignment(dataset, align_rate, missing_rate, config, seed);
  std::optional<std::filesystem::path> dump;
  if (config.dump_matrices) dump = config.out_dir / "dumps" / (run_tag(align_rate, seed) + (config.ipt ? "_ipt" : "_noipt"));
  return finish_run(inputs, dataset, config, seed, config.ipt, dump);
}

std::vector<AblationPair> run_ablation(const data::MultimodalDataset& dataset, const ExperimentConfig& config) {
  std::vector<AblationPair> out;
  for (double rate : config.align_rates) {
    for (std::uint64_t seed : config.seeds) {
      const AlignmentInputs inputs = prepare_alignment(dataset, rate, config.missing_rate, config, seed);
      std::optional<std::filesystem::path> ipt_dump, plain_dump;
      if (config.dump_matrices) {
        ipt_dump = config.out_dir / "dumps" / (run_tag(rate, seed) + "_ipt");
        plain_dump = config.out_dir / "dumps" / (run_tag(rate, seed) + "_noipt");
      }
      out.push_back({finish_run(inputs, dataset, config, seed, true, ipt_dump),
                     finish_run(inputs, dataset, config, seed, false, plain_dump)});
    }
  }
  return out;
}

std::vector<RunRecord> run_experiment(const data::MultimodalDataset& dataset, const ExperimentConfig& config) {
  std::vector<RunRecord> out;
  for (double rate : config.align_rates) {
    for (std::uint64_t seed : config.seeds) {
      out.push_back(run_pipeline(dataset, rate, config.missing_rate, config, seed));
    }
  }
  return out;
}

data::MultimodalDataset load_experiment_dataset(const ExperimentConfig& config) {
  if (!config.dataset_path.empty()) return data::load_dataset(config.dataset_path);
  if (!config.synthetic) throw ConfigError("no dataset configured");
  const SyntheticSpec& s = *config.synthetic;
  return data::generate_synthetic(s.k, s.n, s.dims, s.separation, s.seed);
}

}  // namespace capimac
