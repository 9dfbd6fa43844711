#include "capimac/align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "capimac/sampling.hpp"

namespace capimac::align {

namespace {

Matrix unit_rows(const Matrix& x, const char* who) {
  const Vector norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!(norms[i] > 0.0)) throw Error(std::string(who) + ": row " + std::to_string(i) + " is a zero vector");
  }
  return norms.cwiseInverse().asDiagonal() * x;
}

}  // namespace

std::size_t PaddedAlignment::synthesized() const noexcept {
  return static_cast<std::size_t>(std::count(synth_flags.begin(), synth_flags.end(), true));
}

Matrix cosine_cost_rows(const Matrix& points, const Matrix& columns) {
  if (points.cols() != columns.cols()) throw Error("cosine cost: latent widths differ");
  const Matrix a = unit_rows(points, "cosine cost");
  const Matrix b = unit_rows(columns, "cosine cost");
  Matrix sim = (a * b.transpose()).cwiseMax(0.0).cwiseMin(1.0);
  const double uniform = 1.0 / static_cast<double>(sim.cols());
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    const double sum = sim.row(i).sum();
    if (sum > 0.0) {
      sim.row(i) /= sum;
    } else {
      sim.row(i).setConstant(uniform);
    }
  }
  return Matrix::Ones(sim.rows(), sim.cols()) - sim;
}

CostMatrix build_cost_matrix(const Matrix& latent0, const Matrix& latent1) {
  if (latent0.rows() == 0 || latent1.rows() == 0) throw Error("build_cost_matrix: empty view");
  CostMatrix out;
  if (latent0.rows() <= latent1.rows()) {
    out.row_view = 0;
    out.z = cosine_cost_rows(latent0, latent1);
  } else {
    out.row_view = 1;
    out.z = cosine_cost_rows(latent1, latent0);
  }
  return out;
}

SortedCost reorder_rows(const CostMatrix& cost, const Assignment& assignment) {
  const std::size_t ns = cost.short_size();
  if (assignment.row_to_col.size() != ns) throw Error("reorder_rows: assignment does not match cost rows");
  std::vector<double> assigned(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const Index j = assignment.row_to_col[i];
    if (j == kUnassigned || j >= cost.long_size()) throw Error("reorder_rows: row " + std::to_string(i) + " unassigned");
    assigned[i] = cost.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  SortedCost out;
  out.order.resize(ns);
  std::iota(out.order.begin(), out.order.end(), Index{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](Index a, Index b) { return assigned[a] < assigned[b]; });
  out.z_sorted.resize(cost.z.rows(), cost.z.cols());
  out.distances.resize(ns);
  out.columns.resize(ns);
  for (std::size_t r = 0; r < ns; ++r) {
    const Index src = out.order[r];
    out.z_sorted.row(static_cast<Eigen::Index>(r)) = cost.z.row(static_cast<Eigen::Index>(src));
    out.distances[r] = assigned[src];
    out.columns[r] = assignment.row_to_col[src];
  }
  return out;
}

Matrix permutation_matrix(const IndexList& order) {
  const auto n = static_cast<Eigen::Index>(order.size());
  Matrix u = Matrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) u(r, static_cast<Eigen::Index>(order[static_cast<std::size_t>(r)])) = 1.0;
  return u;
}

IndexList select_gap_indices(std::span<const double> sorted_distances, std::size_t count) {
  if (count == 0) return {};
  const std::size_t ns = sorted_distances.size();
  if (ns < 2) throw Error("select_gap_indices: need at least two rows to open a gap");
  IndexList ranking(ns - 1);
  std::iota(ranking.begin(), ranking.end(), Index{0});
  std::stable_sort(ranking.begin(), ranking.end(), [&](Index a, Index b) {
    return sorted_distances[a + 1] - sorted_distances[a] > sorted_distances[b + 1] - sorted_distances[b];
  });
  IndexList out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = ranking[i % ranking.size()];
  return out;
}

double gaussian_kernel(double distance, double sigma) {
  if (!(sigma > 0.0)) throw Error("gaussian_kernel: sigma must be positive");
  const double z = distance / sigma;
  return std::exp(-0.5 * z * z);
}

double gaussian_kernel(const RowVector& x, const RowVector& xi, double sigma) {
  if (x.size() != xi.size()) throw Error("gaussian_kernel: length mismatch");
  return gaussian_kernel((x - xi).norm(), sigma);
}

Interpolation interpolate_point(const Matrix& bounding_rows, double sigma) {
  if (bounding_rows.rows() == 0) throw Error("interpolate_point: no neighbours");
  if (!(sigma > 0.0)) throw Error("interpolate_point: sigma must be positive");
  const RowVector target = bounding_rows.colwise().mean();
  Interpolation out;
  out.weights.resize(static_cast<std::size_t>(bounding_rows.rows()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < bounding_rows.rows(); ++i) {
    const double w = gaussian_kernel(target, bounding_rows.row(i), sigma);
    out.weights[static_cast<std::size_t>(i)] = w;
    total += w;
  }
  out.point = RowVector::Zero(bounding_rows.cols());
  for (Eigen::Index i = 0; i < bounding_rows.rows(); ++i) {
    auto& w = out.weights[static_cast<std::size_t>(i)];
    w /= total;
    out.point += w * bounding_rows.row(i);
  }
  return out;
}

double default_sigma(const Matrix& rows, std::uint64_t seed) {
  auto distances = sample_pair_distances(rows, 2000, seed);
  if (distances.empty()) return 1.0;
  const double median = quantile(distances, 0.5);
  return median > 0.0 ? median : 1.0;
}

PaddedAlignment pad_and_realign(const Matrix& latent_short, const Matrix& latent_long, const SortedCost& sorted,
                                const KernelConfig& kernel) {
  const auto ns = static_cast<std::size_t>(latent_short.rows());
  const auto nl = static_cast<std::size_t>(latent_long.rows());
  if (sorted.order.size() != ns || static_cast<std::size_t>(sorted.z_sorted.cols()) != nl) {
    throw Error("pad_and_realign: sorted cost does not match the views");
  }
  if (nl < ns) throw Error("pad_and_realign: short view has more rows than the long view");
  if (latent_short.cols() != latent_long.cols()) throw Error("pad_and_realign: latent widths differ");

  PaddedAlignment out;
  out.sigma = kernel.sigma.value_or(default_sigma(latent_short, kernel.seed));
  if (!(out.sigma > 0.0)) throw Error("pad_and_realign: sigma must be positive");
  out.slots = select_gap_indices(sorted.distances, nl - ns);

  std::vector<std::size_t> per_slot(ns, 0);
  for (Index s : out.slots) ++per_slot[s];

  const auto width = latent_short.cols();
  out.padded_short.resize(static_cast<Eigen::Index>(nl), width);
  out.z_bar.resize(static_cast<Eigen::Index>(nl), static_cast<Eigen::Index>(nl));
  out.padded_origin.reserve(nl);
  out.synth_flags.reserve(nl);

  Eigen::Index row = 0;
  for (std::size_t r = 0; r < ns; ++r) {
    const auto src = static_cast<Eigen::Index>(sorted.order[r]);
    out.padded_short.row(row) = latent_short.row(src);
    out.z_bar.row(row) = sorted.z_sorted.row(static_cast<Eigen::Index>(r));
    out.padded_origin.push_back(sorted.order[r]);
    out.synth_flags.push_back(false);
    ++row;
    if (per_slot[r] == 0) continue;
    Matrix bounds(2, width);
    bounds.row(0) = latent_short.row(src);
    bounds.row(1) = latent_short.row(static_cast<Eigen::Index>(sorted.order[r + 1]));
    const Interpolation synth = interpolate_point(bounds, out.sigma);
    const Matrix synth_cost = cosine_cost_rows(synth.point, latent_long);
    for (std::size_t c = 0; c < per_slot[r]; ++c) {
      out.padded_short.row(row) = synth.point;
      out.z_bar.row(row) = synth_cost.row(0);
      out.padded_origin.push_back(kUnassigned);
      out.synth_flags.push_back(true);
      ++row;
    }
  }

  const Assignment final_assignment = hungarian(out.z_bar.transpose());
  out.final_pairs = final_assignment.row_to_col;
  return out;
}

Fused fuse(const PaddedAlignment& padded, const Matrix& latent_long, const Labels& long_labels) {
  const auto nl = static_cast<std::size_t>(latent_long.rows());
  if (padded.final_pairs.size() != nl || static_cast<std::size_t>(padded.padded_short.rows()) != nl) {
    throw Error("fuse: matching size does not match the long view");
  }
  if (long_labels.size() != nl) throw Error("fuse: label count does not match the long view");
  const auto hs = padded.padded_short.cols();
  Fused out;
  out.features.resize(static_cast<Eigen::Index>(nl), hs + latent_long.cols());
  for (std::size_t l = 0; l < nl; ++l) {
    const Index p = padded.final_pairs[l];
    if (p >= nl) throw Error("fuse: long row " + std::to_string(l) + " is unmatched");
    const auto r = static_cast<Eigen::Index>(l);
    out.features.row(r) << padded.padded_short.row(static_cast<Eigen::Index>(p)), latent_long.row(r);
  }
  out.labels = long_labels;
  return out;
}

Fused fuse_matched(const Matrix& latent_short, const Matrix& latent_long, const Assignment& assignment,
                   const Labels& long_labels) {
  if (long_labels.size() != static_cast<std::size_t>(latent_long.rows())) {
    throw Error("fuse_matched: label count does not match the long view");
  }
  // Emit rows in long-view order so a balanced run fuses exactly like the padded arm.
  auto pairs = assignment.pairs;
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  Fused out;
  out.features.resize(static_cast<Eigen::Index>(pairs.size()), latent_short.cols() + latent_long.cols());
  Eigen::Index r = 0;
  for (const auto& [s, l] : pairs) {
    out.features.row(r++) << latent_short.row(static_cast<Eigen::Index>(s)),
        latent_long.row(static_cast<Eigen::Index>(l));
    out.labels.push_back(long_labels[l]);
  }
  return out;
}

}  // namespace capimac::align
