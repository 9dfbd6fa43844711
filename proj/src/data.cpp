#include "capimac/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace capimac::data {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view field, const std::string& file, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(file, line, "malformed number '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(file, line, "non-finite entry");
  return value;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path);
  if (!in) throw ParseError(name, 0, "missing file");

  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), name, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(name, line_no,
                       "ragged row: expected " + std::to_string(cols) + " fields, got " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(name, line_no, "empty matrix");

  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

Labels read_labels_csv(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path);
  if (!in) throw ParseError(name, 0, "missing file");
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto field = trim(line);
    if (field.empty()) continue;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ParseError(name, line_no, "malformed label '" + std::string(field) + "'");
    }
    if (value < 0) throw ParseError(name, line_no, "negative label");
    labels.push_back(value);
  }
  return labels;
}

std::size_t class_count(const Labels& labels) {
  if (labels.empty()) throw Error("empty label vector");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (int l : labels) {
    if (l < 0) throw Error("negative label");
    seen[static_cast<std::size_t>(l)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) throw Error("labels are not contiguous: class " + std::to_string(c) + " is empty");
  }
  return seen.size();
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace

std::size_t block_size(double rate, std::size_t n) {
  const double scaled = rate * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(scaled + 1e-9 * std::max(1.0, scaled)));
}

std::size_t CorruptionPlan::aligned_count() const noexcept { return block_size(align_rate, n); }

std::size_t CorruptionPlan::removed_per_view() const noexcept {
  return block_size(missing_rate, misaligned_count());
}

void validate(const MultimodalDataset& dataset) {
  if (dataset.views.empty()) throw Error("dataset has no views");
  const std::size_t n = dataset.labels.size();
  for (std::size_t v = 0; v < dataset.views.size(); ++v) {
    const Matrix& x = dataset.views[v];
    if (x.rows() < 1 || x.cols() < 1) throw Error("view " + std::to_string(v) + " is empty");
    if (static_cast<std::size_t>(x.rows()) != n) {
      throw Error("label count mismatch: view " + std::to_string(v) + " has " + std::to_string(x.rows()) +
                  " rows, labels has " + std::to_string(n));
    }
    if (!x.allFinite()) throw Error("non-finite entry in view " + std::to_string(v));
  }
  if (class_count(dataset.labels) != dataset.k) throw Error("class count does not match labels");
}

MultimodalDataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError(dir.string(), 0, "missing file: not a directory");
  MultimodalDataset ds;
  for (std::size_t v = 0;; ++v) {
    const auto path = dir / ("view" + std::to_string(v) + ".csv");
    if (!std::filesystem::exists(path)) {
      if (v == 0) throw ParseError(path.string(), 0, "missing file");
      break;
    }
    ds.views.push_back(read_matrix_csv(path));
  }
  const auto label_path = dir / "labels.csv";
  ds.labels = read_labels_csv(label_path);
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    if (static_cast<std::size_t>(ds.views[v].rows()) != ds.labels.size()) {
      throw ParseError(label_path.string(), ds.labels.size(),
                       "label count mismatch: " + std::to_string(ds.labels.size()) + " labels, view" +
                           std::to_string(v) + ".csv has " + std::to_string(ds.views[v].rows()) + " rows");
    }
  }
  try {
    ds.k = class_count(ds.labels);
  } catch (const Error& e) {
    throw ParseError(label_path.string(), 0, e.what());
  }
  return ds;
}

void save_dataset(const MultimodalDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t v = 0; v < dataset.views.size(); ++v) {
    write_matrix_csv(dataset.views[v], dir / ("view" + std::to_string(v) + ".csv"));
  }
  std::ofstream out(dir / "labels.csv");
  if (!out) throw Error("cannot write labels.csv in " + dir.string());
  for (int l : dataset.labels) out << l << '\n';
}

MultimodalDataset generate_synthetic(std::size_t k, std::size_t n, const std::vector<std::size_t>& dims,
                                     double separation, std::uint64_t seed) {
  if (k < 2) throw Error("generate_synthetic: k must be >= 2");
  if (n < k) throw Error("generate_synthetic: n must be >= k");
  if (dims.empty()) throw Error("generate_synthetic: at least one view required");
  if (std::any_of(dims.begin(), dims.end(), [](std::size_t d) { return d == 0; })) {
    throw Error("generate_synthetic: view dimensions must be >= 1");
  }
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw Error("generate_synthetic: separation must be positive");
  }

  std::mt19937_64 rng(seed);
  MultimodalDataset ds;
  ds.k = k;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<int>(i % k);
  std::shuffle(ds.labels.begin(), ds.labels.end(), rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t dim : dims) {
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(ds.labels[i]);
      for (std::size_t j = 0; j < dim; ++j) x(i, j) = noise(rng);
      const double offset = separation * (1.0 + static_cast<double>(c / dim));
      x(i, c % dim) += offset;
    }
    ds.views.push_back(std::move(x));
  }
  return ds;
}

CorruptionPlan make_corruption_plan(const MultimodalDataset& dataset, double align_rate, double missing_rate,
                                    std::uint64_t seed) {
  if (!(align_rate > 0.0 && align_rate <= 1.0)) throw Error("align_rate must lie in (0, 1]");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw Error("missing_rate must lie in [0, 1)");

  CorruptionPlan plan;
  plan.align_rate = align_rate;
  plan.missing_rate = missing_rate;
  plan.seed = seed;
  plan.n = dataset.n();
  const std::size_t aligned = plan.aligned_count();
  const std::size_t removed = plan.removed_per_view();

  std::mt19937_64 rng(seed);
  for (std::size_t v = 0; v < dataset.views.size(); ++v) {
    IndexList perm(plan.n);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin() + static_cast<std::ptrdiff_t>(aligned), perm.end(), rng);

    IndexList positions(plan.n - aligned);
    std::iota(positions.begin(), positions.end(), aligned);
    std::shuffle(positions.begin(), positions.end(), rng);
    std::vector<bool> keep(plan.n, true);
    for (std::size_t r = 0; r < removed; ++r) keep[positions[r]] = false;

    plan.shuffle.push_back(std::move(perm));
    plan.keep_mask.push_back(std::move(keep));
  }
  return plan;
}

CorruptedDataset apply_corruption(const MultimodalDataset& dataset, const CorruptionPlan& plan) {
  if (plan.n != dataset.n()) throw Error("corruption plan was built for a different sample count");
  if (plan.shuffle.size() != dataset.views.size() || plan.keep_mask.size() != dataset.views.size()) {
    throw Error("corruption plan view count does not match dataset");
  }

  CorruptedDataset out;
  out.aligned_count = plan.aligned_count();
  out.k = dataset.k;
  for (std::size_t v = 0; v < dataset.views.size(); ++v) {
    const auto& perm = plan.shuffle[v];
    const auto& keep = plan.keep_mask[v];
    if (perm.size() != plan.n || keep.size() != plan.n) throw Error("corruption plan has wrong length");

    IndexList origin;
    for (std::size_t p = 0; p < plan.n; ++p) {
      if (perm[p] >= plan.n) throw Error("shuffle index out of range");
      if (keep[p]) origin.push_back(perm[p]);
    }
    const Matrix& x = dataset.views[v];
    Matrix y(static_cast<Eigen::Index>(origin.size()), x.cols());
    Labels labels(origin.size());
    for (std::size_t r = 0; r < origin.size(); ++r) {
      y.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(origin[r]));
      labels[r] = dataset.labels[origin[r]];
    }
    out.views.push_back(std::move(y));
    out.virtual_labels.push_back(std::move(labels));
    out.origin.push_back(std::move(origin));
  }
  return out;
}

}  // namespace capimac::data
