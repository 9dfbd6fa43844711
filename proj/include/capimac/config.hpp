#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capimac/anchor.hpp"
#include "capimac/repr.hpp"

namespace capimac {

/// Raised for invalid configuration (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SyntheticSpec {
  std::size_t k = 3;
  std::size_t n = 300;
  std::vector<std::size_t> dims{10, 15};
  double separation = 6.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string dataset_path;
  std::optional<SyntheticSpec> synthetic;

  std::vector<double> align_rates{0.3, 0.5, 0.7};
  double missing_rate = 0.5;
  std::vector<std::uint64_t> seeds{1};

  std::optional<std::size_t> anchors;
  std::optional<double> radius;
  double alpha = 0.5;
  std::optional<anchor::WalkSchedule> schedule;

  repr::LossConfig loss;
  std::optional<std::size_t> latent_width;
  /// false feeds the re-represented views straight into alignment.
  bool train_encoder = true;

  std::optional<double> sigma;
  bool ipt = true;
  std::size_t restarts = 10;

  std::filesystem::path out_dir = "results";
  bool dump_matrices = false;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
  /// Short name for reports: the dataset directory name or "synthetic".
  std::string dataset_name() const;
};

/// Applies one `key = value` setting. Unknown keys are a ConfigError.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` file, `#` starts a comment.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");

SyntheticSpec parse_synthetic(const std::string& value);

}  // namespace capimac
