#include "capimac/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace capimac {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) throw ConfigError(key + ": expected a number, got '" + value + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string value) {
  std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::tolower(c); });
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

}  // namespace

SyntheticSpec parse_synthetic(const std::string& value) {
  const auto parts = split(value, ',');
  if (parts.size() < 4) throw ConfigError("synthetic: expected k,n,d1,d2[,...],separation");
  SyntheticSpec spec;
  spec.k = to_unsigned("synthetic", parts.front());
  spec.n = to_unsigned("synthetic", parts[1]);
  spec.dims.clear();
  for (std::size_t i = 2; i + 1 < parts.size(); ++i) spec.dims.push_back(to_unsigned("synthetic", parts[i]));
  spec.separation = to_double("synthetic", parts.back());
  return spec;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "dataset") {
    c.dataset_path = value;
  } else if (key == "synthetic") {
    const std::uint64_t seed = c.synthetic ? c.synthetic->seed : 0;
    c.synthetic = parse_synthetic(value);
    c.synthetic->seed = seed;
  } else if (key == "synthetic_seed") {
    if (!c.synthetic) c.synthetic = SyntheticSpec{};
    c.synthetic->seed = to_unsigned(key, value);
  } else if (key == "align_rates" || key == "align_rate") {
    c.align_rates.clear();
    for (const auto& p : split(value, ',')) c.align_rates.push_back(to_double(key, p));
  } else if (key == "missing_rate") {
    c.missing_rate = to_double(key, value);
  } else if (key == "seeds" || key == "seed") {
    c.seeds.clear();
    for (const auto& p : split(value, ',')) c.seeds.push_back(to_unsigned(key, p));
  } else if (key == "anchors") {
    c.anchors = to_unsigned(key, value);
  } else if (key == "radius") {
    c.radius = to_double(key, value);
  } else if (key == "alpha") {
    c.alpha = to_double(key, value);
  } else if (key == "walks") {
    if (!c.schedule) c.schedule = anchor::WalkSchedule{1, 1};
    c.schedule->walks = to_unsigned(key, value);
  } else if (key == "walk_length") {
    if (!c.schedule) c.schedule = anchor::WalkSchedule{1, 1};
    c.schedule->length = to_unsigned(key, value);
  } else if (key == "margin") {
    c.loss.margin = to_double(key, value);
  } else if (key == "range") {
    c.loss.range = to_double(key, value);
  } else if (key == "learning_rate") {
    c.loss.learning_rate = to_double(key, value);
  } else if (key == "epochs") {
    c.loss.epochs = to_unsigned(key, value);
  } else if (key == "neg_ratio") {
    c.loss.neg_ratio = to_double(key, value);
  } else if (key == "latent_width") {
    c.latent_width = to_unsigned(key, value);
  } else if (key == "encoder") {
    c.train_encoder = to_bool(key, value);
  } else if (key == "sigma") {
    c.sigma = to_double(key, value);
  } else if (key == "ipt") {
    c.ipt = to_bool(key, value);
  } else if (key == "restarts") {
    c.restarts = to_unsigned(key, value);
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "dump_matrices") {
    c.dump_matrices = to_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  ExperimentConfig config;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

void ExperimentConfig::validate() const {
  if (align_rates.empty()) throw ConfigError("align_rates must not be empty");
  for (double r : align_rates) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("align rate " + std::to_string(r) + " outside (0, 1]");
  }
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("missing_rate must lie in [0, 1)");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (anchors && *anchors == 0) throw ConfigError("anchors must be >= 1");
  if (radius && !(*radius > 0.0)) throw ConfigError("radius must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (schedule && (schedule->walks == 0 || schedule->length == 0)) {
    throw ConfigError("walks and walk_length must be >= 1");
  }
  if (!(loss.margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(loss.range > 0.0)) throw ConfigError("range must be positive");
  if (!(loss.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (loss.epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(loss.neg_ratio >= 0.0)) throw ConfigError("neg_ratio must be >= 0");
  if (latent_width && *latent_width == 0) throw ConfigError("latent_width must be >= 1");
  if (sigma && !(*sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (restarts == 0) throw ConfigError("restarts must be >= 1");
  if (dataset_path.empty() && !synthetic) throw ConfigError("no dataset: set dataset or synthetic");
  if (synthetic) {
    if (synthetic->k < 2 || synthetic->n < synthetic->k || synthetic->dims.size() < 2 ||
        !(synthetic->separation > 0.0) ||
        std::any_of(synthetic->dims.begin(), synthetic->dims.end(), [](std::size_t d) { return d == 0; })) {
      throw ConfigError("synthetic spec invalid: need k >= 2, n >= k, two or more dims >= 1, separation > 0");
    }
  }
}

std::string ExperimentConfig::dataset_name() const {
  if (!dataset_path.empty()) {
    auto p = std::filesystem::path(dataset_path);
    if (!p.has_filename()) p = p.parent_path();
    return p.filename().string();
  }
  return "synthetic";
}

}  // namespace capimac
