#include "capimac/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace capimac {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["dataset"] = c.dataset_name();
  if (!c.dataset_path.empty()) j["dataset_path"] = c.dataset_path;
  if (c.synthetic) {
    j["synthetic"] = {{"k", c.synthetic->k},
                      {"n", c.synthetic->n},
                      {"dims", c.synthetic->dims},
                      {"separation", c.synthetic->separation},
                      {"seed", c.synthetic->seed}};
  }
  j["align_rates"] = c.align_rates;
  j["missing_rate"] = c.missing_rate;
  j["seeds"] = c.seeds;
  j["anchors"] = c.anchors ? ordered_json(*c.anchors) : ordered_json(nullptr);
  j["radius"] = c.radius ? ordered_json(*c.radius) : ordered_json(nullptr);
  j["alpha"] = c.alpha;
  if (c.schedule) {
    j["walks"] = c.schedule->walks;
    j["walk_length"] = c.schedule->length;
  }
  j["loss"] = {{"margin", c.loss.margin},
               {"range", c.loss.range},
               {"learning_rate", c.loss.learning_rate},
               {"epochs", c.loss.epochs},
               {"neg_ratio", c.loss.neg_ratio}};
  j["latent_width"] = c.latent_width ? ordered_json(*c.latent_width) : ordered_json(nullptr);
  j["encoder"] = c.train_encoder;
  j["sigma"] = c.sigma ? ordered_json(*c.sigma) : ordered_json(nullptr);
  j["ipt"] = c.ipt;
  j["restarts"] = c.restarts;
  return j;
}

ordered_json record_json(const RunRecord& r) {
  ordered_json j;
  j["dataset"] = r.dataset;
  j["align_rate"] = r.align_rate;
  j["missing_rate"] = r.missing_rate;
  j["seed"] = r.seed;
  j["ipt"] = r.ipt;
  j["report"] = {{"acc", r.report.acc},
                 {"nmi", r.report.nmi},
                 {"ari", r.report.ari},
                 {"f1_weighted", r.report.f1_weighted},
                 {"k", r.report.k}};
  j["timings_ms"] = {{"corrupt", r.timings.corrupt_ms},
                     {"anchor", r.timings.anchor_ms},
                     {"train", r.timings.train_ms},
                     {"align", r.timings.align_ms},
                     {"cluster", r.timings.cluster_ms}};
  j["anchors"] = {{"unified", r.anchors.unified},
                  {"per_view", r.anchors.per_view},
                  {"radius", r.anchors.radius},
                  {"classes_covered", r.anchors.classes_covered}};
  j["short_rows"] = r.short_rows;
  j["long_rows"] = r.long_rows;
  j["fused_rows"] = r.fused_rows;
  j["correspondence_recovery"] = r.correspondence_recovery;
  j["final_loss"] = r.final_loss ? ordered_json(*r.final_loss) : ordered_json(nullptr);
  return j;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
  return m;
}

}  // namespace

std::vector<RunRecord> sorted_records(std::vector<RunRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.align_rate, a.seed, a.ipt) < std::tie(b.align_rate, b.seed, b.ipt);
  });
  return records;
}

std::string results_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const RunRecord& r : sorted_records(records)) {
    out << r.dataset << ',' << num(r.align_rate) << ',' << num(r.missing_rate) << ',' << r.seed << ','
        << (r.ipt ? 1 : 0) << ',' << num(r.report.acc) << ',' << num(r.report.nmi) << ',' << num(r.report.ari) << ','
        << num(r.report.f1_weighted) << ',' << num(r.timings.corrupt_ms) << ',' << num(r.timings.anchor_ms) << ','
        << num(r.timings.train_ms) << ',' << num(r.timings.align_ms) << ',' << num(r.timings.cluster_ms) << '\n';
  }
  return out.str();
}

std::string results_json(const std::vector<RunRecord>& records, const ExperimentConfig& config) {
  const auto sorted = sorted_records(records);
  ordered_json j;
  j["config"] = config_json(config);
  j["runs"] = ordered_json::array();
  for (const RunRecord& r : sorted) j["runs"].push_back(record_json(r));

  std::map<std::pair<double, bool>, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : sorted) groups[{r.align_rate, r.ipt}].push_back(&r);
  j["summary"] = ordered_json::array();
  for (const auto& [key, group] : groups) {
    ordered_json s;
    s["align_rate"] = key.first;
    s["ipt"] = key.second;
    s["runs"] = group.size();
    auto stat = [&](auto field) {
      std::vector<double> xs;
      for (const RunRecord* r : group) xs.push_back(field(*r));
      const MeanStd m = mean_std(xs);
      return ordered_json{{"mean", m.mean}, {"std", m.std}};
    };
    s["acc"] = stat([](const RunRecord& r) { return r.report.acc; });
    s["nmi"] = stat([](const RunRecord& r) { return r.report.nmi; });
    s["ari"] = stat([](const RunRecord& r) { return r.report.ari; });
    s["f1"] = stat([](const RunRecord& r) { return r.report.f1_weighted; });
    j["summary"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

void emit_report(const std::vector<RunRecord>& records, const ExperimentConfig& config,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "results.csv", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "results.csv").string());
    out << results_csv(records);
  }
  std::ofstream out(dir / "results.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "results.json").string());
  out << results_json(records, config);
}

void write_training_log(const std::vector<double>& losses, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,loss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < losses.size(); ++e) out << e << ',' << losses[e] << '\n';
}

}  // namespace capimac
