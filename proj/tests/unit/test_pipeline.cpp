#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "capimac/config.hpp"
#include "capimac/pipeline.hpp"
#include "capimac/report.hpp"
#include "doctest.h"

using namespace capimac;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.synthetic = SyntheticSpec{3, 90, {6, 8}, 6.0, 2};
  c.seeds = {1, 2};
  c.align_rates = {0.5};
  c.loss.epochs = 20;
  c.restarts = 3;
  return c;
}

// Drops the last `extra` rows of view 1, which must lie in the misaligned block.
AlignmentInputs with_shorter_view1(AlignmentInputs in, std::size_t extra) {
  auto& cd = in.corrupted;
  const auto keep = static_cast<Eigen::Index>(cd.views[1].rows()) - static_cast<Eigen::Index>(extra);
  REQUIRE(static_cast<std::size_t>(keep) >= cd.aligned_count);
  cd.views[1].conservativeResize(keep, Eigen::NoChange);
  cd.virtual_labels[1].resize(static_cast<std::size_t>(keep));
  cd.origin[1].resize(static_cast<std::size_t>(keep));
  in.latents[1].conservativeResize(keep, Eigen::NoChange);
  in.cost = align::build_cost_matrix(in.latents[0], in.latents[1]);
  in.assignment = hungarian(in.cost.z);
  in.sorted = align::reorder_rows(in.cost, in.assignment);
  return in;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# comment line\n"
      "synthetic = 4, 120, 5, 7, 3.5\n"
      "synthetic_seed = 9\n"
      "align_rates = 0.2, 0.9   # trailing comment\n"
      "missing_rate = 0.25\n"
      "seeds = 3,4,5\n"
      "anchors = 12\n"
      "walks = 4\n"
      "walk_length = 6\n"
      "encoder = false\n"
      "ipt = no\n"
      "sigma = 0.7\n");
  REQUIRE(c.synthetic);
  CHECK(c.synthetic->k == 4);
  CHECK(c.synthetic->dims == std::vector<std::size_t>{5, 7});
  CHECK(c.synthetic->separation == 3.5);
  CHECK(c.synthetic->seed == 9);
  CHECK(c.align_rates == std::vector<double>{0.2, 0.9});
  CHECK(c.missing_rate == 0.25);
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(*c.anchors == 12);
  CHECK(*c.schedule == anchor::WalkSchedule{4, 6});
  CHECK_FALSE(c.train_encoder);
  CHECK_FALSE(c.ipt);
  CHECK(*c.sigma == 0.7);
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_WITH_AS(parse_config("bogus = 1\n", "f.cfg"), doctest::Contains("f.cfg:1"), ConfigError);
  CHECK_THROWS_AS(parse_config("anchors = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("align_rates = 1.5\nsynthetic=3,30,2,2,4\n").validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig{}.validate(), ConfigError);
}

TEST_CASE("stage seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (Stage s : {Stage::corruption, Stage::anchors, Stage::training, Stage::kernel, Stage::clustering}) {
    seen.insert(stage_seed(1, s));
    seen.insert(stage_seed(2, s));
  }
  CHECK(seen.size() == 10);
  CHECK(stage_seed(7, Stage::kernel) == stage_seed(7, Stage::kernel));
}

TEST_CASE("pipeline runs") {
  const ExperimentConfig c = small_config();
  const auto ds = load_experiment_dataset(c);

  SUBCASE("deterministic") {
    const auto a = run_pipeline(ds, 0.5, 0.5, c, 1);
    const auto b = run_pipeline(ds, 0.5, 0.5, c, 1);
    CHECK(a.report.acc == b.report.acc);
    CHECK(a.report.nmi == b.report.nmi);
    CHECK(a.final_loss == b.final_loss);
    CHECK(a.fused_rows == a.long_rows);
    CHECK(a.report.acc > 0.7);
  }

  SUBCASE("balanced views make both arms identical") {
    for (const auto& pair : run_ablation(ds, c)) {
      CHECK(pair.ipt.short_rows == pair.ipt.long_rows);
      CHECK(pair.ipt.report.acc == pair.no_ipt.report.acc);
      CHECK(pair.ipt.report.nmi == pair.no_ipt.report.nmi);
      CHECK(pair.ipt.report.ari == pair.no_ipt.report.ari);
    }
  }

  SUBCASE("no corruption on identical views") {
    data::MultimodalDataset same = ds;
    same.views[1] = same.views[0];
    ExperimentConfig plain = c;
    plain.train_encoder = false;
    const auto r = run_pipeline(same, 1.0, 0.0, plain, 3);
    CHECK(r.correspondence_recovery == 1.0);
    CHECK(r.fused_rows == 90);

    const auto in = prepare_alignment(same, 1.0, 0.0, plain, 3);
    Matrix doubled(90, 2 * in.latents[0].cols());
    doubled << in.latents[0], in.latents[0];
    const auto km = cluster::kmeans(doubled, 3, stage_seed(3, Stage::clustering), plain.restarts);
    CHECK(r.report.acc == doctest::Approx(cluster::accuracy(km.labels, same.labels)));
  }

  SUBCASE("imbalanced arms") {
    const auto in = with_shorter_view1(prepare_alignment(ds, 0.5, 0.5, c, 2), 4);
    const auto padded = finish_run(in, ds, c, 2, true);
    const auto dropped = finish_run(in, ds, c, 2, false);
    CHECK(padded.fused_rows == in.cost.long_size());
    CHECK(dropped.fused_rows == in.cost.short_size());
    CHECK(padded.fused_rows == dropped.fused_rows + 4);
  }

  SUBCASE("stage errors name the stage") {
    data::MultimodalDataset three = ds;
    three.views.push_back(ds.views[0]);
    CHECK_THROWS_AS(run_pipeline(three, 0.5, 0.5, c, 1), Error);
    ExperimentConfig greedy = c;
    greedy.anchors = 1000;
    CHECK_THROWS_WITH_AS(run_pipeline(ds, 0.5, 0.5, greedy, 1), doctest::Contains("anchors:"), Error);
  }
}

TEST_CASE("reports") {
  ExperimentConfig c = small_config();
  c.out_dir = std::filesystem::temp_directory_path() / "capimac_report_test";
  std::filesystem::remove_all(c.out_dir);
  c.dump_matrices = true;
  const auto ds = load_experiment_dataset(c);
  auto records = run_experiment(ds, c);
  std::reverse(records.begin(), records.end());

  const std::string csv = results_csv(records);
  CHECK(csv == results_csv(sorted_records(records)));
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == kResultsHeader);
  CHECK(first.rfind("synthetic,0.5,0.5,1,1,", 0) == 0);
  CHECK(results_json(records, c) == results_json(sorted_records(records), c));

  emit_report(records, c, c.out_dir);
  CHECK(std::filesystem::exists(c.out_dir / "results.csv"));
  CHECK(std::filesystem::exists(c.out_dir / "results.json"));
  const auto dump = c.out_dir / "dumps" / "align0.50_seed1_ipt";
  for (const char* f : {"z.csv", "z_sorted.csv", "z_bar.csv", "matching.csv", "anchors_view0.csv", "training_log.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dump / f), f);
  }
}
