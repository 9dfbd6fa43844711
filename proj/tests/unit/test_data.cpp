#include <filesystem>
#include <fstream>
#include <set>

#include "capimac/data.hpp"
#include "doctest.h"

using namespace capimac;
using namespace capimac::data;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("capimac_data_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

MultimodalDataset counting_dataset(std::size_t n, std::size_t views = 2) {
  MultimodalDataset ds;
  for (std::size_t v = 0; v < views; ++v) {
    Matrix x(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) << double(i), double(v);
    ds.views.push_back(x);
  }
  for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(i % 2));
  ds.k = 2;
  return ds;
}

}  // namespace

TEST_CASE("block size") {
  CHECK(block_size(0.6, 10) == 6);
  CHECK(block_size(0.7, 10) == 7);
  CHECK(block_size(0.3, 10) == 3);
  CHECK(block_size(0.55, 10) == 5);
  CHECK(block_size(1.0, 10) == 10);
}

TEST_CASE("corruption plan") {
  const auto ds = counting_dataset(10);

  SUBCASE("no corruption") {
    const auto plan = make_corruption_plan(ds, 1.0, 0.0, 5);
    for (std::size_t v = 0; v < 2; ++v) {
      for (std::size_t p = 0; p < 10; ++p) CHECK(plan.shuffle[v][p] == p);
      CHECK(std::count(plan.keep_mask[v].begin(), plan.keep_mask[v].end(), true) == 10);
    }
  }

  SUBCASE("block counts") {
    const auto plan = make_corruption_plan(ds, 0.6, 0.5, 5);
    CHECK(plan.aligned_count() == 6);
    CHECK(plan.misaligned_count() == 4);
    CHECK(plan.removed_per_view() == 2);
    const auto cd = apply_corruption(ds, plan);
    for (std::size_t v = 0; v < 2; ++v) {
      CHECK(cd.views[v].rows() == 8);
      for (std::size_t p = 0; p < 6; ++p) {
        CHECK(plan.shuffle[v][p] == p);
        CHECK(plan.keep_mask[v][p]);
      }
      std::set<Index> moved(plan.shuffle[v].begin() + 6, plan.shuffle[v].end());
      CHECK(moved == std::set<Index>{6, 7, 8, 9});
    }
  }

  SUBCASE("seed contract") {
    const auto a = make_corruption_plan(ds, 0.5, 0.5, 1);
    const auto b = make_corruption_plan(ds, 0.5, 0.5, 2);
    CHECK(a == make_corruption_plan(ds, 0.5, 0.5, 1));
    CHECK(a.shuffle != b.shuffle);
  }

  SUBCASE("rate bounds") {
    CHECK_THROWS_AS(make_corruption_plan(ds, 0.0, 0.5, 1), Error);
    CHECK_THROWS_AS(make_corruption_plan(ds, 1.2, 0.5, 1), Error);
    CHECK_THROWS_AS(make_corruption_plan(ds, 0.5, 1.0, 1), Error);
  }
}

TEST_CASE("row count formula over a grid") {
  for (std::size_t n : {7, 10, 33, 100}) {
    const auto ds = counting_dataset(n);
    for (double a : {0.1, 0.3, 0.5, 0.7, 1.0}) {
      for (double m : {0.0, 0.25, 0.5, 0.9}) {
        const auto cd = apply_corruption(ds, make_corruption_plan(ds, a, m, n));
        const std::size_t aligned = static_cast<std::size_t>(std::floor(a * double(n) + 1e-9));
        const std::size_t expected = n - static_cast<std::size_t>(std::floor(m * double(n - aligned) + 1e-9));
        for (std::size_t v = 0; v < 2; ++v) {
          CHECK(static_cast<std::size_t>(cd.views[v].rows()) == expected);
          // Aligned rows keep their sample across views.
          for (std::size_t i = 0; i < aligned; ++i) CHECK(cd.origin[v][i] == i);
          for (std::size_t i = 0; i < cd.origin[v].size(); ++i) {
            CHECK(cd.views[v](static_cast<Eigen::Index>(i), 0) == double(cd.origin[v][i]));
            CHECK(cd.virtual_labels[v][i] == ds.labels[cd.origin[v][i]]);
          }
        }
      }
    }
  }
}

TEST_CASE("apply corruption trace") {
  const auto ds = counting_dataset(4, 1);
  CorruptionPlan plan;
  plan.align_rate = 0.5;
  plan.missing_rate = 0.5;
  plan.n = 4;
  plan.shuffle = {{0, 1, 3, 2}};
  plan.keep_mask = {{true, true, true, false}};
  const auto cd = apply_corruption(ds, plan);
  REQUIRE(cd.views[0].rows() == 3);
  CHECK(cd.origin[0] == IndexList{0, 1, 3});
  CHECK(cd.views[0].col(0).transpose() == RowVector{{0.0, 1.0, 3.0}});
  CHECK(cd.virtual_labels[0] == Labels{0, 1, 1});
  CHECK(cd.aligned_count == 2);
}

TEST_CASE("synthetic generator") {
  const auto a = generate_synthetic(3, 30, {4, 6}, 5.0, 7);
  CHECK(a.n() == 30);
  CHECK(a.k == 3);
  CHECK(a.views[0].cols() == 4);
  CHECK(a.views[1].cols() == 6);
  for (int c = 0; c < 3; ++c) CHECK(std::count(a.labels.begin(), a.labels.end(), c) == 10);
  const auto b = generate_synthetic(3, 30, {4, 6}, 5.0, 7);
  CHECK(a.views[0] == b.views[0]);
  CHECK(a.labels == b.labels);
  CHECK_FALSE(generate_synthetic(3, 30, {4, 6}, 5.0, 8).views[0] == a.views[0]);
  CHECK_THROWS_AS(generate_synthetic(1, 30, {4}, 5.0, 1), Error);
}

TEST_CASE("load and save") {
  SUBCASE("round trip") {
    const auto dir = scratch("roundtrip");
    const auto ds = generate_synthetic(2, 12, {3, 5}, 4.0, 3);
    save_dataset(ds, dir);
    const auto back = load_dataset(dir);
    CHECK(back.views.size() == 2);
    CHECK(back.labels == ds.labels);
    CHECK(back.k == 2);
    CHECK((back.views[1] - ds.views[1]).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("ragged row") {
    const auto dir = scratch("ragged");
    write(dir / "view0.csv", "1,2\n3,4\n5\n");
    write(dir / "labels.csv", "0\n1\n0\n");
    try {
      load_dataset(dir);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("ragged") != std::string::npos);
    }
  }

  SUBCASE("label mismatch") {
    const auto dir = scratch("mismatch");
    write(dir / "view0.csv", "1,2\n3,4\n");
    write(dir / "labels.csv", "0\n1\n0\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("label count mismatch"), ParseError);
  }

  SUBCASE("non-finite") {
    const auto dir = scratch("nan");
    write(dir / "view0.csv", "1,2\nnan,4\n");
    write(dir / "labels.csv", "0\n1\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("non-finite"), ParseError);
  }

  SUBCASE("missing files") {
    const auto dir = scratch("missing");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("missing file"), ParseError);
    write(dir / "view0.csv", "1\n2\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("missing file"), ParseError);
  }
}
