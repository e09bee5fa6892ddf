#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fairot/repair.hpp"
#include "fairot/rng.hpp"

#include "helpers.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace fairot;

namespace {

Dataset one_feature_dataset(const std::array<std::vector<double>, 4>& cell_values,
                            DatasetRole role = DatasetRole::research) {
  Dataset data;
  data.d = 1;
  data.role = role;
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s)
      for (double v : cell_values[cell_index(u, s)]) data.records.push_back({{v}, s, u});
  return data;
}

// Three-state model with identical content for both u groups and both s
// slices, built directly so tests control every plan entry.
RepairModel tiny_model(const std::vector<double>& source_mass, const std::vector<double>& target_mass,
                       const std::vector<double>& plan_mass) {
  InterpolatedSupport s(0.0, 2.0, 3);
  RepairModel m;
  m.d = 1;
  m.t = 0.5;
  m.cell_counts = {1, 1, 1, 1};
  for (int u = 0; u < 2; ++u) {
    m.groups[static_cast<std::size_t>(u)].resize(1);
    GroupFeatureRepair& g = m.at(u, 0);
    g.support = s;
    g.bandwidth = {0.1, 0.1};
    g.source[0] = DiscreteDistribution{s, source_mass};
    g.source[1] = DiscreteDistribution{s, source_mass};
    g.target = DiscreteDistribution{s, target_mass};
    TransportPlan plan;
    plan.source_support = s;
    plan.target_support = s;
    plan.rows = 3;
    plan.cols = 3;
    plan.mass = plan_mass;
    g.plan[0] = plan;
    g.plan[1] = plan;
  }
  m.validate(1e-6);
  return m;
}

}  // namespace

TEST_CASE("design on identical slices yields the common pmf and a near-diagonal plan") {
  Dataset research = one_feature_dataset({{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {0.0, 5.0, 7.0}, {0.0, 5.0, 7.0}}});
  RepairModel model = design_repair_model(research, NqSpec{25, {}});
  for (int u = 0; u < 2; ++u) {
    const GroupFeatureRepair& g = model.at(u, 0);
    for (int s = 0; s < 2; ++s)
      for (std::size_t q = 0; q < g.support.size(); ++q)
        REQUIRE(g.target.mass[q] ==
                Catch::Approx(g.source[static_cast<std::size_t>(s)].mass[q]).margin(1e-12));
    for (int s = 0; s < 2; ++s) {
      double off_diagonal = 0.0;
      const TransportPlan& plan = g.plan[static_cast<std::size_t>(s)];
      for (std::size_t i = 0; i < plan.rows; ++i)
        for (std::size_t j = 0; j < plan.cols; ++j)
          if (i != j) off_diagonal += plan.at(i, j);
      REQUIRE(off_diagonal <= 1e-12);
    }
  }
}

TEST_CASE("design with a single-record cell records a bandwidth fallback warning") {
  Dataset research =
      one_feature_dataset({{{1.0, 2.0, 3.0}, {2.5, 3.5}, {0.0, 5.0}, {5.0}}});
  RepairModel model = design_repair_model(research, NqSpec{10, {}});
  REQUIRE_FALSE(model.warnings.empty());
  REQUIRE_THAT(model.warnings.front(), ContainsSubstring("fewer than 2 distinct values"));
  REQUIRE_NOTHROW(model.validate(1e-9));
}

TEST_CASE("design rejects an empty research cell by name") {
  Dataset research = one_feature_dataset({{{1.0, 2.0}, {2.5, 3.5}, {0.0, 5.0}, {}}});
  REQUIRE_THROWS_MATCHES(design_repair_model(research, NqSpec{}), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("(u=1, s=1)") &&
                                                         ContainsSubstring("empty")));
}

TEST_CASE("design rejects a degenerate combined slice by name") {
  Dataset research = one_feature_dataset({{{7.0, 7.0}, {7.0, 7.0}, {0.0, 5.0}, {1.0, 2.0}}});
  REQUIRE_THROWS_MATCHES(design_repair_model(research, NqSpec{}), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("degenerate slice") &&
                                                         ContainsSubstring("u=0")));
}

TEST_CASE("support size overrides apply per group and feature") {
  Dataset research =
      one_feature_dataset({{{1.0, 2.0, 3.0}, {2.5, 3.5}, {0.0, 5.0}, {1.0, 6.0}}});
  NqSpec nq{12, {{{1, 0}, 7}}};
  RepairModel model = design_repair_model(research, nq);
  REQUIRE(model.at(0, 0).support.size() == 12);
  REQUIRE(model.at(1, 0).support.size() == 7);
  REQUIRE_THROWS_AS((NqSpec{1, {}}.resolve(0, 0)), ValidationError);
}

TEST_CASE("fractional positions split between bracketing states at the observed rate") {
  // Identity plan: the drawn state is exactly the bracketing choice, so the
  // lower state should win with probability one minus the fraction.
  RepairModel model = tiny_model({0.25, 0.5, 0.25}, {0.25, 0.5, 0.25},
                                 {0.25, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.25});
  const std::size_t n = 20000;
  std::size_t lower = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double out = repair_value(0.25, 0, 0, 0, model, RepairRng{9, i});
    REQUIRE((out == 0.0 || out == 1.0));
    if (out == 0.0) ++lower;
  }
  double freq = static_cast<double>(lower) / static_cast<double>(n);
  REQUIRE(std::abs(freq - 0.75) < 0.015);
}

TEST_CASE("a plan row with a single destination is followed deterministically") {
  RepairModel model = tiny_model({0.3, 0.3, 0.4}, {0.4, 0.3, 0.3},
                                 {0.0, 0.0, 0.3, 0.0, 0.3, 0.0, 0.4, 0.0, 0.0});
  for (std::size_t i = 0; i < 50; ++i) {
    REQUIRE(repair_value(0.0, 0, 0, 0, model, RepairRng{3, i}) == 2.0);
    REQUIRE(repair_value(1.0, 0, 1, 0, model, RepairRng{3, i}) == 1.0);
    REQUIRE(repair_value(2.0, 1, 0, 0, model, RepairRng{3, i}) == 0.0);
  }
}

TEST_CASE("a massless plan row falls back to the nearest row below") {
  RepairModel model = tiny_model({0.5, 0.0, 0.5}, {0.5, 0.0, 0.5},
                                 {0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5});
  RepairReport report;
  report.init_groups(1);
  double out = repair_value(1.0, 0, 0, 0, model, RepairRng{4, 0}, &report);
  // State 1 has no mass; rows 0 and 2 are equally near and the lower wins.
  REQUIRE(out == 0.0);
  REQUIRE(report.zero_row_fallbacks == 1);
}

TEST_CASE("repair clamps out-of-range values into the design range") {
  Dataset research = one_feature_dataset(
      {{{0.0, 1.0, 2.0, 3.0, 4.0}, {2.0, 3.0, 4.0, 5.0, 6.0}, {10.0, 11.0, 12.0}, {11.0, 12.0, 13.0}}});
  RepairModel model = design_repair_model(research, NqSpec{20, {}});
  Dataset archive = one_feature_dataset({{{-100.0, 3.0}, {100.0}, {-5.0}, {50.0}}},
                                        DatasetRole::archive);
  RepairResult result = repair_dataset(archive, model, 17);
  REQUIRE(result.report.records == archive.size());
  REQUIRE(result.report.clamped_low == 2);
  REQUIRE(result.report.clamped_high == 2);
  std::uint64_t group_total = 0;
  for (int u = 0; u < 2; ++u)
    for (std::uint64_t c : result.report.clamped_by_group[static_cast<std::size_t>(u)])
      group_total += c;
  REQUIRE(group_total == result.report.clamped_low + result.report.clamped_high);
  for (const LabeledRecord& r : result.repaired.records) {
    const InterpolatedSupport& support = model.at(r.u, 0).support;
    REQUIRE(r.features[0] >= support.lo());
    REQUIRE(r.features[0] <= support.hi());
  }
}

TEST_CASE("repair preserves cardinality, order, and labels") {
  Dataset research = one_feature_dataset(
      {{{0.0, 1.0, 2.0}, {2.0, 3.0, 4.0}, {10.0, 11.0}, {11.0, 13.0}}});
  RepairModel model = design_repair_model(research, NqSpec{15, {}});
  Dataset archive = one_feature_dataset({{{0.5, 1.5}, {2.5}, {10.5, 11.5}, {12.0}}},
                                        DatasetRole::archive);
  RepairResult result = repair_dataset(archive, model, 5);
  REQUIRE(result.repaired.size() == archive.size());
  REQUIRE(result.repaired.d == archive.d);
  for (std::size_t i = 0; i < archive.size(); ++i) {
    REQUIRE(result.repaired.records[i].u == archive.records[i].u);
    REQUIRE(result.repaired.records[i].s == archive.records[i].s);
  }
}

TEST_CASE("repair is a pure function of the seed") {
  Splitmix64 rng(88);
  std::array<std::vector<double>, 4> cells;
  for (auto& cell : cells)
    for (int i = 0; i < 40; ++i) cell.push_back(rng.next_normal());
  Dataset research = one_feature_dataset(cells);
  RepairModel model = design_repair_model(research, NqSpec{30, {}});

  std::array<std::vector<double>, 4> archive_cells;
  for (auto& cell : archive_cells)
    for (int i = 0; i < 60; ++i) cell.push_back(rng.next_normal());
  Dataset archive = one_feature_dataset(archive_cells, DatasetRole::archive);

  RepairResult a = repair_dataset(archive, model, 123);
  RepairResult b = repair_dataset(archive, model, 123);
  RepairResult c = repair_dataset(archive, model, 124);
  bool any_difference = false;
  for (std::size_t i = 0; i < archive.size(); ++i) {
    REQUIRE(a.repaired.records[i].features[0] == b.repaired.records[i].features[0]);
    if (a.repaired.records[i].features[0] != c.repaired.records[i].features[0])
      any_difference = true;
  }
  REQUIRE(any_difference);
}

TEST_CASE("repairing an empty dataset is a no-op") {
  RepairModel model = tiny_model({0.5, 0.0, 0.5}, {0.5, 0.0, 0.5},
                                 {0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5});
  Dataset empty;
  empty.d = model.d;
  empty.role = DatasetRole::archive;
  RepairResult result = repair_dataset(empty, model, 7);
  REQUIRE(result.repaired.empty());
  REQUIRE(result.report.records == 0);
}

TEST_CASE("repair rejects label and dimension violations") {
  RepairModel model = tiny_model({0.5, 0.0, 0.5}, {0.5, 0.0, 0.5},
                                 {0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5});
  REQUIRE_THROWS_AS(repair_value(1.0, 2, 0, 0, model, RepairRng{1, 0}), ValidationError);
  REQUIRE_THROWS_AS(repair_value(1.0, 0, -1, 0, model, RepairRng{1, 0}), ValidationError);
  REQUIRE_THROWS_AS(repair_value(1.0, 0, 0, 1, model, RepairRng{1, 0}), SchemaError);
  Dataset wrong;
  wrong.d = 2;
  wrong.records.push_back({{1.0, 2.0}, 0, 0});
  REQUIRE_THROWS_AS(repair_dataset(wrong, model, 1), SchemaError);
}

TEST_CASE("geometric baseline sends two constant groups to their midpoint") {
  Dataset research = one_feature_dataset(
      {{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}, {4.0, 4.0}, {6.0, 6.0, 6.0, 6.0}}});
  Dataset repaired = geometric_repair(research, 0.5);
  REQUIRE(repaired.size() == research.size());
  for (std::size_t i = 0; i < repaired.size(); ++i) {
    const LabeledRecord& r = repaired.records[i];
    REQUIRE(r.u == research.records[i].u);
    REQUIRE(r.s == research.records[i].s);
    REQUIRE(r.features[0] == Catch::Approx(r.u == 0 ? 1.0 : 5.0).margin(1e-12));
  }
}

TEST_CASE("geometric baseline at weight zero leaves the first slice untouched") {
  Splitmix64 rng(61);
  std::array<std::vector<double>, 4> cells;
  for (auto& cell : cells)
    for (int i = 0; i < 9; ++i) cell.push_back(rng.next_normal());
  Dataset research = one_feature_dataset(cells);
  Dataset repaired = geometric_repair(research, 0.0);
  for (std::size_t i = 0; i < research.size(); ++i)
    if (research.records[i].s == 0)
      REQUIRE(repaired.records[i].features[0] ==
              Catch::Approx(research.records[i].features[0]).margin(1e-12));
}

TEST_CASE("geometric baseline requires every research cell") {
  Dataset research = one_feature_dataset({{{0.0, 1.0}, {2.0}, {}, {6.0}}});
  REQUIRE_THROWS_MATCHES(geometric_repair(research), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("(u=1, s=0)")));
}
