#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fairot/datagen.hpp"
#include "fairot/model.hpp"
#include "fairot/rng.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace fairot;

namespace {

LabeledRecord rec(std::vector<double> x, int s, int u) {
  LabeledRecord r;
  r.features = std::move(x);
  r.s = s;
  r.u = u;
  return r;
}

}  // namespace

TEST_CASE("validate_dataset accepts well-formed records") {
  std::vector<LabeledRecord> rs{rec({1.0, 2.0}, 0, 0), rec({3.0, 4.0}, 1, 0),
                                rec({5.0, 6.0}, 1, 1)};
  Dataset d = validate_dataset(std::move(rs), 2);
  REQUIRE(d.size() == 3);
  REQUIRE(d.d == 2);
  REQUIRE(d.records[1].features[1] == 4.0);
}

TEST_CASE("validate_dataset names the offending record and feature") {
  std::vector<LabeledRecord> rs{rec({1.0, 2.0}, 0, 0),
                                rec({std::numeric_limits<double>::quiet_NaN(), 2.0}, 0, 0)};
  REQUIRE_THROWS_MATCHES(validate_dataset(std::move(rs), 2), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("record 1") &&
                                                         ContainsSubstring("feature 0")));
  std::vector<LabeledRecord> inf_rs{rec({1.0, std::numeric_limits<double>::infinity()}, 0, 0)};
  REQUIRE_THROWS_MATCHES(
      validate_dataset(std::move(inf_rs), 2), ValidationError,
      Catch::Matchers::MessageMatches(ContainsSubstring("record 0") && ContainsSubstring("feature 1")));
}

TEST_CASE("validate_dataset rejects labels outside {0,1}") {
  std::vector<LabeledRecord> rs{rec({1.0}, 2, 0)};
  REQUIRE_THROWS_MATCHES(validate_dataset(std::move(rs), 1), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("attribute outside {0,1}")));
  std::vector<LabeledRecord> rs2{rec({1.0}, 0, -1)};
  REQUIRE_THROWS_MATCHES(validate_dataset(std::move(rs2), 1), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("attribute outside {0,1}")));
}

TEST_CASE("validate_dataset rejects dimensionality drift and empty input") {
  std::vector<LabeledRecord> rs{rec({1.0, 2.0}, 0, 0), rec({1.0}, 0, 0)};
  REQUIRE_THROWS_MATCHES(validate_dataset(std::move(rs), 2), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("record 1")));
  REQUIRE_THROWS_AS(validate_dataset({}, 2), ValidationError);
}

TEST_CASE("partition_groups routes each record to its (u,s) cell") {
  std::vector<LabeledRecord> rs{rec({0.0}, 0, 0), rec({1.0}, 1, 0), rec({2.0}, 0, 1),
                                rec({3.0}, 1, 1)};
  Dataset d = validate_dataset(std::move(rs), 1);
  GroupIndex idx = partition_groups(d);
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s) {
      REQUIRE(idx.count(u, s) == 1);
      const LabeledRecord& r = d.records[idx.cell(u, s)[0]];
      REQUIRE(r.u == u);
      REQUIRE(r.s == s);
    }
}

TEST_CASE("partition_groups handles a single occupied cell") {
  std::vector<LabeledRecord> rs(5, rec({1.0}, 0, 0));
  Dataset d = validate_dataset(std::move(rs), 1);
  GroupIndex idx = partition_groups(d);
  REQUIRE(idx.count(0, 0) == 5);
  REQUIRE(idx.count(0, 1) == 0);
  REQUIRE(idx.count(1, 0) == 0);
  REQUIRE(idx.count(1, 1) == 0);
}

TEST_CASE("partition_groups is a partition: disjoint, complete, order-preserving") {
  MixtureSpec spec;
  spec.seed = 41;
  spec.n_research = 200;
  spec.n_archive = 300;
  auto [research, archive] = sample_mixture(spec);
  GroupIndex idx = partition_groups(archive);
  std::vector<std::size_t> all;
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s) {
      const auto& cell = idx.cell(u, s);
      REQUIRE(std::is_sorted(cell.begin(), cell.end()));
      for (std::size_t i : cell) {
        REQUIRE(archive.records[i].u == u);
        REQUIRE(archive.records[i].s == s);
      }
      all.insert(all.end(), cell.begin(), cell.end());
    }
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == archive.size());
  for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);
}

TEST_CASE("default mixture hits the expected cell proportions") {
  MixtureSpec spec;
  spec.seed = 2024;
  spec.n_research = 500;
  spec.n_archive = 5000;
  auto [research, archive] = sample_mixture(spec);
  Dataset all = research;
  all.records.insert(all.records.end(), archive.records.begin(), archive.records.end());
  GroupIndex idx = partition_groups(all);
  double n = static_cast<double>(all.size());
  // Pr[u,s] = Pr[u] * Pr[s | u]; four-sigma sampling tolerance.
  const double expected[4] = {0.5 * 0.3, 0.5 * 0.7, 0.5 * 0.1, 0.5 * 0.9};
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s) {
      double p = expected[cell_index(u, s)];
      double tolerance = 4.0 * std::sqrt(p * (1.0 - p) / n);
      REQUIRE(std::abs(static_cast<double>(idx.count(u, s)) / n - p) < tolerance);
    }
}
