#include <catch2/catch_amalgamated.hpp>

#include <cstddef>
#include <string>
#include <vector>

#include "fairot/datagen.hpp"
#include "fairot/ingest.hpp"
#include "fairot/model_io.hpp"

#include "helpers.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace fairot;

namespace {

RepairModel designed_model(std::size_t nq, std::size_t d) {
  MixtureSpec spec;
  spec.d = d;
  if (d == 1) {
    spec.means[cell_index(0, 0)] = {-1.0};
    spec.means[cell_index(0, 1)] = {0.0};
    spec.means[cell_index(1, 0)] = {1.0};
    spec.means[cell_index(1, 1)] = {0.0};
  }
  spec.n_research = 120;
  spec.n_archive = 10;
  spec.seed = 17;
  auto [research, archive] = sample_mixture(spec);
  (void)archive;
  return design_repair_model(research, NqSpec{nq, {}}, 0.5, 99);
}

void require_models_equal(const RepairModel& a, const RepairModel& b) {
  REQUIRE(a.d == b.d);
  REQUIRE(a.t == b.t);
  REQUIRE(a.seed == b.seed);
  REQUIRE(a.cell_counts == b.cell_counts);
  REQUIRE(a.feature_names == b.feature_names);
  REQUIRE(a.schema_json == b.schema_json);
  REQUIRE(a.schema_fingerprint == b.schema_fingerprint);
  REQUIRE(a.created == b.created);
  REQUIRE(a.warnings == b.warnings);
  for (int u = 0; u < 2; ++u)
    for (std::size_t k = 0; k < a.d; ++k) {
      const GroupFeatureRepair& ga = a.at(u, k);
      const GroupFeatureRepair& gb = b.at(u, k);
      REQUIRE(ga.support.lo() == gb.support.lo());
      REQUIRE(ga.support.hi() == gb.support.hi());
      REQUIRE(ga.support.size() == gb.support.size());
      REQUIRE(ga.support.states() == gb.support.states());
      REQUIRE(ga.bandwidth == gb.bandwidth);
      for (int s = 0; s < 2; ++s) {
        REQUIRE(ga.source[static_cast<std::size_t>(s)].mass ==
                gb.source[static_cast<std::size_t>(s)].mass);
        REQUIRE(ga.plan[static_cast<std::size_t>(s)].mass ==
                gb.plan[static_cast<std::size_t>(s)].mass);
      }
      REQUIRE(ga.target.mass == gb.target.mass);
    }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("a saved model loads back bit for bit") {
  RepairModel model = designed_model(12, 2);
  model.feature_names = {"age", "hours-per-week"};
  model.schema_json = TabularSchema::adult_default().canonical_json();
  model.schema_fingerprint = TabularSchema::adult_default().fingerprint();
  model.created = "2026-08-15 10:00:00 UTC";
  model.warnings.push_back("synthetic warning with several words");

  testutil::TempDir dir;
  std::string path = dir.file("model.txt");
  save_model(model, path);
  RepairModel loaded = load_model(path);
  require_models_equal(model, loaded);
  REQUIRE(serialize_model(loaded) == serialize_model(model));
}

TEST_CASE("the model file has one block per group and slice") {
  RepairModel model = designed_model(12, 2);
  std::string text = serialize_model(model);
  std::size_t groups = 0, supports = 0, pmfs = 0, targets = 0, plans = 0;
  for (const std::string& line : split_lines(text)) {
    if (line.rfind("group ", 0) == 0) ++groups;
    if (line.rfind("support ", 0) == 0) ++supports;
    if (line.rfind("pmf", 0) == 0) ++pmfs;
    if (line.rfind("target ", 0) == 0) ++targets;
    if (line.rfind("plan", 0) == 0) ++plans;
  }
  // Two u groups x two features; two s slices within each.
  REQUIRE(groups == 4);
  REQUIRE(supports == 4);
  REQUIRE(targets == 4);
  REQUIRE(pmfs == 8);
  REQUIRE(plans == 8);
}

TEST_CASE("large supports switch to the sparse plan encoding and still round trip") {
  RepairModel model = designed_model(80, 1);  // 6400-cell plans exceed the dense cap
  std::string text = serialize_model(model);
  REQUIRE_THAT(text, ContainsSubstring("plan0 sparse"));
  REQUIRE_THAT(text, ContainsSubstring("plan1 sparse"));

  testutil::TempDir dir;
  std::string path = dir.file("model.txt");
  save_model(model, path);
  require_models_equal(model, load_model(path));
}

TEST_CASE("the version gate fires before any content is parsed") {
  RepairModel model = designed_model(8, 1);
  std::vector<std::string> lines = split_lines(serialize_model(model));
  lines[0] = "fairot-model v2";
  lines[1] = "d notanumber";  // would fail numeric parsing if reached
  testutil::TempDir dir;
  std::string path = dir.file("model.txt");
  testutil::write_text(path, join_lines(lines));
  REQUIRE_THROWS_MATCHES(load_model(path), FormatError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("not a supported model file")));
}

TEST_CASE("truncated model files are rejected as malformed") {
  RepairModel model = designed_model(8, 1);
  std::string text = serialize_model(model);
  testutil::TempDir dir;

  std::string cut_mid = dir.file("half.txt");
  testutil::write_text(cut_mid, text.substr(0, text.size() / 2));
  REQUIRE_THROWS_AS(load_model(cut_mid), FormatError);

  std::vector<std::string> lines = split_lines(text);
  lines.resize(3);
  std::string cut_head = dir.file("head.txt");
  testutil::write_text(cut_head, join_lines(lines));
  REQUIRE_THROWS_MATCHES(load_model(cut_head), FormatError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("truncated")));
}

TEST_CASE("a text-edited negative mass fails the semantic check, not the parse") {
  RepairModel model = designed_model(8, 1);
  std::vector<std::string> lines = split_lines(serialize_model(model));
  bool edited = false;
  for (std::string& line : lines) {
    if (line.rfind("pmf0 ", 0) == 0) {
      std::size_t first = line.find(' ') + 1;
      std::size_t second = line.find(' ', first);
      line = line.substr(0, first) + "-0.5" + line.substr(second);
      edited = true;
      break;
    }
  }
  REQUIRE(edited);
  testutil::TempDir dir;
  std::string path = dir.file("model.txt");
  testutil::write_text(path, join_lines(lines));
  REQUIRE_THROWS_AS(load_model(path), ValidationError);
}

TEST_CASE("models with invalid content refuse to serialize") {
  RepairModel negative = designed_model(8, 1);
  negative.at(0, 0).target.mass[0] = -0.1;
  REQUIRE_THROWS_AS(serialize_model(negative), ValidationError);

  RepairModel nan_bandwidth = designed_model(8, 1);
  nan_bandwidth.at(1, 0).bandwidth[0] = std::nan("");
  REQUIRE_THROWS_AS(serialize_model(nan_bandwidth), ValidationError);
}

TEST_CASE("saving into a missing directory reports an io error") {
  RepairModel model = designed_model(8, 1);
  testutil::TempDir dir;
  REQUIRE_THROWS_AS(save_model(model, dir.file("no/such/dir/model.txt")), IoError);
  REQUIRE_THROWS_AS(load_model(dir.file("absent.txt")), IoError);
}
