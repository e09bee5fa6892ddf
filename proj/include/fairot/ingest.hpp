#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairot/error.hpp"
#include "fairot/model.hpp"
#include "fairot/rng.hpp"
#include "fairot/textio.hpp"

namespace fairot {

// Line-oriented reader for comma-separated files. Skips blank lines and
// lines starting with '|' (annotation lines some distributions carry), trims
// surrounding whitespace from every field. Quoting is not supported.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path) : in_(path) {
    if (!in_) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!next_data_line(line)) throw FormatError("'" + path + "' has no header row");
    header_ = split(line, ',');
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t line_number() const { return line_number_; }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    if (!next_data_line(line)) return false;
    fields = split(line, ',');
    return true;
  }

 private:
  bool next_data_line(std::string& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_number_;
      std::string_view body = trim(line);
      if (body.empty() || body.front() == '|') continue;
      out = line;
      return true;
    }
    return false;
  }

  std::ifstream in_;
  std::vector<std::string> header_;
  std::size_t line_number_ = 0;
};

// Derives a binary attribute from a column: either membership in a value set
// or a numeric threshold (value >= threshold maps to 1).
struct AttributeRule {
  std::string column;
  std::vector<std::string> positive_values;
  std::optional<double> threshold;

  void validate(const std::string& what) const {
    if (column.empty()) throw SchemaError(what + ": no column named");
    bool has_values = !positive_values.empty();
    bool has_threshold = threshold.has_value();
    if (has_values == has_threshold)
      throw SchemaError(what + " ('" + column +
                        "'): exactly one of positive_values or threshold is required");
  }
};

enum class MissingPolicy { drop_any, drop_used, fail };

inline MissingPolicy missing_policy_from_string(const std::string& name) {
  if (name == "drop_any") return MissingPolicy::drop_any;
  if (name == "drop_used") return MissingPolicy::drop_used;
  if (name == "fail") return MissingPolicy::fail;
  throw SchemaError("unknown missing_policy '" + name + "'");
}

inline const char* missing_policy_name(MissingPolicy policy) {
  switch (policy) {
    case MissingPolicy::drop_any: return "drop_any";
    case MissingPolicy::drop_used: return "drop_used";
    default: return "fail";
  }
}

// Declares how a tabular file maps onto (features, s, u).
struct TabularSchema {
  std::vector<std::string> features;
  AttributeRule sensitive;
  AttributeRule unprotected;
  std::string missing_marker = "?";
  MissingPolicy missing_policy = MissingPolicy::drop_any;
  double bad_row_tolerance = 0.0;  // tolerated fraction of unparseable rows

  void validate() const {
    if (features.empty()) throw SchemaError("schema names no feature columns");
    for (const std::string& f : features)
      if (f.empty()) throw SchemaError("schema has an empty feature column name");
    sensitive.validate("sensitive attribute");
    unprotected.validate("unprotected attribute");
    if (!(bad_row_tolerance >= 0.0 && bad_row_tolerance <= 1.0))
      throw SchemaError("bad_row_tolerance outside [0,1]");
  }

  // Census income extract: sex as the sensitive attribute, college education
  // (education-num >= 13) as the unprotected one, age and weekly hours as
  // the repairable features.
  static TabularSchema adult_default() {
    TabularSchema s;
    s.features = {"age", "hours-per-week"};
    s.sensitive.column = "sex";
    s.sensitive.positive_values = {"Male"};
    s.unprotected.column = "education-num";
    s.unprotected.threshold = 13.0;
    return s;
  }

  static TabularSchema from_json(const nlohmann::json& j) {
    TabularSchema s;
    try {
      if (!j.is_object()) throw SchemaError("schema JSON is not an object");
      s.features = j.at("features").get<std::vector<std::string>>();
      auto parse_rule = [](const nlohmann::json& r, const std::string& what) {
        AttributeRule rule;
        rule.column = r.at("column").get<std::string>();
        if (r.contains("positive_values"))
          rule.positive_values = r.at("positive_values").get<std::vector<std::string>>();
        if (r.contains("threshold")) rule.threshold = r.at("threshold").get<double>();
        rule.validate(what);
        return rule;
      };
      s.sensitive = parse_rule(j.at("sensitive"), "sensitive attribute");
      s.unprotected = parse_rule(j.at("unprotected"), "unprotected attribute");
      if (j.contains("missing_marker")) s.missing_marker = j.at("missing_marker").get<std::string>();
      if (j.contains("missing_policy"))
        s.missing_policy = missing_policy_from_string(j.at("missing_policy").get<std::string>());
      if (j.contains("bad_row_tolerance"))
        s.bad_row_tolerance = j.at("bad_row_tolerance").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("schema JSON: ") + e.what());
    }
    s.validate();
    return s;
  }

  static TabularSchema from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError("schema is not valid JSON");
    return from_json(j);
  }

  static TabularSchema from_json_file(const std::string& path) {
    return from_json_text(read_file_to_string(path));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["features"] = features;
    auto rule_json = [](const AttributeRule& r) {
      nlohmann::json out;
      out["column"] = r.column;
      if (!r.positive_values.empty()) out["positive_values"] = r.positive_values;
      if (r.threshold.has_value()) out["threshold"] = *r.threshold;
      return out;
    };
    j["sensitive"] = rule_json(sensitive);
    j["unprotected"] = rule_json(unprotected);
    j["missing_marker"] = missing_marker;
    j["missing_policy"] = missing_policy_name(missing_policy);
    j["bad_row_tolerance"] = bad_row_tolerance;
    return j;
  }

  // Canonical single-line serialization; nlohmann emits object keys sorted,
  // so equal schemas fingerprint equally.
  std::string canonical_json() const { return to_json().dump(); }
  std::string fingerprint() const { return hex_u64(fnv1a64(canonical_json())); }
};

struct LoadStats {
  std::size_t rows_read = 0;
  std::size_t rows_dropped_missing = 0;
  std::size_t rows_bad = 0;
};

namespace detail {

struct ColumnMap {
  std::vector<std::size_t> feature_cols;
  std::size_t sensitive_col = 0;
  std::size_t unprotected_col = 0;
  std::vector<char> used;  // per input column
};

inline ColumnMap resolve_columns(const std::vector<std::string>& header,
                                 const TabularSchema& schema) {
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index.emplace(header[c], c);
  auto find = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError("input has no column named '" + name + "'");
    return it->second;
  };
  ColumnMap map;
  map.used.assign(header.size(), 0);
  for (const std::string& f : schema.features) {
    std::size_t c = find(f);
    map.feature_cols.push_back(c);
    map.used[c] = 1;
  }
  map.sensitive_col = find(schema.sensitive.column);
  map.unprotected_col = find(schema.unprotected.column);
  map.used[map.sensitive_col] = 1;
  map.used[map.unprotected_col] = 1;
  return map;
}

// Numeric fields may carry a trailing '.' (some census exports terminate
// rows that way); tolerate it.
inline std::optional<double> try_parse_number(std::string_view text) {
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

inline std::optional<int> derive_attribute(const AttributeRule& rule, std::string_view field) {
  if (rule.threshold.has_value()) {
    std::optional<double> v = try_parse_number(field);
    if (!v.has_value()) return std::nullopt;
    return *v >= *rule.threshold ? 1 : 0;
  }
  std::string trimmed(trim(field));
  // Categorical fields may also carry the trailing '.'.
  if (!trimmed.empty() && trimmed.back() == '.') trimmed.pop_back();
  for (const std::string& pos : rule.positive_values)
    if (trimmed == pos) return 1;
  return 0;
}

}  // namespace detail

// Loads a labelled dataset from a delimiter-separated file per the schema.
// Rows with the missing marker are dropped or rejected per the schema's
// policy; unparseable rows count against bad_row_tolerance.
inline Dataset load_labeled_csv(const std::string& path, const TabularSchema& schema,
                                DatasetRole role = DatasetRole::research,
                                LoadStats* stats_out = nullptr) {
  schema.validate();
  CsvReader reader(path);
  detail::ColumnMap map = detail::resolve_columns(reader.header(), schema);

  LoadStats stats;
  std::vector<LabeledRecord> records;
  std::vector<std::string> fields;
  std::size_t first_bad_line = 0;
  while (reader.next(fields)) {
    ++stats.rows_read;
    if (fields.size() != reader.header().size()) {
      ++stats.rows_bad;
      if (first_bad_line == 0) first_bad_line = reader.line_number();
      continue;
    }
    bool missing = false;
    if (schema.missing_policy == MissingPolicy::drop_any) {
      for (const std::string& f : fields)
        if (f == schema.missing_marker) {
          missing = true;
          break;
        }
    } else {
      for (std::size_t c = 0; c < fields.size(); ++c)
        if (map.used[c] && fields[c] == schema.missing_marker) {
          missing = true;
          break;
        }
    }
    if (missing) {
      if (schema.missing_policy == MissingPolicy::fail)
        throw FormatError("'" + path + "' line " + std::to_string(reader.line_number()) +
                          ": missing value ('" + schema.missing_marker + "')");
      ++stats.rows_dropped_missing;
      continue;
    }
    LabeledRecord r;
    r.features.reserve(schema.features.size());
    bool bad = false;
    for (std::size_t fi = 0; fi < map.feature_cols.size(); ++fi) {
      std::optional<double> v = detail::try_parse_number(fields[map.feature_cols[fi]]);
      if (!v.has_value() || !std::isfinite(*v)) {
        bad = true;
        break;
      }
      r.features.push_back(*v);
    }
    if (!bad) {
      std::optional<int> s = detail::derive_attribute(schema.sensitive, fields[map.sensitive_col]);
      std::optional<int> u =
          detail::derive_attribute(schema.unprotected, fields[map.unprotected_col]);
      if (s.has_value() && u.has_value()) {
        r.s = *s;
        r.u = *u;
        records.push_back(std::move(r));
      } else {
        bad = true;
      }
    }
    if (bad) {
      ++stats.rows_bad;
      if (first_bad_line == 0) first_bad_line = reader.line_number();
    }
  }
  if (stats.rows_read == 0) throw FormatError("'" + path + "' has no data rows");
  double bad_fraction = static_cast<double>(stats.rows_bad) / static_cast<double>(stats.rows_read);
  if (stats.rows_bad > 0 && bad_fraction > schema.bad_row_tolerance)
    throw FormatError("'" + path + "': " + std::to_string(stats.rows_bad) + " of " +
                      std::to_string(stats.rows_read) + " rows unparseable (first at line " +
                      std::to_string(first_bad_line) + "), above the tolerated fraction " +
                      format_double(schema.bad_row_tolerance));
  if (records.empty()) throw FormatError("'" + path + "' has no usable rows");
  if (stats_out != nullptr) *stats_out = stats;
  return validate_dataset(std::move(records), schema.features.size(), role);
}

// Splits one labelled dataset into an n_research-record research set and the
// remaining archive, uniformly at random. Retries (fresh stream) until every
// research (u, s) cell is hit, up to 32 draws.
inline std::pair<Dataset, Dataset> split_research_archive(const Dataset& data,
                                                          std::size_t n_research,
                                                          std::uint64_t seed) {
  if (n_research == 0 || n_research >= data.size())
    throw ValidationError("research size " + std::to_string(n_research) +
                          " must be in [1, " + std::to_string(data.size()) + ")");
  const std::size_t kAttempts = 32;
  for (std::size_t attempt = 0; attempt < kAttempts; ++attempt) {
    Splitmix64 rng(derive_seed(seed, 0x5B117ULL, attempt));
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < n_research; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.next_below(order.size() - i));
      std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_research));
    std::sort(chosen.begin(), chosen.end());
    std::array<std::size_t, kCellCount> counts{};
    for (std::size_t i : chosen) {
      const LabeledRecord& r = data.records[i];
      ++counts[cell_index(r.u, r.s)];
    }
    if (!std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; })) {
      if (attempt + 1 == kAttempts)
        throw ValidationError("research split left a (u,s) cell empty in " +
                              std::to_string(kAttempts) + " draws");
      continue;
    }
    std::vector<char> is_research(data.size(), 0);
    for (std::size_t i : chosen) is_research[i] = 1;
    std::vector<LabeledRecord> research_records, archive_records;
    research_records.reserve(n_research);
    archive_records.reserve(data.size() - n_research);
    for (std::size_t i = 0; i < data.size(); ++i)
      (is_research[i] ? research_records : archive_records).push_back(data.records[i]);
    Dataset research = validate_dataset(std::move(research_records), data.d, DatasetRole::research);
    Dataset archive = validate_dataset(std::move(archive_records), data.d, DatasetRole::archive);
    return {std::move(research), std::move(archive)};
  }
  throw ValidationError("unreachable");
}

// Plain CSV writer for synthetic datasets: feature columns then s and u.
inline void write_dataset_csv(std::ostream& os, const Dataset& data,
                              const std::vector<std::string>& feature_names = {}) {
  for (std::size_t k = 0; k < data.d; ++k) {
    std::string name = k < feature_names.size() ? feature_names[k] : "x" + std::to_string(k + 1);
    os << name << ",";
  }
  os << "s,u\n";
  for (const LabeledRecord& r : data.records) {
    for (double v : r.features) os << format_double(v) << ",";
    os << r.s << "," << r.u << "\n";
  }
}

}  // namespace fairot
