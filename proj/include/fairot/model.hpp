#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fairot/error.hpp"

namespace fairot {

// One observation: feature vector plus the two binary attributes.
// s is the sensitive attribute, u the unprotected one conditioned on.
struct LabeledRecord {
  std::vector<double> features;
  int s = 0;
  int u = 0;
};

enum class DatasetRole { research, archive };

// Record order is meaningful and preserved by every operation.
struct Dataset {
  std::vector<LabeledRecord> records;
  std::size_t d = 0;
  DatasetRole role = DatasetRole::research;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

inline constexpr std::size_t kCellCount = 4;

inline constexpr std::size_t cell_index(int u, int s) {
  return static_cast<std::size_t>(u) * 2 + static_cast<std::size_t>(s);
}

// Row indices of a dataset partitioned by the (u, s) cell, in dataset order.
struct GroupIndex {
  std::array<std::vector<std::size_t>, kCellCount> cells;

  const std::vector<std::size_t>& cell(int u, int s) const { return cells[cell_index(u, s)]; }
  std::size_t count(int u, int s) const { return cells[cell_index(u, s)].size(); }
};

// Checks labels and features, then assumes ownership. Every dataset in the
// library goes through here (or is a row-subset of one that did).
inline Dataset validate_dataset(std::vector<LabeledRecord> records, std::size_t expected_d,
                                DatasetRole role = DatasetRole::research) {
  if (expected_d == 0) throw ValidationError("feature dimensionality must be at least 1");
  if (records.empty()) throw ValidationError("dataset has no records");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LabeledRecord& r = records[i];
    if (r.features.size() != expected_d)
      throw ValidationError("record " + std::to_string(i) + ": expected " +
                            std::to_string(expected_d) + " features, got " +
                            std::to_string(r.features.size()));
    for (std::size_t k = 0; k < r.features.size(); ++k)
      if (!std::isfinite(r.features[k]))
        throw ValidationError("record " + std::to_string(i) + ": non-finite value in feature " +
                              std::to_string(k));
    if (r.s != 0 && r.s != 1)
      throw ValidationError("record " + std::to_string(i) + ": sensitive attribute outside {0,1} (s=" +
                            std::to_string(r.s) + ")");
    if (r.u != 0 && r.u != 1)
      throw ValidationError("record " + std::to_string(i) +
                            ": unprotected attribute outside {0,1} (u=" + std::to_string(r.u) + ")");
  }
  Dataset out;
  out.records = std::move(records);
  out.d = expected_d;
  out.role = role;
  return out;
}

inline GroupIndex partition_groups(const Dataset& data) {
  GroupIndex idx;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const LabeledRecord& r = data.records[i];
    idx.cells[cell_index(r.u, r.s)].push_back(i);
  }
  return idx;
}

inline std::vector<double> feature_slice(const Dataset& data, const std::vector<std::size_t>& rows,
                                         std::size_t k) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i : rows) out.push_back(data.records[i].features[k]);
  return out;
}

}  // namespace fairot
