#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fairot/density.hpp"
#include "fairot/error.hpp"
#include "fairot/model.hpp"
#include "fairot/parallel.hpp"
#include "fairot/rng.hpp"
#include "fairot/transport.hpp"

namespace fairot {

// Number of support states per (u, feature) pair: one default plus optional
// per-pair overrides.
struct NqSpec {
  std::size_t value = 50;
  std::map<std::pair<int, std::size_t>, std::size_t> overrides;

  std::size_t resolve(int u, std::size_t k) const {
    auto it = overrides.find({u, k});
    std::size_t n = it != overrides.end() ? it->second : value;
    if (n < 2)
      throw ValidationError("support size for (u=" + std::to_string(u) + ", feature " +
                            std::to_string(k) + ") must be >= 2, got " + std::to_string(n));
    return n;
  }
};

// Everything needed to repair feature k of a record in group u: the shared
// support, the two per-s source pmfs with their bandwidths, the interpolated
// target, and the two couplings onto it.
struct GroupFeatureRepair {
  InterpolatedSupport support;
  std::array<double, 2> bandwidth{0.0, 0.0};
  std::array<DiscreteDistribution, 2> source;
  DiscreteDistribution target;
  std::array<TransportPlan, 2> plan;
};

struct RepairModel {
  std::size_t d = 0;
  double t = 0.5;
  std::uint64_t seed = 0;
  std::array<std::size_t, kCellCount> cell_counts{};
  std::vector<std::string> feature_names;  // empty, or one name per feature
  std::string schema_json;                 // empty when designed from in-memory data
  std::string schema_fingerprint;
  std::string created;
  std::vector<std::string> warnings;
  std::array<std::vector<GroupFeatureRepair>, 2> groups;  // [u][k]

  const GroupFeatureRepair& at(int u, std::size_t k) const { return groups[static_cast<std::size_t>(u)][k]; }
  GroupFeatureRepair& at(int u, std::size_t k) { return groups[static_cast<std::size_t>(u)][k]; }

  void validate(double tol = 1e-6) const {
    if (d == 0) throw ValidationError("model has no features");
    if (!(t >= 0.0 && t <= 1.0))
      throw ValidationError("model interpolation weight outside [0,1]");
    for (int u = 0; u < 2; ++u)
      for (int s = 0; s < 2; ++s)
        if (cell_counts[cell_index(u, s)] == 0)
          throw ValidationError("model records an empty research cell (u=" + std::to_string(u) +
                                ", s=" + std::to_string(s) + ")");
    if (!feature_names.empty() && feature_names.size() != d)
      throw ValidationError("model has " + std::to_string(feature_names.size()) +
                            " feature names for " + std::to_string(d) + " features");
    for (int u = 0; u < 2; ++u) {
      if (groups[static_cast<std::size_t>(u)].size() != d)
        throw ValidationError("model group u=" + std::to_string(u) + " does not cover all features");
      for (std::size_t k = 0; k < d; ++k) {
        const GroupFeatureRepair& g = at(u, k);
        std::string where = "(u=" + std::to_string(u) + ", feature " + std::to_string(k) + ")";
        if (g.support.size() < 2) throw ValidationError("support too small at " + where);
        if (g.target.size() != g.support.size())
          throw ValidationError("target size mismatch at " + where);
        g.target.validate(tol);
        for (int s = 0; s < 2; ++s) {
          if (!(g.bandwidth[static_cast<std::size_t>(s)] > 0.0))
            throw ValidationError("non-positive bandwidth at " + where + " s=" + std::to_string(s));
          const DiscreteDistribution& p = g.source[static_cast<std::size_t>(s)];
          if (p.size() != g.support.size())
            throw ValidationError("source pmf size mismatch at " + where + " s=" + std::to_string(s));
          p.validate(tol);
          const TransportPlan& plan = g.plan[static_cast<std::size_t>(s)];
          try {
            plan.validate(p.mass, g.target.mass, tol);
          } catch (const ValidationError& e) {
            throw ValidationError("plan at " + where + " s=" + std::to_string(s) + ": " + e.what());
          }
        }
      }
    }
  }
};

// Builds the per-(u, feature) supports, source pmfs, targets, and plans from
// research data. Deterministic; `seed` is only recorded so downstream repair
// runs can default to it.
inline RepairModel design_repair_model(const Dataset& research, const NqSpec& nq, double t = 0.5,
                                       std::uint64_t seed = 0) {
  if (research.empty()) throw ValidationError("research dataset is empty");
  if (!(t >= 0.0 && t <= 1.0))
    throw ValidationError("interpolation weight must lie in [0,1], got " + std::to_string(t));
  GroupIndex idx = partition_groups(research);
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s)
      if (idx.count(u, s) == 0)
        throw ValidationError("research cell (u=" + std::to_string(u) + ", s=" + std::to_string(s) +
                              ") is empty");

  RepairModel model;
  model.d = research.d;
  model.t = t;
  model.seed = seed;
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s) model.cell_counts[cell_index(u, s)] = idx.count(u, s);

  for (int u = 0; u < 2; ++u) {
    model.groups[static_cast<std::size_t>(u)].resize(research.d);
    // Rows with this u, both s values, in dataset order.
    std::vector<std::size_t> combined_rows(idx.cell(u, 0));
    combined_rows.insert(combined_rows.end(), idx.cell(u, 1).begin(), idx.cell(u, 1).end());
    std::sort(combined_rows.begin(), combined_rows.end());
    for (std::size_t k = 0; k < research.d; ++k) {
      GroupFeatureRepair& g = model.at(u, k);
      std::vector<double> combined = feature_slice(research, combined_rows, k);
      auto [lo_it, hi_it] = std::minmax_element(combined.begin(), combined.end());
      if (!(*lo_it < *hi_it))
        throw ValidationError("degenerate slice (u=" + std::to_string(u) + ", feature " +
                              std::to_string(k) + "): all values equal");
      g.support = InterpolatedSupport(*lo_it, *hi_it, nq.resolve(u, k));
      for (int s = 0; s < 2; ++s) {
        std::vector<double> slice = feature_slice(research, idx.cell(u, s), k);
        auto [slo, shi] = std::minmax_element(slice.begin(), slice.end());
        double h;
        if (slice.size() >= 2 && *slo < *shi) {
          h = silverman_bandwidth(slice).h;
        } else {
          // Too few distinct values for a within-cell bandwidth; borrow the
          // combined slice's and record the fallback.
          h = silverman_bandwidth(combined).h;
          model.warnings.push_back("cell (u=" + std::to_string(u) + ", s=" + std::to_string(s) +
                                   ") feature " + std::to_string(k) +
                                   ": fewer than 2 distinct values; bandwidth taken from the combined slice");
        }
        g.bandwidth[static_cast<std::size_t>(s)] = h;
        g.source[static_cast<std::size_t>(s)] = kde_pmf(slice, g.support, {h});
      }
      g.target = barycenter(g.source[0], g.source[1], t);
      for (int s = 0; s < 2; ++s)
        g.plan[static_cast<std::size_t>(s)] =
            monotone_plan(g.source[static_cast<std::size_t>(s)], g.target, {2});
    }
  }
  model.validate(1e-9);
  return model;
}

// Stream key for one record's repair draws. Draws are keyed, not sequential,
// so results do not depend on batch sizes or thread schedule.
struct RepairRng {
  std::uint64_t seed = 0;
  std::uint64_t record_index = 0;
};

namespace detail {

enum class DrawKind : std::uint64_t { cell_assign = 1, target_draw = 2 };

inline double repair_uniform(const RepairRng& rng, int u, int s, std::size_t k, DrawKind kind) {
  return unit_from_key(derive_seed(rng.seed, static_cast<std::uint64_t>(u),
                                   static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k),
                                   rng.record_index, static_cast<std::uint64_t>(kind)));
}

}  // namespace detail

// Tallies of what repair did. Totals plus per-(u, feature) clamp counts.
struct RepairReport {
  std::uint64_t records = 0;
  std::uint64_t values = 0;
  std::uint64_t clamped_low = 0;
  std::uint64_t clamped_high = 0;
  std::uint64_t zero_row_fallbacks = 0;
  std::array<std::vector<std::uint64_t>, 2> clamped_by_group;  // [u][k]

  void init_groups(std::size_t d) {
    clamped_by_group[0].assign(d, 0);
    clamped_by_group[1].assign(d, 0);
  }

  void merge(const RepairReport& other) {
    records += other.records;
    values += other.values;
    clamped_low += other.clamped_low;
    clamped_high += other.clamped_high;
    zero_row_fallbacks += other.zero_row_fallbacks;
    for (int u = 0; u < 2; ++u) {
      auto& mine = clamped_by_group[static_cast<std::size_t>(u)];
      const auto& theirs = other.clamped_by_group[static_cast<std::size_t>(u)];
      if (mine.size() < theirs.size()) mine.resize(theirs.size(), 0);
      for (std::size_t k = 0; k < theirs.size(); ++k) mine[k] += theirs[k];
    }
  }
};

// Repairs one feature value: clamp into the support range, pick the lower or
// upper bracketing state by a Bernoulli draw on the interpolation fraction,
// then draw the output state from that row of the group's plan.
inline double repair_value(double x, int u, int s, std::size_t k, const RepairModel& model,
                           const RepairRng& rng, RepairReport* report = nullptr) {
  if ((u != 0 && u != 1) || (s != 0 && s != 1))
    throw ValidationError("attribute outside {0,1} (u=" + std::to_string(u) +
                          ", s=" + std::to_string(s) + ")");
  if (k >= model.d)
    throw SchemaError("feature index " + std::to_string(k) + " out of range for model with d=" +
                      std::to_string(model.d));
  const GroupFeatureRepair& g = model.at(u, k);
  const InterpolatedSupport& support = g.support;

  double cx = x;
  if (x < support.lo()) {
    cx = support.lo();
    if (report != nullptr) {
      ++report->clamped_low;
      ++report->clamped_by_group[static_cast<std::size_t>(u)][k];
    }
  } else if (x > support.hi()) {
    cx = support.hi();
    if (report != nullptr) {
      ++report->clamped_high;
      ++report->clamped_by_group[static_cast<std::size_t>(u)][k];
    }
  }

  GridPosition pos = support.locate(cx);
  std::size_t q = pos.index;
  if (pos.frac > 0.0 &&
      detail::repair_uniform(rng, u, s, k, detail::DrawKind::cell_assign) < pos.frac)
    ++q;

  const TransportPlan& plan = g.plan[static_cast<std::size_t>(s)];
  double row_total = 0.0;
  for (std::size_t j = 0; j < plan.cols; ++j) row_total += plan.at(q, j);
  if (row_total < 1e-12) {
    // The source pmf carries no mass at this state. Use the nearest row that
    // does, preferring the lower index on ties.
    std::size_t found = plan.rows;
    for (std::size_t off = 1; off < plan.rows; ++off) {
      if (q >= off) {
        double tot = 0.0;
        for (std::size_t j = 0; j < plan.cols; ++j) tot += plan.at(q - off, j);
        if (tot >= 1e-12) {
          found = q - off;
          break;
        }
      }
      if (q + off < plan.rows) {
        double tot = 0.0;
        for (std::size_t j = 0; j < plan.cols; ++j) tot += plan.at(q + off, j);
        if (tot >= 1e-12) {
          found = q + off;
          break;
        }
      }
    }
    if (found == plan.rows)
      throw ValidationError("plan (u=" + std::to_string(u) + ", s=" + std::to_string(s) +
                            ", feature " + std::to_string(k) + ") has no row with mass");
    q = found;
    row_total = 0.0;
    for (std::size_t j = 0; j < plan.cols; ++j) row_total += plan.at(q, j);
    if (report != nullptr) ++report->zero_row_fallbacks;
  }

  double threshold =
      detail::repair_uniform(rng, u, s, k, detail::DrawKind::target_draw) * row_total;
  double acc = 0.0;
  const std::vector<double>& targets = plan.target_support.states();
  for (std::size_t j = 0; j < plan.cols; ++j) {
    acc += plan.at(q, j);
    if (acc > threshold) {
      if (report != nullptr) ++report->values;
      return targets[j];
    }
  }
  if (report != nullptr) ++report->values;
  return targets.back();
}

struct RepairResult {
  Dataset repaired;
  RepairReport report;
};

// Repairs every feature of every record. Output has identical cardinality,
// order, and labels; only feature values change. Record index alone keys the
// randomness, so any chunking of the work gives identical bytes.
inline RepairResult repair_dataset(const Dataset& data, const RepairModel& model,
                                   std::uint64_t seed) {
  if (!data.empty() && data.d != model.d)
    throw SchemaError("dataset has " + std::to_string(data.d) + " features but the model expects " +
                      std::to_string(model.d));
  RepairResult result;
  result.repaired = data;
  result.report.init_groups(model.d);
  if (data.empty()) return result;

  const std::size_t n = data.size();
  const std::size_t chunk = 4096;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<RepairReport> chunk_reports(n_chunks);
  parallel_for(n_chunks, [&](std::size_t ci) {
    RepairReport& rep = chunk_reports[ci];
    rep.init_groups(model.d);
    std::size_t begin = ci * chunk, end = std::min(n, begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      LabeledRecord& r = result.repaired.records[i];
      rep.records += 1;
      for (std::size_t k = 0; k < model.d; ++k)
        r.features[k] = repair_value(r.features[k], r.u, r.s, k, model,
                                     RepairRng{seed, static_cast<std::uint64_t>(i)}, &rep);
    }
  });
  for (const RepairReport& rep : chunk_reports) result.report.merge(rep);
  return result;
}

// In-sample geometric baseline: couples the sorted per-(u, feature) point
// clouds of the two s groups with uniform weights and moves every point to
// the convex combination of itself and its coupled conditional mean. Only
// defined for the data the coupling was built on.
inline Dataset geometric_repair(const Dataset& research, double t = 0.5) {
  if (research.empty()) throw ValidationError("research dataset is empty");
  if (!(t >= 0.0 && t <= 1.0))
    throw ValidationError("interpolation weight must lie in [0,1], got " + std::to_string(t));
  GroupIndex idx = partition_groups(research);
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s)
      if (idx.count(u, s) == 0)
        throw ValidationError("research cell (u=" + std::to_string(u) + ", s=" + std::to_string(s) +
                              ") is empty");
  Dataset out = research;
  for (int u = 0; u < 2; ++u) {
    const std::vector<std::size_t>& rows0 = idx.cell(u, 0);
    const std::vector<std::size_t>& rows1 = idx.cell(u, 1);
    const std::size_t n0 = rows0.size(), n1 = rows1.size();
    for (std::size_t k = 0; k < research.d; ++k) {
      // Sort each group's values, remembering row positions.
      std::vector<std::pair<double, std::size_t>> v0, v1;
      v0.reserve(n0);
      v1.reserve(n1);
      for (std::size_t r : rows0) v0.emplace_back(research.records[r].features[k], r);
      for (std::size_t r : rows1) v1.emplace_back(research.records[r].features[k], r);
      std::sort(v0.begin(), v0.end());
      std::sort(v1.begin(), v1.end());
      std::vector<double> w0(n0, 1.0 / static_cast<double>(n0));
      std::vector<double> w1(n1, 1.0 / static_cast<double>(n1));
      std::vector<double> cond0(n0, 0.0), cond1(n1, 0.0);
      for (const PlanTriplet& tr : monotone_coupling_triplets(w0, w1)) {
        cond0[tr.row] += tr.mass * v1[tr.col].first;
        cond1[tr.col] += tr.mass * v0[tr.row].first;
      }
      for (std::size_t i = 0; i < n0; ++i)
        out.records[v0[i].second].features[k] =
            (1.0 - t) * v0[i].first + t * static_cast<double>(n0) * cond0[i];
      for (std::size_t j = 0; j < n1; ++j)
        out.records[v1[j].second].features[k] =
            (1.0 - t) * static_cast<double>(n1) * cond1[j] + t * v1[j].first;
    }
  }
  return out;
}

}  // namespace fairot
