#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "fairot/density.hpp"
#include "fairot/error.hpp"
#include "fairot/model.hpp"
#include "fairot/textio.hpp"

namespace fairot {

struct KldSettings {
  std::size_t grid = 1024;
  double floor = 1e-12;
};

// Symmetrized Kullback-Leibler divergence between the kernel density
// estimates of two samples: 0.5*KL(f0||f1) + 0.5*KL(f1||f0), integrated by
// the trapezoid rule over the union range padded by three bandwidths.
// The integrand is written as 0.5*(fa-fb)*log(fa/fb) with (fa, fb) ordered by
// magnitude, which is pointwise nonnegative and bitwise symmetric in the two
// samples.
inline double symmetrized_kld(const std::vector<double>& sample0,
                              const std::vector<double>& sample1, KldSettings settings = {}) {
  if (settings.grid < 2)
    throw ValidationError("evaluation grid must have at least 2 points");
  if (!(settings.floor > 0.0)) throw ValidationError("density floor must be positive");
  double h0 = silverman_bandwidth(sample0).h;
  double h1 = silverman_bandwidth(sample1).h;
  double pad = 3.0 * std::max(h0, h1);
  double lo = std::min(*std::min_element(sample0.begin(), sample0.end()),
                       *std::min_element(sample1.begin(), sample1.end())) -
              pad;
  double hi = std::max(*std::max_element(sample0.begin(), sample0.end()),
                       *std::max_element(sample1.begin(), sample1.end())) +
              pad;
  std::vector<double> grid(settings.grid);
  double denom = static_cast<double>(settings.grid - 1);
  for (std::size_t g = 0; g < settings.grid; ++g) {
    double w = static_cast<double>(g) / denom;
    grid[g] = (1.0 - w) * lo + w * hi;
  }
  std::vector<double> f0 = gaussian_kde_density(sample0, h0, grid);
  std::vector<double> f1 = gaussian_kde_density(sample1, h1, grid);
  double step = (hi - lo) / denom;
  double total = 0.0;
  for (std::size_t g = 0; g < settings.grid; ++g) {
    double fa = std::max(f0[g], settings.floor);
    double fb = std::max(f1[g], settings.floor);
    if (fb > fa) std::swap(fa, fb);
    double term = 0.5 * (fa - fb) * std::log(fa / fb);
    if (g == 0 || g + 1 == settings.grid) term *= 0.5;
    total += term;
  }
  return total * step;
}

// Conditional dependence of the features on s, within each u group and
// aggregated. Cells that cannot support the estimator (empty, or without two
// distinct values) are flagged undefined and left out of the aggregates.
struct FairnessReport {
  std::size_t d = 0;
  std::array<double, 2> pr_u{0.0, 0.0};
  std::array<std::size_t, kCellCount> cell_counts{};
  std::vector<std::array<double, 2>> e_uk;        // [k][u]
  std::vector<std::array<bool, 2>> e_uk_defined;  // [k][u]
  std::vector<double> e_k;
  std::vector<bool> e_k_defined;
  double e_total = 0.0;
  std::vector<std::string> notes;
  KldSettings settings;
};

inline FairnessReport conditional_fairness(const Dataset& data, KldSettings settings = {}) {
  if (data.empty()) throw ValidationError("cannot evaluate an empty dataset");
  GroupIndex idx = partition_groups(data);
  FairnessReport report;
  report.d = data.d;
  report.settings = settings;
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s) report.cell_counts[cell_index(u, s)] = idx.count(u, s);
  double n = static_cast<double>(data.size());
  for (int u = 0; u < 2; ++u)
    report.pr_u[static_cast<std::size_t>(u)] =
        static_cast<double>(idx.count(u, 0) + idx.count(u, 1)) / n;

  report.e_uk.assign(data.d, {0.0, 0.0});
  report.e_uk_defined.assign(data.d, {false, false});
  report.e_k.assign(data.d, 0.0);
  report.e_k_defined.assign(data.d, false);

  for (std::size_t k = 0; k < data.d; ++k) {
    for (int u = 0; u < 2; ++u) {
      std::string where = "(u=" + std::to_string(u) + ", feature " + std::to_string(k) + ")";
      if (idx.count(u, 0) == 0 || idx.count(u, 1) == 0) {
        report.notes.push_back("undefined at " + where + ": empty (u,s) cell");
        continue;
      }
      std::vector<double> s0 = feature_slice(data, idx.cell(u, 0), k);
      std::vector<double> s1 = feature_slice(data, idx.cell(u, 1), k);
      try {
        double e = symmetrized_kld(s0, s1, settings);
        report.e_uk[k][static_cast<std::size_t>(u)] = e;
        report.e_uk_defined[k][static_cast<std::size_t>(u)] = true;
      } catch (const ValidationError&) {
        report.notes.push_back("undefined at " + where + ": slice lacks two distinct values");
      }
    }
    double acc = 0.0;
    bool any = false;
    for (int u = 0; u < 2; ++u)
      if (report.e_uk_defined[k][static_cast<std::size_t>(u)]) {
        acc += report.pr_u[static_cast<std::size_t>(u)] * report.e_uk[k][static_cast<std::size_t>(u)];
        any = true;
      }
    report.e_k[k] = acc;
    report.e_k_defined[k] = any;
    if (any) report.e_total += acc;
  }
  return report;
}

// Ratio of positive prediction rates between the two s groups within each u.
// Values above 0.8 pass the four-fifths screen.
struct DisparateImpact {
  std::array<double, 2> ratio{0.0, 0.0};
  std::array<bool, 2> defined{false, false};
  std::array<bool, 2> fair{false, false};
};

inline DisparateImpact disparate_impact(const Dataset& data, const std::vector<int>& positive) {
  if (positive.size() != data.size())
    throw ValidationError("prediction vector has " + std::to_string(positive.size()) +
                          " entries for " + std::to_string(data.size()) + " records");
  std::array<std::array<double, 2>, 2> hits{};  // [u][s]
  std::array<std::array<double, 2>, 2> totals{};
  for (std::size_t i = 0; i < data.size(); ++i) {
    int label = positive[i];
    if (label != 0 && label != 1)
      throw ValidationError("record " + std::to_string(i) + ": prediction outside {0,1}");
    const LabeledRecord& r = data.records[i];
    totals[static_cast<std::size_t>(r.u)][static_cast<std::size_t>(r.s)] += 1.0;
    hits[static_cast<std::size_t>(r.u)][static_cast<std::size_t>(r.s)] +=
        static_cast<double>(label);
  }
  DisparateImpact out;
  for (int u = 0; u < 2; ++u) {
    auto uu = static_cast<std::size_t>(u);
    if (totals[uu][0] == 0.0 || totals[uu][1] == 0.0) continue;
    double rate0 = hits[uu][0] / totals[uu][0];
    double rate1 = hits[uu][1] / totals[uu][1];
    if (rate1 == 0.0) continue;  // zero denominator: flagged undefined
    out.ratio[uu] = rate0 / rate1;
    out.defined[uu] = true;
    out.fair[uu] = out.ratio[uu] > 0.8;
  }
  return out;
}

// Delimiter-separated fairness report. Comment lines carry the estimator
// settings; u is 0, 1, or "all" for the weighted aggregate per feature.
inline void write_fairness_report(std::ostream& os, const FairnessReport& report,
                                  const std::vector<std::string>& feature_names = {}) {
  os << "# fairot-report v1\n";
  os << "# grid " << report.settings.grid << "\n";
  os << "# floor " << format_double(report.settings.floor) << "\n";
  os << "# cells";
  for (int u = 0; u < 2; ++u)
    for (int s = 0; s < 2; ++s)
      os << " n_u" << u << "_s" << s << "=" << report.cell_counts[cell_index(u, s)];
  os << "\n";
  for (const std::string& note : report.notes) os << "# note " << note << "\n";
  os << "feature,u,pr_u,E,defined\n";
  for (std::size_t k = 0; k < report.d; ++k) {
    std::string name =
        k < feature_names.size() ? feature_names[k] : "feature" + std::to_string(k + 1);
    for (int u = 0; u < 2; ++u) {
      auto uu = static_cast<std::size_t>(u);
      os << name << "," << u << "," << format_double(report.pr_u[uu]) << ",";
      if (report.e_uk_defined[k][uu])
        os << format_double(report.e_uk[k][uu]) << ",1\n";
      else
        os << "na,0\n";
    }
    os << name << ",all,,";
    if (report.e_k_defined[k])
      os << format_double(report.e_k[k]) << ",1\n";
    else
      os << "na,0\n";
  }
  os << "_total,all,,";
  os << format_double(report.e_total) << ",1\n";
}

}  // namespace fairot
