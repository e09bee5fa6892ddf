#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fairot/error.hpp"
#include "fairot/metrics.hpp"
#include "fairot/model.hpp"
#include "fairot/parallel.hpp"
#include "fairot/repair.hpp"
#include "fairot/rng.hpp"
#include "fairot/textio.hpp"

namespace fairot {

// Ancestral Gaussian mixture: u ~ Bernoulli, s | u ~ Bernoulli,
// x | (u, s) ~ N(mean, cov). Defaults reproduce the bundled two-feature
// demo configuration.
struct MixtureSpec {
  std::size_t d = 2;
  std::array<std::vector<double>, kCellCount> means;
  std::array<std::vector<double>, kCellCount> covs;  // row-major d*d; empty = identity
  double pr_u0 = 0.5;
  std::array<double, 2> pr_s0_given_u{0.3, 0.1};
  std::size_t n_research = 500;
  std::size_t n_archive = 5000;
  std::uint64_t seed = 1;
  bool resample_on_empty_cell = true;
  std::size_t max_attempts = 32;

  MixtureSpec() {
    means[cell_index(0, 0)] = {-1.0, -1.0};
    means[cell_index(0, 1)] = {0.0, 0.0};
    means[cell_index(1, 0)] = {1.0, 1.0};
    means[cell_index(1, 1)] = {0.0, 0.0};
  }

  void validate() const {
    if (d == 0) throw ValidationError("mixture dimensionality must be at least 1");
    for (std::size_t c = 0; c < kCellCount; ++c) {
      if (means[c].size() != d)
        throw ValidationError("mixture mean for cell " + std::to_string(c) + " has " +
                              std::to_string(means[c].size()) + " entries, expected " +
                              std::to_string(d));
      if (!covs[c].empty() && covs[c].size() != d * d)
        throw ValidationError("mixture covariance for cell " + std::to_string(c) +
                              " has wrong shape");
    }
    if (!(pr_u0 >= 0.0 && pr_u0 <= 1.0)) throw ValidationError("pr_u0 outside [0,1]");
    for (double p : pr_s0_given_u)
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("pr_s0_given_u outside [0,1]");
    if (n_research < kCellCount)
      throw ValidationError("n_research must be at least " + std::to_string(kCellCount));
    if (n_archive == 0) throw ValidationError("n_archive must be positive");
  }
};

namespace detail {

inline std::vector<double> cholesky_lower(const std::vector<double>& a, std::size_t d,
                                          std::size_t cell) {
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a[i * d + j] - a[j * d + i]) > 1e-12)
        throw ValidationError("covariance for cell " + std::to_string(cell) + " is not symmetric");
  std::vector<double> chol(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= chol[i * d + k] * chol[j * d + k];
      if (i == j) {
        if (!(s > 0.0))
          throw ValidationError("covariance for cell " + std::to_string(cell) +
                                " is not positive definite");
        chol[i * d + i] = std::sqrt(s);
      } else {
        chol[i * d + j] = s / chol[j * d + j];
      }
    }
  }
  return chol;
}

}  // namespace detail

// Draws n_research + n_archive records by ancestral sampling; the first
// n_research (an exchangeable subset) become the research set. If a research
// (u, s) cell comes up empty the whole draw is retried with a fresh stream,
// up to max_attempts.
inline std::pair<Dataset, Dataset> sample_mixture(const MixtureSpec& spec) {
  spec.validate();
  std::array<std::vector<double>, kCellCount> chol;
  for (std::size_t c = 0; c < kCellCount; ++c)
    if (!spec.covs[c].empty()) chol[c] = detail::cholesky_lower(spec.covs[c], spec.d, c);

  std::size_t total = spec.n_research + spec.n_archive;
  std::size_t attempts = spec.resample_on_empty_cell ? spec.max_attempts : 1;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    Splitmix64 rng(derive_seed(spec.seed, 0xA11CEULL, attempt));
    std::vector<LabeledRecord> records(total);
    std::vector<double> z(spec.d);
    for (std::size_t i = 0; i < total; ++i) {
      LabeledRecord& r = records[i];
      r.u = rng.next_unit() < spec.pr_u0 ? 0 : 1;
      r.s = rng.next_unit() < spec.pr_s0_given_u[static_cast<std::size_t>(r.u)] ? 0 : 1;
      std::size_t c = cell_index(r.u, r.s);
      for (std::size_t k = 0; k < spec.d; ++k) z[k] = rng.next_normal();
      r.features.resize(spec.d);
      if (chol[c].empty()) {
        for (std::size_t k = 0; k < spec.d; ++k) r.features[k] = spec.means[c][k] + z[k];
      } else {
        for (std::size_t k = 0; k < spec.d; ++k) {
          double acc = spec.means[c][k];
          for (std::size_t m = 0; m <= k; ++m) acc += chol[c][k * spec.d + m] * z[m];
          r.features[k] = acc;
        }
      }
    }
    std::vector<LabeledRecord> research_records(records.begin(),
                                                records.begin() + static_cast<std::ptrdiff_t>(spec.n_research));
    std::array<std::size_t, kCellCount> counts{};
    for (const LabeledRecord& r : research_records) ++counts[cell_index(r.u, r.s)];
    bool ok = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (!ok) {
      if (attempt + 1 == attempts)
        throw ValidationError("research cell came up empty in every draw (" +
                              std::to_string(attempts) + " attempt" + (attempts == 1 ? "" : "s") +
                              "); the cell priors are too small for n_research=" +
                              std::to_string(spec.n_research));
      continue;
    }
    std::vector<LabeledRecord> archive_records(records.begin() + static_cast<std::ptrdiff_t>(spec.n_research),
                                               records.end());
    Dataset research = validate_dataset(std::move(research_records), spec.d, DatasetRole::research);
    Dataset archive = validate_dataset(std::move(archive_records), spec.d, DatasetRole::archive);
    return {std::move(research), std::move(archive)};
  }
  throw ValidationError("unreachable");  // the loop either returns or throws
}

// Per-feature conditional dependence of one replication, for each repair arm
// and dataset it is defined on.
struct ReplicationMetrics {
  std::vector<double> research_none, research_distributional, research_geometric;
  std::vector<double> archive_none, archive_distributional;
};

struct MonteCarloResult {
  std::size_t d = 0;
  std::vector<ReplicationMetrics> replications;
};

// Independent replications of: draw data, design the repair, apply it to the
// research and archive sets, run the geometric baseline, measure everything.
// Replication index keys every stream, so results do not depend on the
// execution order.
inline MonteCarloResult run_monte_carlo(const MixtureSpec& spec, std::size_t replications,
                                        const NqSpec& nq, double t = 0.5, KldSettings kld = {}) {
  if (replications == 0) throw ValidationError("replication count must be positive");
  spec.validate();
  MonteCarloResult result;
  result.d = spec.d;
  result.replications.resize(replications);
  parallel_for(replications, [&](std::size_t r) {
    MixtureSpec draw = spec;
    draw.seed = derive_seed(spec.seed, 0x5EEDULL, r);
    auto [research, archive] = sample_mixture(draw);
    RepairModel model = design_repair_model(research, nq, t);
    Dataset research_rep = repair_dataset(research, model, derive_seed(draw.seed, 11ULL)).repaired;
    Dataset archive_rep = repair_dataset(archive, model, derive_seed(draw.seed, 22ULL)).repaired;
    Dataset research_geo = geometric_repair(research, t);
    ReplicationMetrics& m = result.replications[r];
    m.research_none = conditional_fairness(research, kld).e_k;
    m.research_distributional = conditional_fairness(research_rep, kld).e_k;
    m.research_geometric = conditional_fairness(research_geo, kld).e_k;
    m.archive_none = conditional_fairness(archive, kld).e_k;
    m.archive_distributional = conditional_fairness(archive_rep, kld).e_k;
  });
  return result;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

// Long-format summary: one row per (arm, dataset, feature) with the mean and
// sample sd of E across replications. The geometric arm is in-sample only,
// so it has no archive rows.
inline void write_summary_table(std::ostream& os, const MonteCarloResult& result) {
  os << "arm,dataset,feature,replications,E_mean,E_sd\n";
  auto emit = [&](const char* arm, const char* dataset,
                  const std::vector<double> ReplicationMetrics::*member) {
    for (std::size_t k = 0; k < result.d; ++k) {
      std::vector<double> xs;
      xs.reserve(result.replications.size());
      for (const ReplicationMetrics& m : result.replications) xs.push_back((m.*member)[k]);
      MeanSd ms = mean_sd(xs);
      os << arm << "," << dataset << "," << (k + 1) << "," << result.replications.size() << ","
         << format_double(ms.mean) << "," << format_double(ms.sd) << "\n";
    }
  };
  emit("none", "research", &ReplicationMetrics::research_none);
  emit("none", "archive", &ReplicationMetrics::archive_none);
  emit("distributional", "research", &ReplicationMetrics::research_distributional);
  emit("distributional", "archive", &ReplicationMetrics::archive_distributional);
  emit("geometric", "research", &ReplicationMetrics::research_geometric);
}

enum class SweepVariable { research_size, support_size };

struct SweepSpec {
  SweepVariable variable = SweepVariable::research_size;
  std::vector<std::size_t> grid;
  std::size_t replications = 20;
  MixtureSpec base;
  std::size_t n_q = 50;  // support size when sweeping research_size
  double t = 0.5;
  KldSettings kld;

  void validate() const {
    base.validate();
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    if (replications == 0) throw ValidationError("replication count must be positive");
    for (std::size_t v : grid) {
      if (variable == SweepVariable::research_size && v < kCellCount)
        throw ValidationError("swept n_research value " + std::to_string(v) + " is below " +
                              std::to_string(kCellCount));
      if (variable == SweepVariable::support_size && v < 2)
        throw ValidationError("swept support size " + std::to_string(v) + " is below 2");
    }
  }
};

// Aggregate E (summed over features) of the repaired research set, the
// repaired archive, and their concatenation.
struct SweepPoint {
  std::size_t value = 0;
  std::size_t replications = 0;
  MeanSd research;
  MeanSd archive;
  MeanSd composite;
};

inline std::vector<SweepPoint> run_sweep(const SweepSpec& sweep) {
  sweep.validate();
  std::vector<SweepPoint> points(sweep.grid.size());
  for (std::size_t g = 0; g < sweep.grid.size(); ++g) {
    std::vector<double> research_e(sweep.replications), archive_e(sweep.replications),
        composite_e(sweep.replications);
    parallel_for(sweep.replications, [&](std::size_t r) {
      MixtureSpec draw = sweep.base;
      if (sweep.variable == SweepVariable::research_size) draw.n_research = sweep.grid[g];
      draw.seed = derive_seed(sweep.base.seed, 0x577EE9ULL, g, r);
      NqSpec nq;
      nq.value = sweep.variable == SweepVariable::support_size ? sweep.grid[g] : sweep.n_q;
      auto [research, archive] = sample_mixture(draw);
      RepairModel model = design_repair_model(research, nq, sweep.t);
      Dataset research_rep = repair_dataset(research, model, derive_seed(draw.seed, 11ULL)).repaired;
      Dataset archive_rep = repair_dataset(archive, model, derive_seed(draw.seed, 22ULL)).repaired;
      Dataset composite = research_rep;
      composite.records.insert(composite.records.end(), archive_rep.records.begin(),
                               archive_rep.records.end());
      research_e[r] = conditional_fairness(research_rep, sweep.kld).e_total;
      archive_e[r] = conditional_fairness(archive_rep, sweep.kld).e_total;
      composite_e[r] = conditional_fairness(composite, sweep.kld).e_total;
    });
    points[g].value = sweep.grid[g];
    points[g].replications = sweep.replications;
    points[g].research = mean_sd(research_e);
    points[g].archive = mean_sd(archive_e);
    points[g].composite = mean_sd(composite_e);
  }
  return points;
}

inline void write_curve_table(std::ostream& os, const SweepSpec& sweep,
                              const std::vector<SweepPoint>& points) {
  os << "variable,value,replications,E_research_mean,E_research_sd,E_archive_mean,E_archive_sd,"
        "E_composite_mean,E_composite_sd\n";
  const char* var =
      sweep.variable == SweepVariable::research_size ? "research_size" : "support_size";
  for (const SweepPoint& p : points) {
    os << var << "," << p.value << "," << p.replications << "," << format_double(p.research.mean)
       << "," << format_double(p.research.sd) << "," << format_double(p.archive.mean) << ","
       << format_double(p.archive.sd) << "," << format_double(p.composite.mean) << ","
       << format_double(p.composite.sd) << "\n";
  }
}

}  // namespace fairot
