#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fairot/density.hpp"
#include "fairot/error.hpp"

namespace fairot {

// Cost |x - y|^exponent between a source and a target state.
struct CostSpec {
  int exponent = 2;
};

inline double point_cost(double x, double y, int exponent) {
  double a = std::abs(x - y);
  if (exponent == 1) return a;
  if (exponent == 2) return a * a;
  return std::pow(a, exponent);
}

struct PlanTriplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double mass = 0.0;
};

// Northwest-corner traversal of two mass vectors with equal totals. For
// ascending supports and any convex cost this coupling is the optimal one:
// it matches the two CDFs level by level. Runs in O(rows + cols) and visits
// cells in lexicographic order, so the result is a monotone staircase.
inline std::vector<PlanTriplet> monotone_coupling_triplets(const std::vector<double>& source,
                                                           const std::vector<double>& target,
                                                           double tol = 1e-9) {
  double total_source = 0.0, total_target = 0.0;
  for (double v : source) total_source += v;
  for (double v : target) total_target += v;
  if (std::abs(total_source - total_target) > tol)
    throw ValidationError("marginal mass mismatch: source sums to " +
                          std::to_string(total_source) + ", target to " +
                          std::to_string(total_target));
  std::vector<PlanTriplet> out;
  out.reserve(source.size() + target.size());
  std::size_t i = 0, j = 0;
  double a = source.empty() ? 0.0 : source[0];
  double b = target.empty() ? 0.0 : target[0];
  while (i < source.size() && j < target.size()) {
    double w = std::min(a, b);
    if (w > 0.0) out.push_back({i, j, w});
    if (a <= b) {
      b -= w;
      ++i;
      if (i < source.size()) a = source[i];
    } else {
      a -= w;
      ++j;
      if (j < target.size()) b = target[j];
    }
  }
  return out;
}

// Dense coupling between two discrete distributions. Rows index the source
// support, columns the target support.
struct TransportPlan {
  InterpolatedSupport source_support;
  InterpolatedSupport target_support;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  // row-major, rows*cols entries

  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return mass[i * cols + j]; }

  std::vector<double> row_sums() const {
    std::vector<double> out(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out[i] += at(i, j);
    return out;
  }

  std::vector<double> col_sums() const {
    std::vector<double> out(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out[j] += at(i, j);
    return out;
  }

  // Marginals must reproduce the given distributions.
  void validate(const std::vector<double>& source_marginal,
                const std::vector<double>& target_marginal, double tol = 1e-9) const {
    if (rows != source_marginal.size() || cols != target_marginal.size() ||
        mass.size() != rows * cols)
      throw ValidationError("plan dimensions do not match the marginals");
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (!(at(i, j) >= 0.0))
          throw ValidationError("plan entry (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is negative");
    std::vector<double> rs = row_sums(), cs = col_sums();
    for (std::size_t i = 0; i < rows; ++i)
      if (std::abs(rs[i] - source_marginal[i]) > tol)
        throw ValidationError("plan row " + std::to_string(i) + " sums to " +
                              std::to_string(rs[i]) + ", expected " +
                              std::to_string(source_marginal[i]));
    for (std::size_t j = 0; j < cols; ++j)
      if (std::abs(cs[j] - target_marginal[j]) > tol)
        throw ValidationError("plan column " + std::to_string(j) + " sums to " +
                              std::to_string(cs[j]) + ", expected " +
                              std::to_string(target_marginal[j]));
  }
};

// Optimal coupling between two distributions on ascending supports under
// |x-y|^p. The supports may differ; only their ordering matters.
inline TransportPlan monotone_plan(const DiscreteDistribution& source,
                                   const DiscreteDistribution& target, CostSpec cost = {}) {
  (void)cost;  // any convex |x-y|^p admits the same monotone optimizer
  source.validate();
  target.validate();
  TransportPlan plan;
  plan.source_support = source.support;
  plan.target_support = target.support;
  plan.rows = source.size();
  plan.cols = target.size();
  plan.mass.assign(plan.rows * plan.cols, 0.0);
  for (const PlanTriplet& t : monotone_coupling_triplets(source.mass, target.mass))
    plan.at(t.row, t.col) += t.mass;
  return plan;
}

inline double transport_cost(const TransportPlan& plan, CostSpec cost = {}) {
  const std::vector<double>& xs = plan.source_support.states();
  const std::vector<double>& ys = plan.target_support.states();
  double total = 0.0;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j) {
      double w = plan.at(i, j);
      if (w > 0.0) total += w * point_cost(xs[i], ys[j], cost.exponent);
    }
  return total;
}

// p-Wasserstein distance: optimal cost under |x-y|^p, taken to the 1/p power.
inline double wasserstein_p(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                            int p) {
  if (p < 1) throw ValidationError("wasserstein order must be >= 1, got " + std::to_string(p));
  TransportPlan plan = monotone_plan(mu, nu, {p});
  double c = transport_cost(plan, {p});
  if (p == 1) return c;
  if (p == 2) return std::sqrt(c);
  return std::pow(c, 1.0 / static_cast<double>(p));
}

namespace detail {

// Splits w between the two states bracketing loc. Exact when loc lands on a
// grid state; mass beyond the range piles onto the nearest endpoint.
inline void deposit_mass(std::vector<double>& out, const InterpolatedSupport& support, double loc,
                         double w) {
  if (loc <= support.lo()) {
    out.front() += w;
    return;
  }
  if (loc >= support.hi()) {
    out.back() += w;
    return;
  }
  GridPosition pos = support.locate(loc);
  if (pos.frac == 0.0) {
    out[pos.index] += w;
  } else {
    out[pos.index] += w * (1.0 - pos.frac);
    out[pos.index + 1] += w * pos.frac;
  }
}

}  // namespace detail

// W2 interpolant between two distributions on the same support. Merges the
// two quantile functions level by level, places each mass chunk at the convex
// combination of its source and target states, and re-discretizes onto the
// shared grid by linear mass splitting. weight 0 returns mu0, weight 1 mu1.
inline DiscreteDistribution barycenter(const DiscreteDistribution& mu0,
                                       const DiscreteDistribution& mu1, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0))
    throw ValidationError("interpolation weight must lie in [0,1], got " + std::to_string(weight));
  if (!(mu0.support == mu1.support))
    throw ValidationError("barycenter requires both distributions on the same support");
  mu0.validate();
  mu1.validate();
  const std::vector<double>& z = mu0.support.states();
  std::vector<double> out(z.size(), 0.0);
  std::size_t i = 0, j = 0;
  double a = mu0.mass[0], b = mu1.mass[0];
  std::size_t n = z.size();
  while (i < n && j < n) {
    double w = std::min(a, b);
    if (w > 0.0) {
      double loc = (1.0 - weight) * z[i] + weight * z[j];
      detail::deposit_mass(out, mu0.support, loc, w);
    }
    if (a <= b) {
      b -= w;
      ++i;
      if (i < n) a = mu0.mass[i];
    } else {
      a -= w;
      ++j;
      if (j < n) b = mu1.mass[j];
    }
  }
  DiscreteDistribution nu{mu0.support, std::move(out)};
  nu.validate();
  return nu;
}

}  // namespace fairot
