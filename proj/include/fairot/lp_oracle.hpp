#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fairot/transport.hpp"

namespace fairot {

// Exact reference solver for the discrete transportation problem, used by
// tests to certify that the closed-form monotone plan is optimal. Dense
// transportation simplex: northwest-corner start, u/v duals, Bland's rule on
// both the entering and the leaving cell so no cycle repeats. Intended for
// small instances only.
inline TransportPlan lp_oracle_plan(const DiscreteDistribution& source,
                                    const DiscreteDistribution& target, CostSpec cost = {}) {
  source.validate();
  target.validate();
  const std::size_t m = source.size(), n = target.size();
  if (m > 64 || n > 64)
    throw ValidationError("oracle instance too large: " + std::to_string(m) + "x" +
                          std::to_string(n) + " exceeds 64x64");

  const std::vector<double>& xs = source.support.states();
  const std::vector<double>& ys = target.support.states();
  std::vector<double> c(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = point_cost(xs[i], ys[j], cost.exponent);

  std::vector<double> flow(m * n, 0.0);
  std::vector<char> basic(m * n, 0);

  // Northwest-corner start. Exactly m+n-1 cells enter the basis; a tie
  // (both marginals exhausted at once) contributes a degenerate zero cell.
  {
    std::size_t i = 0, j = 0;
    double a = source.mass[0], b = target.mass[0];
    for (;;) {
      double w = std::min(a, b);
      flow[i * n + j] = w;
      basic[i * n + j] = 1;
      if (i == m - 1 && j == n - 1) break;
      if (j == n - 1 || (i != m - 1 && a <= b)) {
        b -= w;
        ++i;
        a = source.mass[i];
      } else {
        a -= w;
        ++j;
        b = target.mass[j];
      }
    }
  }

  // Nodes 0..m-1 are rows, m..m+n-1 are columns. The basis is always a
  // spanning tree of this bipartite graph.
  std::vector<double> dual(m + n);
  std::vector<char> seen(m + n);
  std::vector<std::size_t> queue(m + n), parent_node(m + n), parent_cell(m + n);

  const double kReducedCostTol = 1e-11;
  const std::size_t kMaxPivots = 500000;

  for (std::size_t pivot = 0;; ++pivot) {
    if (pivot > kMaxPivots) throw ValidationError("oracle failed to converge");

    // Duals from u_0 = 0 by walking the basis tree.
    std::fill(seen.begin(), seen.end(), 0);
    dual[0] = 0.0;
    seen[0] = 1;
    std::size_t head = 0, tail = 0;
    queue[tail++] = 0;
    while (head < tail) {
      std::size_t node = queue[head++];
      if (node < m) {
        for (std::size_t j = 0; j < n; ++j)
          if (basic[node * n + j] && !seen[m + j]) {
            dual[m + j] = c[node * n + j] - dual[node];
            seen[m + j] = 1;
            queue[tail++] = m + j;
          }
      } else {
        std::size_t j = node - m;
        for (std::size_t i = 0; i < m; ++i)
          if (basic[i * n + j] && !seen[i]) {
            dual[i] = c[i * n + j] - dual[m + j];
            seen[i] = 1;
            queue[tail++] = i;
          }
      }
    }

    // Entering cell: first (lowest flat index) with negative reduced cost.
    std::size_t enter = m * n;
    for (std::size_t idx = 0; idx < m * n; ++idx) {
      if (basic[idx]) continue;
      std::size_t i = idx / n, j = idx % n;
      if (c[idx] - dual[i] - dual[m + j] < -kReducedCostTol) {
        enter = idx;
        break;
      }
    }
    if (enter == m * n) break;

    std::size_t ei = enter / n, ej = enter % n;

    // Unique tree path from column node ej back to row node ei.
    std::fill(seen.begin(), seen.end(), 0);
    seen[ei] = 1;
    head = tail = 0;
    queue[tail++] = ei;
    while (head < tail && !seen[m + ej]) {
      std::size_t node = queue[head++];
      if (node < m) {
        for (std::size_t j = 0; j < n; ++j)
          if (basic[node * n + j] && !seen[m + j]) {
            seen[m + j] = 1;
            parent_node[m + j] = node;
            parent_cell[m + j] = node * n + j;
            queue[tail++] = m + j;
          }
      } else {
        std::size_t j = node - m;
        for (std::size_t i = 0; i < m; ++i)
          if (basic[i * n + j] && !seen[i]) {
            seen[i] = 1;
            parent_node[i] = m + j;
            parent_cell[i] = i * n + j;
            queue[tail++] = i;
          }
      }
    }
    if (!seen[m + ej]) throw ValidationError("oracle basis lost connectivity");

    // Cycle = entering cell (+) then alternating signs along the tree path.
    std::vector<std::size_t> plus{enter}, minus;
    bool next_minus = true;
    for (std::size_t node = m + ej; node != ei; node = parent_node[node]) {
      (next_minus ? minus : plus).push_back(parent_cell[node]);
      next_minus = !next_minus;
    }

    double theta = flow[minus[0]];
    std::size_t leave = minus[0];
    for (std::size_t cell : minus)
      if (flow[cell] < theta || (flow[cell] == theta && cell < leave)) {
        theta = flow[cell];
        leave = cell;
      }

    for (std::size_t cell : plus) flow[cell] += theta;
    for (std::size_t cell : minus) flow[cell] -= theta;
    flow[leave] = 0.0;
    basic[leave] = 0;
    basic[enter] = 1;
  }

  TransportPlan plan;
  plan.source_support = source.support;
  plan.target_support = target.support;
  plan.rows = m;
  plan.cols = n;
  plan.mass = std::move(flow);
  for (double& v : plan.mass)
    if (v < 0.0) v = 0.0;  // scrub -0 and pivot dust
  return plan;
}

}  // namespace fairot
