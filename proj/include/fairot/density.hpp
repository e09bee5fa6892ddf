#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fairot/error.hpp"

namespace fairot {

// Position of a value between two adjacent grid states.
// frac is in [0, 1); frac == 0 means exactly on states()[index].
struct GridPosition {
  std::size_t index = 0;
  double frac = 0.0;
};

// Uniformly spaced grid of n >= 2 states covering [lo, hi]. States are built
// as convex combinations of the endpoints, so states()[0] == lo and
// states()[n-1] == hi exactly.
class InterpolatedSupport {
 public:
  InterpolatedSupport() = default;

  InterpolatedSupport(double lo, double hi, std::size_t n) {
    if (n < 2) throw ValidationError("support needs at least 2 states, got " + std::to_string(n));
    if (!(lo < hi))
      throw ValidationError("degenerate range: support requires lo < hi (lo=" + std::to_string(lo) +
                            ", hi=" + std::to_string(hi) + ")");
    states_.resize(n);
    double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      double w = static_cast<double>(i) / denom;
      states_[i] = (1.0 - w) * lo + w * hi;
    }
    states_.front() = lo;
    states_.back() = hi;
  }

  const std::vector<double>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  double lo() const { return states_.front(); }
  double hi() const { return states_.back(); }
  double spacing() const { return (hi() - lo()) / static_cast<double>(size() - 1); }

  double clamp(double x) const { return std::min(std::max(x, lo()), hi()); }

  // Expects x already inside [lo, hi]. The top state maps to frac == 0 with
  // index size()-1: there is no upward neighbour to mix with.
  GridPosition locate(double x) const {
    std::size_t n = states_.size();
    if (x >= hi()) return {n - 1, 0.0};
    std::size_t q = static_cast<std::size_t>((x - lo()) / spacing());
    if (q > n - 2) q = n - 2;
    while (q > 0 && x < states_[q]) --q;
    while (q + 2 < n && x >= states_[q + 1]) ++q;
    double frac = (x - states_[q]) / (states_[q + 1] - states_[q]);
    if (frac < 0.0) frac = 0.0;
    if (frac >= 1.0) frac = std::nextafter(1.0, 0.0);
    return {q, frac};
  }

  bool operator==(const InterpolatedSupport& other) const { return states_ == other.states_; }

 private:
  std::vector<double> states_;
};

// Grid spanning the observed range of a slice.
inline InterpolatedSupport build_support(const std::vector<double>& values, std::size_t n_states) {
  if (values.empty()) throw ValidationError("cannot build a support from an empty slice");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (!(*lo_it < *hi_it))
    throw ValidationError("degenerate range: all " + std::to_string(values.size()) +
                          " values equal " + std::to_string(*lo_it));
  return InterpolatedSupport(*lo_it, *hi_it, n_states);
}

inline double sample_sd(const std::vector<double>& values) {
  std::size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// Quantile of an ascending sequence with linear interpolation between order
// statistics (the common "type 7" definition).
inline double quantile_sorted(const std::vector<double>& sorted_values, double p) {
  std::size_t n = sorted_values.size();
  if (n == 1) return sorted_values[0];
  double pos = p * static_cast<double>(n - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo >= n - 1) return sorted_values[n - 1];
  double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * sorted_values[lo] + frac * sorted_values[lo + 1];
}

inline double quantile_linear(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

struct Bandwidth {
  double h = 0.0;
};

// 0.9 * min(sd, IQR/1.34) * n^(-1/5), floored at 1e-6 of the value range so a
// zero IQR cannot collapse the kernel.
inline Bandwidth silverman_bandwidth(const std::vector<double>& values) {
  if (values.size() < 2)
    throw ValidationError("bandwidth needs at least 2 values, got " + std::to_string(values.size()));
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (!(*lo_it < *hi_it)) throw ValidationError("bandwidth needs at least 2 distinct values");
  double sd = sample_sd(values);
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double scale = sd;
  if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
  double h = 0.9 * scale * std::pow(static_cast<double>(values.size()), -0.2);
  double floor = 1e-6 * (*hi_it - *lo_it);
  return {std::max(h, floor)};
}

// Probability mass function on a support grid. mass sums to 1 and is
// index-aligned with support.states().
struct DiscreteDistribution {
  InterpolatedSupport support;
  std::vector<double> mass;

  std::size_t size() const { return mass.size(); }

  void validate(double tol = 1e-9) const {
    if (mass.size() != support.size())
      throw ValidationError("distribution mass size " + std::to_string(mass.size()) +
                            " does not match support size " + std::to_string(support.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (!(mass[i] >= 0.0))
        throw ValidationError("distribution mass negative at state " + std::to_string(i));
      total += mass[i];
    }
    if (std::abs(total - 1.0) > tol)
      throw ValidationError("distribution mass sums to " + std::to_string(total) + ", not 1");
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) m += mass[i] * support.states()[i];
    return m;
  }
};

// Gaussian kernel weights of the sample evaluated at each grid state, then
// normalized to a pmf. If every weight underflows (bandwidth far below the
// grid resolution), each sample point falls back to its nearest state.
inline DiscreteDistribution kde_pmf(const std::vector<double>& values,
                                    const InterpolatedSupport& support, Bandwidth bandwidth) {
  if (values.empty()) throw ValidationError("cannot estimate a pmf from an empty slice");
  if (!(bandwidth.h > 0.0)) throw ValidationError("bandwidth must be positive");
  const std::vector<double>& z = support.states();
  std::vector<double> mass(z.size(), 0.0);
  double inv_h = 1.0 / bandwidth.h;
  for (std::size_t q = 0; q < z.size(); ++q) {
    double acc = 0.0;
    for (double x : values) {
      double t = (z[q] - x) * inv_h;
      acc += std::exp(-0.5 * t * t);
    }
    mass[q] = acc;
  }
  double total = 0.0;
  for (double m : mass) total += m;
  if (total <= 0.0) {
    std::fill(mass.begin(), mass.end(), 0.0);
    for (double x : values) {
      double cx = support.clamp(x);
      GridPosition pos = support.locate(cx);
      std::size_t q = pos.frac < 0.5 ? pos.index : pos.index + 1;
      mass[q] += 1.0;
    }
    total = static_cast<double>(values.size());
  }
  for (double& m : mass) m /= total;
  return {support, std::move(mass)};
}

// Kernel density estimate of the sample evaluated at arbitrary points.
inline std::vector<double> gaussian_kde_density(const std::vector<double>& sample, double h,
                                                const std::vector<double>& at) {
  if (sample.empty()) throw ValidationError("cannot estimate a density from an empty sample");
  if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
  const double norm = 1.0 / (static_cast<double>(sample.size()) * h *
                             2.5066282746310005024157652848110);  // sqrt(2*pi)
  std::vector<double> out(at.size(), 0.0);
  for (std::size_t g = 0; g < at.size(); ++g) {
    double acc = 0.0;
    for (double x : sample) {
      double t = (at[g] - x) / h;
      acc += std::exp(-0.5 * t * t);
    }
    out[g] = acc * norm;
  }
  return out;
}

}  // namespace fairot
