#pragma once

// Covering codes for the sphere shell of radius sqrt(n sigma2).
//
// Centers sit at radius sqrt(n (sigma2 - d0)); a shell point is covered by a
// center iff their distance is at most sqrt(n d0), which is the same as the
// angle between them being at most theta0 = arcsin(sqrt(d0 / sigma2)).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quadsig/errors.hpp"
#include "quadsig/geometry.hpp"
#include "quadsig/random.hpp"

namespace quadsig {

struct CoveringCode {
  int n = 0;
  double sigma2 = 0.0;
  double d0 = 0.0;
  std::uint64_t seed = 0;
  // Row-major, size() rows of length n.
  std::vector<double> centers;

  std::size_t size() const { return n > 0 ? centers.size() / static_cast<std::size_t>(n) : 0; }

  std::span<const double> center(std::size_t i) const {
    return {centers.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }

  double shell_radius() const { return std::sqrt(n * sigma2); }
  double cover_radius() const { return std::sqrt(n * d0); }
  double center_radius() const { return std::sqrt(n * (sigma2 - d0)); }
  double theta0() const { return std::asin(std::sqrt(d0 / sigma2)); }

  void validate() const {
    if (n < 1) throw std::invalid_argument("covering code: n must be >= 1");
    if (!(sigma2 > 0.0) || !(d0 > 0.0) || !(d0 < sigma2)) {
      throw std::invalid_argument("covering code: need 0 < d0 < sigma2");
    }
    if (centers.empty() || centers.size() % static_cast<std::size_t>(n) != 0) {
      throw std::invalid_argument("covering code: centers must be a nonempty list of n-vectors");
    }
    const double r = center_radius();
    for (std::size_t i = 0; i < size(); ++i) {
      if (std::abs(norm(center(i)) - r) > 1e-9 * r) {
        throw std::invalid_argument("covering code: center " + std::to_string(i) +
                                    " is not at radius sqrt(n (sigma2 - d0))");
      }
    }
  }
};

// Slack allowed above the volume bound: (a log2 n + b) / n.
struct OverheadBudget {
  double a = 3.0;
  double b = 10.0;
  double at(int n) const { return (a * std::log2(static_cast<double>(n)) + b) / n; }
};

struct CoveringReport {
  double rate = 0.0;
  double bound = 0.0;
  double overhead_budget = 0.0;
  double sampled_coverage = 0.0;
  std::size_t samples = 0;
};

struct CoveringLimits {
  std::size_t max_centers = 1u << 20;
  std::uint64_t max_samples = 4'000'000'000ULL;
};

struct NearestCenter {
  std::size_t index;
  double angle;
};

namespace detail {

// Index of the first unit row with dot(row, p) >= threshold, or npos.
inline std::size_t first_within(const std::vector<double>& units, int n, std::span<const double> p,
                                double threshold) {
  const std::size_t rows = units.size() / static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* u = units.data() + i * static_cast<std::size_t>(n);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += u[k] * p[k];
    if (s >= threshold) return i;
  }
  return std::numeric_limits<std::size_t>::max();
}

}  // namespace detail

/// Greedy random covering. Samples uniform shell points; each uncovered one
/// becomes a new center direction. Stops after `audit_samples` consecutive
/// covered samples.
///
/// Throws budget_exceeded if the cap-fraction lower bound on the center count
/// already exceeds limits.max_centers, or if the run exceeds either limit.
inline CoveringCode build_covering(int n, double sigma2, double d0, std::uint64_t seed,
                                   std::size_t audit_samples = 100000,
                                   const CoveringLimits& limits = {}) {
  if (n < 2) throw std::invalid_argument("build_covering: n must be >= 2");
  if (!(sigma2 > 0.0) || !(d0 > 0.0) || !(d0 < sigma2)) {
    throw std::invalid_argument("build_covering: need 0 < d0 < sigma2");
  }
  if (audit_samples < 1) throw std::invalid_argument("build_covering: audit_samples must be >= 1");

  CoveringCode code{n, sigma2, d0, seed, {}};
  const double theta0 = code.theta0();
  const double min_count = 1.0 / cap_fraction_exact(theta0, n);
  if (min_count > static_cast<double>(limits.max_centers)) {
    throw budget_exceeded("build_covering: at least " + std::to_string(min_count) +
                          " centers are needed, limit is " + std::to_string(limits.max_centers));
  }

  const double cos_theta0 = std::cos(theta0);
  Rng rng(derive_seed(seed, 0));
  std::vector<double> units;
  Vector p(static_cast<std::size_t>(n));
  std::size_t streak = 0;
  std::uint64_t drawn = 0;
  while (streak < audit_samples) {
    if (++drawn > limits.max_samples) {
      throw budget_exceeded("build_covering: sample limit reached with " +
                            std::to_string(units.size() / n) + " centers");
    }
    sample_unit_sphere(std::span<double>(p), rng);
    if (detail::first_within(units, n, p, cos_theta0) != std::numeric_limits<std::size_t>::max()) {
      ++streak;
      continue;
    }
    if (units.size() / n >= limits.max_centers) {
      throw budget_exceeded("build_covering: center limit " + std::to_string(limits.max_centers) +
                            " reached");
    }
    units.insert(units.end(), p.begin(), p.end());
    streak = 0;
  }

  const double r = code.center_radius();
  code.centers = std::move(units);
  for (double& v : code.centers) v *= r;
  return code;
}

/// Nearest center to the radial projection of x onto the shell. Ties go to
/// the lowest index.
inline NearestCenter nearest_center(const CoveringCode& code, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(code.n)) {
    throw std::invalid_argument("nearest_center: dimension mismatch");
  }
  if (code.size() == 0) throw std::invalid_argument("nearest_center: empty code");
  std::size_t best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < code.size(); ++i) {
    const double s = dot(code.center(i), x);
    if (s > best_dot) {
      best_dot = s;
      best = i;
    }
  }
  return {best, angle_between(code.center(best), x)};
}

/// Fraction of `samples` fresh uniform shell points within cover_radius of
/// some center.
inline CoveringReport verify_covering(const CoveringCode& code, std::size_t samples,
                                      std::uint64_t seed, const OverheadBudget& budget = {}) {
  if (samples < 1) throw std::invalid_argument("verify_covering: samples must be >= 1");
  const int n = code.n;
  const double r = code.center_radius();
  std::vector<double> units(code.centers);
  for (double& v : units) v /= r;
  const double cos_theta0 = std::cos(code.theta0());

  Rng rng(derive_seed(seed, 1));
  Vector p(static_cast<std::size_t>(n));
  std::size_t covered = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    sample_unit_sphere(std::span<double>(p), rng);
    if (detail::first_within(units, n, p, cos_theta0) != std::numeric_limits<std::size_t>::max()) {
      ++covered;
    }
  }

  CoveringReport rep;
  rep.rate = std::log2(static_cast<double>(code.size())) / n;
  rep.bound = 0.5 * std::log2(code.sigma2 / code.d0);
  rep.overhead_budget = budget.at(n);
  rep.sampled_coverage = static_cast<double>(covered) / static_cast<double>(samples);
  rep.samples = samples;
  return rep;
}

}  // namespace quadsig
