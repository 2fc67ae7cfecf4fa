#pragma once

// Closed-form identification rate and exponent for Gaussian sources under the
// normalized quadratic similarity d(x, y) = |x - y|^2 / n.
//
// All rates and exponents are in bits per symbol (base-2 logs). The natural
// log appears only inside the chi-square rate function exponent_ez().

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "quadsig/errors.hpp"

namespace quadsig {

struct GaussianPair {
  double sigma_x2;
  double sigma_y2;

  void validate() const {
    if (!(sigma_x2 > 0.0) || !(sigma_y2 > 0.0) || !std::isfinite(sigma_x2) ||
        !std::isfinite(sigma_y2)) {
      throw std::invalid_argument("GaussianPair: variances must be finite and positive");
    }
  }
  double sigma_x() const { return std::sqrt(sigma_x2); }
  double sigma_y() const { return std::sqrt(sigma_y2); }
  // Similarity thresholds below this need no rate at all.
  double lower_threshold() const {
    const double g = sigma_x() - sigma_y();
    return g * g;
  }
  // At or above this threshold X and Y are similar with non-vanishing probability.
  double upper_threshold() const { return sigma_x2 + sigma_y2; }
};

// A rate that may be +infinity.
class ExtendedRate {
 public:
  static ExtendedRate finite(double bits) {
    if (!(bits >= 0.0) || !std::isfinite(bits)) {
      throw std::invalid_argument("ExtendedRate: finite value must be >= 0");
    }
    return ExtendedRate(bits, false);
  }
  static ExtendedRate infinity() { return ExtendedRate(0.0, true); }

  bool is_infinite() const { return infinite_; }
  double value() const {
    if (infinite_) throw std::logic_error("ExtendedRate: value() on infinite rate");
    return value_;
  }
  // +inf for the infinite case; convenient for comparisons.
  double as_double() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  friend bool operator==(const ExtendedRate& a, const ExtendedRate& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  ExtendedRate(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

// Six decimals, or the literal token "inf".
inline std::string format_rate(const ExtendedRate& r) {
  if (r.is_infinite()) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.value());
  return buf;
}

inline std::ostream& operator<<(std::ostream& os, const ExtendedRate& r) {
  return os << format_rate(r);
}

inline ExtendedRate id_rate(const GaussianPair& pair, double d) {
  pair.validate();
  if (!(d >= 0.0)) throw std::invalid_argument("id_rate: d must be >= 0");
  if (d < pair.lower_threshold()) return ExtendedRate::finite(0.0);
  if (d >= pair.upper_threshold()) return ExtendedRate::infinity();
  const double bits =
      std::log2(2.0 * pair.sigma_x() * pair.sigma_y() / (pair.upper_threshold() - d));
  return ExtendedRate::finite(std::max(0.0, bits));
}

inline ExtendedRate id_rate_symmetric(double sigma2, double d) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("id_rate_symmetric: sigma2 must be > 0");
  if (!(d >= 0.0)) throw std::invalid_argument("id_rate_symmetric: d must be >= 0");
  if (d >= 2.0 * sigma2) return ExtendedRate::infinity();
  return ExtendedRate::finite(std::max(0.0, std::log2(2.0 * sigma2 / (2.0 * sigma2 - d))));
}

// Gaussian rate-distortion function [1/2 log(sigma^2/D)]^+.
inline double rate_distortion(double sigma2, double d) {
  if (!(sigma2 > 0.0) || !(d > 0.0)) throw std::invalid_argument("rate_distortion: need positive arguments");
  return std::max(0.0, 0.5 * std::log2(sigma2 / d));
}

// Large-deviation rate of a normalized chi-square variable, in bits.
inline double exponent_ez(double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("exponent_ez: rho must be > 0");
  return (rho - 1.0 - std::log(rho)) / (2.0 * std::numbers::ln2);
}

// Cap-expansion exponent -log sin min(pi/2, arcsin 2^-R + arccos c) with
// c = (z1 + z2 - d) / (2 sqrt(z1 z2)). r may be +infinity.
inline double wp(double r, double d, double z1, double z2) {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw std::invalid_argument("wp: z1, z2 must be > 0");
  const double c = (z1 + z2 - d) / (2.0 * std::sqrt(z1 * z2));
  constexpr double slack = 1e-12;
  if (!(c <= 1.0 + slack && c >= -1.0 - slack)) {
    throw out_of_domain("wp: arccos argument outside [-1, 1]");
  }
  const double angle =
      std::min(std::numbers::pi / 2.0, std::asin(std::exp2(-r)) + std::acos(std::clamp(c, -1.0, 1.0)));
  const double v = -std::log2(std::sin(angle));
  return v > 0.0 ? v : 0.0;
}

// Exponent of Pr{d(X, Y) <= D} for independent Gaussians.
inline double similarity_exponent(const GaussianPair& pair, double d) {
  pair.validate();
  if (!(d > 0.0 && d <= pair.upper_threshold())) {
    throw std::invalid_argument("similarity_exponent: need 0 < d <= sigma_x2 + sigma_y2");
  }
  return exponent_ez(d / pair.upper_threshold());
}

// The (rho_x, rho_y) point at which the identification objective is strictly
// below similarity_exponent for every finite rate.
struct RhoPoint {
  double rho_x;
  double rho_y;
};

inline RhoPoint similarity_witness(const GaussianPair& pair, double d) {
  pair.validate();
  const double sx = pair.sigma_x2;
  const double sy = pair.sigma_y2;
  const double s = sx + sy;
  return {(sx * d + sy * s) / (s * s), (sy * d + sx * s) / (s * s)};
}

struct BoundaryFlags {
  bool gap_constraint = false;   // |sqrt(z_x) - sqrt(z_y)| = sqrt(D) (strict in the theory)
  bool sum_constraint = false;   // z_x + z_y = D
  bool rho_max = false;          // minimizer pinned at the search box edge
};

struct ExponentSolution {
  double value;
  double rho_x;
  double rho_y;
  BoundaryFlags at_boundary;
};

struct ExponentOptions {
  double rho_max = 4.0;   // E_Z(4) ~ 1.16 bits dominates every regime of interest
  int grid = 400;
  double final_step = 1e-8;
  int refine_starts = 4;  // best grid points polished independently
};

namespace detail {

inline bool rho_feasible(const GaussianPair& p, double d, double rx, double ry) {
  if (!(rx > 0.0) || !(ry > 0.0)) return false;
  const double zx = rx * p.sigma_x2;
  const double zy = ry * p.sigma_y2;
  const double g = std::sqrt(zx) - std::sqrt(zy);
  return g * g <= d && zx + zy >= d;
}

inline double id_objective(const GaussianPair& p, double d, double r, double rx, double ry) {
  return exponent_ez(rx) + exponent_ez(ry) + wp(r, d, rx * p.sigma_x2, ry * p.sigma_y2);
}

inline void check_exponent_preconditions(const GaussianPair& pair, double d, double r) {
  pair.validate();
  if (!(d > pair.lower_threshold() && d < pair.upper_threshold())) {
    throw precondition_failed("identification exponent needs (sigma_x - sigma_y)^2 < d < "
                              "sigma_x2 + sigma_y2");
  }
  const double rid = id_rate(pair, d).value();
  if (!(r > rid)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "rate %.6f must exceed the identification rate %.6f", r, rid);
    throw precondition_failed(buf);
  }
}

inline BoundaryFlags classify_boundary(const GaussianPair& p, double d, double rx, double ry,
                                       double rho_max) {
  const double zx = rx * p.sigma_x2;
  const double zy = ry * p.sigma_y2;
  const double g = std::abs(std::sqrt(zx) - std::sqrt(zy));
  constexpr double tol = 1e-6;
  BoundaryFlags f;
  f.gap_constraint = std::sqrt(d) - g <= tol * std::sqrt(d);
  f.sum_constraint = zx + zy - d <= tol * d;
  f.rho_max = rx >= rho_max - tol || ry >= rho_max - tol;
  return f;
}

}  // namespace detail

/// Identification exponent E_ID(R, D) for Gaussian X, Y with variances
/// (sigma_x2, sigma_y2): minimum of E_Z(rho_x) + E_Z(rho_y) + wp(...) over
/// the feasible region. Dense grid over (0, rho_max]^2, then compass search
/// from the best few grid points down to `final_step`.
inline ExponentSolution id_exponent(const GaussianPair& pair, double d, double r,
                                    const ExponentOptions& opt = {}) {
  detail::check_exponent_preconditions(pair, d, r);
  if (!(opt.rho_max > 0.0) || opt.grid < 2) throw std::invalid_argument("id_exponent: bad options");

  struct Candidate {
    double value, rx, ry;
  };
  std::vector<Candidate> grid_points;
  const double h = opt.rho_max / opt.grid;
  for (int i = 1; i <= opt.grid; ++i) {
    for (int j = 1; j <= opt.grid; ++j) {
      const double rx = h * i;
      const double ry = h * j;
      if (!detail::rho_feasible(pair, d, rx, ry)) continue;
      grid_points.push_back({detail::id_objective(pair, d, r, rx, ry), rx, ry});
    }
  }
  if (grid_points.empty()) throw internal_error("id_exponent: feasible region has no grid point");

  const auto starts = std::min<std::size_t>(std::max(1, opt.refine_starts), grid_points.size());
  std::partial_sort(grid_points.begin(), grid_points.begin() + starts, grid_points.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

  static constexpr double dirs[8][2] = {{1, 0},  {-1, 0}, {0, 1},   {0, -1},
                                        {1, 1},  {1, -1}, {-1, 1},  {-1, -1}};
  Candidate best = grid_points.front();
  for (std::size_t s = 0; s < starts; ++s) {
    Candidate cur = grid_points[s];
    double step = h;
    while (step >= opt.final_step) {
      bool improved = false;
      for (const auto& dir : dirs) {
        const double rx = std::min(opt.rho_max, cur.rx + step * dir[0]);
        const double ry = std::min(opt.rho_max, cur.ry + step * dir[1]);
        if (!detail::rho_feasible(pair, d, rx, ry)) continue;
        const double v = detail::id_objective(pair, d, r, rx, ry);
        if (v < cur.value) {
          cur = {v, rx, ry};
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur.value < best.value) best = cur;
  }
  return {best.value, best.rx, best.ry,
          detail::classify_boundary(pair, d, best.rx, best.ry, opt.rho_max)};
}

/// Symmetric special case: one-dimensional minimum of 2 E_Z(rho) + wp over
/// rho in [d / (2 sigma2), 1]. Dense scan followed by golden-section search.
inline ExponentSolution id_exponent_symmetric(double sigma2, double d, double r) {
  const GaussianPair pair{sigma2, sigma2};
  detail::check_exponent_preconditions(pair, d, r);
  const double lo = d / (2.0 * sigma2);
  const double hi = 1.0;
  auto f = [&](double rho) { return 2.0 * exponent_ez(rho) + wp(r, d, rho * sigma2, rho * sigma2); };

  constexpr int scan = 2000;
  int best_k = 0;
  double best_v = f(lo);
  for (int k = 1; k <= scan; ++k) {
    const double v = f(lo + (hi - lo) * k / scan);
    if (v < best_v) {
      best_v = v;
      best_k = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_k - 1) / scan;
  double b = lo + (hi - lo) * std::min(scan, best_k + 1) / scan;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double rho = 0.5 * (a + b);
  double value = f(rho);
  // The bracket ends can beat the interior when the minimum sits on the boundary.
  for (double edge : {lo, hi}) {
    const double v = f(edge);
    if (v < value) {
      value = v;
      rho = edge;
    }
  }
  BoundaryFlags flags;
  flags.sum_constraint = rho - lo <= 1e-9;
  return {value, rho, rho, flags};
}

// Gaussian test channel Xhat = gain * sqrt(sigma_y / sigma_x) X + Z,
// Z ~ N(0, noise_var), which meets the general-source admissibility
// constraint with equality.
struct TestChannel {
  double gain;
  double noise_var;
};

inline TestChannel gaussian_test_channel(double sigma_x, double sigma_y, double d) {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
    throw std::invalid_argument("gaussian_test_channel: standard deviations must be > 0");
  }
  const double gap = (sigma_x - sigma_y) * (sigma_x - sigma_y);
  const double top = sigma_x * sigma_x + sigma_y * sigma_y;
  if (!(d > gap)) throw out_of_domain("gaussian_test_channel: d must exceed (sigma_x - sigma_y)^2");
  if (d > top) throw out_of_domain("gaussian_test_channel: d must not exceed sigma_x^2 + sigma_y^2");
  const double sum_sq = (sigma_x + sigma_y) * (sigma_x + sigma_y) - d;
  const double gain = sum_sq / (2.0 * sigma_x * sigma_y);
  const double noise = sum_sq * (top - d) * (top - d) / (4.0 * sigma_x * sigma_y * (d - gap));
  return {gain, noise};
}

// Root second moments of the two sides of the admissibility constraint:
// lhs = sqrt(E[(sqrt(sx/sy) Y - Xhat)^2]), rhs = sqrt(E[(sqrt(sy/sx) X - Xhat)^2]).
struct ChannelMoments {
  double lhs;
  double rhs;
};

inline ChannelMoments channel_moments(double sigma_x, double sigma_y, const TestChannel& ch) {
  const double sxy = sigma_x * sigma_y;
  return {std::sqrt(sxy * (1.0 + ch.gain * ch.gain) + ch.noise_var),
          std::sqrt(sxy * (1.0 - ch.gain) * (1.0 - ch.gain) + ch.noise_var)};
}

// Gaussian upper bound on I(X; Xhat), in bits.
inline double channel_information_bound(double sigma_x, double sigma_y, const TestChannel& ch) {
  return 0.5 * std::log2((ch.gain * ch.gain * sigma_x * sigma_y + ch.noise_var) / ch.noise_var);
}

/// lhs - rhs - sqrt(d - (sigma_x - sigma_y)^2); nonnegative means the candidate
/// channel satisfies the constraint.
inline double test_channel_constraint_gap(double sigma_x, double sigma_y, double d, double lhs,
                                          double rhs) {
  const double gap = (sigma_x - sigma_y) * (sigma_x - sigma_y);
  if (d < gap) throw out_of_domain("test_channel_constraint_gap: d below (sigma_x - sigma_y)^2");
  return lhs - rhs - std::sqrt(d - gap);
}

}  // namespace quadsig
