#pragma once

// Angles, cones, caps and D-expansions on R^n.
//
// Conventions: a "thick cap" is the set of points whose angle to `axis` is at
// most `half_angle` and whose norm lies in [inner_radius, outer_radius]. Cap
// fractions are normalized surface measures on the unit sphere S^{n-1}.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "quadsig/errors.hpp"
#include "quadsig/quadrature.hpp"

namespace quadsig {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

struct CapSpec {
  Vector axis;
  double half_angle = 0.0;
  // Zero is allowed so that the innermost amplitude shell [0, r1] is a cap too.
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  void validate() const {
    if (axis.empty() || !(norm(axis) > 0.0)) {
      throw std::invalid_argument("cap axis must be a nonzero vector");
    }
    if (!(half_angle >= 0.0 && half_angle <= std::numbers::pi)) {
      throw std::invalid_argument("cap half-angle must lie in [0, pi]");
    }
    if (!(inner_radius >= 0.0 && inner_radius <= outer_radius && std::isfinite(outer_radius))) {
      throw std::invalid_argument("cap radii must satisfy 0 <= inner <= outer < inf");
    }
  }
};

struct CapFractionBounds {
  double lower;
  double upper;
};

// Angle between two nonzero vectors, in [0, pi].
inline double angle_between(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("angle_between: dimension mismatch");
  const double nx = norm(x);
  const double ny = norm(y);
  if (!(nx > 0.0) || !(ny > 0.0)) throw std::invalid_argument("angle_between: zero vector");
  const double c = std::clamp(dot(x, y) / (nx * ny), -1.0, 1.0);
  return std::acos(c);
}

/// Two-sided bounds on the cap fraction Omega(theta), valid for
/// 0 < theta < arccos(1/sqrt(n)). Outside that range the bounds are not
/// established and out_of_domain is thrown.
inline CapFractionBounds cap_fraction_bounds(double theta, int n) {
  if (n < 2) throw std::invalid_argument("cap_fraction_bounds: n must be >= 2");
  const double limit = std::acos(1.0 / std::sqrt(static_cast<double>(n)));
  if (!(theta > 0.0 && theta < limit)) {
    throw out_of_domain("cap_fraction_bounds: theta must lie in (0, arccos(1/sqrt(n)))");
  }
  const double shape = std::pow(std::sin(theta), n - 1) / std::cos(theta);
  const double lower = shape / (3.0 * std::sqrt(2.0 * std::numbers::pi * n));
  const double upper = shape / std::sqrt(2.0 * std::numbers::pi * (n - 1));
  return {lower, upper};
}

namespace detail {

// Integral of sin^{n-2} over [0, theta], theta <= pi/2.
inline double sine_power_integral(double theta, int n) {
  if (theta <= 0.0) return 0.0;
  const int power = n - 2;
  if (power == 0) return theta;
  auto integrand = [power](double phi) { return std::pow(std::sin(phi), power); };
  return adaptive_integrate(integrand, 0.0, theta, 0.0, 1e-14);
}

}  // namespace detail

/// Normalized surface measure of a cap of half-angle theta on S^{n-1}.
/// Computed by quadrature of the sin^{n-2} area density; the normalizer is
/// twice the half-range integral. Accurate to well below 1e-10 absolute and
/// keeps relative accuracy for tiny caps.
inline double cap_fraction_exact(double theta, int n) {
  if (n < 2) throw std::invalid_argument("cap_fraction_exact: n must be >= 2");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw out_of_domain("cap_fraction_exact: theta must lie in [0, pi]");
  }
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double total = 2.0 * detail::sine_power_integral(half_pi, n);
  if (theta <= half_pi) return detail::sine_power_integral(theta, n) / total;
  return 1.0 - detail::sine_power_integral(std::numbers::pi - theta, n) / total;
}

/// Angle at the origin of a triangle whose squared side lengths (per
/// dimension) are z1, z2 from the origin and d between the far vertices.
inline double law_of_cosines_angle(double z1, double z2, double d) {
  if (!(z1 > 0.0) || !(z2 > 0.0) || !(d >= 0.0)) {
    throw std::invalid_argument("law_of_cosines_angle: need z1 > 0, z2 > 0, d >= 0");
  }
  const double c = (z1 + z2 - d) / (2.0 * std::sqrt(z1 * z2));
  constexpr double slack = 1e-12;
  if (c > 1.0 + slack || c < -1.0 - slack) {
    throw out_of_domain("law_of_cosines_angle: side lengths violate the triangle inequality");
  }
  return std::acos(std::clamp(c, -1.0, 1.0));
}

struct ConeAngle {
  double angle;             // theta0 + theta1
  double theta1;            // the expansion part
  bool below_right_angle;   // angle < pi/2, required for a vanishing maybe-probability
};

/// Half-angle of the cone that contains the D-expansion of a cell of angular
/// radius theta0 intersected with the typical Y-shell. eta is the shell
/// half-width in variance units.
inline ConeAngle expansion_cone_angle(double d, double sigma_x2, double sigma_y2, double eta,
                                      double theta0) {
  if (!(sigma_x2 > 0.0) || !(sigma_y2 > 0.0) || !(eta > 0.0) || !(d >= 0.0)) {
    throw std::invalid_argument("expansion_cone_angle: need positive variances and eta, d >= 0");
  }
  if (!(theta0 > 0.0 && theta0 < std::numbers::pi / 2.0)) {
    throw std::invalid_argument("expansion_cone_angle: theta0 must lie in (0, pi/2)");
  }
  const double c = (sigma_x2 + sigma_y2 - 2.0 * eta - d) /
                   (2.0 * std::sqrt((sigma_x2 + eta) * (sigma_y2 + eta)));
  if (c > 1.0 || c < -1.0) {
    throw out_of_domain("expansion_cone_angle: arccos argument " + std::to_string(c) +
                        " outside [-1, 1]");
  }
  const double theta1 = std::acos(c);
  const double angle = theta0 + theta1;
  return {angle, theta1, angle < std::numbers::pi / 2.0};
}

/// Euclidean distance from y to the nearest point of a thick cap.
///
/// Reduces to the 2-D plane spanned by the axis and y: with s = |y| and
/// beta the angle from the axis to y, the nearest cap point sits at angle
/// min(beta, half_angle) and radius clamp(s cos(beta - phi), r_in, r_out).
inline double min_distance_to_thick_cap(std::span<const double> y, const CapSpec& cap) {
  if (y.size() != cap.axis.size()) {
    throw std::invalid_argument("min_distance_to_thick_cap: dimension mismatch");
  }
  if (!(cap.half_angle >= 0.0 && cap.half_angle <= std::numbers::pi / 2.0)) {
    throw std::invalid_argument("min_distance_to_thick_cap: half-angle must lie in [0, pi/2]");
  }
  const double s = norm(y);
  if (!(s > 0.0)) throw std::invalid_argument("min_distance_to_thick_cap: y must be nonzero");
  const double beta = angle_between(cap.axis, y);
  const double gap = beta - std::min(beta, cap.half_angle);
  const double r = std::clamp(s * std::cos(gap), cap.inner_radius, cap.outer_radius);
  // (s - r)^2 + 4 s r sin^2(gap/2) avoids cancellation for small gaps.
  const double h = std::sin(0.5 * gap);
  return std::sqrt((s - r) * (s - r) + 4.0 * s * r * h * h);
}

inline bool in_thick_cap(std::span<const double> x, const CapSpec& cap) {
  const double r = norm(x);
  if (r < cap.inner_radius || r > cap.outer_radius) return false;
  if (!(r > 0.0)) return cap.inner_radius == 0.0;
  return angle_between(cap.axis, x) <= cap.half_angle;
}

}  // namespace quadsig
