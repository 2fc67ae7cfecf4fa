#pragma once

// A random spherical code of 2^log2_size i.i.d. uniform centers, sampled
// lazily: for an input direction only the nearest center is drawn, from the
// exact law of the minimum angle,
//
//   Pr{min angle > phi} = (1 - Omega(phi))^M.
//
// Used where an explicit codebook at the required rate would not fit in
// memory. Every realized center is a genuine unit vector, so the scheme's cap
// test stays exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "quadsig/errors.hpp"
#include "quadsig/geometry.hpp"
#include "quadsig/quadrature.hpp"
#include "quadsig/random.hpp"

namespace quadsig {

class RandomCodeEnsemble {
 public:
  static constexpr int kGrid = 4096;

  // Ensemble sized so that the covering-gap probability is about
  // exp(-n log2 n): M = n log2(n) / Omega(theta0).
  RandomCodeEnsemble(int n, double sigma2, double d0)
      : RandomCodeEnsemble(n, sigma2, d0, std::nullopt) {}

  RandomCodeEnsemble(int n, double sigma2, double d0, std::optional<double> log2_size)
      : n_(n), sigma2_(sigma2), d0_(d0) {
    if (n < 2) throw std::invalid_argument("RandomCodeEnsemble: n must be >= 2");
    if (!(sigma2 > 0.0) || !(d0 > 0.0) || !(d0 < sigma2)) {
      throw std::invalid_argument("RandomCodeEnsemble: need 0 < d0 < sigma2");
    }
    theta0_ = std::asin(std::sqrt(d0 / sigma2));
    build_table();
    log2_size_ = log2_size ? *log2_size
                           : std::log2(n * std::log2(static_cast<double>(n))) -
                                 log_omega_.back() / std::numbers::ln2;
    if (!(log2_size_ >= 0.0)) throw std::invalid_argument("RandomCodeEnsemble: size must be >= 1");
  }

  int n() const { return n_; }
  double sigma2() const { return sigma2_; }
  double d0() const { return d0_; }
  double theta0() const { return theta0_; }
  double log2_size() const { return log2_size_; }
  double rate() const { return log2_size_ / n_; }

  /// Angle from x to its nearest center, or nullopt when it exceeds theta0.
  std::optional<double> sample_angle(Rng& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = 0.0;
    do u = uni(rng);
    while (!(u > 0.0));
    const double m = std::exp2(log2_size_);
    // Omega of the minimum angle: 1 - U^(1/M).
    const double omega = -std::expm1(std::log(u) / m);
    const double log_om = std::log(omega);
    if (log_om > log_omega_.back()) return std::nullopt;
    return invert(log_om);
  }

  /// Nearest center of x (any nonzero vector), as a unit vector, or nullopt
  /// on a covering gap.
  std::optional<Vector> nearest_center(std::span<const double> x, Rng& rng) const {
    if (x.size() != static_cast<std::size_t>(n_)) {
      throw std::invalid_argument("RandomCodeEnsemble: dimension mismatch");
    }
    const double nx = norm(x);
    if (!(nx > 0.0)) throw std::invalid_argument("RandomCodeEnsemble: x must be nonzero");
    const auto phi = sample_angle(rng);
    if (!phi) return std::nullopt;

    Vector w(static_cast<std::size_t>(n_));
    double wn = 0.0;
    do {
      fill_gaussian(std::span<double>(w), rng);
      const double proj = dot(w, x) / (nx * nx);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= proj * x[k];
      wn = norm(w);
    } while (!(wn > 1e-12));

    const double c = std::cos(*phi) / nx;
    const double s = std::sin(*phi) / wn;
    Vector u(static_cast<std::size_t>(n_));
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = c * x[k] + s * w[k];
    if (angle_between(u, x) > theta0_) return std::nullopt;
    return u;
  }

 private:
  void build_table() {
    const int power = n_ - 2;
    auto density = [power](double phi) { return std::pow(std::sin(phi), power); };
    const double total = 2.0 * detail::sine_power_integral(std::numbers::pi / 2.0, n_);
    phi_.resize(kGrid);
    log_omega_.resize(kGrid);
    double acc = 0.0;
    double prev = 0.0;
    for (int k = 0; k < kGrid; ++k) {
      const double phi = theta0_ * (k + 1) / kGrid;
      if (k == 0) {
        acc = detail::sine_power_integral(phi, n_);
      } else {
        acc += detail::gauss_kronrod15(density, prev, phi).value;
      }
      phi_[k] = phi;
      log_omega_[k] = std::log(acc / total);
      prev = phi;
    }
  }

  // Interpolates log(phi) linearly in log(Omega); below the first grid point
  // Omega ~ phi^(n-1).
  double invert(double log_om) const {
    if (log_om <= log_omega_.front()) {
      return phi_.front() * std::exp((log_om - log_omega_.front()) / (n_ - 1));
    }
    const auto it = std::lower_bound(log_omega_.begin(), log_omega_.end(), log_om);
    const std::size_t hi = static_cast<std::size_t>(it - log_omega_.begin());
    const std::size_t lo = hi - 1;
    const double t = (log_om - log_omega_[lo]) / (log_omega_[hi] - log_omega_[lo]);
    const double lp = std::log(phi_[lo]) + t * (std::log(phi_[hi]) - std::log(phi_[lo]));
    return std::min(std::exp(lp), theta0_);
  }

  int n_;
  double sigma2_;
  double d0_;
  double theta0_ = 0.0;
  double log2_size_ = 0.0;
  std::vector<double> phi_;
  std::vector<double> log_omega_;
};

}  // namespace quadsig
