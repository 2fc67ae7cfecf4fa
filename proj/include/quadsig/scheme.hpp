#pragma once

// D-admissible signature/query system built on a spherical code.
//
// The signature of x is the nearest code direction plus, in shape-gain mode,
// the index of the amplitude shell containing x. The query answers No only
// when y is farther than sqrt(n d) from the whole thick cap that contains
// every x with that signature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "quadsig/analysis.hpp"
#include "quadsig/covering.hpp"
#include "quadsig/errors.hpp"
#include "quadsig/geometry.hpp"
#include "quadsig/random.hpp"
#include "quadsig/random_code.hpp"

namespace quadsig {

enum class Mode { basic, shape_gain };

inline std::string to_string(Mode m) { return m == Mode::basic ? "basic" : "shape_gain"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "basic") return Mode::basic;
  if (s == "shape_gain") return Mode::shape_gain;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

struct SchemeConfig {
  int n = 0;
  double d = 0.0;
  double sigma_x2 = 0.0;
  double eta = 0.0;
  Mode mode = Mode::basic;
  double sigma_max2 = 0.0;
  double d0 = 0.0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("SchemeConfig: n must be >= 2");
    if (!(d > 0.0) || !(sigma_x2 > 0.0) || !(eta > 0.0)) {
      throw std::invalid_argument("SchemeConfig: d, sigma_x2 and eta must be positive");
    }
    if (!(d0 > 0.0 && d0 < sigma_x2)) throw std::invalid_argument("SchemeConfig: need 0 < d0 < sigma_x2");
    if (mode == Mode::basic && !(eta < sigma_x2)) {
      throw std::invalid_argument("SchemeConfig: basic mode needs eta < sigma_x2");
    }
    if (mode == Mode::shape_gain && !(sigma_max2 > 0.0)) {
      throw std::invalid_argument("SchemeConfig: shape_gain mode needs sigma_max2 > 0");
    }
  }

  double theta0() const { return std::asin(std::sqrt(d0 / sigma_x2)); }

  std::size_t num_shells() const {
    return mode == Mode::basic ? 1 : static_cast<std::size_t>(std::ceil(sigma_max2 / eta));
  }

  // Inner and outer radius of shell i.
  std::pair<double, double> shell_radii(std::size_t i) const {
    if (mode == Mode::basic) {
      return {std::sqrt(n * (sigma_x2 - eta)), std::sqrt(n * (sigma_x2 + eta))};
    }
    const double step = n * eta;
    return {std::sqrt(step * static_cast<double>(i)), std::sqrt(step * static_cast<double>(i + 1))};
  }
};

struct Erasure {
  friend bool operator==(const Erasure&, const Erasure&) = default;
};

struct Cell {
  std::size_t center_index = 0;
  std::size_t shell_index = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

using Signature = std::variant<Erasure, Cell>;

enum class Verdict { No, Maybe };

inline bool is_erasure(const Signature& s) { return std::holds_alternative<Erasure>(s); }

// Relative slack on the query threshold; absorbs rounding in the cap distance.
inline constexpr double kQuerySlack = 1e-12;

/// Shell index of x, or nullopt when x is atypical (erased).
inline std::optional<std::size_t> shell_index(const SchemeConfig& config, std::span<const double> x) {
  const double n2 = dot(x, x);
  if (config.mode == Mode::basic) {
    const double lo = config.n * (config.sigma_x2 - config.eta);
    const double hi = config.n * (config.sigma_x2 + config.eta);
    if (n2 < lo || n2 > hi || !(n2 > 0.0)) return std::nullopt;
    return 0;
  }
  if (n2 / config.n > config.sigma_max2 || !(n2 > 0.0)) return std::nullopt;
  const auto k = config.num_shells();
  const auto i = static_cast<std::size_t>(std::floor(n2 / (config.n * config.eta)));
  return std::min(i, k - 1);
}

/// Verdict for y given the cell (axis, shell). axis is any nonzero vector
/// along the cell's center direction.
inline Verdict query_cell(const SchemeConfig& config, std::span<const double> axis,
                          std::size_t shell, std::span<const double> y) {
  if (y.size() != static_cast<std::size_t>(config.n) || axis.size() != y.size()) {
    throw std::invalid_argument("query: dimension mismatch");
  }
  const auto [r1, r2] = config.shell_radii(shell);
  double dist = 0.0;
  if (norm(y) > 0.0) {
    CapSpec cap{Vector(axis.begin(), axis.end()), config.theta0(), r1, r2};
    dist = min_distance_to_thick_cap(y, cap);
  } else {
    dist = r1;
  }
  return dist <= std::sqrt(config.n * config.d) * (1.0 + kQuerySlack) ? Verdict::Maybe : Verdict::No;
}

namespace detail {

inline void check_code(const SchemeConfig& config, const CoveringCode& code) {
  if (code.n != config.n) throw std::invalid_argument("scheme: code dimension differs from config");
  if (std::abs(code.sigma2 - config.sigma_x2) > 1e-12 * config.sigma_x2 ||
      std::abs(code.d0 - config.d0) > 1e-12 * config.sigma_x2) {
    throw std::invalid_argument("scheme: code was built for different sigma2 or d0");
  }
}

}  // namespace detail

inline Signature assign_signature(const SchemeConfig& config, const CoveringCode& code,
                                  std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(config.n)) {
    throw std::invalid_argument("assign_signature: dimension mismatch");
  }
  detail::check_code(config, code);
  const auto shell = shell_index(config, x);
  if (!shell) return Erasure{};
  const auto nc = nearest_center(code, x);
  if (nc.angle > config.theta0()) return Erasure{};
  return Cell{nc.index, *shell};
}

inline Verdict query(const SchemeConfig& config, const CoveringCode& code, const Signature& sig,
                     std::span<const double> y) {
  if (y.size() != static_cast<std::size_t>(config.n)) {
    throw std::invalid_argument("query: dimension mismatch");
  }
  if (const auto* cell = std::get_if<Cell>(&sig)) {
    if (cell->center_index >= code.size() || cell->shell_index >= config.num_shells()) {
      throw std::invalid_argument("query: signature out of range for this code");
    }
    return query_cell(config, code.center(cell->center_index), cell->shell_index, y);
  }
  return Verdict::Maybe;
}

/// Rate in bits/symbol of a code with 2^log2_size centers, one extra symbol
/// reserved for the erasure.
inline double rate_of(const SchemeConfig& config, double log2_size) {
  const double a = log2_size + std::log2(static_cast<double>(config.num_shells()));
  // log2(2^a + 1) without overflow.
  return (a + std::log2(1.0 + std::exp2(-a))) / config.n;
}

inline double rate_of(const SchemeConfig& config, const CoveringCode& code) {
  return rate_of(config, std::log2(static_cast<double>(code.size())));
}

// Maps an input to its cell direction. Both return false on a covering gap.
class ExplicitQuantizer {
 public:
  explicit ExplicitQuantizer(const CoveringCode& code) : code_(&code) {}
  bool operator()(std::span<const double> x, std::span<double> axis, Rng&) const {
    const auto nc = nearest_center(*code_, x);
    if (nc.angle > code_->theta0()) return false;
    const auto c = code_->center(nc.index);
    std::copy(c.begin(), c.end(), axis.begin());
    return true;
  }
  double log2_size() const { return std::log2(static_cast<double>(code_->size())); }

 private:
  const CoveringCode* code_;
};

class EnsembleQuantizer {
 public:
  explicit EnsembleQuantizer(const RandomCodeEnsemble& ens) : ens_(&ens) {}
  bool operator()(std::span<const double> x, std::span<double> axis, Rng& rng) const {
    const auto u = ens_->nearest_center(x, rng);
    if (!u) return false;
    std::copy(u->begin(), u->end(), axis.begin());
    return true;
  }
  double log2_size() const { return ens_->log2_size(); }

 private:
  const RandomCodeEnsemble* ens_;
};

namespace detail {

// Cosine of the angle between typical x and y shells after shrinking by eta.
inline double c_eta(const GaussianPair& p, double d, double eta) {
  return (p.sigma_x2 + p.sigma_y2 - 2.0 * eta - d) /
         (2.0 * std::sqrt((p.sigma_x2 + eta) * (p.sigma_y2 + eta)));
}

}  // namespace detail

/// Picks eta as the largest value in (0, sigma_x2/4] with
/// (1 - epsilon) c^2 < c_eta^2 and d0 at the midpoint of
/// ((1 - epsilon) sigma_x2 c_eta^2, sigma_x2 c_eta^2).
inline SchemeConfig plan_scheme(const GaussianPair& pair, double d, double target_rate, int n,
                                double epsilon, Mode mode = Mode::basic) {
  pair.validate();
  if (n < 2) throw std::invalid_argument("plan_scheme: n must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("plan_scheme: epsilon must lie in (0, 1)");
  if (!(d > 0.0)) throw std::invalid_argument("plan_scheme: d must be > 0");
  const ExtendedRate rid = id_rate(pair, d);
  if (!(target_rate > rid.as_double())) {
    throw precondition_failed("plan_scheme: target rate " + std::to_string(target_rate) +
                              " does not exceed the identification rate " + format_rate(rid));
  }
  if (d <= pair.lower_threshold()) {
    throw precondition_failed("plan_scheme: d is below (sigma_x - sigma_y)^2; every pair is "
                              "already dissimilar and no code is needed");
  }

  const double c = detail::c_eta(pair, d, 0.0);
  const double need = (1.0 - epsilon) * c * c;
  auto ok = [&](double eta) {
    const double ce = detail::c_eta(pair, d, eta);
    return ce > 0.0 && ce * ce > need;
  };
  double eta = pair.sigma_x2 / 4.0;
  if (!ok(eta)) {
    double lo = 0.0;
    double hi = eta;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    eta = lo;
  }
  if (!(eta > 0.0) || !ok(eta)) throw internal_error("plan_scheme: no feasible eta");

  const double ce = detail::c_eta(pair, d, eta);
  const double d0 = pair.sigma_x2 * ce * ce * (1.0 - 0.5 * epsilon);
  if (!(d0 < pair.sigma_x2)) throw internal_error("plan_scheme: d0 is not below sigma_x2");

  const double predicted = 0.5 * std::log2(pair.sigma_x2 / d0);
  if (predicted > target_rate + 1e-12) {
    throw precondition_failed("plan_scheme: epsilon " + std::to_string(epsilon) +
                              " is too large for target rate " + std::to_string(target_rate) +
                              " (predicted " + std::to_string(predicted) + ")");
  }

  SchemeConfig cfg{n, d, pair.sigma_x2, eta, mode, n * pair.sigma_x2, d0};
  const ConeAngle cone = expansion_cone_angle(d, pair.sigma_x2, pair.sigma_y2, eta, cfg.theta0());
  if (!cone.below_right_angle) {
    throw internal_error("plan_scheme: theta0 + theta1 = " + std::to_string(cone.angle) +
                         " is not below pi/2");
  }
  return cfg;
}

/// plan_scheme with the largest epsilon whose predicted rate
/// 1/2 log2(sigma_x2 / d0) stays below target_rate, that is
/// (1 - epsilon)(1 - epsilon/2) = 2^(-2 (target_rate - R_ID)).
inline SchemeConfig plan_scheme_for_rate(const GaussianPair& pair, double d, double target_rate,
                                         int n, Mode mode = Mode::basic) {
  const ExtendedRate rid = id_rate(pair, d);
  if (!(target_rate > rid.as_double())) {
    throw precondition_failed("plan_scheme: target rate " + std::to_string(target_rate) +
                              " does not exceed the identification rate " + format_rate(rid));
  }
  const double t = std::exp2(-2.0 * (target_rate - rid.value()));
  const double epsilon = (3.0 - std::sqrt(9.0 - 8.0 * (1.0 - t))) / 2.0;
  return plan_scheme(pair, d, target_rate, n, epsilon, mode);
}

}  // namespace quadsig
