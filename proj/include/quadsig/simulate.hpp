#pragma once

// Monte Carlo estimation of Pr{maybe} and Pr{d(X, Y) <= D}, admissibility
// audits, exponent fitting and the per-n experiment driver.
//
// Trials are split into fixed-size shards. Shard k draws from a generator
// seeded with derive_seed(seed, k), so results depend only on (seed, trials,
// shard size) and not on the number of threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "quadsig/analysis.hpp"
#include "quadsig/covering.hpp"
#include "quadsig/errors.hpp"
#include "quadsig/geometry.hpp"
#include "quadsig/random.hpp"
#include "quadsig/random_code.hpp"
#include "quadsig/scheme.hpp"

namespace quadsig {

enum class Family { gaussian, uniform, laplace };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::uniform: return "uniform";
    case Family::laplace: return "laplace";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "uniform") return Family::uniform;
  if (s == "laplace") return Family::laplace;
  throw std::invalid_argument("unknown distribution '" + s + "'");
}

struct SourceSpec {
  Family family = Family::gaussian;
  double variance = 1.0;

  void validate() const {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
      throw std::invalid_argument("SourceSpec: variance must be finite and positive");
    }
  }
};

inline void sample_source(const SourceSpec& spec, std::span<double> out, Rng& rng) {
  switch (spec.family) {
    case Family::gaussian: {
      std::normal_distribution<double> g(0.0, std::sqrt(spec.variance));
      for (double& v : out) v = g(rng);
      break;
    }
    case Family::uniform: {
      const double a = std::sqrt(3.0 * spec.variance);
      std::uniform_real_distribution<double> u(-a, a);
      for (double& v : out) v = u(rng);
      break;
    }
    case Family::laplace: {
      // Difference of two exponentials with scale b is Laplace(0, b).
      const double b = std::sqrt(spec.variance / 2.0);
      std::exponential_distribution<double> e(1.0 / b);
      for (double& v : out) v = e(rng) - e(rng);
      break;
    }
  }
}

inline std::pair<Vector, Vector> sample_pair(const SourceSpec& spec_x, const SourceSpec& spec_y,
                                             int n, Rng& rng) {
  Vector x(static_cast<std::size_t>(n));
  Vector y(static_cast<std::size_t>(n));
  sample_source(spec_x, x, rng);
  sample_source(spec_y, y, rng);
  return {std::move(x), std::move(y)};
}

struct TrialEstimate {
  double p_hat = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t false_negative_count = 0;
};

inline constexpr double kWilsonZ = 1.959963984540054;

/// Estimate with a 95% Wilson interval; a zero count gets the rule-of-three
/// upper bound 3/trials.
inline TrialEstimate make_estimate(std::uint64_t hits, std::uint64_t trials,
                                   std::uint64_t false_negatives = 0) {
  if (trials == 0) throw std::invalid_argument("make_estimate: trials must be >= 1");
  TrialEstimate e;
  e.trials = trials;
  e.hits = hits;
  e.false_negative_count = false_negatives;
  const double t = static_cast<double>(trials);
  e.p_hat = static_cast<double>(hits) / t;
  if (hits == 0) {
    e.ci_low = 0.0;
    e.ci_high = std::min(1.0, 3.0 / t);
    return e;
  }
  const double z2 = kWilsonZ * kWilsonZ;
  const double center = (e.p_hat + z2 / (2.0 * t)) / (1.0 + z2 / t);
  const double half =
      kWilsonZ * std::sqrt(e.p_hat * (1.0 - e.p_hat) / t + z2 / (4.0 * t * t)) / (1.0 + z2 / t);
  e.ci_low = std::clamp(center - half, 0.0, e.p_hat);
  e.ci_high = std::clamp(center + half, e.p_hat, 1.0);
  return e;
}

struct ShardOptions {
  std::uint64_t shard_size = 1u << 16;
  // 0 means QUADSIG_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QUADSIG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) hw = std::min(hw, static_cast<unsigned>(v));
  }
  return hw;
}

struct Counts {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  std::uint64_t false_negatives = 0;

  Counts& operator+=(const Counts& o) {
    hits += o.hits;
    trials += o.trials;
    false_negatives += o.false_negatives;
    return *this;
  }
};

namespace detail {

// Runs body(count, rng) on every shard and sums the results.
inline Counts run_shards(std::uint64_t trials, std::uint64_t seed, const ShardOptions& opt,
                         const std::function<Counts(std::uint64_t, Rng&)>& body) {
  if (opt.shard_size == 0) throw std::invalid_argument("shard_size must be >= 1");
  const std::uint64_t shards = (trials + opt.shard_size - 1) / opt.shard_size;
  std::vector<Counts> out(shards);
  auto work = [&](std::uint64_t k) {
    const std::uint64_t count = std::min(opt.shard_size, trials - k * opt.shard_size);
    Rng rng(derive_seed(seed, k));
    out[k] = body(count, rng);
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(opt.threads), shards));
  if (threads <= 1) {
    for (std::uint64_t k = 0; k < shards; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::uint64_t k = t; k < shards; k += threads) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  Counts total;
  for (const auto& c : out) total += c;
  return total;
}

}  // namespace detail

/// Pr{g(T(X), Y) = maybe} for independent X, Y. Every sampled pair with
/// d(X, Y) <= D that is answered No counts as a false negative.
template <class Quantizer>
TrialEstimate estimate_maybe_probability(const SchemeConfig& config, const Quantizer& quantizer,
                                         const SourceSpec& spec_x, const SourceSpec& spec_y,
                                         std::uint64_t trials, std::uint64_t seed,
                                         const ShardOptions& opt = {}) {
  config.validate();
  spec_x.validate();
  spec_y.validate();
  if (trials < 1) throw std::invalid_argument("estimate_maybe_probability: trials must be >= 1");
  const int n = config.n;
  const double nd = n * config.d;
  const Counts c = detail::run_shards(trials, seed, opt, [&](std::uint64_t count, Rng& rng) {
    Counts local;
    Vector x(n), y(n), axis(n);
    for (std::uint64_t t = 0; t < count; ++t) {
      sample_source(spec_x, x, rng);
      sample_source(spec_y, y, rng);
      Verdict v = Verdict::Maybe;
      if (const auto shell = shell_index(config, x)) {
        if (quantizer(x, axis, rng)) v = query_cell(config, axis, *shell, y);
      }
      ++local.trials;
      if (v == Verdict::Maybe) ++local.hits;
      if (v == Verdict::No && squared_distance(x, y) <= nd) ++local.false_negatives;
    }
    return local;
  });
  return make_estimate(c.hits, c.trials, c.false_negatives);
}

inline TrialEstimate estimate_maybe_probability(const SchemeConfig& config, const CoveringCode& code,
                                                const SourceSpec& spec_x, const SourceSpec& spec_y,
                                                std::uint64_t trials, std::uint64_t seed,
                                                const ShardOptions& opt = {}) {
  detail::check_code(config, code);
  return estimate_maybe_probability(config, ExplicitQuantizer(code), spec_x, spec_y, trials, seed,
                                    opt);
}

/// Plain Monte Carlo of Pr{|X - Y|^2 / n <= d}.
inline TrialEstimate estimate_similarity_probability(const SourceSpec& spec_x,
                                                     const SourceSpec& spec_y, double d, int n,
                                                     std::uint64_t trials, std::uint64_t seed,
                                                     const ShardOptions& opt = {}) {
  spec_x.validate();
  spec_y.validate();
  if (n < 1) throw std::invalid_argument("estimate_similarity_probability: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("estimate_similarity_probability: trials must be >= 1");
  const double nd = n * d;
  const Counts c = detail::run_shards(trials, seed, opt, [&](std::uint64_t count, Rng& rng) {
    Counts local;
    Vector x(n), y(n);
    for (std::uint64_t t = 0; t < count; ++t) {
      sample_source(spec_x, x, rng);
      sample_source(spec_y, y, rng);
      ++local.trials;
      if (squared_distance(x, y) <= nd) ++local.hits;
    }
    return local;
  });
  return make_estimate(c.hits, c.trials);
}

struct AuditResult {
  std::uint64_t similar_pairs = 0;    // pairs with d(x, y) <= D, all checked
  std::uint64_t boundary_pairs = 0;   // of which within 1e-9 of the threshold
  std::uint64_t false_negatives = 0;
};

/// Admissibility audit with D-similar pairs built around sampled x:
/// y uniform in the sqrt(nD)-ball, y on random directions at
/// sqrt(nD)(1 -+ 1e-9), and y pushed straight away from the cell axis or
/// along x at the same distances. Stops once `min_similar` similar pairs
/// have been checked.
template <class Quantizer>
AuditResult audit_admissibility(const SchemeConfig& config, const Quantizer& quantizer,
                                const SourceSpec& spec_x, std::uint64_t min_similar,
                                std::uint64_t seed) {
  config.validate();
  spec_x.validate();
  const int n = config.n;
  const double radius = std::sqrt(n * config.d);
  const double nd = n * config.d;
  Rng rng(derive_seed(seed, 0xa0d17));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vector x(n), y(n), axis(n), dir(n), away(n);
  AuditResult res;

  auto check = [&](std::optional<std::size_t> shell, bool has_cell, double scale,
                   std::span<const double> direction) {
    for (int k = 0; k < n; ++k) y[k] = x[k] + scale * direction[k];
    if (squared_distance(x, y) > nd) return;
    ++res.similar_pairs;
    if (std::abs(scale - radius) <= 2e-9 * radius) ++res.boundary_pairs;
    Verdict v = Verdict::Maybe;
    if (shell && has_cell) v = query_cell(config, axis, *shell, y);
    if (v == Verdict::No) ++res.false_negatives;
  };

  const double inner = radius * (1.0 - 1e-9);
  const double outer = radius * (1.0 + 1e-9);
  while (res.similar_pairs < min_similar) {
    sample_source(spec_x, x, rng);
    const auto shell = shell_index(config, x);
    const bool has_cell = shell && quantizer(x, axis, rng);

    sample_unit_sphere(dir, rng);
    check(shell, has_cell, radius * std::pow(uni(rng), 1.0 / n), dir);
    sample_unit_sphere(dir, rng);
    check(shell, has_cell, inner, dir);
    check(shell, has_cell, outer, dir);

    const double nx = norm(x);
    if (nx > 0.0) {
      for (int k = 0; k < n; ++k) away[k] = x[k] / nx;
      check(shell, has_cell, inner, away);
      for (double& v : away) v = -v;
      check(shell, has_cell, inner, away);
    }
    if (has_cell) {
      const double na = norm(axis);
      for (int k = 0; k < n; ++k) away[k] = -axis[k] / na;
      check(shell, has_cell, inner, away);
    }
  }
  return res;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Least-squares slope of -log2 p_hat against n over the points with
/// p_hat > 0.
inline ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> used;
  for (const auto& [n, p] : points) {
    if (p > 0.0) used.emplace_back(n, p);
  }
  if (used.empty() && !points.empty()) {
    throw degenerate_input("fit_exponent: every p_hat is zero; the estimates are below the "
                           "resolution floor 1/trials");
  }
  if (used.size() < 2) throw std::invalid_argument("fit_exponent: need at least 2 points with p_hat > 0");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [n, p] : used) {
    const double v = -std::log2(p);
    sx += n;
    sy += v;
    sxx += n * n;
    sxy += n * v;
  }
  const double m = static_cast<double>(used.size());
  const double den = m * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw std::invalid_argument("fit_exponent: all n are equal");
  ExponentFit fit;
  fit.slope = (m * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.points = used;
  return fit;
}

/// Natural log of the Chernoff bound e^(-n^2/4) 2^(n/2) on
/// Pr{|X|^2 > n sigma_max2} with sigma_max2 = n sigma2.
inline double log_chisq_tail_chernoff(int n, double sigma2) {
  if (n < 1) throw std::invalid_argument("chisq_tail_chernoff: n must be >= 1");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("chisq_tail_chernoff: sigma2 must be > 0");
  const double nn = static_cast<double>(n);
  return -nn * nn / 4.0 + nn / 2.0 * std::numbers::ln2;
}

inline double chisq_tail_chernoff(int n, double sigma2) {
  return std::exp(log_chisq_tail_chernoff(n, sigma2));
}

enum class Codebook { automatic, explicit_code, ensemble };

inline std::string to_string(Codebook c) {
  switch (c) {
    case Codebook::automatic: return "auto";
    case Codebook::explicit_code: return "explicit";
    case Codebook::ensemble: return "ensemble";
  }
  return "?";
}

inline Codebook parse_codebook(const std::string& s) {
  if (s == "auto") return Codebook::automatic;
  if (s == "explicit") return Codebook::explicit_code;
  if (s == "ensemble") return Codebook::ensemble;
  throw std::invalid_argument("unknown codebook '" + s + "'");
}

struct ExperimentSpec {
  std::string experiment_id = "simulate";
  GaussianPair pair{1.0, 1.0};
  double d = 1.5;
  double target_rate = 3.0;
  std::vector<int> n_list{8, 16, 32, 64};
  SourceSpec spec_x{};
  SourceSpec spec_y{};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  Mode mode = Mode::basic;
  Codebook codebook = Codebook::automatic;
  // Explicit codes are used under `automatic` only when the cap-fraction
  // lower bound on their size is at most this.
  double auto_explicit_limit = 256.0;
  std::size_t cover_audit_samples = 100000;
  ShardOptions shards{};
};

struct ExperimentRow {
  std::string experiment_id;
  int n = 0;
  double rate = 0.0;
  double d = 0.0;
  Family family_x = Family::gaussian;
  Family family_y = Family::gaussian;
  TrialEstimate estimate;
  std::uint64_t seed = 0;
  SchemeConfig config;
  std::string codebook;
};

/// plan_scheme_for_rate, then a code, then estimate_maybe_probability, per n.
inline std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
  spec.spec_x.validate();
  spec.spec_y.validate();
  if (spec.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  std::vector<ExperimentRow> rows;
  for (int n : spec.n_list) {
    const SchemeConfig cfg = plan_scheme_for_rate(spec.pair, spec.d, spec.target_rate, n, spec.mode);
    const std::uint64_t run_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(n));
    bool use_explicit = spec.codebook == Codebook::explicit_code;
    if (spec.codebook == Codebook::automatic) {
      use_explicit = 1.0 / cap_fraction_exact(cfg.theta0(), n) <= spec.auto_explicit_limit;
    }
    ExperimentRow row;
    row.experiment_id = spec.experiment_id;
    row.n = n;
    row.d = spec.d;
    row.family_x = spec.spec_x.family;
    row.family_y = spec.spec_y.family;
    row.seed = spec.seed;
    row.config = cfg;
    if (use_explicit) {
      const CoveringCode code =
          build_covering(n, cfg.sigma_x2, cfg.d0, run_seed, spec.cover_audit_samples);
      row.rate = rate_of(cfg, code);
      row.estimate = estimate_maybe_probability(cfg, code, spec.spec_x, spec.spec_y, spec.trials,
                                                run_seed, spec.shards);
      row.codebook = "explicit";
    } else {
      const RandomCodeEnsemble ens(n, cfg.sigma_x2, cfg.d0);
      row.rate = rate_of(cfg, ens.log2_size());
      row.estimate = estimate_maybe_probability(cfg, EnsembleQuantizer(ens), spec.spec_x,
                                                spec.spec_y, spec.trials, run_seed, spec.shards);
      row.codebook = "ensemble";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Gaussian-designed scheme run under non-Gaussian sources of matching
/// variance.
inline std::vector<TrialEstimate> robustness_experiment(const GaussianPair& pair, double d,
                                                        double target_rate,
                                                        const std::vector<int>& n_list,
                                                        const SourceSpec& spec_x,
                                                        const SourceSpec& spec_y,
                                                        std::uint64_t trials, std::uint64_t seed,
                                                        const ShardOptions& shards = {}) {
  if (std::abs(spec_x.variance - pair.sigma_x2) > 1e-12 * pair.sigma_x2 ||
      std::abs(spec_y.variance - pair.sigma_y2) > 1e-12 * pair.sigma_y2) {
    throw std::invalid_argument("robustness_experiment: source variances must match the pair");
  }
  ExperimentSpec spec;
  spec.experiment_id = "robustness";
  spec.pair = pair;
  spec.d = d;
  spec.target_rate = target_rate;
  spec.n_list = n_list;
  spec.spec_x = spec_x;
  spec.spec_y = spec_y;
  spec.trials = trials;
  spec.seed = seed;
  spec.shards = shards;
  std::vector<TrialEstimate> out;
  for (const auto& row : run_experiment(spec)) out.push_back(row.estimate);
  return out;
}

// CSV output. Rates and d use six decimals; probabilities keep ten
// significant digits so that small estimates survive a round trip.

inline const char* kCsvHeader =
    "experiment_id,n,rate,d,family_x,family_y,trials,p_hat,ci_low,ci_high,false_negatives,seed";

inline std::string to_csv(const ExperimentRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%s,%s,%llu,%.10g,%.10g,%.10g,%llu,%llu",
                r.experiment_id.c_str(), r.n, r.rate, r.d, to_string(r.family_x).c_str(),
                to_string(r.family_y).c_str(), static_cast<unsigned long long>(r.estimate.trials),
                r.estimate.p_hat, r.estimate.ci_low, r.estimate.ci_high,
                static_cast<unsigned long long>(r.estimate.false_negative_count),
                static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace quadsig
