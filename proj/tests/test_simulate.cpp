#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "quadsig/simulate.hpp"

using namespace quadsig;

namespace {

double sample_variance(const SourceSpec& s, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(count);
  sample_source(s, v, rng);
  double m = 0.0, q = 0.0;
  for (double x : v) {
    m += x;
    q += x * x;
  }
  m /= count;
  return q / count - m * m;
}

}  // namespace

TEST(Sources, VarianceMatchesSpec) {
  for (Family f : {Family::gaussian, Family::uniform, Family::laplace}) {
    for (double var : {0.5, 2.0}) {
      EXPECT_NEAR(sample_variance({f, var}, 1000000, 3) / var, 1.0, 0.01) << to_string(f);
    }
  }
}

TEST(Sources, UniformSupport) {
  Rng rng(1);
  Vector v(100000);
  sample_source({Family::uniform, 2.0}, v, rng);
  const double a = std::sqrt(6.0);
  for (double x : v) {
    EXPECT_GE(x, -a);
    EXPECT_LE(x, a);
  }
}

TEST(Sources, SamplePairIsDeterministic) {
  Rng a(77), b(77);
  const auto p = sample_pair({Family::laplace, 1.0}, {Family::uniform, 1.0}, 16, a);
  const auto q = sample_pair({Family::laplace, 1.0}, {Family::uniform, 1.0}, 16, b);
  EXPECT_EQ(p.first, q.first);
  EXPECT_EQ(p.second, q.second);
  EXPECT_NE(p.first, p.second);
}

TEST(Sources, ParseNames) {
  EXPECT_EQ(parse_family("laplace"), Family::laplace);
  EXPECT_THROW(parse_family("cauchy"), std::invalid_argument);
  EXPECT_THROW((SourceSpec{Family::gaussian, 0.0}.validate()), std::invalid_argument);
}

TEST(Wilson, IntervalContainsEstimate) {
  for (std::uint64_t h : {1u, 10u, 500u, 999u, 1000u}) {
    const auto e = make_estimate(h, 1000);
    EXPECT_LE(e.ci_low, e.p_hat);
    EXPECT_GE(e.ci_high, e.p_hat);
    EXPECT_GE(e.ci_low, 0.0);
    EXPECT_LE(e.ci_high, 1.0);
  }
  const auto half = make_estimate(50, 100);
  EXPECT_NEAR(half.ci_low, 0.4038, 1e-4);
  EXPECT_NEAR(half.ci_high, 0.5962, 1e-4);
}

TEST(Wilson, ZeroCountUsesRuleOfThree) {
  const auto e = make_estimate(0, 3000);
  EXPECT_EQ(e.p_hat, 0.0);
  EXPECT_EQ(e.ci_low, 0.0);
  EXPECT_NEAR(e.ci_high, 1e-3, 1e-15);
  EXPECT_THROW(make_estimate(0, 0), std::invalid_argument);
}

TEST(Sharding, ResultDoesNotDependOnThreadCount) {
  ShardOptions one{1000, 1};
  ShardOptions three{1000, 3};
  const SourceSpec g{};
  const auto a = estimate_similarity_probability(g, g, 1.5, 16, 20500, 9, one);
  const auto b = estimate_similarity_probability(g, g, 1.5, 16, 20500, 9, three);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.trials, 20500u);
  const auto c = estimate_similarity_probability(g, g, 1.5, 16, 20500, 10, one);
  EXPECT_NE(a.hits, c.hits);
}

TEST(SimilarityProbability, Extremes) {
  const SourceSpec g{};
  EXPECT_EQ(estimate_similarity_probability(g, g, 0.0, 8, 10000, 1).p_hat, 0.0);
  EXPECT_EQ(estimate_similarity_probability(g, g, 100.0, 8, 10000, 1).p_hat, 1.0);
}

TEST(SimilarityProbability, DecreasesWithN) {
  const SourceSpec g{};
  const auto a = estimate_similarity_probability(g, g, 1.5, 16, 200000, 1);
  const auto b = estimate_similarity_probability(g, g, 1.5, 64, 200000, 1);
  EXPECT_GT(a.p_hat, b.p_hat);
}

TEST(FitExponent, ExactLogLinear) {
  std::vector<std::pair<double, double>> pts;
  for (double n : {8.0, 16.0, 32.0, 64.0}) pts.emplace_back(n, std::exp2(-0.1 * n));
  const auto f = fit_exponent(pts);
  EXPECT_NEAR(f.slope, 0.1, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-10);
}

TEST(FitExponent, NoisyPoints) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::pair<double, double>> pts;
  for (int n = 4; n <= 80; n += 4) pts.emplace_back(n, std::exp2(-0.1 * n + noise(rng)));
  EXPECT_NEAR(fit_exponent(pts).slope, 0.1, 0.005);
}

TEST(FitExponent, Errors) {
  EXPECT_THROW(fit_exponent({{8, 0.5}}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({{8, 0.0}, {16, 0.0}}), degenerate_input);
  EXPECT_THROW(fit_exponent({{8, 0.5}, {8, 0.25}}), std::invalid_argument);
  // Zero estimates are dropped.
  EXPECT_NEAR(fit_exponent({{8, 0.5}, {16, 0.25}, {32, 0.0}}).slope, 1.0 / 8, 1e-12);
}

TEST(Chernoff, SuperExponentialDecay) {
  double prev = log_chisq_tail_chernoff(2, 1.0);
  for (int n = 3; n <= 256; ++n) {
    const double v = log_chisq_tail_chernoff(n, 1.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double ratio = chisq_tail_chernoff(20, 1.0) / chisq_tail_chernoff(10, 1.0);
  EXPECT_NEAR(std::log(ratio), -(400.0 - 100.0) / 4 + 5 * std::log(2.0), 1e-9);
  EXPECT_EQ(chisq_tail_chernoff(256, 1.0), 0.0);
  EXPECT_TRUE(std::isfinite(log_chisq_tail_chernoff(256, 1.0)));
}

TEST(Chernoff, MonteCarloIsBelowTheBound) {
  // Pr{|X|^2 > n^2 sigma^2} at n = 8.
  const int n = 8;
  Rng rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uint64_t hits = 0;
  const std::uint64_t trials = 10'000'000;
  for (std::uint64_t t = 0; t < trials; ++t) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double v = g(rng);
      s += v * v;
    }
    hits += s > n * n;
  }
  EXPECT_LE(static_cast<double>(hits) / trials, chisq_tail_chernoff(n, 1.0));
}

TEST(Ensemble, MinimumAngleLawMatchesExplicitRandomCodes) {
  // M i.i.d. uniform centers: compare the sampled nearest-center angle with
  // the minimum over an explicitly drawn code.
  const int n = 5;
  const int m = 40;
  const RandomCodeEnsemble ens(n, 1.0, 0.6, std::log2(static_cast<double>(m)));
  Rng rng(3);
  const Vector x = sample_unit_sphere(n, rng);
  const int trials = 20000;
  std::vector<double> lazy, direct;
  for (int t = 0; t < trials; ++t) {
    const auto phi = ens.sample_angle(rng);
    lazy.push_back(phi ? *phi : INFINITY);
    double best = INFINITY;
    for (int k = 0; k < m; ++k) best = std::min(best, angle_between(sample_unit_sphere(n, rng), x));
    direct.push_back(best <= ens.theta0() ? best : INFINITY);
  }
  for (double q : {0.3, 0.45, 0.6, ens.theta0()}) {
    const double pa = std::count_if(lazy.begin(), lazy.end(), [&](double v) { return v <= q; }) / double(trials);
    const double pb = std::count_if(direct.begin(), direct.end(), [&](double v) { return v <= q; }) / double(trials);
    const double exact = 1.0 - std::pow(1.0 - cap_fraction_exact(q, n), m);
    const double se = std::sqrt(exact * (1 - exact) / trials) + 1e-12;
    EXPECT_NEAR(pa, exact, 4 * se) << "phi=" << q;
    EXPECT_NEAR(pb, exact, 4 * se) << "phi=" << q;
  }
}

TEST(Ensemble, CentersAreWithinTheta0OfTheInput) {
  const RandomCodeEnsemble ens(16, 1.0, 0.05);
  Rng rng(4);
  int cells = 0;
  for (int t = 0; t < 5000; ++t) {
    Vector x(16);
    fill_gaussian(x, rng);
    const auto u = ens.nearest_center(x, rng);
    if (!u) continue;
    ++cells;
    EXPECT_NEAR(norm(*u), 1.0, 1e-12);
    EXPECT_LE(angle_between(*u, x), ens.theta0());
  }
  // The default size leaves a negligible gap probability.
  EXPECT_EQ(cells, 5000);
}

TEST(Ensemble, DefaultSize) {
  const RandomCodeEnsemble ens(32, 1.0, 0.25);
  const double omega = cap_fraction_exact(ens.theta0(), 32);
  EXPECT_NEAR(ens.log2_size(), std::log2(32 * 5.0 / omega), 1e-6);
}

TEST(MaybeProbability, ZeroFalseNegativesAndTrendInN) {
  const GaussianPair pair{1, 1};
  const SourceSpec g{};
  double prev = 1.0;
  for (int n : {16, 64}) {
    const auto cfg = plan_scheme_for_rate(pair, 1.5, 3.0, n);
    const RandomCodeEnsemble ens(n, cfg.sigma_x2, cfg.d0);
    const auto e = estimate_maybe_probability(cfg, EnsembleQuantizer(ens), g, g, 50000, 2);
    EXPECT_EQ(e.false_negative_count, 0u);
    EXPECT_LT(e.p_hat, prev);
    prev = e.p_hat;
  }
}

TEST(MaybeProbability, TypicalSimilarityMeansMaybe) {
  // d above sigma_x2 + sigma_y2: almost every pair is similar.
  const SourceSpec g{};
  const auto code = build_covering(8, 1.0, 0.5, 1, 20000);
  const SchemeConfig cfg{8, 2.5, 1.0, 0.3, Mode::shape_gain, 8.0, 0.5};
  const auto e = estimate_maybe_probability(cfg, code, g, g, 20000, 1);
  EXPECT_GT(e.p_hat, 0.8);
  EXPECT_EQ(e.false_negative_count, 0u);
}

TEST(MaybeProbability, RejectsZeroTrials) {
  const SourceSpec g{};
  const SchemeConfig cfg{8, 1.5, 1.0, 0.3, Mode::basic, 8.0, 0.5};
  const RandomCodeEnsemble ens(8, 1.0, 0.5);
  EXPECT_THROW(estimate_maybe_probability(cfg, EnsembleQuantizer(ens), g, g, 0, 1),
               std::invalid_argument);
}

TEST(Robustness, VarianceMismatchIsRejected) {
  EXPECT_THROW(robustness_experiment({1, 1}, 1.5, 2.5, {16}, {Family::uniform, 2.0},
                                     {Family::uniform, 1.0}, 100, 1),
               std::invalid_argument);
}

TEST(Robustness, NonGaussianRunsStayAdmissible) {
  const auto est = robustness_experiment({1, 1}, 1.5, 2.5, {16, 64}, {Family::laplace, 1.0},
                                         {Family::laplace, 1.0}, 40000, 5);
  ASSERT_EQ(est.size(), 2u);
  for (const auto& e : est) EXPECT_EQ(e.false_negative_count, 0u);
  EXPECT_GT(est[0].p_hat, est[1].p_hat);
}

TEST(Csv, RowFormat) {
  ExperimentRow r;
  r.experiment_id = "x";
  r.n = 16;
  r.rate = 2.5;
  r.d = 1.5;
  r.family_x = Family::uniform;
  r.family_y = Family::laplace;
  r.estimate = make_estimate(25, 100);
  r.seed = 7;
  const std::string s = to_csv(r);
  EXPECT_EQ(s.rfind("x,16,2.500000,1.500000,uniform,laplace,100,0.25,", 0), 0u);
  EXPECT_EQ(s.substr(s.size() - 4), ",0,7");
}
