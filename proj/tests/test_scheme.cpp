#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "quadsig/scheme.hpp"
#include "quadsig/simulate.hpp"
#include "support/oracles.hpp"

using namespace quadsig;

namespace {

CoveringCode small_code(int n = 6, double d0 = 0.5, std::uint64_t seed = 4) {
  return build_covering(n, 1.0, d0, seed, 20000);
}

SchemeConfig basic_config(int n, double d0, double eta = 0.2, double d = 1.5) {
  return SchemeConfig{n, d, 1.0, eta, Mode::basic, n * 1.0, d0};
}

Vector gaussian(int n, Rng& rng) {
  Vector v(n);
  fill_gaussian(v, rng);
  return v;
}

}  // namespace

TEST(RateOf, Arithmetic) {
  SchemeConfig basic{4, 1.5, 1.0, 0.1, Mode::basic, 4.0, 0.5};
  EXPECT_NEAR(rate_of(basic, std::log2(15.0)), 1.0, 1e-14);
  SchemeConfig sg{4, 1.5, 1.0, 1.0, Mode::shape_gain, 17.0, 0.5};
  EXPECT_EQ(sg.num_shells(), 17u);
  EXPECT_NEAR(rate_of(sg, std::log2(15.0)), 2.0, 1e-14);
}

TEST(RateOf, HugeCodesDoNotOverflow) {
  SchemeConfig basic{64, 1.5, 1.0, 0.1, Mode::basic, 64.0, 0.5};
  EXPECT_NEAR(rate_of(basic, 2000.0), 2000.0 / 64, 1e-12);
}

TEST(RateOf, DecreasesAsD0Grows) {
  double prev = INFINITY;
  for (double d0 : {0.3, 0.5, 0.7}) {
    const auto code = small_code(6, d0);
    const double r = rate_of(basic_config(6, d0), code);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(AssignSignature, CenterDirectionMapsToItsCell) {
  const auto code = small_code();
  const auto cfg = basic_config(6, 0.5);
  for (std::size_t i = 0; i < code.size(); i += 7) {
    Vector x(code.center(i).begin(), code.center(i).end());
    const double s = std::sqrt(6.0) / norm(x);
    for (double& v : x) v *= s;
    const auto sig = assign_signature(cfg, code, x);
    ASSERT_TRUE(std::holds_alternative<Cell>(sig));
    EXPECT_EQ(std::get<Cell>(sig).center_index, i);
    EXPECT_EQ(std::get<Cell>(sig).shell_index, 0u);
  }
}

TEST(AssignSignature, AtypicalNormIsErased) {
  const auto code = small_code();
  const auto cfg = basic_config(6, 0.5, 0.1);
  Vector x(6, 0.0);
  x[0] = std::sqrt(2.0 * 6);
  EXPECT_TRUE(is_erasure(assign_signature(cfg, code, x)));
  x[0] = std::sqrt(0.5 * 6);
  EXPECT_TRUE(is_erasure(assign_signature(cfg, code, x)));
  EXPECT_THROW(assign_signature(cfg, code, Vector(5, 1.0)), std::invalid_argument);
}

TEST(AssignSignature, CoveringGapIsErased) {
  // A single-center code leaves most of the sphere uncovered.
  CoveringCode code{4, 1.0, 0.3, 0, Vector(4, 0.0)};
  code.centers[0] = code.center_radius();
  const auto cfg = basic_config(4, 0.3);
  EXPECT_TRUE(is_erasure(assign_signature(cfg, code, Vector{-2, 0, 0, 0})));
  EXPECT_FALSE(is_erasure(assign_signature(cfg, code, Vector{2, 0, 0, 0})));
}

TEST(AssignSignature, ShapeGainShells) {
  const auto code = small_code();
  SchemeConfig cfg{6, 1.5, 1.0, 0.25, Mode::shape_gain, 6.0, 0.5};
  EXPECT_EQ(cfg.num_shells(), 24u);
  Vector x(code.center(0).begin(), code.center(0).end());
  const double base = norm(x);
  for (double target : {0.1, 0.3, 1.1, 5.9}) {
    Vector y = x;
    for (double& v : y) v *= std::sqrt(6 * target) / base;
    const auto sig = assign_signature(cfg, code, y);
    ASSERT_TRUE(std::holds_alternative<Cell>(sig));
    const auto shell = std::get<Cell>(sig).shell_index;
    EXPECT_EQ(shell, static_cast<std::size_t>(std::floor(target / 0.25)));
    const auto [r1, r2] = cfg.shell_radii(shell);
    EXPECT_LE(r1, norm(y));
    EXPECT_GE(r2, norm(y));
  }
  Vector far = x;
  for (double& v : far) v *= std::sqrt(6 * 6.5) / base;
  EXPECT_TRUE(is_erasure(assign_signature(cfg, code, far)));
}

TEST(AssignSignature, CellCapContainsInput) {
  const auto code = small_code();
  Rng rng(8);
  for (Mode mode : {Mode::basic, Mode::shape_gain}) {
    SchemeConfig cfg{6, 1.5, 1.0, 0.3, mode, 6.0, 0.5};
    int cells = 0;
    for (int t = 0; t < 3000; ++t) {
      const Vector x = gaussian(6, rng);
      const auto sig = assign_signature(cfg, code, x);
      if (const auto* c = std::get_if<Cell>(&sig)) {
        ++cells;
        const auto [r1, r2] = cfg.shell_radii(c->shell_index);
        const auto center = code.center(c->center_index);
        CapSpec cap{Vector(center.begin(), center.end()), cfg.theta0(), r1, r2};
        EXPECT_TRUE(in_thick_cap(x, cap));
      }
    }
    EXPECT_GT(cells, 500);
  }
}

TEST(Query, SelfIsAlwaysMaybe) {
  const auto code = small_code();
  Rng rng(2);
  for (Mode mode : {Mode::basic, Mode::shape_gain}) {
    SchemeConfig cfg{6, 0.01, 1.0, 0.3, mode, 6.0, 0.5};
    for (int t = 0; t < 2000; ++t) {
      const Vector x = gaussian(6, rng);
      EXPECT_EQ(query(cfg, code, assign_signature(cfg, code, x), x), Verdict::Maybe);
    }
  }
}

TEST(Query, ThresholdOnTheAxis) {
  const auto code = small_code();
  const auto cfg = basic_config(6, 0.5);
  const Cell cell{0, 0};
  const auto u = code.center(0);
  const double un = norm(u);
  const double r2 = cfg.shell_radii(0).second;
  const double reach = std::sqrt(6 * cfg.d);
  auto at = [&](double s) {
    Vector y(u.begin(), u.end());
    for (double& v : y) v *= s / un;
    return y;
  };
  EXPECT_EQ(query(cfg, code, cell, at(r2 + reach * (1 + 1e-9))), Verdict::No);
  EXPECT_EQ(query(cfg, code, cell, at(r2 + reach * (1 - 1e-9))), Verdict::Maybe);
  EXPECT_EQ(query(cfg, code, Erasure{}, at(1e6)), Verdict::Maybe);
}

TEST(Query, ZeroVectorUsesInnerRadius) {
  const auto code = small_code();
  const auto cfg = basic_config(6, 0.5, 0.2, 0.1);
  const double r1 = cfg.shell_radii(0).first;
  EXPECT_EQ(query(cfg, code, Cell{0, 0}, Vector(6, 0.0)),
            r1 <= std::sqrt(6 * 0.1) ? Verdict::Maybe : Verdict::No);
}

TEST(Query, RejectsMismatchedInput) {
  const auto code = small_code();
  const auto cfg = basic_config(6, 0.5);
  EXPECT_THROW(query(cfg, code, Cell{0, 0}, Vector(5, 1.0)), std::invalid_argument);
  EXPECT_THROW(query(cfg, code, Cell{code.size(), 0}, Vector(6, 1.0)), std::invalid_argument);
  EXPECT_THROW(query(cfg, code, Cell{0, 1}, Vector(6, 1.0)), std::invalid_argument);
}

TEST(Query, NoVerdictsAreConfirmedByTheGridOracle) {
  const auto code = small_code();
  Rng rng(6);
  for (Mode mode : {Mode::basic, Mode::shape_gain}) {
    SchemeConfig cfg{6, 1.5, 1.0, 0.3, mode, 6.0, 0.5};
    int nos = 0;
    for (int t = 0; t < 400; ++t) {
      const Vector x = gaussian(6, rng);
      const Vector y = gaussian(6, rng);
      const auto sig = assign_signature(cfg, code, x);
      if (query(cfg, code, sig, y) != Verdict::No) continue;
      ++nos;
      const auto& c = std::get<Cell>(sig);
      const auto [r1, r2] = cfg.shell_radii(c.shell_index);
      const auto center = code.center(c.center_index);
      CapSpec cap{Vector(center.begin(), center.end()), cfg.theta0(), r1, r2};
      EXPECT_GT(oracle::grid_min_distance(y, cap, 200), std::sqrt(6 * cfg.d) - 1e-9);
    }
    EXPECT_GT(nos, 10);
  }
}

TEST(Query, MonotoneInD) {
  const auto code = small_code();
  Rng rng(12);
  for (int t = 0; t < 2000; ++t) {
    const Vector x = gaussian(6, rng);
    const Vector y = gaussian(6, rng);
    auto cfg = basic_config(6, 0.5, 0.3, 0.8);
    const auto sig = assign_signature(cfg, code, x);
    const Verdict a = query(cfg, code, sig, y);
    cfg.d = 1.6;
    if (a == Verdict::Maybe) {
      EXPECT_EQ(query(cfg, code, sig, y), Verdict::Maybe);
    }
  }
}

TEST(Admissibility, ExplicitCodeAudit) {
  const auto code = small_code(6, 0.5);
  for (Mode mode : {Mode::basic, Mode::shape_gain}) {
    SchemeConfig cfg{6, 1.5, 1.0, 0.3, mode, 6.0, 0.5};
    const auto res = audit_admissibility(cfg, ExplicitQuantizer(code), SourceSpec{}, 100000, 3);
    EXPECT_GE(res.similar_pairs, 100000u);
    EXPECT_GT(res.boundary_pairs, 50000u);
    EXPECT_EQ(res.false_negatives, 0u);
  }
}

TEST(PlanScheme, ReferenceExampleBracket) {
  const GaussianPair p{1, 1};
  const double eps = 0.05;
  const auto cfg = plan_scheme(p, 1.5, 2.5, 16, eps);
  const double ce = (0.25 - cfg.eta) / (1 + cfg.eta);
  EXPECT_GT(cfg.d0, (1 - eps) * ce * ce);
  EXPECT_LT(cfg.d0, ce * ce);
  EXPECT_GT(cfg.eta, 0.0);
  EXPECT_LE(cfg.eta, 0.25);
  // The shrunken-cosine condition holds at the chosen eta.
  EXPECT_GT(ce * ce, (1 - eps) * 0.0625);
  const auto cone = expansion_cone_angle(1.5, 1, 1, cfg.eta, cfg.theta0());
  EXPECT_TRUE(cone.below_right_angle);
  EXPECT_LE(0.5 * std::log2(1 / cfg.d0), 2.5 + 1e-12);
}

TEST(PlanScheme, SmallEpsilonApproachesTheIdRate) {
  const auto cfg = plan_scheme({1, 1}, 1.5, 2.001, 16, 1e-4);
  EXPECT_NEAR(cfg.d0, 0.0625, 1e-4);
  EXPECT_NEAR(0.5 * std::log2(1 / cfg.d0), 2.0, 1e-3);
}

TEST(PlanScheme, ForRateHitsTheTarget) {
  for (double r : {2.5, 3.0, 4.0}) {
    const auto cfg = plan_scheme_for_rate({1, 1}, 1.5, r, 32);
    const double predicted = 0.5 * std::log2(1 / cfg.d0);
    EXPECT_LE(predicted, r + 1e-12);
    EXPECT_GT(predicted, r - 1e-6);
  }
  const auto asym = plan_scheme_for_rate({1, 0.5}, 1.0, id_rate({1, 0.5}, 1.0).value() + 0.5, 16);
  EXPECT_NO_THROW(asym.validate());
}

TEST(PlanScheme, Refusals) {
  EXPECT_THROW(plan_scheme({1, 1}, 1.5, 2.0, 16, 0.1), precondition_failed);
  EXPECT_THROW(plan_scheme({1, 1}, 2.5, 9.0, 16, 0.1), precondition_failed);
  EXPECT_THROW(plan_scheme({1, 1}, 1.5, 2.01, 16, 0.5), precondition_failed);
  EXPECT_THROW(plan_scheme({1, 1}, 1.5, 3.0, 16, 1.5), std::invalid_argument);
  EXPECT_THROW(plan_scheme_for_rate({1, 1}, 1.5, 1.9, 16), precondition_failed);
}
