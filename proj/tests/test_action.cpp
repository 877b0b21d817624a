#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gapsol;

namespace {

const PotentialSpec kMidgap = CellFunction::cosine_series(-9.857, {{2.0, {1, 0}}});

ActionContext constant_context(double c, int k, int n, double h = 1.0) {
  return make_context(CellFunction::constant(c), NonlinearitySpec::kerr(CellFunction::constant(h)), Sign::plus,
                      make_grid(1, k, n));
}

}  // namespace

TEST(Action, ConstantFieldEnergyClosedForm) {
  const auto ctx = constant_context(1.5, 4, 8, 2.0);
  const double a = 0.7;
  const auto u = PeriodicField::constant(ctx.grid, a);
  const double expect = 4.0 * (0.5 * 1.5 * a * a - 2.0 * std::pow(a, 4) / 4.0);
  EXPECT_NEAR(energy(ctx, u), expect, 1e-13);
  EXPECT_NEAR(energy_split(ctx, u), expect, 1e-12);
  EXPECT_NEAR(oriented_energy(ctx, u), expect, 1e-13);
}

TEST(Action, ConstantCriticalPoint) {
  // a^2 = c/h solves c a = h a^3: on the manifold with value k c^2 / (4h).
  const double c = 1.5, h = 2.0;
  const auto ctx = constant_context(c, 4, 8, h);
  const auto u = PeriodicField::constant(ctx.grid, std::sqrt(c / h));
  EXPECT_LT(gradient(ctx, u).sup_norm(), 1e-14);
  const auto res = nehari_residual(ctx, u);
  EXPECT_LT(res.norm, 1e-13);
  const auto id = nehari_value_identity(ctx, u);
  EXPECT_FALSE(id.zero_field);
  EXPECT_NEAR(id.value, 4.0 * c * c / (4 * h), 1e-13);
  EXPECT_NEAR(id.value, energy(ctx, u), 1e-13);
}

TEST(Action, ValueIdentityRefusesOffManifold) {
  const auto ctx = constant_context(1.0, 2, 8);
  try {
    nehari_value_identity(ctx, PeriodicField::constant(ctx.grid, 0.3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OffManifold);
  }
  EXPECT_TRUE(nehari_value_identity(ctx, PeriodicField(ctx.grid)).zero_field);
}

TEST(Action, GradientAndHessianAgainstDifferences) {
  std::mt19937_64 rng(17);
  const auto ctx = make_context(kMidgap, NonlinearitySpec::kerr(CellFunction::constant(1.0)), Sign::plus,
                                make_grid(1, 4, 8));
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = oracle::random_field(ctx.grid, rng, 4, 6);
    const auto w = oracle::random_field(ctx.grid, rng, 4, 6);
    const double t = 1e-5;
    const double fd = (energy(ctx, u + t * w) - energy(ctx, u - t * w)) / (2 * t);
    EXPECT_NEAR(inner(gradient(ctx, u), w), fd, 1e-6 * (1 + std::abs(fd)));
    const auto hfd = (1.0 / (2 * t)) * (gradient(ctx, u + t * w) - gradient(ctx, u - t * w));
    EXPECT_LT(l2_norm(hessian_apply(ctx, u, w) - hfd), 1e-6 * (1 + l2_norm(hfd)));
  }
}

TEST(Action, EnergyRoutesAgree) {
  std::mt19937_64 rng(23);
  const auto ctx = make_context(kMidgap, NonlinearitySpec::kerr(CellFunction::constant(1.0)), Sign::plus,
                                make_grid(1, 8, 8));
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = oracle::random_field(ctx.grid, rng);
    EXPECT_NEAR(energy(ctx, u), energy_split(ctx, u), 1e-9 * (1 + std::abs(energy(ctx, u))));
  }
}

TEST(Action, EnergyDifferenceMatchesDirectDifference) {
  std::mt19937_64 rng(29);
  for (Sign s : {Sign::plus, Sign::minus}) {
    const auto ctx = make_context(kMidgap, NonlinearitySpec::kerr(CellFunction::constant(1.0)), s,
                                  make_grid(1, 4, 8));
    for (int trial = 0; trial < 5; ++trial) {
      const auto u = oracle::random_field(ctx.grid, rng);
      const auto t = u + 0.1 * oracle::random_field(ctx.grid, rng);
      const double direct = oriented_energy(ctx, t) - oriented_energy(ctx, u);
      EXPECT_NEAR(oriented_energy_difference(ctx, u, t), direct, 1e-10 * (1 + std::abs(oriented_energy(ctx, u))));
    }
  }
}

TEST(Action, OrientationFlipsSigns) {
  std::mt19937_64 rng(31);
  const auto plus = make_context(kMidgap, NonlinearitySpec::kerr(CellFunction::constant(1.0)), Sign::plus,
                                 make_grid(1, 4, 8));
  const auto minus = make_context(kMidgap, NonlinearitySpec::kerr(CellFunction::constant(1.0)), Sign::minus,
                                  make_grid(1, 4, 8));
  const auto u = oracle::random_field(plus.grid, rng);
  // Phi_+ = Q - N and Phi_- = -(Q + N) with Q the quadratic form and N = int F.
  const double quad = 0.5 * inner(u, plus.dec().apply_operator(u));
  const double nl = integrate(eval_F(plus.nonlinearity, u));
  EXPECT_NEAR(oriented_energy(plus, u) + oriented_energy(minus, u), -2 * nl, 1e-10 * (1 + nl));
  EXPECT_NEAR(oriented_energy(plus, u) - oriented_energy(minus, u), 2 * quad, 1e-10 * (1 + std::abs(quad)));
  const auto r = oracle::random_field(plus.grid, rng);
  EXPECT_LT(l2_norm(constrained_part(plus, r) + constrained_part(minus, r) - r), 1e-12 * l2_norm(r));
}

TEST(Action, DualNormOfRieszImage) {
  std::mt19937_64 rng(37);
  const auto ctx = make_context(kMidgap, NonlinearitySpec::kerr(CellFunction::constant(1.0)), Sign::plus,
                                make_grid(1, 4, 8));
  const auto u = oracle::random_field(ctx.grid, rng);
  const auto [np, nm] = split_norm(ctx.dec(), u);
  EXPECT_NEAR(dual_norm(ctx, ctx.dec().abs_operator(u)), std::hypot(np, nm), 1e-10 * std::hypot(np, nm));
}

TEST(Action, ContextRefusals) {
  const auto f = NonlinearitySpec::kerr(CellFunction::constant(1.0));
  try {
    make_context(CellFunction::constant(1.0), f, Sign::minus, make_grid(1, 2, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SignIllegal);
  }
  try {
    make_context(CellFunction::constant(-1.0), f, Sign::plus, make_grid(1, 2, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GapContainsZero);
  }
  try {
    make_context(CellFunction::constant(1.0), NonlinearitySpec::kerr(CellFunction::constant(-1.0)), Sign::plus,
                 make_grid(1, 2, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AssumptionViolated);
  }
}
