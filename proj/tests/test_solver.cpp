#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gapsol;

namespace {

const PotentialSpec kMidgap = CellFunction::cosine_series(-9.857, {{2.0, {1, 0}}});
const NonlinearitySpec kKerr = NonlinearitySpec::kerr(CellFunction::constant(1.0));

double wrap(double d, int k) { return d - k * std::round(d / k); }

// Smallest sup distance to the line soliton over sub-node shifts of its centre.
double profile_error(const PeriodicField& u) {
  const GridSpec& g = u.grid();
  Eigen::Index imax = 0;
  u.values().cwiseAbs().maxCoeff(&imax);
  const double x0 = centered_coordinate(g, static_cast<std::size_t>(imax))[0];
  const double sign = u[static_cast<std::size_t>(imax)] > 0 ? 1.0 : -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int s = -200; s <= 200; ++s) {
    const double c = x0 + g.spacing() * s / 200.0;
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(u[i] - sign * oracle::soliton(wrap(centered_coordinate(g, i)[0] - c, g.k), 1.0)));
    best = std::min(best, err);
  }
  return best;
}

}  // namespace

TEST(Solver, ConfigValidation) {
  SolveConfig c;
  c.newton_tol = -1;
  EXPECT_THROW(c.validate(), Error);
  c = SolveConfig{};
  c.restarts = -1;
  EXPECT_THROW(c.validate(), Error);
  c = SolveConfig{};
  c.descent_max_iter = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(SolveConfig{}.validate());
}

TEST(Solver, LinkingSeedRaysToManifold) {
  for (Sign s : {Sign::plus, Sign::minus}) {
    const auto ctx = make_context(kMidgap, kKerr, s, make_grid(1, 8, 8));
    const auto seed = linking_seed(ctx);
    EXPECT_EQ(seed_orientation(seed.values()), 1.0);
    // Ray maximum: <Phi'(t z), t z> vanishes.
    EXPECT_LT(std::abs(inner(oriented_gradient(ctx, seed), seed)), 1e-8 * (1 + std::pow(l2_norm(seed), 2)));
  }
}

TEST(Solver, ProjectionLandsOnManifold) {
  std::mt19937_64 rng(41);
  for (Sign s : {Sign::plus, Sign::minus}) {
    const auto ctx = make_context(kMidgap, kKerr, s, make_grid(1, 8, 8));
    const auto seed = linking_seed(ctx);
    for (int trial = 0; trial < 3; ++trial) {
      const auto start = seed + 0.1 * oracle::random_field(ctx.grid, rng, 8, 8, l2_norm(seed) / std::sqrt(8.0));
      const auto u = project_to_manifold(ctx, start);
      const auto res = nehari_residual(ctx, u);
      EXPECT_LT(res.norm, 1e-10) << to_string(s);
      EXPECT_GT(oriented_energy(ctx, u), 0.0);
    }
  }
}

TEST(Solver, ProjectionRejectsZero) {
  const auto ctx = make_context(kMidgap, kKerr, Sign::plus, make_grid(1, 4, 8));
  try {
    project_to_manifold(ctx, PeriodicField(ctx.grid));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CollapsedToZero);
  }
}

TEST(Solver, LineSolitonOnConstantPotential) {
  const auto ctx = make_context(CellFunction::constant(1.0), kKerr, Sign::plus, make_grid(1, 32, 16));
  const auto r = minimize_ground_state(ctx);
  ASSERT_TRUE(r.converged) << r.status;
  EXPECT_NEAR(r.value, oracle::soliton_value(1.0), 1e-3);
  EXPECT_NEAR(r.sup_norm, std::sqrt(2.0), 2e-3);
  EXPECT_NEAR(r.h1_norm, std::sqrt(oracle::soliton_h1_squared(1.0)), 2e-3);
  EXPECT_LT(profile_error(r.u), 5e-3);
  EXPECT_LT(r.pde_residual_l2, 1e-6 * r.h1_norm);
  for (double d : r.decrements) EXPECT_LT(d, 0.0);
  EXPECT_LT(r.max_manifold_residual, 1e-9);
  const auto rep = verify_critical_point(ctx, r);
  EXPECT_TRUE(rep.passed());
  EXPECT_LT(rep.identity_error, 1e-8);
}

TEST(Solver, ScaledCouplingScalesSoliton) {
  // Coupling g: u = g^{-1/2} u_1, value (4/3) / g.
  const auto ctx = make_context(CellFunction::constant(1.0), NonlinearitySpec::kerr(CellFunction::constant(2.0)),
                                Sign::plus, make_grid(1, 32, 8));
  const auto r = minimize_ground_state(ctx);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value, oracle::soliton_value(1.0, 2.0), 1e-3);
  EXPECT_NEAR(r.sup_norm, 1.0, 2e-3);
}

TEST(Solver, DeterministicForFixedSeed) {
  const auto ctx = make_context(kMidgap, kKerr, Sign::plus, make_grid(1, 16, 8));
  SolveConfig cfg;
  cfg.seed = 7;
  const auto a = minimize_ground_state(ctx, cfg);
  const auto b = minimize_ground_state(ctx, cfg);
  EXPECT_EQ(a.u.values(), b.u.values());
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.restart_index, b.restart_index);
  EXPECT_EQ(a.seed, 7u);
}

TEST(Solver, GapSolitonFocusing) {
  const auto ctx = make_context(kMidgap, kKerr, Sign::plus, make_grid(1, 32, 8));
  const auto r = minimize_ground_state(ctx);
  ASSERT_TRUE(r.converged) << r.status;
  EXPECT_GT(r.value, 0.0);
  EXPECT_LT(r.pde_residual_l2, 1e-6 * r.h1_norm);
  const auto rep = verify_critical_point(ctx, r);
  EXPECT_NEAR(rep.identity_value, r.value, 1e-8 * std::max(1.0, r.value));
  EXPECT_TRUE(std::isfinite(rep.bound_ratio));
  EXPECT_GT(r.sup_norm, 0.1);
}

TEST(Solver, GapSolitonDefocusing) {
  const auto ctx = make_context(kMidgap, kKerr, Sign::minus, make_grid(1, 32, 8));
  const auto r = minimize_ground_state(ctx);
  ASSERT_TRUE(r.converged) << r.status;
  EXPECT_GT(r.value, 0.0);
  EXPECT_TRUE(verify_critical_point(ctx, r).passed());
  // -Laplacian u + V u = -u^3 at nodes.
  const auto lhs = ctx.dec().apply_operator(r.u);
  const auto rhs = -1.0 * eval_f(kKerr, r.u);
  EXPECT_LT(l2_norm(lhs - rhs), 1e-6 * r.h1_norm);
}

TEST(Solver, DenseAndKrylovTransverseAgree) {
  const auto ctx = make_context(kMidgap, kKerr, Sign::plus, make_grid(1, 16, 8));
  SolveConfig dense;
  SolveConfig krylov;
  krylov.dense_transverse_limit = 0;
  const auto seed = linking_seed(ctx);
  const auto a = project_to_manifold(ctx, seed + 0.05 * seed, dense);
  const auto b = project_to_manifold(ctx, seed + 0.05 * seed, krylov);
  EXPECT_LT(l2_norm(a - b), 1e-8 * l2_norm(a));
  const auto ra = minimize_ground_state(ctx, dense);
  const auto rb = minimize_ground_state(ctx, krylov);
  EXPECT_NEAR(ra.value, rb.value, 1e-8 * ra.value);
}

TEST(Solver, VerificationNamesFailingCheck) {
  const auto ctx = make_context(CellFunction::constant(1.0), kKerr, Sign::plus, make_grid(1, 8, 8));
  const auto u = PeriodicField::constant(ctx.grid, 0.5);
  try {
    verify_critical_point(ctx, u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VerificationFailed);
    EXPECT_NE(std::string(e.what()).find("pde_residual"), std::string::npos);
  }
  const auto rep = assess_critical_point(ctx, PeriodicField(ctx.grid));
  EXPECT_FALSE(rep.nontrivial);
  EXPECT_EQ(rep.first_failure(), "nontriviality");
}
