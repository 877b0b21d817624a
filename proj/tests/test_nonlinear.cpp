#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"

using namespace gapsol;

TEST(Nonlinear, KerrValues) {
  const auto g = make_grid(1, 1, 8);
  const auto spec = NonlinearitySpec::kerr(CellFunction::constant(1.0));
  const auto u = PeriodicField::constant(g, 2.0);
  EXPECT_DOUBLE_EQ(eval_f(spec, u)[0], 8.0);
  EXPECT_DOUBLE_EQ(eval_F(spec, u)[0], 4.0);
  EXPECT_DOUBLE_EQ(eval_fprime(spec, u)[0], 12.0);
  const auto v = PeriodicField::constant(g, -2.0);
  EXPECT_DOUBLE_EQ(eval_f(spec, v)[3], -8.0);
  EXPECT_DOUBLE_EQ(eval_F(spec, v)[3], 4.0);
}

TEST(Nonlinear, PowerValuesAndOddness) {
  for (double p : {3.0, 3.5, 4.0, 6.0}) {
    const auto spec = NonlinearitySpec::power(CellFunction::constant(1.5), p);
    for (double u : {0.0, 0.3, 1.0, 2.7}) {
      EXPECT_NEAR(detail::scalar_f(1.5, p, u), 1.5 * std::pow(u, p - 1), 1e-12 * (1 + std::pow(u, p)));
      EXPECT_EQ(detail::scalar_f(1.5, p, -u), -detail::scalar_f(1.5, p, u));
      EXPECT_EQ(detail::scalar_F(1.5, p, -u), detail::scalar_F(1.5, p, u));
    }
    EXPECT_DOUBLE_EQ(spec.q, p);
    EXPECT_NEAR(spec.theta, 1.0 / (p - 1), 1e-15);
  }
}

TEST(Nonlinear, PotentialIsAntiderivative) {
  for (double p : {3.0, 4.0, 5.5}) {
    for (double u : {-3.0, -0.4, 0.25, 1.0, 2.5}) {
      const double ref = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&](double s) { return detail::scalar_f(0.8, p, s); }, 0.0, u);
      EXPECT_NEAR(detail::scalar_F(0.8, p, u), ref, 1e-12 * (1 + std::abs(ref)));
      const double step = 1e-5;
      const double fd = (detail::scalar_f(0.8, p, u + step) - detail::scalar_f(0.8, p, u - step)) / (2 * step);
      EXPECT_NEAR(detail::scalar_fprime(0.8, p, u), fd, 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST(Nonlinear, WeightIsTiledFromUnitCell) {
  const auto spec = NonlinearitySpec::kerr(CellFunction::cosine_series(2.0, {{1.0, {1, 0}}}));
  const auto g = make_grid(1, 3, 8);
  const auto u = PeriodicField::constant(g, 1.0);
  const auto f = eval_f(spec, u);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(f[i], 2.0 + std::cos(2 * M_PI * node_position(g, i)[0]), 1e-14);
}

TEST(Nonlinear, ScaledWeight) {
  const auto g = make_grid(1, 1, 8);
  const auto spec = NonlinearitySpec::kerr(CellFunction::constant(2.0));
  const auto u = PeriodicField::constant(g, 1.5);
  EXPECT_DOUBLE_EQ(eval_f(spec.scaled(0.5), u)[0], 1.5 * 1.5 * 1.5);
  EXPECT_EQ(eval_f(spec.scaled(0.0), u).sup_norm(), 0.0);
}

TEST(Assumptions, KerrAndPowerPass) {
  for (int dim : {1, 2}) {
    const auto kerr = NonlinearitySpec::kerr(CellFunction::cosine_series(1.0, {{0.5, {1, 1}}}));
    const auto rep = check_assumptions(kerr, dim);
    EXPECT_TRUE(rep.passed());
    EXPECT_NEAR(rep.best_theta, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(rep.weight_min, 0.5, 1e-12);
    const auto pw = NonlinearitySpec::power(CellFunction::constant(1.0), 3.0);
    EXPECT_TRUE(assess_assumptions(pw, dim).passed());
  }
}

TEST(Assumptions, SmallRatiosDecrease) {
  const auto rep = assess_assumptions(NonlinearitySpec::kerr(CellFunction::constant(1.0)), 1);
  ASSERT_EQ(rep.small_ratios.size(), 7u);
  for (std::size_t d = 0; d < rep.small_ratios.size(); ++d) EXPECT_NEAR(rep.small_ratios[d], std::pow(10.0, -2.0 * d), 1e-15);
}

TEST(Assumptions, ViolationsNameHypothesis) {
  auto expect_violation = [](const NonlinearitySpec& s, const std::string& name) {
    try {
      check_assumptions(s, 1);
      FAIL() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::AssumptionViolated);
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
    }
  };
  expect_violation(NonlinearitySpec::kerr(CellFunction::cosine_series(0.2, {{1.0, {1, 0}}})), "positivity");
  auto quad = NonlinearitySpec::power(CellFunction::constant(1.0), 2.0);
  expect_violation(quad, "exponents");
  auto tight = NonlinearitySpec::kerr(CellFunction::constant(1.0));
  tight.theta = 0.2;
  expect_violation(tight, "monotone ratio");
  auto loose_q = NonlinearitySpec::kerr(CellFunction::constant(1.0));
  loose_q.q = 4.5;
  expect_violation(loose_q, "exponents");
}

TEST(Assumptions, PositivityWitnessCitesSignHypothesis) {
  const auto rep = assess_assumptions(NonlinearitySpec::kerr(CellFunction::constant(-1.0)), 1);
  ASSERT_NE(rep.first_failure(), nullptr);
  EXPECT_EQ(rep.first_failure()->name, "positivity");
  EXPECT_NE(rep.first_failure()->detail.find(hypothesis::sign_definite_kerr), std::string::npos);
}
