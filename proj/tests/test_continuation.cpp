#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gapsol;

namespace {

const NonlinearitySpec kKerr = NonlinearitySpec::kerr(CellFunction::constant(1.0));

PeriodicField spike_at(const GridSpec& g, std::size_t node, double value = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  v[static_cast<Eigen::Index>(node)] = value;
  return PeriodicField(g, std::move(v));
}

}  // namespace

TEST(Recenter, MovesPeakCellToCentre) {
  // k = 8, n = 4: centred coordinate of node j is j/4 - 4. Node 28 sits at x = 3.
  const auto g = make_grid(1, 8, 4);
  const auto rc = recenter(spike_at(g, 28));
  ASSERT_EQ(rc.b.size(), 1u);
  EXPECT_EQ(rc.b[0], 3);
  Eigen::Index imax = 0;
  rc.u.values().maxCoeff(&imax);
  EXPECT_EQ(centered_coordinate(g, static_cast<std::size_t>(imax))[0], 0.0);
}

TEST(Recenter, HalfUnitRoundsUp) {
  // Peak at x = -1.5 (node 10) rounds to b = -1, leaving the peak at -0.5.
  const auto g = make_grid(1, 8, 4);
  const auto rc = recenter(spike_at(g, 10, -2.0));
  EXPECT_EQ(rc.b[0], -1);
  Eigen::Index imin = 0;
  rc.u.values().minCoeff(&imin);
  EXPECT_EQ(centered_coordinate(g, static_cast<std::size_t>(imin))[0], -0.5);
}

TEST(Recenter, TiesPreferSmallestShift) {
  const auto g = make_grid(1, 8, 4);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(32);
  v[4] = 1.0;   // x = -3
  v[24] = 1.0;  // x = 2
  const auto rc = recenter(PeriodicField(g, v));
  EXPECT_EQ(rc.b[0], 2);
  EXPECT_EQ(recenter(rc.u).b[0], 0);
}

TEST(Recenter, TwoDimensional) {
  const auto g = make_grid(2, 4, 4);
  // Node (14, 3): x = (1.5, -1.25) -> b = (2, -1).
  const auto rc = recenter(spike_at(g, 14 * 16 + 3));
  EXPECT_EQ(rc.b, (std::vector<int>{2, -1}));
}

TEST(Extend, PlacesFieldCentrally) {
  std::mt19937_64 rng(51);
  const auto g = make_grid(1, 4, 8);
  const auto u = oracle::random_field(g, rng);
  const auto big = extend_to_cell(u, 12);
  EXPECT_EQ(big.grid(), make_grid(1, 12, 8));
  EXPECT_NEAR(integrate(hadamard(big, big)), integrate(hadamard(u, u)), 1e-12);
  // Centred coordinates are preserved.
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = centered_coordinate(g, i)[0];
    const std::size_t j = static_cast<std::size_t>(std::lround((x + 6.0) * 8));
    EXPECT_EQ(big[j], u[i]);
  }
  EXPECT_THROW(extend_to_cell(u, 6), Error);
}

TEST(Extend, DoubledCellChecksTarget) {
  const auto g = make_grid(2, 2, 4);
  const auto u = PeriodicField::constant(g, 1.0);
  EXPECT_EQ(extend_to_doubled_cell(u).grid(), make_grid(2, 4, 4));
  try {
    extend_to_doubled_cell(u, make_grid(2, 4, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
  }
}

TEST(Decay, RecoversExponentialRate) {
  const auto g = make_grid(1, 64, 8);
  const double lambda = 0.7;
  const auto u = PeriodicField::from_centered(g, [&](auto x) { return 3.0 * std::exp(-lambda * std::abs(x[0])); });
  const auto fit = fit_decay_rate(u, SpectralGap{0.49, 0.49});
  EXPECT_NEAR(fit.lambda, lambda, 1e-3);
  EXPECT_GT(fit.r_squared, 0.999);
  EXPECT_NEAR(fit.lambda_vs_gap, 1.0, 2e-3);
  EXPECT_GE(fit.r_hi - fit.r_lo, 3);
}

TEST(Decay, GaussianWindowTooSmall) {
  // exp(-x^2) leaves the window [1e-8, 1e-2] within two shells.
  const auto g = make_grid(1, 32, 8);
  const auto u = PeriodicField::from_centered(g, [](auto x) { return std::exp(-x[0] * x[0]); });
  try {
    fit_decay_rate(u, SpectralGap{1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowTooSmall);
  }
}

TEST(Decay, ShellMaximaTwoDimensional) {
  const auto g = make_grid(2, 8, 4);
  const auto u = PeriodicField::from_centered(g, [](auto x) { return std::exp(-std::hypot(x[0], x[1])); });
  const auto m = shell_maxima(u);
  ASSERT_GE(m.size(), 4u);
  for (std::size_t r = 0; r + 1 < 4; ++r) {
    EXPECT_NEAR(m[r], std::exp(-static_cast<double>(r)), 0.2 * std::exp(-static_cast<double>(r)));
    EXPECT_GT(m[r], m[r + 1]);
  }
}

TEST(Sweep, ValidatesKList) {
  for (const auto& bad : {std::vector<int>{}, std::vector<int>{8, 8}, std::vector<int>{8, 12}, std::vector<int>{16, 8},
                          std::vector<int>{0, 4}}) {
    try {
      validate_k_list(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSweep);
    }
  }
  EXPECT_NO_THROW(validate_k_list({8, 16, 32}));
}

TEST(Sweep, SolitonSequenceConverges) {
  const SweepProblem p{CellFunction::constant(1.0), kKerr, Sign::plus, 1, 8, {}};
  const auto res = k_sweep(p, {8, 16, 32}, {}, 1e-4);
  ASSERT_TRUE(res.failure.empty()) << res.failure;
  ASSERT_EQ(res.records.size(), 3u);
  for (const auto& r : res.records) EXPECT_TRUE(r.converged) << r.k;
  EXPECT_TRUE(res.sequence_converged);
  EXPECT_NEAR(res.records.back().value, oracle::soliton_value(1.0), 1e-3);
  EXPECT_TRUE(res.records.front().k_too_small);
  EXPECT_FALSE(res.records.back().k_too_small);
  for (std::size_t i = 1; i < res.records.size(); ++i)
    EXPECT_LT(std::abs(res.records[i].value - res.records.back().value),
              std::abs(res.records[i - 1].value - res.records.back().value) + 1e-12);
}

TEST(Scaling, LogLogFitRecoversPowerLaw) {
  std::vector<double> x, y;
  for (double a : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    x.push_back(a);
    y.push_back(3.0 * std::pow(a, 0.25));
  }
  const auto fit = loglog_fit(x, y);
  ASSERT_TRUE(fit.available);
  EXPECT_NEAR(fit.slope, 0.25, 1e-12);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-12);
  EXPECT_LT(fit.stderr_slope, 1e-12);
  EXPECT_FALSE(loglog_fit({1, 2}, {1, 2}).available);
}

TEST(Scaling, ProbeRequiresSpan) {
  std::vector<ScalingRecord> recs;
  for (double a : {0.1, 0.09, 0.08, 0.07}) recs.push_back({a, a, a, std::pow(a, 0.25), 1.0});
  try {
    edge_scaling_probe(recs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSpan);
  }
  recs.clear();
  for (double a : {0.2, 0.1, 0.05, 0.01}) recs.push_back({a, INFINITY, a, std::pow(a, 0.25), std::sqrt(a)});
  const auto rep = edge_scaling_probe(recs);
  EXPECT_NEAR(rep.vs_alpha.slope, 0.25, 1e-12);
  EXPECT_FALSE(rep.vs_alpha_minus.available);
  EXPECT_TRUE(rep.sup_monotone);
  EXPECT_DOUBLE_EQ(rep.reference_exponent, 1.0);
}
