#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace gapsol;

TEST(Grid, MakeGridShapes) {
  const auto g1 = make_grid(1, 1, 8);
  EXPECT_EQ(g1.size(), 8u);
  EXPECT_DOUBLE_EQ(g1.spacing(), 1.0 / 8);
  const auto g2 = make_grid(2, 2, 16);
  EXPECT_EQ(g2.points_per_axis(), 32);
  EXPECT_EQ(g2.size(), 32u * 32u);
}

TEST(Grid, MakeGridRejectsDegenerate) {
  for (auto [d, k, n] : {std::tuple{1, 0, 8}, std::tuple{3, 1, 8}, std::tuple{1, 1, 5}, std::tuple{1, 1, 2}}) {
    try {
      make_grid(d, k, n);
      FAIL() << "accepted " << d << " " << k << " " << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidGrid);
    }
  }
}

TEST(Grid, ConstantIsInKernelOfLaplacian) {
  const auto g = make_grid(2, 2, 8);
  const auto lu = laplacian_apply(PeriodicField::constant(g, 3.5));
  EXPECT_LT(lu.sup_norm(), 1e-12);
}

TEST(Grid, CosineIsEigenfunction) {
  const auto g = make_grid(1, 1, 16);
  const auto u = PeriodicField::from_lattice(g, [](auto x) { return std::cos(2 * M_PI * x[0]); });
  const auto lu = laplacian_apply(u);
  EXPECT_LT((lu - 4 * M_PI * M_PI * u).sup_norm(), 1e-12);
}

TEST(Grid, LaplacianMatchesAnalyticAndSecondDifferences) {
  // Band-limited field with known second derivative; the spectral result is
  // exact at n and 2n while the second-difference oracle converges as h^2.
  auto field = [](double x) { return std::sin(2 * M_PI * x / 4) + 0.3 * std::cos(2 * M_PI * 3 * x / 4); };
  auto minus_dd = [](double x) {
    const double w1 = 2 * M_PI / 4, w3 = 2 * M_PI * 3 / 4;
    return w1 * w1 * std::sin(w1 * x) + 0.3 * w3 * w3 * std::cos(w3 * x);
  };
  double fd_err_prev = 0.0;
  for (int n : {8, 16, 32}) {
    const auto g = make_grid(1, 4, n);
    const auto u = PeriodicField::from_lattice(g, [&](auto x) { return field(x[0]); });
    const auto lu = laplacian_apply(u);
    double spec_err = 0.0, fd_err = 0.0;
    const int m = g.points_per_axis();
    const double h = g.spacing();
    for (int i = 0; i < m; ++i) {
      const double exact = minus_dd(i * h);
      spec_err = std::max(spec_err, std::abs(lu[i] - exact));
      const double fd = -(u[(i + 1) % m] - 2 * u[i] + u[(i + m - 1) % m]) / (h * h);
      fd_err = std::max(fd_err, std::abs(fd - exact));
      EXPECT_LT(std::abs(lu[i] - fd), 2 * fd_err + 1e-9);
    }
    EXPECT_LT(spec_err, 1e-10) << "n=" << n;
    if (fd_err_prev > 0) EXPECT_NEAR(fd_err_prev / fd_err, 4.0, 0.2);
    fd_err_prev = fd_err;
  }
}

TEST(Grid, IntegrateConstantAndMeanZero) {
  EXPECT_DOUBLE_EQ(integrate(PeriodicField::constant(make_grid(1, 2, 8), 1.0)), 2.0);
  EXPECT_DOUBLE_EQ(integrate(PeriodicField::constant(make_grid(2, 3, 4), 1.0)), 9.0);
  const auto g = make_grid(1, 1, 16);
  const auto c = PeriodicField::from_lattice(g, [](auto x) { return std::cos(2 * M_PI * x[0]); });
  EXPECT_LT(std::abs(integrate(c)), 1e-14);
}

TEST(Grid, IntegrateSechSquaredMatchesAdaptiveQuadrature) {
  const auto g = make_grid(1, 16, 32);
  const auto u = PeriodicField::from_centered(g, [](auto x) { return 1.0 / std::pow(std::cosh(x[0]), 2); });
  const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double x) { return 1.0 / std::pow(std::cosh(x), 2); }, -8.0, 8.0, 15, 1e-14);
  EXPECT_NEAR(integrate(u), ref, 1e-8);
}

TEST(Grid, H1NormClosedForms) {
  EXPECT_NEAR(h1_norm(PeriodicField::constant(make_grid(1, 1, 8), 1.0)), 1.0, 1e-14);
  const auto g = make_grid(1, 1, 16);
  const auto c = PeriodicField::from_lattice(g, [](auto x) { return std::cos(2 * M_PI * x[0]); });
  EXPECT_NEAR(h1_norm(c), std::sqrt(0.5 + 2 * M_PI * M_PI), 1e-12);

  // sqrt(2) sech(x): int u^2 = 4, int u'^2 = 4/3.
  const auto gs = make_grid(1, 16, 32);
  const auto s = PeriodicField::from_centered(gs, [](auto x) { return oracle::soliton(x[0], 1.0); });
  EXPECT_NEAR(h1_norm(s), std::sqrt(oracle::soliton_h1_squared(1.0)), 1e-6);
}

TEST(Grid, TranslateIdentityAndPermutation) {
  std::mt19937_64 rng(7);
  const auto g = make_grid(1, 8, 4);
  const auto u = oracle::random_field(g, rng);
  const int zero[] = {0};
  EXPECT_EQ(translate_field(u, std::span<const int>(zero)).values(), u.values());

  // Spike at x = 3 (node 12 with n = 4) lands on node 0 after u(. + 3).
  Eigen::VectorXd v = Eigen::VectorXd::Zero(32);
  v[12] = 1.0;
  const PeriodicField spike(g, v);
  const int three[] = {3};
  const auto moved = translate_field(spike, std::span<const int>(three));
  EXPECT_EQ(moved[0], 1.0);
  EXPECT_EQ(moved.values().sum(), 1.0);
}

TEST(Grid, TranslatePreservesIntegrals) {
  std::mt19937_64 rng(11);
  const auto g = make_grid(1, 8, 8);
  const auto u = oracle::random_field(g, rng);
  const int two[] = {2};
  const auto t = translate_field(u, std::span<const int>(two));
  const auto cube = [](const PeriodicField& f) { return integrate(hadamard(f, hadamard(f, f))); };
  EXPECT_NEAR(cube(t), cube(u), 1e-14 * std::max(1.0, std::abs(cube(u))));
  EXPECT_NEAR(h1_norm(t), h1_norm(u), 1e-12);
}

TEST(Grid, TranslateRejectsFractionalShift) {
  const auto g = make_grid(1, 4, 4);
  const double half[] = {0.5};
  try {
    translate_field(PeriodicField(g), std::span<const double>(half));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegerShift);
  }
}

TEST(Grid, LaplacianSelfAdjointAndDivergenceFree) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = make_grid(1 + trial % 2, 4, 8);
    const auto u = oracle::random_field(g, rng);
    const auto v = oracle::random_field(g, rng);
    EXPECT_NEAR(inner(u, laplacian_apply(v)), inner(laplacian_apply(u), v), 1e-12 * (1 + h1_norm(u) * h1_norm(v)));
    EXPECT_LT(std::abs(integrate(laplacian_apply(u))), 1e-12 * (1 + h1_norm(u)));
  }
}

TEST(Grid, FourierRoundTrip) {
  std::mt19937_64 rng(5);
  const auto g = make_grid(2, 3, 8);
  Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(g.size()),
                                                   [&]() { return std::normal_distribution<double>()(rng); });
  const PeriodicField u(g, v);
  const auto back = inverse_fourier_transform(g, fourier_transform(u));
  EXPECT_LT((back - u).sup_norm(), 1e-13);
}

TEST(Grid, RejectsNonFiniteValues) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v[3] = std::nan("");
  EXPECT_THROW(PeriodicField(make_grid(1, 1, 8), v), Error);
}

TEST(FieldIo, BitExactRoundTrip) {
  std::mt19937_64 rng(9);
  const auto g = make_grid(2, 2, 8);
  Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(g.size()),
                                                   [&]() { return std::normal_distribution<double>()(rng) * 1e-7; });
  const PeriodicField u(g, v);
  const auto dir = std::filesystem::temp_directory_path() / "gapsol_test_field_io";
  std::filesystem::create_directories(dir);
  write_field_dump(dir / "u.bin", u);
  const auto back = read_field_dump(dir / "u.bin");
  EXPECT_EQ(back.grid(), g);
  for (std::size_t i = 0; i < u.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i]), std::bit_cast<std::uint64_t>(u[i]));
  EXPECT_EQ(std::filesystem::file_size(dir / "u.bin"), g.size() * 8);
}

TEST(FieldIo, TruncatedDumpIsIoError) {
  const auto g = make_grid(1, 2, 8);
  const auto dir = std::filesystem::temp_directory_path() / "gapsol_test_field_io";
  std::filesystem::create_directories(dir);
  write_field_dump(dir / "t.bin", PeriodicField::constant(g, 1.0));
  std::filesystem::resize_file(dir / "t.bin", 8 * 5);
  try {
    read_field_dump(dir / "t.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}
