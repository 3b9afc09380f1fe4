#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "muskat/grid.hpp"
#include "test_support.hpp"

using namespace muskat;
using muskat::testing::max_diff;
using std::numbers::pi;

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(Grid(8, 1.0), InvalidArgument);
  EXPECT_THROW(Grid(48, 1.0), InvalidArgument);
  EXPECT_THROW(Grid(64, 0.0), InvalidArgument);
  const Grid g(64, 2.0 * pi);
  EXPECT_DOUBLE_EQ(g.spacing() * 64, 2.0 * pi);
  EXPECT_DOUBLE_EQ(g.node(0), -pi);
}

TEST(Grid, MismatchedGridsDoNotMix) {
  GridFunction a(Grid(32, 1.0)), b(Grid(64, 1.0));
  EXPECT_THROW(a + b, GridMismatch);
}

TEST(SpectralDerivative, ConstantsAndModes) {
  const Grid g(128, 2.0 * pi);
  EXPECT_LE(max_abs(spectral_derivative(GridFunction(g, 3.5))), 1e-13);
  for (int k : {1, 5, 17}) {
    auto u = GridFunction::sample(g, [k](double x) { return std::cos(k * x); });
    auto du = GridFunction::sample(g, [k](double x) { return -k * std::sin(k * x); });
    EXPECT_LE(max_diff(spectral_derivative(u), du), 1e-12);
  }
}

TEST(SpectralDerivative, Gaussian) {
  const Grid g(512, 4.0 * pi);
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
  auto du = GridFunction::sample(g, [](double x) { return -2.0 * x * std::exp(-x * x); });
  EXPECT_LE(max_diff(spectral_derivative(u), du), 1e-10);
}

TEST(SpectralDerivative, RejectsNonFinite) {
  GridFunction u(Grid(16, 1.0));
  u[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(spectral_derivative(u), InvalidArgument);
}

TEST(Hilbert, ModesConstantsInvolution) {
  const Grid g(256, 2.0 * pi);
  for (int k : {1, 3, 40}) {
    auto u = GridFunction::sample(g, [k](double x) { return std::cos(k * x); });
    auto hu = GridFunction::sample(g, [k](double x) { return std::sin(k * x); });
    EXPECT_LE(max_diff(hilbert_multiplier(u), hu), 1e-12);
  }
  EXPECT_LE(max_abs(hilbert_multiplier(GridFunction(g, -2.0))), 1e-14);
  std::mt19937_64 rng(7);
  auto u = muskat::testing::random_smooth(g, rng, 30, 1.0, true);
  auto hhu = hilbert_multiplier(hilbert_multiplier(u));
  EXPECT_LE(max_diff(hhu, -(u - mean(u))), 1e-12);
}

TEST(Hilbert, SkewOnDiscreteInnerProduct) {
  const Grid g(128, 8.0 * pi);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto u = muskat::testing::random_smooth(g, rng, 60, 1.0, true);
    auto v = muskat::testing::random_smooth(g, rng, 60, 1.0, true);
    EXPECT_NEAR(inner(hilbert_multiplier(u), v), -inner(u, hilbert_multiplier(v)), 1e-12);
  }
}

TEST(HalfLaplacian, SymbolAndIdentity) {
  const Grid g(256, 2.0 * pi);
  for (int k : {1, 2, 9}) {
    auto u = GridFunction::sample(g, [k](double x) { return std::cos(k * x); });
    EXPECT_LE(max_diff(half_laplacian(u), k * u), 1e-12);
  }
  EXPECT_LE(max_abs(half_laplacian(GridFunction(g, 1.0))), 1e-14);
  std::mt19937_64 rng(3);
  auto u = muskat::testing::random_smooth(g, rng, 50, 1.0, true);
  EXPECT_LE(max_diff(half_laplacian(u), hilbert_multiplier(spectral_derivative(u))), 1e-12);
}

TEST(Sobolev, SingleModeAndParseval) {
  const Grid g(128, 2.0 * pi);
  EXPECT_EQ(sobolev_norm(GridFunction(g), 1.5), 0.0);
  auto u = GridFunction::sample(g, [](double x) { return std::cos(x); });
  // independent route: the trapezoid rule is exact for cos^2 on this grid
  double quad = 0.0;
  for (double v : u.values()) quad += v * v;
  quad *= g.spacing();
  EXPECT_NEAR(quad, pi, 1e-13);
  EXPECT_NEAR(sobolev_norm(u, 0.0), std::sqrt(pi), 1e-13);
  for (double r : {0.5, 1.0, 1.75, 2.0}) {
    EXPECT_NEAR(sobolev_norm(u, r), std::sqrt(pi) * std::pow(2.0, r / 2.0), 1e-12);
  }
  EXPECT_THROW(sobolev_norm(u, 2.5), InvalidArgument);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto w = muskat::testing::random_smooth(g, rng, 63, 2.0, true);
    const double n0 = sobolev_norm(w, 0.0);
    EXPECT_NEAR(n0 * n0 / inner(w, w), 1.0, 1e-12);
  }
}

TEST(Shift, GroupProperties) {
  const Grid g(64, 1.0);
  std::mt19937_64 rng(2);
  auto u = muskat::testing::random_smooth(g, rng, 20, 1.0, true);
  EXPECT_EQ(shift(u, 0).vec(), u.vec());
  EXPECT_EQ(shift(u, 64).vec(), u.vec());
  EXPECT_EQ(shift(shift(u, 13), -13).vec(), u.vec());
  EXPECT_EQ(shift(u, 3)[5], u[2]);
}

TEST(Shift, CommutesWithDerivative) {
  const Grid g(256, 2.0 * pi);
  std::mt19937_64 rng(9);
  auto u = muskat::testing::random_smooth(g, rng, 80, 1.0, true);
  for (long j : {1L, 7L, -30L, 128L}) {
    EXPECT_LE(max_diff(spectral_derivative(shift(u, j)), shift(spectral_derivative(u), j)), 1e-13);
  }
}

TEST(Translate, HalfSpacingIsExactOnBandLimitedData) {
  const Grid g(64, 2.0 * pi);
  const double tau = 0.5 * g.spacing();
  auto u = GridFunction::sample(g, [](double x) { return std::sin(3 * x) + 0.2 * std::cos(20 * x); });
  auto expect = GridFunction::sample(g, [tau](double x) {
    return std::sin(3 * (x - tau)) + 0.2 * std::cos(20 * (x - tau));
  });
  EXPECT_LE(max_diff(translate(u, tau), expect), 1e-13);
}

TEST(Interpolant, PointValuesDerivativesAndIntegrals) {
  const Grid g(64, 2.0 * pi);
  auto u = GridFunction::sample(g, [](double x) { return 0.3 + std::sin(2 * x) + 0.5 * std::cos(5 * x); });
  TrigInterpolant I(u);
  for (double x : {-1.234, 0.1, 2.9}) {
    EXPECT_NEAR(I(x), 0.3 + std::sin(2 * x) + 0.5 * std::cos(5 * x), 1e-13);
    EXPECT_NEAR(I.derivative(x), 2 * std::cos(2 * x) - 2.5 * std::sin(5 * x), 1e-12);
  }
  const double a = -0.7, b = 1.9;
  const double exact = 0.3 * (b - a) - (std::cos(2 * b) - std::cos(2 * a)) / 2 + 0.1 * (std::sin(5 * b) - std::sin(5 * a));
  EXPECT_NEAR(I.integral(a, b), exact, 1e-13);

  auto fine = upsample(u, 4);
  EXPECT_EQ(fine.size(), 256u);
  for (std::size_t j = 0; j < fine.size(); j += 7) EXPECT_NEAR(fine[j], I(fine.grid().node(j)), 1e-13);
}

TEST(HighModes, FractionOfEnergyAboveQuarterBand) {
  const Grid g(64, 2.0 * pi);
  auto low = GridFunction::sample(g, [](double x) { return std::cos(3 * x); });
  auto mix = GridFunction::sample(g, [](double x) { return std::cos(3 * x) + std::cos(20 * x); });
  EXPECT_NEAR(high_mode_fraction(low), 0.0, 1e-20);
  EXPECT_NEAR(high_mode_fraction(mix), 0.5, 1e-13);
  EXPECT_EQ(high_mode_fraction(GridFunction(g)), 0.0);
}
