// Layer potentials: flat-state Fourier pairs, m = 2 kernel paths, Frechet
// derivatives and the difference / derivative identities.
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "muskat/layers.hpp"
#include "test_support.hpp"

using namespace muskat;
using muskat::testing::gaussian;
using muskat::testing::max_diff;
using muskat::testing::order_fit;
using muskat::testing::random_smooth;
using std::numbers::pi;

namespace {

PhysicalParams params_with(double c) {
  PhysicalParams p;
  p.c_inf = c;
  return p;
}

InterfaceState random_state(const Grid& g, std::mt19937_64& rng, double amp, double c = 1.0) {
  return InterfaceState(random_smooth(g, rng, 6, amp), random_smooth(g, rng, 6, amp), params_with(c));
}

GridFunction mode(const Grid& g, int k, bool sine) {
  const double w = 2.0 * pi / g.period();
  return GridFunction::sample(g, [=](double x) { return sine ? std::sin(k * w * x) : std::cos(k * w * x); });
}

}  // namespace

TEST(Layers, FlatPoissonLayerIsFourierPair) {
  // int cos(ks) / (s^2 + c^2) ds = (pi / c) e^{-kc}
  const Grid g(512, 2.0 * pi);
  for (double c : {0.5, 1.0, 2.0}) {
    const auto X = InterfaceState::flat(g, params_with(c));
    for (int k : {1, 2, 3}) {
      const auto out = apply_layer(LayerKind::C, 1, X, mode(g, k, false));
      const double amp = pi / c * std::exp(-k * c);
      EXPECT_LE(max_diff(out, amp * mode(g, k, false)) / amp, 1e-8) << "c=" << c << " k=" << k;
    }
  }
  const auto X1 = InterfaceState::flat(g, params_with(1.0));
  EXPECT_NEAR(apply_layer(LayerKind::C, 1, X1, mode(g, 1, false))[256], 1.155727349790922, 1e-8);
}

TEST(Layers, FlatFluxLayerIsFourierPair) {
  // int s sin(ks) / (s^2 + c^2) ds = pi e^{-kc}, so D_1[sin] = -pi e^{-kc} cos
  const Grid g(512, 2.0 * pi);
  for (double c : {0.5, 1.0, 2.0}) {
    const auto X = InterfaceState::flat(g, params_with(c));
    for (int k : {1, 2, 3}) {
      const double amp = -pi * std::exp(-k * c);
      for (LayerKind kind : {LayerKind::D, LayerKind::D_prime}) {
        const auto out = apply_layer(kind, 1, X, mode(g, k, true));
        EXPECT_LE(max_diff(out, amp * mode(g, k, false)) / std::abs(amp), 1e-8) << "c=" << c << " k=" << k;
      }
    }
  }
}

TEST(Layers, ZeroDensityGivesZero) {
  const Grid g(64, 2.0 * pi);
  std::mt19937_64 rng(1);
  const auto X = random_state(g, rng, 0.2);
  const GridFunction zero(g);
  const Direction Y{random_smooth(g, rng, 4, 1.0), random_smooth(g, rng, 4, 1.0)};
  for (LayerKind k : {LayerKind::C, LayerKind::C_prime, LayerKind::D, LayerKind::D_prime}) {
    for (int m = 1; m <= 3; ++m) {
      EXPECT_EQ(max_abs(apply_layer(k, m, 1, X, {Y}, zero)), 0.0);
    }
  }
}

TEST(Layers, RejectsInadmissibleStates) {
  const Grid g(64, 2.0 * pi);
  const auto f = GridFunction::sample(g, [](double x) { return -0.5 * std::cos(x); });
  const InterfaceState X(f, -1.0 * f, params_with(1.0));  // gap 0 at x = 0
  try {
    apply_layer(LayerKind::C, 1, X, f);
    FAIL() << "expected AdmissibilityError";
  } catch (const AdmissibilityError& e) {
    EXPECT_EQ(e.node(), 32u);
    EXPECT_NEAR(e.gap(), 0.0, 1e-15);
  }
  LayerRequest bad{LayerKind::C, 0, 2, 0, {X}, {}, f};
  EXPECT_THROW(apply_layer(bad), InvalidArgument);
}

TEST(Layers, CommutesWithGridShifts) {
  const Grid g(128, 2.0 * pi);
  std::mt19937_64 rng(4);
  const auto X = random_state(g, rng, 0.3);
  const auto w = random_smooth(g, rng, 10, 1.0);
  const InterfaceState Xs(shift(X.f, 9), shift(X.h, 9), X.params);
  for (LayerKind k : {LayerKind::C, LayerKind::D_prime}) {
    EXPECT_LE(max_diff(apply_layer(k, 1, Xs, shift(w, 9)), shift(apply_layer(k, 1, X, w), 9)), 1e-13);
  }
}

TEST(Layers, TwoStateKernelMatchesBruteForceImageSum) {
  const double P = 2.0 * pi;
  const Grid g(64, P);
  std::mt19937_64 rng(8);
  const auto X1 = random_state(g, rng, 0.3);
  const auto X2 = random_state(g, rng, 0.3);
  const auto w = random_smooth(g, rng, 8, 1.0);
  for (LayerKind kind : {LayerKind::C, LayerKind::D, LayerKind::C_prime}) {
    LayerRequest r{kind, 0, 2, 0, {X1, X2}, {}, w};
    const auto got = apply_layer(r);
    // independent sweep: trapezoid on offset nodes, kernel by direct image summation
    const GridFunction a1 = is_primed(kind) ? X1.h - 1.0 : X1.f + 1.0;
    const GridFunction a2 = is_primed(kind) ? X2.h - 1.0 : X2.f + 1.0;
    const double h = g.spacing();
    const TrigInterpolant f1(X1.f), h1(X1.h), f2(X2.f), h2(X2.h), wi(w);
    for (std::size_t i : {std::size_t{0}, std::size_t{21}, std::size_t{40}}) {
      const double x = g.node(i);
      double acc = 0.0;
      for (int q = -32; q < 32; ++q) {
        const double s = (q + 0.5) * h;
        const double b1 = is_primed(kind) ? f1(x - s) : h1(x - s);
        const double b2 = is_primed(kind) ? f2(x - s) : h2(x - s);
        const double d1 = a1[i] - b1, d2 = a2[i] - b2;
        double K = 0.0;
        for (int j = -3000; j <= 3000; ++j) {
          const double z = s + j * P;
          K += (s_power(kind) ? z : 1.0) / ((z * z + d1 * d1) * (z * z + d2 * d2));
        }
        acc += K * wi(x - s);
      }
      EXPECT_NEAR(got[i], h * acc, 1e-6 * (1.0 + std::abs(got[i]))) << to_string(kind) << " i=" << i;
    }
  }
}

TEST(Layers, CoincidentPathIsLimitOfDistinctStates) {
  const Grid g(128, 2.0 * pi);
  std::mt19937_64 rng(9);
  const auto X = random_state(g, rng, 0.3);
  const auto w = random_smooth(g, rng, 8, 1.0);
  const auto bump = random_smooth(g, rng, 3, 1.0);
  for (LayerKind kind : {LayerKind::C, LayerKind::D}) {
    const auto same = apply_layer(kind, 2, X, w);
    for (double eps : {1e-2, 1e-3, 1e-5, 1e-9}) {
      const InterfaceState Xe(X.f + eps * bump, X.h, X.params);
      LayerRequest r{kind, 0, 2, 0, {X, Xe}, {}, w};
      // first-order in eps, exact as eps -> 0 (all three kernel routes are exercised)
      EXPECT_LE(max_diff(apply_layer(r), same), 40.0 * eps + 1e-9) << to_string(kind) << " eps=" << eps;
    }
  }
}

TEST(Layers, FrechetMatchesCentralDifferencesOnFlatBase) {
  const Grid g(256, 2.0 * pi);
  std::mt19937_64 rng(12);
  const auto X = InterfaceState::flat(g, params_with(1.0));
  const auto w = random_smooth(g, rng, 8, 1.0);
  const Direction Y{random_smooth(g, rng, 5, 1.0), random_smooth(g, rng, 5, 1.0)};
  const double eps = 1e-5;
  const auto exact = frechet_layer(LayerKind::C, 1, 0, X, {}, Y, w);
  const auto fd = (apply_layer(LayerKind::C, 1, perturbed(X, Y.u, Y.v, eps), w) -
                   apply_layer(LayerKind::C, 1, perturbed(X, Y.u, Y.v, -eps), w)) *
                  (0.5 / eps);
  EXPECT_LE(max_diff(exact, fd) / max_abs(exact), 1e-6);
  const Direction zero{GridFunction(g), GridFunction(g)};
  EXPECT_EQ(max_abs(frechet_layer(LayerKind::C, 1, 0, X, {}, zero, w)), 0.0);
}

TEST(Layers, FrechetIsSecondOrderConsistentOnEveryFamily) {
  const Grid g(128, 2.0 * pi);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    const auto X = random_state(g, rng, 0.25);
    const auto w = random_smooth(g, rng, 8, 1.0);
    const Direction Y{random_smooth(g, rng, 4, 1.0), random_smooth(g, rng, 4, 1.0)};
    const Direction Z{random_smooth(g, rng, 4, 1.0), random_smooth(g, rng, 4, 1.0)};
    for (LayerKind kind : {LayerKind::C, LayerKind::C_prime, LayerKind::D, LayerKind::D_prime}) {
      for (auto [m, p, n] : {std::tuple{1, 0, 0}, std::tuple{1, 1, 1}, std::tuple{2, 0, 0}}) {
        const std::vector<Direction> dirs(static_cast<std::size_t>(n), Z);
        const auto exact = frechet_layer(kind, m, p, X, dirs, Y, w);
        const double scale = max_abs(exact);
        std::vector<double> steps, errs;
        for (double eps : {2e-2, 1e-2, 5e-3}) {
          const auto fd = (apply_layer(kind, m, p, perturbed(X, Y.u, Y.v, eps), dirs, w) -
                           apply_layer(kind, m, p, perturbed(X, Y.u, Y.v, -eps), dirs, w)) *
                          (0.5 / eps);
          steps.push_back(eps);
          errs.push_back(max_diff(fd, exact) / scale);
        }
        EXPECT_NEAR(order_fit(steps, errs), 2.0, 0.1) << to_string(kind) << " m=" << m << " p=" << p;
        const double eps = 1e-5;
        const auto fd = (apply_layer(kind, m, p, perturbed(X, Y.u, Y.v, eps), dirs, w) -
                         apply_layer(kind, m, p, perturbed(X, Y.u, Y.v, -eps), dirs, w)) *
                        (0.5 / eps);
        EXPECT_LE(max_diff(fd, exact) / scale, 1e-6) << to_string(kind) << " m=" << m << " p=" << p;
      }
    }
  }
}

TEST(Layers, IdentitiesHoldExactlyForEqualStates) {
  const Grid g(128, 2.0 * pi);
  std::mt19937_64 rng(30);
  const auto X = random_state(g, rng, 0.3);
  const auto rep = identity_report(X, X, random_smooth(g, rng, 8, 1.0));
  for (const auto& c : rep.checks) {
    if (c.name.rfind("difference", 0) == 0) EXPECT_EQ(c.residual, 0.0) << c.name;
  }
}

TEST(Layers, IdentitiesHoldOnRandomStates) {
  const Grid g(512, 2.0 * pi);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 2; ++trial) {
    const auto X = random_state(g, rng, 0.3);
    const InterfaceState Xt(X.f + random_smooth(g, rng, 5, 0.05), X.h + random_smooth(g, rng, 5, 0.05), X.params);
    const auto rep = identity_report(X, Xt, random_smooth(g, rng, 10, 1.0));
    EXPECT_EQ(rep.checks.size(), 8u);
    for (const auto& c : rep.checks) EXPECT_LE(c.residual, 1e-7) << c.name;
    EXPECT_TRUE(rep.all_passed());
  }
}

TEST(Layers, DerivativeIdentityOnFlatStateWithGaussianDensity) {
  const Grid g(512, 2.0 * pi);
  const auto X = InterfaceState::flat(g, params_with(1.0));
  const auto rep = identity_report(X, X, gaussian(g, 1.0, 0.0, 0.5));
  for (const auto& c : rep.checks) EXPECT_LE(c.residual, 1e-7) << c.name;
}

TEST(Layers, GainScalesAtMostInverseSquareOfGap) {
  const Grid g(128, 2.0 * pi);
  std::mt19937_64 rng(40);
  std::vector<GridFunction> suite;
  for (int i = 0; i < 10; ++i) suite.push_back(random_smooth(g, rng, 30, 1.0, true));
  auto gain = [&](double c) {
    const auto X = InterfaceState::flat(g, params_with(c));
    double worst = 0.0;
    for (const auto& w : suite) worst = std::max(worst, l2_norm(apply_layer(LayerKind::C, 1, X, w)) / l2_norm(w));
    return worst;
  };
  for (double c : {2.0, 1.0, 0.5, 0.25}) EXPECT_LE(gain(0.5 * c), 4.0 * gain(c));
}

TEST(Layers, OutputIsSmootherThanDensity) {
  // H^1 norm of C_1[w] bounded by a constant times ||w||_{L2}, uniformly as w roughens
  const Grid g(256, 2.0 * pi);
  std::mt19937_64 rng(41);
  const auto X = random_state(g, rng, 0.2);
  std::vector<double> gains;
  for (int kmax : {4, 16, 64, 120}) {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      std::normal_distribution<double> nd;
      auto w = GridFunction::sample(g, [&](double) { return 0.0; });
      for (int k = 1; k <= kmax; ++k) w += nd(rng) * mode(g, k, t % 2 == 0);
      for (LayerKind kind : {LayerKind::C, LayerKind::D}) {
        worst = std::max(worst, sobolev_norm(apply_layer(kind, 1, X, w), 1.0) / l2_norm(w));
      }
    }
    gains.push_back(worst);
  }
  EXPECT_LT(gains.back(), 2.0 * gains.front());
}
