// Time stepping, run monitors, interface distance and the surface-area diagnostic.
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "muskat/evolution.hpp"
#include "muskat/linear.hpp"
#include "test_support.hpp"

using namespace muskat;
using muskat::testing::gaussian;
using muskat::testing::order_fit;
using std::numbers::pi;

namespace {

InterfaceState bumps(const Grid& g, double af, double ah, const PhysicalParams& p = {}, double width = 1.0) {
  return InterfaceState(gaussian(g, af, 0.0, width), gaussian(g, ah, 0.0, width), p);
}

// Zero-mean data with energy in every mode, decaying like k^-2.
InterfaceState broadband(const Grid& g, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * pi);
  const int kmax = static_cast<int>(g.size() / 2) - 1;
  auto make = [&] {
    std::vector<double> phase(kmax + 1);
    for (auto& p : phase) p = ph(rng);
    return GridFunction::sample(g, [&](double x) {
      double s = 0.0;
      for (int k = 1; k <= kmax; ++k) s += std::cos(k * x + phase[k]) / (k * k);
      return amp * s;
    });
  };
  auto f = make();
  auto h = make();
  return InterfaceState(std::move(f), std::move(h), PhysicalParams{});
}

// Distance between the curves by dense resampling: a global scan, then a fine
// scan around the best pair.
double dense_distance(const InterfaceState& X) {
  const TrigInterpolant fi(X.f), hi(X.h);
  const double P = X.grid().period(), c = X.c_inf();
  auto scan = [&](double a0, double a1, double b0, double b1, int M, double& xa, double& xb) {
    std::vector<double> xs(M), ys(M), xt(M), yt(M);
    for (int i = 0; i < M; ++i) {
      xs[i] = a0 + (a1 - a0) * i / (M - 1);
      ys[i] = c + fi(xs[i]);
      xt[i] = b0 + (b1 - b0) * i / (M - 1);
      yt[i] = hi(xt[i]);
    }
    double best = 1e300;
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        const double dx = std::remainder(xs[i] - xt[j], P), dy = ys[i] - yt[j];
        const double d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
          xa = xs[i];
          xb = xt[j];
        }
      }
    }
    return std::sqrt(best);
  };
  double xa = 0, xb = 0;
  scan(-0.5 * P, 0.5 * P, -0.5 * P, 0.5 * P, 2048, xa, xb);
  const double w = 2.0 * P / 2048;
  double ya = 0, yb = 0;
  return scan(xa - w, xa + w, xb - w, xb + w, 3001, ya, yb);
}

StepperConfig quick(double t_end, double dt = 0.02) {
  StepperConfig c;
  c.t_end = t_end;
  c.dt_initial = dt;
  return c;
}

}  // namespace

TEST(Evolution, FlatStateIsStationary) {
  const Grid g(64, 2.0 * pi);
  const auto X = InterfaceState::flat(g, PhysicalParams{});
  for (auto m : {Method::rk4, Method::rk2_imex}) {
    const auto Y = tentative_step(X, 0.01, m);
    EXPECT_EQ(max_abs(Y.f), 0.0);
    EXPECT_EQ(max_abs(Y.h), 0.0);
  }
  StepperConfig cfg = quick(0.5);
  cfg.window_half_width = 0.5;
  const auto r = run(X, cfg);
  EXPECT_EQ(r.status, RunStatus::completed);
  EXPECT_EQ(r.record.rows.back().t, 0.5);
  for (const auto& row : r.record.rows) {
    EXPECT_EQ(row.gap, 1.0);
    EXPECT_EQ(row.dist, 1.0);
    EXPECT_EQ(row.hnorm_f, 0.0);
    EXPECT_EQ(row.mean_h, 0.0);
    EXPECT_NEAR(row.surface_area, 1.0, 1e-14);
  }
  // S is the constant 2 delta c
  const auto sq = squirt_diagnostic(r.record, {r.record.window_center, 0.5, 0.3});
  ASSERT_FALSE(sq.S.empty());
  for (std::size_t i = 0; i < sq.S.size(); ++i) EXPECT_NEAR(sq.S[i], 2.0 * (0.5 + 0.3 * (sq.t[i] - 0.5)), 1e-13);
  EXPECT_NEAR(sq.S.back(), 2.0 * 0.5 * 1.0, 1e-14);
  EXPECT_TRUE(sq.non_decreasing);
}

TEST(Evolution, SinusoidDecaysAtTheSymbolRate) {
  const Grid g(64, 2.0 * pi);
  const PhysicalParams p;
  const auto c1 = GridFunction::sample(g, [](double x) { return std::cos(x); });
  const auto sm = symbol_modes(p, 1.0);
  const double eps = 1e-4, dt = 1e-3;
  for (int j = 0; j < 2; ++j) {
    InterfaceState X(eps * sm.vectors(0, j) * c1, eps * sm.vectors(1, j) * c1, p);
    double worst = 0.0;
    for (int n = 1; n <= 1000; ++n) {
      X = rk4_step(X, dt);
      if (n % 50 == 0) {
        const double a = inner(X.f, c1) / inner(c1, c1);
        const double expect = eps * sm.vectors(0, j) * std::exp(sm.lambda(j) * n * dt);
        worst = std::max(worst, std::abs(a - expect) / std::abs(expect));
      }
    }
    EXPECT_LE(worst, 1e-3) << "eigen-direction " << j;
  }
}

TEST(Evolution, StepDoublingOrders) {
  const Grid g(128, 2.0 * pi);
  PhysicalParams p;
  p.rho3 = 4.0;
  const InterfaceState X(gaussian(g, 0.2), gaussian(g, -0.15, 1.0), p);
  const double T = 0.2;
  for (auto [m, target] : {std::pair{Method::rk4, 4.0}, std::pair{Method::rk2_imex, 2.0}}) {
    std::vector<double> dts, errs;
    for (int n : {20, 40, 80}) {
      const auto a = integrate_fixed(X, T / n, n, m);
      const auto b = integrate_fixed(X, T / (2 * n), 2 * n, m);
      dts.push_back(T / n);
      errs.push_back(std::max(max_abs(a.f - b.f), max_abs(a.h - b.h)));
    }
    EXPECT_NEAR(order_fit(dts, errs), target, 0.2) << to_string(m);
  }
}

TEST(Evolution, ImexAgreesWithRk4) {
  const Grid g(128, 2.0 * pi);
  const auto X = bumps(g, 0.1, -0.1);
  StepperConfig a = quick(0.3, 5e-3), b = a;
  b.method = Method::rk2_imex;
  const auto ra = run(X, a), rb = run(X, b);
  ASSERT_EQ(ra.status, RunStatus::completed);
  ASSERT_EQ(rb.status, RunStatus::completed);
  EXPECT_LE(max_abs(ra.final_state.f - rb.final_state.f), 1e-5);
  EXPECT_LE(max_abs(ra.final_state.h - rb.final_state.h), 1e-5);
}

TEST(Evolution, InterfaceDistance) {
  const Grid g(256, 2.0 * pi);
  const double c = 1.0;
  EXPECT_EQ(interface_distance(InterfaceState::flat(g, PhysicalParams{})), c);
  const auto bump = bumps(g, 0.0, c / 2);
  const double d = interface_distance(bump);
  EXPECT_LE(d, c / 2 + 1e-15);
  EXPECT_LE(d, admissibility_gap(bump) + 1e-15);
  // steep offset bumps: the closest approach is not vertical
  const InterfaceState steep(gaussian(g, -0.6, 0.3, 0.35), gaussian(g, 0.6, -0.3, 0.35), PhysicalParams{});
  const double ds = interface_distance(steep);
  EXPECT_LT(ds, admissibility_gap(steep) - 1e-3);
  EXPECT_NEAR(ds, dense_distance(steep), 1e-6);
}

TEST(Evolution, StableSmallDataRelaxes) {
  const Grid g(128, 2.0 * pi);
  // crests bend toward each other, so the gap minimum sits below c
  const auto X = bumps(g, -1e-2, 1e-2, PhysicalParams{}, 0.7);
  StepperConfig cfg = quick(4.0);
  const auto r = run(X, cfg);
  ASSERT_EQ(r.status, RunStatus::completed);
  const auto& rows = r.record.rows;
  // monotone H^r decay after a short transient
  for (std::size_t i = 5; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].hnorm_f + rows[i].hnorm_h, rows[i - 1].hnorm_f + rows[i - 1].hnorm_h) << i;
  }
  // the gap relaxes toward c + mean(f) - mean(h)
  const double target = X.c_inf() + mean(X.f) - mean(X.h);
  EXPECT_LT(std::abs(rows.back().gap - target), 0.5 * std::abs(rows.front().gap - target));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].gap, rows[i - 1].gap);
  // means: drift per unit time
  const double T = rows.back().t;
  EXPECT_LE(std::abs(rows.back().mean_f - rows.front().mean_f) / T, 1e-7);
  EXPECT_LE(std::abs(rows.back().mean_h - rows.front().mean_h) / T, 1e-7);
}

TEST(Evolution, HighModeEnergyDecays) {
  const Grid g(128, 2.0 * pi);
  const auto X = broadband(g, 1e-2, 3);
  const auto r = run(X, quick(0.4));
  ASSERT_EQ(r.status, RunStatus::completed);
  const auto& rows = r.record.rows;
  ASSERT_GT(rows.size(), 20u);
  for (std::size_t i = 11; i < rows.size(); ++i) EXPECT_LT(rows[i].himode_frac, rows[i - 1].himode_frac) << i;
  for (const auto& row : rows) {
    EXPECT_LE(std::abs(row.mean_f - rows.front().mean_f), 1e-7 * std::max(row.t, 1e-300) + 1e-15);
  }
}

TEST(Evolution, RerunsAreBitIdentical) {
  const Grid g(128, 2.0 * pi);
  const auto X = broadband(g, 2e-2, 5);
  const auto a = run(X, quick(0.2));
  const auto b = run(X, quick(0.2));
  ASSERT_EQ(a.record.rows.size(), b.record.rows.size());
  EXPECT_TRUE(a.record.rows == b.record.rows);
  EXPECT_EQ(a.final_state.f.vec(), b.final_state.f.vec());
}

TEST(Evolution, DecayingRunAreaApproachesFlatValue) {
  const Grid g(64, 2.0 * pi);
  const auto c1 = GridFunction::sample(g, [](double x) { return std::cos(x); });
  const InterfaceState X(0.2 * c1, -0.2 * c1, PhysicalParams{});
  StepperConfig cfg = quick(10.0, 0.05);
  cfg.window_center = 0.0;
  cfg.window_half_width = 0.8;
  const auto r = run(X, cfg);
  ASSERT_EQ(r.status, RunStatus::completed);
  const double flat = 2.0 * 0.8 * X.c_inf();
  const auto& rows = r.record.rows;
  EXPECT_LT(std::abs(rows.back().surface_area - flat), 0.1 * std::abs(rows.front().surface_area - flat));
  const auto sq = squirt_diagnostic(r.record, {0.0, 0.8, 0.05});
  EXPECT_NEAR(sq.final_area, 2.0 * 0.8 * X.c_inf(), 0.1 * std::abs(rows.front().surface_area - flat));
}

TEST(Evolution, NearTouchingDataTripsTheContactMonitor) {
  // upper crest falling onto a nearly passive lower crest: the gap shrinks
  const Grid g(128, 2.0 * pi);
  PhysicalParams p;
  p.rho3 = 2.001;
  const auto X = bumps(g, 0.5, 1.45, p, 0.5);
  ASSERT_NEAR(admissibility_gap(X), 0.05 * p.c_inf, 1e-12);
  StepperConfig cfg = quick(8.0);
  cfg.gap_floor = 0.03;
  cfg.window_center = 0.0;
  cfg.window_half_width = 0.5;
  const auto r = run(X, cfg);
  EXPECT_EQ(r.status, RunStatus::contact_suspected);
  const auto& rows = r.record.rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].gap, rows[i - 1].gap) << i;
    EXPECT_GT(rows[i].gap, cfg.gap_floor) << i;
  }
  // no squirt: the area stays finite while the gap closes in on the floor
  const auto sq = squirt_diagnostic(r.record, {0.0, 0.5, 0.0});
  EXPECT_GT(sq.c1, 0.0);
  EXPECT_LT(sq.final_gap, 0.031);
  EXPECT_GT(sq.final_area, 2.0 * sq.final_gap);
  EXPECT_GT(sq.final_area, 0.1);
  EXPECT_TRUE(sq.non_decreasing);
  EXPECT_GT(sq.near_min_fraction, 0.0);
  EXPECT_LT(sq.near_min_fraction, 1.0);
  EXPECT_TRUE(sq.gap_localized) << sq.near_min_fraction << " vs " << sq.parabolic_fraction;
}

TEST(Evolution, GuardsAndValidation) {
  const Grid g(64, 2.0 * pi);
  const auto X = bumps(g, 0.1, -0.1);
  StepperConfig bad;
  bad.dt_min = 1.0;
  bad.cfl_safety = 2.0;
  EXPECT_EQ(bad.violations().size(), 2u);
  EXPECT_THROW(run(X, bad), InvalidArgument);
  StepperConfig floor_high = quick(0.1);
  floor_high.gap_floor = 2.0;
  EXPECT_THROW(run(X, floor_high), InvalidArgument);
  StepperConfig tiny = quick(0.1);
  tiny.dt_min = 0.5 * tiny.dt_initial;
  try {
    step(X, 0.25 * tiny.dt_initial, tiny);
    FAIL();
  } catch (const StepAbort& e) {
    EXPECT_EQ(e.reason(), RunStatus::stiffness_abort);
    EXPECT_EQ(e.last_state().f.vec(), X.f.vec());
  }
  EXPECT_THROW(run(InterfaceState(gaussian(g, -1.0), GridFunction(g), PhysicalParams{}), quick(0.1)), AdmissibilityError);
  StepperConfig ceiling = quick(0.1);
  ceiling.norm_ceiling = 1e-3;
  EXPECT_EQ(run(X, ceiling).status, RunStatus::norm_blowup_suspected);
}
