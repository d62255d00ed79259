#include <gtest/gtest.h>

#include <random>

#include "plasmavac/geometry.hpp"

using namespace plasmavac;

TEST(CutOff, Values) {
  const CutOff c;
  auto v = cutoff_eval(c, 0.0);
  EXPECT_EQ(v.chi, 1.0);
  EXPECT_EQ(v.dchi, 0.0);
  v = cutoff_eval(c, 10.0);
  EXPECT_EQ(v.chi, 0.0);
  EXPECT_EQ(v.dchi, 0.0);
  EXPECT_EQ(c.value(-1.0), 1.0);
  EXPECT_EQ(c.value(1.0), 1.0);
  EXPECT_EQ(c.value(-4.2), 0.0);
}

TEST(CutOff, MaxSlopeMatchesSampledMaximum) {
  const CutOff c;
  double m = 0.0;
  for (int i = 0; i <= 200000; ++i) m = std::max(m, std::abs(c.derivative(1.0 + 3.2 * i / 200000.0)));
  EXPECT_NEAR(m, 0.4908738521234052, 1e-9);
  EXPECT_NEAR(c.max_slope(), m, 1e-9);
  EXPECT_LT(m, 0.5);
}

TEST(CutOff, SteepTransitionRejected) {
  EXPECT_THROW(CutOff(1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(CutOff(0.5, 4.0), std::invalid_argument);
}

TEST(CutOff, DerivativeMatchesFiniteDifference) {
  const CutOff c;
  for (double s : {-3.0, -1.7, 1.3, 2.6, 4.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(c.derivative(s), (c.value(s + h) - c.value(s - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(c.second_derivative(s), (c.derivative(s + h) - c.derivative(s - h)) / (2 * h), 1e-7);
  }
}

TEST(Lift, ZeroFront) {
  const auto phi = InterfaceField::zero();
  const CutOff c;
  for (double x1 : {0.0, 0.7, 2.5}) {
    const auto p = lift_front(phi, c, Side::plasma, 0.0, Vec3(x1, 1, 2));
    const auto m = lift_front(phi, c, Side::vacuum, 0.0, Vec3(x1, 1, 2));
    EXPECT_EQ(p.Phi, x1);
    EXPECT_EQ(m.Phi, -x1);
    EXPECT_EQ(p.d1Phi, 1.0);
    EXPECT_EQ(m.d1Phi, -1.0);
  }
}

TEST(Lift, TraceEqualsFront) {
  const auto phi = InterfaceField::single(0.4, 1, 2, 0.5, 0.3);
  const CutOff c;
  for (Side s : {Side::plasma, Side::vacuum}) {
    const auto L = lift_front(phi, c, s, 0.7, Vec3(0.0, 1.1, 2.3));
    EXPECT_EQ(L.Psi, phi.value(0.7, 1.1, 2.3));
    EXPECT_EQ(L.Phi, L.Psi);
  }
}

TEST(Lift, InsidePlateau) {
  const auto phi = InterfaceField::single(0.5, 1, 0);
  const auto L = lift_front(phi, CutOff(), Side::plasma, 0.0, Vec3(0.5, 0.9, 0.0));
  EXPECT_DOUBLE_EQ(L.Psi, 0.5 * std::cos(0.9));
  EXPECT_EQ(L.d1Phi, 1.0);
}

TEST(Lift, CompactSupport) {
  const auto phi = InterfaceField::single(0.8, 2, 1, 1.0);
  for (double x1 : {4.2, 5.0, 9.0}) {
    const auto p = lift_front(phi, CutOff(), Side::plasma, 0.3, Vec3(x1, 0.2, 0.1));
    EXPECT_EQ(p.Psi, 0.0);
    EXPECT_EQ(p.Phi, x1);
  }
}

// observed order of the central-difference mismatch across three levels
TEST(Lift, DerivativesMatchFiniteDifferencesSecondOrder) {
  InterfaceField phi;
  phi.modes = {{0.5, 1, 0, 0.7, 0.1}, {0.3, 1, 2, -0.4, 1.0}};
  const CutOff c;
  const double t = 0.3;
  const Vec3 x(2.1, 0.8, 1.9);
  for (Side s : {Side::plasma, Side::vacuum}) {
    const Vec3 xs = x;
    const auto L = lift_front(phi, c, s, t, xs);
    double err[3];
    for (int r = 0; r < 3; ++r) {
      const double h = 0.02 / (1 << r);
      auto at = [&](double dt, const Vec3& dx) { return lift_front(phi, c, s, t + dt, xs + dx); };
      const double d1 = (at(0, Vec3(h, 0, 0)).Phi - at(0, Vec3(-h, 0, 0)).Phi) / (2 * h);
      const double d2 = (at(0, Vec3(0, h, 0)).Psi - at(0, Vec3(0, -h, 0)).Psi) / (2 * h);
      const double d3 = (at(0, Vec3(0, 0, h)).Psi - at(0, Vec3(0, 0, -h)).Psi) / (2 * h);
      const double dt = (at(h, Vec3::Zero()).Psi - at(-h, Vec3::Zero()).Psi) / (2 * h);
      err[r] = std::abs(d1 - L.d1Phi) + std::abs(d2 - L.d2Psi) + std::abs(d3 - L.d3Psi) + std::abs(dt - L.dtPsi);
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
  }
}

TEST(Admissibility, Reports) {
  auto r = admissibility(InterfaceField::zero());
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.inf_d1phi_plus, 1.0);

  r = admissibility(InterfaceField::single(0.9, 1, 0));
  EXPECT_TRUE(r.pass);
  EXPECT_GE(r.inf_d1phi_plus, 0.55);
  EXPECT_LE(r.sup_d1phi_minus, -0.55);

  r = admissibility(InterfaceField::single(1.5, 1, 1));
  EXPECT_FALSE(r.pass);
}

TEST(Admissibility, BoundsHoldOnSampledLifts) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const CutOff c;
  for (int n = 0; n < 50; ++n) {
    InterfaceField phi;
    double budget = 1.0;
    for (int m = 0; m < 3; ++m) {
      const double a = 0.33 * std::abs(u(g)) * budget;
      phi.modes.push_back({a, int(3 * u(g)), int(3 * u(g)), u(g), 3 * u(g)});
    }
    const auto r = admissibility(phi, c);
    ASSERT_TRUE(r.pass);
    for (int k = 0; k < 200; ++k) {
      const Vec3 x(4.2 * std::abs(u(g)), 3 * u(g), 3 * u(g));
      const auto p = lift_front(phi, c, Side::plasma, 0.0, x);
      const auto m = lift_front(phi, c, Side::vacuum, 0.0, x);
      // the sampled report can miss off-grid extrema; the amplitude bound cannot
      EXPECT_GE(p.d1Phi, 1.0 - c.max_slope() * phi.amplitude_bound() - 1e-12);
      EXPECT_LE(m.d1Phi, -1.0 + c.max_slope() * phi.amplitude_bound() + 1e-12);
      EXPECT_GE(p.d1Phi, 0.5);
      EXPECT_LE(p.d1Phi, 1.5);
      EXPECT_LE(m.d1Phi, -0.5);
      EXPECT_GE(m.d1Phi, -1.5);
    }
  }
}

TEST(Normal, Examples) {
  EXPECT_EQ(front_normal(InterfaceField::zero(), 0, 1, 2), Vec3(1, 0, 0));
  InterfaceField lin;
  lin.c2 = 1.0;
  EXPECT_EQ(front_normal(lin, 0, 0.3, 0.4), Vec3(1, -1, 0));
  InterfaceField f;
  f.modes = {{1.0, 1, 0, 0, -std::numbers::pi / 2}, {1.0, 0, 1, 0, 0}};  // sin x2 + cos x3
  const Vec3 n = front_normal(f, 0, 0, 0);
  EXPECT_NEAR(n(0), 1.0, 1e-15);
  EXPECT_NEAR(n(1), -1.0, 1e-15);
  EXPECT_NEAR(n(2), 0.0, 1e-15);
}
