#include <gtest/gtest.h>

#include <random>

#include "plasmavac/vacuum.hpp"

using namespace plasmavac;

namespace {

// A'' - |k|^2 A = 0 on [0, L], A'(0) = -gN (flat front, d = -1), A(L) = 0;
// second-order differences with a ghost node, Thomas algorithm
std::vector<double> two_point_bvp(double k, double gN, double L, int n) {
  const double h = L / n;
  std::vector<double> a(n, 1.0), b(n, -(2.0 + k * k * h * h)), c(n, 1.0), r(n, 0.0);
  // node 0: ghost A_{-1} = A_1 + 2 h gN
  c[0] = 2.0;
  r[0] = -2.0 * h * gN;
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    r[i] -= w * r[i - 1];
  }
  std::vector<double> A(n + 1, 0.0);
  A[n - 1] = r[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) A[i] = (r[i] - c[i] * A[i + 1]) / b[i];
  return A;
}

VacuumCoefficients flat() { return {0.0, 0.0, -1.0}; }

}  // namespace

TEST(Vacuum, ZeroDataZeroField) {
  const auto sol = solve_vacuum({{1, 0, 0.0}, {2, 1, 0.0}}, flat());
  EXPECT_EQ(sol.field(Vec3(0.3, 1, 2)).norm(), 0.0);
  EXPECT_EQ(sol.potential(Vec3(0.0, 1, 2)), 0.0);
  const auto e = vacuum_energy_identity(sol);
  EXPECT_EQ(e.J, 0.0);
  EXPECT_EQ(e.K, 0.0);
  EXPECT_EQ(e.gap, 0.0);
}

TEST(Vacuum, SingleModeClosedFormAndBvp) {
  const auto m = solve_vacuum_mode(1, 0, 1.0, flat());
  EXPECT_NEAR(std::abs(m.a), 1.0, 1e-15);
  EXPECT_NEAR(m.field(0.0)(0).real(), 1.0, 1e-15);
  EXPECT_NEAR(m.lambda.real(), -1.0, 1e-15);
  // numerical two-point solve converges to the closed form at second order
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const int n = 2000 << r;
    const auto A = two_point_bvp(1.0, 1.0, 25.0, n);
    double e = 0.0;
    for (int i = 0; i <= n; i += n / 50) e = std::max(e, std::abs(A[i] - m.potential(25.0 * i / n).real()));
    err[r] = e;
  }
  EXPECT_LT(err[1], 1e-5);
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.2);
}

TEST(Vacuum, SampledFieldMatchesClosedForm) {
  // g_N = cos x2 is the mode k = (1,0) with value 1/2 plus its conjugate
  const auto sol = solve_vacuum({{1, 0, 0.5}}, flat());
  double worst = 0.0;
  for (double x1 : {0.0, 0.5, 2.0, 7.0})
    for (double x2 : {0.0, 0.7, 2.9}) {
      const Vec3 H = sol.field(Vec3(x1, x2, 0.4));
      const double e = std::exp(-x1);
      // curl form (-H1, H2, H3) = grad(e^{-x1} cos x2)
      const Vec3 ref(e * std::cos(x2), -e * std::sin(x2), 0.0);
      worst = std::max(worst, (H - ref).norm() / std::max(ref.norm(), 1e-300));
    }
  EXPECT_LT(worst, 1e-8);
}

TEST(Vacuum, DecayRateSqrt5) {
  const auto m = solve_vacuum_mode(2, 1, 3.0, flat());
  const double x0 = 1.0, x1 = 6.0;
  const double rate = std::log(m.field(x0).norm() / m.field(x1).norm()) / (x1 - x0);
  EXPECT_NEAR(rate / std::sqrt(5.0), 1.0, 0.01);
  EXPECT_LE(std::abs(m.potential(3.0)), std::abs(m.potential(0.0)));
}

TEST(Vacuum, SolvabilityAndConditioningErrors) {
  EXPECT_THROW(solve_vacuum_mode(0, 0, 0.1, flat()), SolvabilityError);
  EXPECT_NO_THROW(solve_vacuum_mode(0, 0, 0.0, flat()));
  EXPECT_THROW(solve_vacuum_mode(1, 0, 1.0, {0.0, 0.0, -0.3}), ConditioningError);
  EXPECT_THROW(normal_derivative_from_tangential({0, 0, -0.3}, Vec3::Zero(), Vec3::Zero()), ConditioningError);
}

TEST(Vacuum, SlopedFrontSatisfiesSystem) {
  // front slopes psi != 0: curl form = grad A, div of div form = 0, trace = g_N
  const VacuumCoefficients c{0.3, -0.2, -1.1};
  const cplx g(0.7, -0.4);
  const auto m = solve_vacuum_mode(2, -1, g, c);
  EXPECT_LT(m.lambda.real(), 0.0);
  for (double x1 : {0.0, 0.8, 2.5}) {
    const CVec3 H = m.field(x1), dH = m.d1_field(x1);
    const cplx A = m.potential(x1), dA = m.lambda * A;
    const cplx ik2(0.0, 2.0), ik3(0.0, -1.0);
    EXPECT_LT(std::abs(H(0) * c.d - dA), 1e-14);
    EXPECT_LT(std::abs(c.psi2 * H(0) + H(1) - ik2 * A), 1e-14);
    EXPECT_LT(std::abs(c.psi3 * H(0) + H(2) - ik3 * A), 1e-14);
    const cplx div = dH(0) - c.psi2 * dH(1) - c.psi3 * dH(2) + c.d * (ik2 * H(1) + ik3 * H(2));
    EXPECT_LT(std::abs(div), 1e-14);
  }
  const CVec3 H0 = m.field(0.0);
  EXPECT_LT(std::abs(H0(0) - c.psi2 * H0(1) - c.psi3 * H0(2) - g), 1e-14);
}

TEST(Vacuum, RecoveryMatchesAnalyticDerivative) {
  const VacuumCoefficients c{0.2, 0.1, -1.0};
  const auto sol = solve_vacuum({{1, 0, 0.5}, {1, 2, cplx(0.1, 0.3)}}, c);
  SlabGrid g{20, 16, 16, 4.0};
  const auto rec = recover_normal_derivative_vacuum(sol.sample(g), c);
  double err = 0.0, scale = 0.0;
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        Vec3 ref = Vec3::Zero();
        for (const auto& m : sol.modes) {
          const cplx e = std::exp(cplx(0.0, m.k2 * g.x2(a) + m.k3 * g.x3(b)));
          ref += 2.0 * (m.d1_field(g.x1(j)) * e).real();
        }
        for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(rec.d1H(i, j, a, b) - ref(i)));
        scale = std::max(scale, ref.cwiseAbs().maxCoeff());
      }
  EXPECT_LT(err, 1e-12 * scale);
  EXPECT_EQ(recover_normal_derivative_vacuum(SlabField(g, 3), c).d1H.max_abs(), 0.0);
}

TEST(Vacuum, RecoveryRatioStableUnderRefinement) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const VacuumCoefficients c{0.1, -0.2, -0.9};
  std::vector<ModeDatum> data;
  for (int k2 = 0; k2 <= 2; ++k2)
    for (int k3 = -2; k3 <= 2; ++k3)
      if (k2 > 0 || k3 > 0) data.push_back({k2, k3, cplx(u(gen), u(gen))});
  const auto sol = solve_vacuum(data, c);
  double ratio[2];
  for (int r = 0; r < 2; ++r) {
    SlabGrid g{16 << r, 8 << r, 8 << r, 6.0};
    ratio[r] = recover_normal_derivative_vacuum(sol.sample(g), c).ratio;
  }
  EXPECT_GT(ratio[0], 0.0);
  EXPECT_NEAR(ratio[1] / ratio[0], 1.0, 0.05);
}

TEST(Vacuum, EnergyIdentitySingleAndTwoModes) {
  auto sol = solve_vacuum({{1, 0, 0.5}}, flat());
  auto e = vacuum_energy_identity(sol);
  // K = int |H|^2 = (2 pi)^2 * 2 |H(0)|^2 / (2 |k|) per mode pair, |H(0)|^2 = 2 (1/2)^2
  const double K = 4.0 * std::numbers::pi * std::numbers::pi * 2.0 * 0.5 / 2.0;
  EXPECT_NEAR(e.K / K, 1.0, 1e-9);
  EXPECT_LT(e.gap, 1e-6);
  sol = solve_vacuum({{1, 0, 0.5}, {2, 1, cplx(0.3, -0.2)}}, flat());
  e = vacuum_energy_identity(sol);
  EXPECT_LT(e.gap, 1e-6);
}

TEST(Vacuum, EnergyIdentityRandomSuperpositionsAndPositivity) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    const VacuumCoefficients c{0.3 * u(gen), 0.3 * u(gen), -1.0 - 0.4 * u(gen)};
    std::vector<ModeDatum> data;
    for (int k2 = 0; k2 <= 2; ++k2)
      for (int k3 = -2; k3 <= 2; ++k3)
        if (k2 > 0 || k3 > 0) data.push_back({k2, k3, cplx(u(gen), u(gen))});
    const auto sol = solve_vacuum(data, c);
    const auto e = vacuum_energy_identity(sol);
    EXPECT_LT(e.gap, 1e-6);
    double l2 = 0.0;
    for (const auto& m : sol.modes) l2 += 2.0 * 4.0 * std::numbers::pi * std::numbers::pi * m.field_l2sq();
    EXPECT_GE(e.K, 0.5 * l2);
  }
}

TEST(Vacuum, ResidualsDecreaseAtSecondOrder) {
  const VacuumCoefficients c{0.2, -0.1, -1.0};
  const auto sol = solve_vacuum({{1, 0, 0.5}, {1, 1, cplx(0.2, 0.1)}}, c);
  double curl[3], div[3];
  for (int r = 0; r < 3; ++r) {
    SlabGrid g{16 << r, 8, 8, 4.0};
    const auto res = vacuum_residuals(sol.sample(g), c);
    curl[r] = res.curl;
    div[r] = res.div;
  }
  EXPECT_NEAR(std::log2(curl[0] / curl[1]), 2.0, 0.3);
  EXPECT_NEAR(std::log2(curl[1] / curl[2]), 2.0, 0.3);
  EXPECT_NEAR(std::log2(div[1] / div[2]), 2.0, 0.3);
}
