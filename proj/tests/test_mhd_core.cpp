#include <gtest/gtest.h>

#include <random>

#include "plasmavac/mhd_core.hpp"

using namespace plasmavac;

namespace {

PlasmaState random_state(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-2.0, 2.0), pp(0.2, 3.0);
  PlasmaState s;
  s.p = pp(g);
  s.v = Vec3(u(g), u(g), u(g));
  s.H = Vec3(u(g), u(g), u(g));
  s.S = 0.5 * u(g);
  return s;
}

}  // namespace

TEST(Eos, IdealGasClosedForms) {
  auto e = evaluate_eos(IdealGas{5.0 / 3.0}, 1.0, 0.0);
  EXPECT_NEAR(e.rho, 1.0, 1e-15);
  EXPECT_NEAR(e.c2, 5.0 / 3.0, 1e-15);

  e = evaluate_eos(IdealGas{2.0}, 4.0, 0.0);
  EXPECT_NEAR(e.rho, 2.0, 1e-15);
  EXPECT_NEAR(e.c2, 4.0, 1e-14);

  // c^2 = dp/drho at fixed S, by central differences of p(rho) = rho^gamma
  const double g = 2.0, rho = 2.0, h = 1e-5;
  const double fd = (std::pow(rho + h, g) - std::pow(rho - h, g)) / (2 * h);
  EXPECT_NEAR(e.c2, fd, 1e-8);
  EXPECT_NEAR(e.rho_p * e.c2, 1.0, 1e-15);
}

TEST(Eos, NonPositivePressureThrowsWithValue) {
  try {
    evaluate_eos(IdealGas{}, -0.25, 0.0);
    FAIL();
  } catch (const EosDomainError& err) {
    EXPECT_EQ(err.value(), -0.25);
  }
  EXPECT_THROW(evaluate_eos(IdealGas{}, 0.0, 0.0), EosDomainError);
}

TEST(Matrices, UnitStateGivesIdentityA0) {
  PlasmaState s;
  s.p = 1.0;
  const auto m = assemble_matrices(LinearEos{1.0, 1.0, 1.0}, s);
  EXPECT_EQ(m.A0, Mat8::Identity());
}

TEST(Matrices, A1AtRestHasOnlyPressureVelocityCoupling) {
  PlasmaState s;
  const auto m = assemble_matrices(IdealGas{}, s);
  int nonzero = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) nonzero += m.A1(i, j) != 0.0;
  EXPECT_EQ(nonzero, 2);
  EXPECT_EQ(m.A1(0, 1), 1.0);
  EXPECT_EQ(m.A1(1, 0), 1.0);
}

TEST(Matrices, A1WithNormalVelocity) {
  PlasmaState s;
  s.v = Vec3(1, 0, 0);
  const auto m = assemble_matrices(LinearEos{1.0, 1.0, 1.0}, s);
  Mat8 expect = Mat8::Identity();  // rho = c2 = 1, v1 = 1 on every diagonal slot
  expect(0, 1) = expect(1, 0) = 1.0;
  EXPECT_EQ(m.A1, expect);
}

TEST(Matrices, DisplayedMagneticEntries) {
  PlasmaState s;
  s.H = Vec3(0.3, -0.7, 1.1);
  const auto m = assemble_matrices(LinearEos{}, s);
  // A1: rows v2,v3 against H2,H3 carry -H1; row v1 against H2,H3 carries H2,H3
  EXPECT_EQ(m.A1(kV2, kH2), -0.3);
  EXPECT_EQ(m.A1(kV3, kH3), -0.3);
  EXPECT_EQ(m.A1(kV1, kH2), -0.7);
  EXPECT_EQ(m.A1(kV1, kH3), 1.1);
  EXPECT_EQ(m.A1(kV1, kH1), 0.0);
  EXPECT_EQ(m.A2(kV2, kH1), 0.3);
  EXPECT_EQ(m.A2(kV1, kH1), 0.7);
  EXPECT_EQ(m.A3(kV1, kH1), -1.1);
}

TEST(Matrices, SymmetryPositivityAndAxisSwap) {
  std::mt19937_64 g(7);
  Eigen::PermutationMatrix<8> P;
  P.indices() << 0, 1, 3, 2, 4, 6, 5, 7;
  for (int n = 0; n < 200; ++n) {
    const PlasmaState s = random_state(g);
    const auto m = assemble_matrices(IdealGas{}, s);
    for (int j = 0; j < 4; ++j) EXPECT_TRUE(m[j] == m[j].transpose());
    EXPECT_TRUE(m.A0.isDiagonal(0.0));
    for (int i = 0; i < 8; ++i) EXPECT_GT(m.A0(i, i), 0.0);

    PlasmaState t = s;
    std::swap(t.v(1), t.v(2));
    std::swap(t.H(1), t.H(2));
    const auto mt = assemble_matrices(IdealGas{}, t);
    EXPECT_TRUE(Mat8(P * m.A2 * P.transpose()) == mt.A3);
  }
}

TEST(Hyperbolicity, Margins) {
  PlasmaState s;
  s.p = 1.0;
  EXPECT_DOUBLE_EQ(hyperbolicity_margin(IdealGas{}, s), 1.0);
  s.p = -1.0;
  EXPECT_LE(hyperbolicity_margin(IdealGas{}, s), 0.0);
  s.p = 1.0;
  EXPECT_DOUBLE_EQ(hyperbolicity_margin(LinearEos{1.0, 2.0, 3.0}, s), 2.0);
}

TEST(TotalPressure, Arithmetic) {
  PlasmaState s;
  s.p = 1.0;
  EXPECT_EQ(total_pressure(s), 1.0);
  s.p = 0.0;
  s.H = Vec3(0, 1, 1);
  EXPECT_EQ(total_pressure(s), 1.0);
  s.p = 2.0;
  s.H = Vec3(1, 2, 2);
  EXPECT_EQ(total_pressure(s), 6.5);
}

namespace {

// smooth test field with exact partials
AnalyticPlasmaField wave_field(double amp) {
  AnalyticPlasmaField f;
  f.value = [amp](double t, const Vec3& x) {
    Vec8 u;
    const double ph = x(0) + 0.5 * x(1) - 0.3 * x(2) - t;
    u << 1.0 + amp * std::sin(ph), amp * std::cos(ph), 0.2, -0.1, 0.5, 0.3 + amp * std::sin(2 * ph), 0.1,
        amp * std::cos(x(1));
    return u;
  };
  f.partial = [amp](double t, const Vec3& x, int a) {
    const double ph = x(0) + 0.5 * x(1) - 0.3 * x(2) - t;
    const double dph[4] = {-1.0, 1.0, 0.5, -0.3};
    Vec8 d = Vec8::Zero();
    d(kP) = amp * std::cos(ph) * dph[a];
    d(kV1) = -amp * std::sin(ph) * dph[a];
    d(kH2) = 2 * amp * std::cos(2 * ph) * dph[a];
    if (a == 2) d(kS) = -amp * std::sin(x(1));
    return d;
  };
  return f;
}

}  // namespace

TEST(Residual, ConstantFieldIsZero) {
  AnalyticPlasmaField f;
  f.value = [](double, const Vec3&) { return PlasmaState{}.to_vector(); };
  f.partial = [](double, const Vec3&, int) { return Vec8::Zero().eval(); };
  EXPECT_EQ(nonconservative_residual(IdealGas{}, f, 0.3, Vec3(1, 2, 3)).norm(), 0.0);
}

TEST(Residual, MatchesFiniteDifferenceOperatorAtSecondOrder) {
  const auto f = wave_field(0.1);
  const double t = 0.4;
  const Vec3 x(0.3, 1.2, -0.7);
  const Vec8 exact = nonconservative_residual(IdealGas{}, f, t, x);
  const auto m = assemble_matrices(IdealGas{}, PlasmaState::from_vector(f.value(t, x)));
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const double h = 1e-2 / (1 << r);
    Vec8 fd = m.A0 * (f.value(t + h, x) - f.value(t - h, x)) / (2 * h);
    for (int j = 1; j <= 3; ++j) {
      Vec3 e = Vec3::Zero();
      e(j - 1) = h;
      fd += m[j] * (f.value(t, x + e) - f.value(t, x - e)) / (2 * h);
    }
    err[r] = (fd - exact).norm();
  }
  EXPECT_LT(err[0], 1e-4);
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.1);
}

TEST(Residual, AcousticDefectVanishesWithAmplitude) {
  double prev = 1e300;
  for (double amp : {1e-1, 1e-2, 1e-3}) {
    const double r = nonconservative_residual(IdealGas{}, wave_field(amp), 0.1, Vec3(0.2, 0.4, 0.6)).norm();
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1e-2);
}
