#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "plasmavac/evolution.hpp"

using namespace plasmavac;

namespace {

// gas-dynamically stable, fields not parallel, tangential flow
FrozenState stable_state(double jump = 0.5) {
  PlasmaState U;
  U.v = Vec3(0, 0.3, -0.2);
  U.H = Vec3(0, 1.0, 0.2);
  FrozenExtras ex;
  ex.jump_dq = jump;
  return make_frozen(U, Vec3(0, 0.1, 0.9), ex);
}

DataSet small_data(std::uint64_t seed, bool forcing = true, bool boundary = true) {
  return DataSet::random(seed, 1, 0.25, forcing, boundary);
}

double rel_diff(const CMatX& a, const CMatX& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

// Simpson on [a, b], fine enough for smooth integrands (independent of the
// Gauss-Legendre path in the library)
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Ramp, SmoothSwitch) {
  Ramp r{0.5};
  EXPECT_EQ(r.value(-1.0), 0.0);
  EXPECT_EQ(r.value(0.5), 1.0);
  EXPECT_EQ(r.value(2.0), 1.0);
  EXPECT_NEAR(r.value(0.25), 0.5, 1e-15);
  const double e = 1e-6;
  for (double t : {0.1, 0.2, 0.37}) {
    EXPECT_NEAR(r.d1(t), (r.value(t + e) - r.value(t - e)) / (2 * e), 1e-7);
    EXPECT_NEAR(r.d2(t), (r.d1(t + e) - r.d1(t - e)) / (2 * e), 1e-5);
  }
}

TEST(Data, RandomIsDeterministicAndHalfPlane) {
  const DataSet a = DataSet::random(7, 2, 0.5), b = DataSet::random(7, 2, 0.5), c = DataSet::random(8, 2, 0.5);
  ASSERT_EQ(a.modes.size(), 12u);
  EXPECT_NO_THROW(a.validate());
  for (std::size_t i = 0; i < a.modes.size(); ++i) {
    EXPECT_EQ(a.modes[i].f0, b.modes[i].f0);
    EXPECT_EQ(a.modes[i].g1, b.modes[i].g1);
  }
  EXPECT_NE(a.modes[0].g1, c.modes[0].g1);
  DataSet bad = a;
  bad.modes[0].k2 = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Evolution, ZeroDataGivesZeroSolution) {
  SlabGrid g{16, 8, 8, 8.0};
  DataSet d = small_data(1).scaled(0.0);
  const auto tr = evolve_frozen(stable_state(), g, d, {1.0});
  for (const auto& lvl : tr.levels)
    for (const auto& s : lvl) {
      EXPECT_EQ(s.V.norm(), 0.0);
      EXPECT_EQ(s.phi, 0.0);
      EXPECT_EQ(s.g3, 0.0);
    }
  const auto r = estimate_ratio(tr);
  EXPECT_EQ(r.ratio_40, 0.0);
  EXPECT_EQ(r.ratio_42, 0.0);
  for (const auto& row : energy_ledger(tr).rows) EXPECT_EQ(row.I, 0.0);
}

TEST(Homogenization, LiftCarriesBoundaryData) {
  SlabGrid g{16, 8, 8, 8.0};
  const FrozenSystem sys(stable_state(), g, 1.0);
  const DataSet d = small_data(2);
  const double t = 0.2;
  for (const auto& m : d.modes) {
    const CMatX V = boundary_lift(d, m, t, g.n1, g.h1());
    EXPECT_EQ(V(0, 0), d.g2(m, t));
    EXPECT_EQ(-V(1, 0), d.g1(m, t));
    // pure interface data without forcing: f# only carries lift terms
    const auto h = homogenize_boundary_data(sys, d, m, t);
    EXPECT_LT(rel_diff(h.lift, sys.op.J.cast<cplx>() * V), 1e-15);
  }
  // no interface data: f# is the forcing itself
  const DataSet f = small_data(3, true, false);
  for (const auto& m : f.modes) {
    const auto h = homogenize_boundary_data(sys, f, m, 0.1);
    EXPECT_EQ(h.lift.norm(), 0.0);
    for (int j = 0; j <= g.n1; ++j)
      EXPECT_LT((h.f_sharp.col(j) - f.f(m, 0.1 + 0.5 * sys.dt, j * g.h1())).norm(), 1e-13);
  }
}

TEST(Homogenization, AgreesWithDirectScheme) {
  SlabGrid g{24, 8, 8, 8.0};
  const DataSet d = small_data(4);
  const auto a = evolve_frozen(stable_state(), g, d, {1.0, 0.0, true});
  const auto b = evolve_frozen(stable_state(), g, d, {1.0, 0.0, false});
  for (int n = 0; n <= a.steps(); n += 4)
    for (std::size_t i = 0; i < d.modes.size(); ++i) {
      if (n == 0) continue;
      EXPECT_LT(rel_diff(a.total_V(n, i), b.total_V(n, i)), 1e-11);
      EXPECT_LT(std::abs(a.levels[n][i].phi - b.levels[n][i].phi), 1e-11 * (1 + std::abs(b.levels[n][i].phi)));
    }
}

TEST(Evolution, SecondOrderInTime) {
  SlabGrid g{16, 8, 8, 8.0};
  const DataSet d = small_data(5);
  std::vector<CMatX> V;
  std::vector<cplx> phi;
  // steps aligned with the ramp end (tau = 0.25): the ramp is only C^2 there
  for (int r = 0; r < 3; ++r) {
    const auto tr = evolve_frozen(stable_state(), g, d, {1.0, 0.0625 / (1 << r)});
    V.push_back(tr.total_V(tr.steps(), 0));
    phi.push_back(tr.levels.back()[0].phi);
  }
  const double e0 = (V[0] - V[1]).norm(), e1 = (V[1] - V[2]).norm();
  EXPECT_NEAR(std::log2(e0 / e1), 2.0, 0.15);
  EXPECT_NEAR(std::log2(std::abs(phi[0] - phi[1]) / std::abs(phi[1] - phi[2])), 2.0, 0.15);
}

TEST(Evolution, SpatialConvergence) {
  // profile restricted to the coarse nodes; n1 = 32 is still pre-asymptotic
  const DataSet d = small_data(6);
  std::vector<CMatX> V;
  for (int r = 0; r < 3; ++r) {
    SlabGrid g{64 << r, 8, 8, 8.0};
    const auto tr = evolve_frozen(stable_state(), g, d, {1.0, 0.0125});
    const CMatX full = tr.total_V(tr.steps(), 1);
    CMatX c(8, 65);
    for (int j = 0; j <= 64; ++j) c.col(j) = full.col(j << r);
    V.push_back(c);
  }
  // interior second order, first-order boundary closure
  EXPECT_GT(std::log2((V[0] - V[1]).norm() / (V[1] - V[2]).norm()), 1.2);
}

TEST(Ledger, VacuumIdentityAndSlack) {
  SlabGrid g{32, 8, 8, 8.0};
  const auto tr = evolve_frozen(stable_state(), g, small_data(7), {2.0});
  const auto led = energy_ledger(tr);
  ASSERT_EQ(led.rows.size(), std::size_t(tr.steps() + 1));
  EXPECT_LT(led.max_J_gap(), 1e-12);
  double scale = 0.0;
  for (const auto& r : led.rows) scale = std::max(scale, r.rhs);
  EXPECT_GT(scale, 0.0);
  EXPECT_GE(led.min_slack(), -1e-12 * scale);
  for (const auto& r : led.rows) {
    EXPECT_EQ(r.L, 0.0);
    EXPECT_EQ(r.N, 0.0);
    EXPECT_GE(r.K, 0.0);
    EXPECT_LT(std::abs(r.M), 1e-12 * (1.0 + r.K));
  }
  std::ostringstream os;
  write_ledger_csv(os, led);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), long(led.rows.size() + 1));
}

TEST(Ledger, RejectsDirectTrajectory) {
  SlabGrid g{16, 8, 8, 8.0};
  const auto tr = evolve_frozen(stable_state(), g, small_data(7), {0.5, 0.0, false});
  EXPECT_THROW(energy_ledger(tr), std::invalid_argument);
}

TEST(Ratios, ScaleInvariant) {
  SlabGrid g{16, 8, 8, 8.0};
  const DataSet d = small_data(8);
  const auto a = estimate_ratio(evolve_frozen(stable_state(), g, d, {1.0}));
  const auto b = estimate_ratio(evolve_frozen(stable_state(), g, d.scaled(1e3), {1.0}));
  EXPECT_GT(a.ratio_40, 0.0);
  EXPECT_NEAR(b.ratio_40 / a.ratio_40, 1.0, 1e-10);
  EXPECT_NEAR(b.ratio_42 / a.ratio_42, 1.0, 1e-10);
  EXPECT_NEAR(b.den40 / a.den40, 1e3, 1e-7);
}

TEST(Ratios, DataNormsMatchQuadrature) {
  DataSet d;
  d.ramp.tau = 0.5;
  ModeData m;
  m.k2 = 1;
  m.f0(0) = 1.0;
  m.g1 = 1.0;
  d.modes.push_back(m);
  const double T = 1.0, L = 8.0;
  const auto n = data_norms(d, T, L);
  const double R0 = simpson([&](double t) { return std::pow(d.ramp.value(t), 2); }, 0, T);
  const double X0 = simpson([](double x) { return std::exp(-2 * x); }, 0, L);
  const double A = 8.0 * std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(n.f_L2, std::sqrt(A * X0 * R0), 1e-10);
  const double R1 = simpson([&](double t) { return std::pow(d.ramp.d1(t), 2); }, 0, T);
  EXPECT_NEAR(n.g_H1, std::sqrt(A * (2 * R0 + R1)), 1e-9);
}

TEST(FrontGradient, ResolvedFromTraces) {
  SlabGrid g{32, 8, 8, 8.0};
  const auto tr = evolve_frozen(stable_state(), g, small_data(9), {1.0});
  const auto err = front_gradient_errors(tr);
  ASSERT_EQ(int(err.size()), tr.steps());
  for (double e : err) EXPECT_LT(e, 1e-9);
}

TEST(Sampling, RealFieldsMatchModes) {
  SlabGrid g{16, 8, 8, 8.0};
  const auto tr = evolve_frozen(stable_state(), g, small_data(10), {0.5});
  const PlaneField phi = sample_front(tr, tr.steps());
  double ref = 0.0;
  const double x2 = g.x2(3), x3 = g.x3(5);
  for (std::size_t i = 0; i < tr.solvers.size(); ++i)
    ref += 2.0 * (tr.levels.back()[i].phi * std::exp(cplx(0, tr.solvers[i].k2() * x2 + tr.solvers[i].k3() * x3))).real();
  EXPECT_NEAR(phi(3, 5), ref, 1e-13);
  const SlabField U = sample_plasma(tr, tr.steps());
  EXPECT_EQ(U.ncomp(), 8);
}

TEST(Sources, ConstraintSourcesFromData) {
  const FrozenState f = stable_state();
  DataSet d;
  d.ramp.tau = 0.0;  // switched on
  ModeData m;
  m.k2 = 1;
  m.f0(kH1) = 1.0;   // e^{-x1} cos x2 in H1
  m.f0(kH2) = 0.5;   // e^{-x1} cos x2 in H2
  m.g1 = 0.5;        // cos x2
  d.modes.push_back(m);
  const auto F = constraint_source_F(d, f);
  const Vec3 x(0.3, 0.7, 1.1);
  const double e = std::exp(-x(0)), c = std::cos(x(1)), s = std::sin(x(1));
  // d1 f_n + d2 f_H2 with f_n = f_H1 - d2Psi f_H2 (d2Psi = 0 here)
  EXPECT_NEAR(F(1.0, x), -2 * e * c - e * s, 1e-13);
  const auto G = constraint_source_G(d, f);
  // H2 d2 g1 - f_n(0)
  EXPECT_NEAR(G(1.0, 0.7, 1.1), -f.Ub.H(1) * s - 2 * c, 1e-13);
}

TEST(WeightedNorm, ExponentialProfile) {
  // u = e^{-x1}, k = 0, one component
  ModalField u;
  u.modes.push_back({0, 0, [](double x) {
                       ProfileSample p;
                       p.v = Eigen::VectorXcd::Constant(1, std::exp(-x));
                       p.d1 = -p.v;
                       p.d11 = p.v;
                       return p;
                     }});
  const Sigma sg;
  const double L = 8.0, A = 4.0 * std::numbers::pi * std::numbers::pi;
  const double n0 = A * simpson([](double x) { return std::exp(-2 * x); }, 0, L);
  const double n1 = n0 + A * simpson([&](double x) { return sg(x) * sg(x) * std::exp(-2 * x); }, 0, L);
  const double n2 = n1 + A * simpson([&](double x) {
                      const double t = sg(x) * sg.derivative(x) - sg(x) * sg(x);
                      return (t * t + 1.0) * std::exp(-2 * x);
                    }, 0, L);
  EXPECT_NEAR(weighted_norm_sq(u, 0, sg, L), n0, 1e-10 * n0);
  EXPECT_NEAR(weighted_norm_sq(u, 1, sg, L), n1, 1e-9 * n1);
  EXPECT_NEAR(weighted_norm_sq(u, 2, sg, L), n2, 1e-8 * n2);
}

TEST(WeightedNorm, HomogeneityAndOrdering) {
  const DataSet d = small_data(11);
  const ModalTrajectory f = forcing_trajectory(d);
  const ModalTrajectory f3 = forcing_trajectory(d.scaled(3.0));
  const double t = 0.4;
  double prev = 0.0;
  for (int m = 0; m <= 2; ++m) {
    const auto a = weighted_norm(f, m, t, 0.0, 1.0, {}, 8.0, {0.25});
    const auto b = weighted_norm(f3, m, t, 0.0, 1.0, {}, 8.0, {0.25});
    EXPECT_NEAR(b.norm, 3.0 * a.norm, 1e-12 * b.norm);
    EXPECT_NEAR(b.bracket, 3.0 * a.bracket, 1e-12 * b.bracket);
    EXPECT_GE(a.norm, prev);
    EXPECT_GE(a.triple, a.norm);
    prev = a.norm;
  }
  EXPECT_THROW(weighted_norm_sq(f(0.3, 0), 3), std::invalid_argument);
}

TEST(WeightedNorm, SigmaShape) {
  const Sigma s;
  for (double x = 0.0; x <= 3.0; x += 0.01) {
    EXPECT_LE(s(x), x + 1e-15);
    EXPECT_LE(s(x), 1.0);
    EXPECT_GE(s.derivative(x), 0.0);
  }
  EXPECT_NEAR(s(1.5 - 1e-12), 1.0, 1e-11);
  EXPECT_NEAR(s.derivative(0.5 + 1e-12), 1.0, 1e-11);
}

TEST(WeightedNorm, SampledFieldApproximatesModal) {
  // u = e^{-x1} cos x2 sampled versus the modal value
  ModalField u;
  u.modes.push_back({1, 0, [](double x) {
                       ProfileSample p;
                       p.v = Eigen::VectorXcd::Constant(1, 0.5 * std::exp(-x));
                       p.d1 = -p.v;
                       p.d11 = p.v;
                       return p;
                     }});
  double err[2];
  for (int r = 0; r < 2; ++r) {
    SlabGrid g{64 << r, 8, 8, 8.0};
    SlabField s = SlabField::sample(g, 1, [](double a, double b, double) {
      return std::array<double, 1>{std::exp(-a) * std::cos(b)};
    });
    err[r] = std::abs(weighted_norm(s, 1) / std::sqrt(weighted_norm_sq(u, 1)) - 1.0);
  }
  // O(h1^2), h1 = 1/16 on the finer grid
  EXPECT_LT(err[1], 2e-3);
  EXPECT_GT(std::log2(err[0] / err[1]), 1.5);
}
