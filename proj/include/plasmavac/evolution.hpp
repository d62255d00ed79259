#pragma once
// Frozen-coefficient evolution of the coupled plasma / front / vacuum problem,
// one tangential Fourier mode at a time.
//
// Per mode k the plasma unknown V (secondary variables) lives on the nodes of
// [0, L] and is discretised with the 2-1 SBP first derivative.  The boundary
// condition for q on x1 = 0 is imposed weakly (SAT) on the v_n row, with the
// vacuum contribution expressed through phi; the far wall x1 = L carries the
// energy-neutral condition q = 0.  Time stepping is the implicit midpoint
// rule with phi eliminated, so that the discrete energy
//   E = I + [d1 q] |phi|^2 + K
// changes per step exactly by the midpoint source terms.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include "constraints.hpp"
#include "linearized_plasma.hpp"
#include "norms.hpp"
#include "vacuum.hpp"
#include "wellposedness.hpp"

namespace plasmavac {

using CMatX = Eigen::Matrix<cplx, 8, Eigen::Dynamic>;

inline constexpr double kTorusArea = 4.0 * std::numbers::pi * std::numbers::pi;

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// C^2 switch-on: 0 for t <= 0, 1 for t >= tau
struct Ramp {
  double tau = 0.5;

  double value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= tau) return 1.0;
    const double u = t / tau;
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
  }
  double d1(double t) const {
    if (t <= 0.0 || t >= tau) return 0.0;
    const double u = t / tau;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u) / tau;
  }
  double d2(double t) const {
    if (t <= 0.0 || t >= tau) return 0.0;
    const double u = t / tau;
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (tau * tau);
  }
  double derivative(double t, int j) const { return j == 0 ? value(t) : j == 1 ? d1(t) : d2(t); }
};

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double a, double b) { return a + (b - a) * double(next() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t s_;
};

// ---- data ---------------------------------------------------------------

// Mode k carries f = ramp(t) (f0 + f1 x1) e^{-x1} (primary perturbation
// variables) and g1, g2 = ramp(t) * constant; conjugate partners implied.
struct ModeData {
  int k2 = 1, k3 = 0;
  CVec8 f0 = CVec8::Zero(), f1 = CVec8::Zero();
  cplx g1 = 0.0, g2 = 0.0;
};

inline bool in_half_plane(int k2, int k3) { return k2 > 0 || (k2 == 0 && k3 > 0); }

struct DataSet {
  Ramp ramp;
  std::vector<ModeData> modes;

  void validate() const {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (!in_half_plane(modes[i].k2, modes[i].k3))
        throw std::invalid_argument("data: wavenumbers must lie in the half plane k2 > 0 or (k2 = 0, k3 > 0)");
      for (std::size_t j = 0; j < i; ++j)
        if (modes[j].k2 == modes[i].k2 && modes[j].k3 == modes[i].k3)
          throw std::invalid_argument("data: repeated wavenumber");
    }
  }

  bool zero() const {
    for (const auto& m : modes)
      if (m.f0.norm() > 0 || m.f1.norm() > 0 || std::abs(m.g1) > 0 || std::abs(m.g2) > 0) return false;
    return true;
  }

  DataSet scaled(double s) const {
    DataSet d = *this;
    for (auto& m : d.modes) {
      m.f0 *= s;
      m.f1 *= s;
      m.g1 *= s;
      m.g2 *= s;
    }
    return d;
  }

  CVec8 f(const ModeData& m, double t, double x1, int dtj = 0) const {
    return ramp.derivative(t, dtj) * std::exp(-x1) * (m.f0 + m.f1 * x1);
  }
  cplx g1(const ModeData& m, double t) const { return ramp.value(t) * m.g1; }
  cplx g2(const ModeData& m, double t) const { return ramp.value(t) * m.g2; }

  // real-space values
  Vec8 f_real(double t, const Vec3& x) const {
    Vec8 s = Vec8::Zero();
    for (const auto& m : modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x(1) + m.k3 * x(2)));
      s += 2.0 * (f(m, t, x(0)) * e).real();
    }
    return s;
  }
  double g_real(int which, double t, double x2, double x3) const {
    double s = 0.0;
    for (const auto& m : modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x2 + m.k3 * x3));
      s += 2.0 * ((which == 1 ? g1(m, t) : g2(m, t)) * e).real();
    }
    return s;
  }

  // all half-plane modes with |k2|, |k3| <= kmax, amplitudes ~ U(-1,1) / (1 + |k|^2)
  static DataSet random(std::uint64_t seed, int kmax, double tau, bool forcing = true, bool boundary = true) {
    SplitMix64 rng(seed);
    DataSet d;
    d.ramp.tau = tau;
    auto c = [&] {
      const double re = rng.uniform(-1.0, 1.0);
      return cplx(re, rng.uniform(-1.0, 1.0));
    };
    for (int k2 = 0; k2 <= kmax; ++k2)
      for (int k3 = -kmax; k3 <= kmax; ++k3) {
        if (!in_half_plane(k2, k3)) continue;
        ModeData m;
        m.k2 = k2;
        m.k3 = k3;
        const double s = 1.0 / (1.0 + k2 * k2 + k3 * k3);
        for (int i = 0; i < 8; ++i) {
          const cplx a = c(), b = c();
          if (forcing) {
            m.f0(i) = s * a;
            m.f1(i) = s * b;
          }
        }
        const cplx a = c(), b = c();
        if (boundary) {
          m.g1 = s * a;
          m.g2 = s * b;
        }
        d.modes.push_back(m);
      }
    return d;
  }
};

// ---- per-mode solver ----------------------------------------------------

struct ModeState {
  int k2 = 0, k3 = 0;
  CMatX V;          // evolved plasma unknown (homogenized or direct, see Trajectory)
  cplx phi = 0.0;   // front amplitude
  cplx g3 = 0.0;    // tangency constraint source, integrated alongside
  VacuumMode vacuum;
  double t = 0.0;
};

class ModeSolver {
public:
  ModeSolver(const FrozenState& f, const LocalOperator& op, int k2, int k3, int n1, double L, double dt)
      : k2_(k2), k3_(k3), n1_(n1), h_(L / n1), dt_(dt), dP_(f.d1PhiPlus) {
    A0_ = op.A[0];
    A1_ = op.A[1];
    B_ = cplx(0.0, 1.0) * (k2 * op.A[2] + k3 * op.A[3]).cast<cplx>() + op.A4.cast<cplx>();
    omega_ = f.Ub.v(1) * k2 + f.Ub.v(2) * k3;
    beta_ = f.d1_vN;
    mu_g3_ = cplx(f.div_tan_v, omega_);
    // vacuum response to phi = 1
    const cplx gN = cplx(f.div_tan_Hvac, f.Hvac(1) * k2 + f.Hvac(2) * k3);
    gN_unit_ = gN;
    unit_ = solve_vacuum_mode(k2, k3, gN, VacuumCoefficients::from_frozen(f));
    const CVec3 h0 = unit_.field(0.0);
    ck_ = f.Hvac(0) * h0(0) + f.Hvac(1) * h0(1) + f.Hvac(2) * h0(2);
    kappa_ = std::abs(f.d1PhiMinus) * unit_.field_l2sq();
    ctilde_ = ck_ - f.jump_dq;
    factor();
  }

  int k2() const { return k2_; }
  int k3() const { return k3_; }
  int n1() const { return n1_; }
  double h() const { return h_; }
  double dt() const { return dt_; }
  double omega() const { return omega_; }
  double node_weight(int j) const { return (j == 0 || j == n1_) ? 0.5 * h_ : h_; }
  cplx ctilde() const { return ctilde_; }
  double kappa() const { return kappa_; }           // K per |phi|^2 per unit area
  cplx vacuum_trace_unit() const { return gN_unit_; }
  const VacuumMode& unit_vacuum() const { return unit_; }
  const Mat8& A0() const { return A0_; }
  const Mat8& A1() const { return A1_; }

  VacuumMode vacuum(cplx phi) const {
    VacuumMode m = unit_;
    m.a *= phi;
    return m;
  }

  // A1 D1 V + B V + far-wall penalty: the part of the operator that does not
  // involve the interface condition
  CMatX apply_bulk(const CMatX& V) const {
    CMatX out(8, n1_ + 1);
    const Eigen::Matrix<cplx, 8, 8> A1 = A1_.cast<cplx>();
    for (int j = 0; j <= n1_; ++j) {
      CVec8 d;
      if (j == 0)
        d = (V.col(1) - V.col(0)) / h_;
      else if (j == n1_)
        d = (V.col(n1_) - V.col(n1_ - 1)) / h_;
      else
        d = (V.col(j + 1) - V.col(j - 1)) / (2.0 * h_);
      out.col(j) = A1 * d + B_ * V.col(j);
    }
    out(1, n1_) -= V(0, n1_) / (node_weight(n1_) * dP_);
    return out;
  }

  // L_VV V + L_Vphi phi
  CMatX apply_L(const CMatX& V, cplx phi) const {
    CMatX out = apply_bulk(V);
    out(1, 0) += (V(0, 0) - ctilde_ * phi) / (node_weight(0) * dP_);
    return out;
  }

  // One implicit midpoint step with midpoint sources bV (V equation) and bphi.
  void step(ModeState& s, const CMatX& bV, cplx bphi) const {
    const double hd = 0.5 * dt_;
    const cplx Lpp = cplx(-beta_, omega_);
    CMatX r = A0_.cast<cplx>() * s.V - hd * apply_L(s.V, s.phi) + dt_ * bV;
    const cplx rphi = s.phi - hd * (-s.V(1, 0) + Lpp * s.phi) + dt_ * bphi;
    const cplx a0 = 1.0 + hd * Lpp;
    r(1, 0) += hd * ctilde_ / (node_weight(0) * dP_) * rphi / a0;

    std::vector<cplx> x(r.data(), r.data() + r.size());
    const lapack_int n = lapack_int(x.size());
    const lapack_int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kBand, kBand, 1, ab_.data(), kLd, ipiv_.data(),
                                           x.data(), n);
    if (info != 0) throw SolverError("mode solve: back substitution failed (info " + std::to_string(info) + ")");
    s.V = Eigen::Map<const CMatX>(x.data(), 8, n1_ + 1);
    s.phi = (rphi + hd * s.V(1, 0)) / a0;
    s.t += dt_;
    s.vacuum = vacuum(s.phi);
  }

  // midpoint step of d_t g3 + mu g3 = G
  cplx step_g3(cplx g3, cplx Gmid) const {
    return ((1.0 - 0.5 * dt_ * mu_g3_) * g3 + dt_ * Gmid) / (1.0 + 0.5 * dt_ * mu_g3_);
  }

  ModeState zero_state() const {
    ModeState s;
    s.k2 = k2_;
    s.k3 = k3_;
    s.V = CMatX::Zero(8, n1_ + 1);
    s.vacuum = vacuum(0.0);
    return s;
  }

private:
  static constexpr int kBand = 15;
  static constexpr int kLd = 3 * kBand + 1;

  void factor() {
    const int n = 8 * (n1_ + 1);
    ab_.assign(std::size_t(kLd) * n, cplx(0.0));
    ipiv_.assign(n, 0);
    auto at = [&](int i, int j) -> cplx& { return ab_[std::size_t(2 * kBand + i - j) + std::size_t(j) * kLd]; };
    const double hd = 0.5 * dt_;
    auto d1c = [&](int j, int jj) {
      if (j == 0) return jj == 0 ? -1.0 / h_ : jj == 1 ? 1.0 / h_ : 0.0;
      if (j == n1_) return jj == n1_ ? 1.0 / h_ : jj == n1_ - 1 ? -1.0 / h_ : 0.0;
      return jj == j + 1 ? 0.5 / h_ : jj == j - 1 ? -0.5 / h_ : 0.0;
    };
    for (int j = 0; j <= n1_; ++j)
      for (int jj = std::max(0, j - 1); jj <= std::min(n1_, j + 1); ++jj) {
        Eigen::Matrix<cplx, 8, 8> blk = (hd * d1c(j, jj)) * A1_.cast<cplx>();
        if (jj == j) {
          blk += A0_.cast<cplx>() + hd * B_;
          if (j == 0) blk(1, 0) += hd / (node_weight(0) * dP_);
          if (j == n1_) blk(1, 0) -= hd / (node_weight(n1_) * dP_);
        }
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c)
            if (blk(r, c) != 0.0) at(8 * j + r, 8 * jj + c) += blk(r, c);
      }
    const cplx a0 = 1.0 + hd * cplx(-beta_, omega_);
    at(1, 1) -= hd * hd * ctilde_ / (node_weight(0) * dP_) / a0;
    const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kBand, kBand, ab_.data(), kLd, ipiv_.data());
    if (info != 0) {
      std::ostringstream os;
      os << "mode (" << k2_ << "," << k3_ << "): singular step matrix (zgbtrf info " << info << ")";
      throw SolverError(os.str());
    }
  }

  int k2_, k3_, n1_;
  double h_, dt_, dP_;
  Mat8 A0_, A1_;
  Eigen::Matrix<cplx, 8, 8> B_;
  double omega_ = 0.0, beta_ = 0.0;
  cplx mu_g3_ = 0.0;
  cplx gN_unit_ = 0.0;
  VacuumMode unit_;
  cplx ck_ = 0.0, ctilde_ = 0.0;
  double kappa_ = 0.0;
  std::vector<cplx> ab_;
  std::vector<lapack_int> ipiv_;
};

// ---- the frozen system ---------------------------------------------------

struct FrozenSystem {
  FrozenState frozen;
  LocalOperator op;
  SlabGrid grid;
  double dt = 0.0;
  int steps = 0;
  double C68 = 0.0;  // constant of the energy inequality

  FrozenSystem(const FrozenState& f, const SlabGrid& g, double T, double dt_request = 0.0)
      : frozen(f), op(assemble_linearized(f)), grid(g) {
    if (g.n1 < 2) throw std::invalid_argument("evolution: n1 must be at least 2");
    if (!(T > 0.0)) throw std::invalid_argument("evolution: T must be positive");
    if (std::abs(f.d1PhiPlus - 1.0) > 1e-12)
      throw std::invalid_argument("evolution: the frozen point must lie on the interface (d1Phi+ = 1)");
    const Mat8 rem = op.boundary_remainder();
    if (rem.norm() > 1e-10 * (1.0 + op.A[1].norm()))
      throw std::invalid_argument("evolution: boundary matrix is not of the interface form");
    op.A[1] -= rem;  // drop rounding
    const double dt0 = dt_request > 0.0 ? dt_request : 0.5 * g.h1();
    steps = std::max(1, int(std::ceil(T / dt0 - 1e-9)));
    dt = T / steps;

    const double lam = Eigen::SelfAdjointEigenSolver<Mat8>(op.A[0]).eigenvalues().minCoeff();
    const double nA4 = Eigen::JacobiSVD<Mat8>(op.A4).singularValues()(0);
    const double nJ = Eigen::JacobiSVD<Mat8>(op.J).singularValues()(0);
    const double beta = std::abs(f.d1_vN);
    C68 = std::max({nJ * nJ, (1.0 + 2.0 * nA4) / lam, 2.0 * beta * std::max(f.jump_dq, 0.0),
                    2.0 * beta * std::abs(f.d1PhiMinus)});
  }

  double T() const { return dt * steps; }
  ModeSolver solver(int k2, int k3) const { return ModeSolver(frozen, op, k2, k3, grid.n1, grid.L, dt); }
};

// ---- homogenization ------------------------------------------------------

// Lift in secondary variables: V~ = e^{-x1} (g2 e_q - g1 e_vn), so q~ = g2 and
// -v~_N = g1 on x1 = 0.
inline CMatX boundary_lift(const DataSet& d, const ModeData& m, double t, int n1, double h) {
  CMatX V = CMatX::Zero(8, n1 + 1);
  const cplx g1 = d.g1(m, t), g2 = d.g2(m, t);
  if (g1 == 0.0 && g2 == 0.0) return V;
  for (int j = 0; j <= n1; ++j) {
    const double e = std::exp(-h * j);
    V(0, j) = g2 * e;
    V(1, j) = -g1 * e;
  }
  return V;
}

// Lift in primary perturbation variables, U~ = J V~.
inline CMatX lift_primary(const FrozenSystem& sys, const DataSet& d, const ModeData& m, double t) {
  return sys.op.J.cast<cplx>() * boundary_lift(d, m, t, sys.grid.n1, sys.grid.h1());
}

// Midpoint source of the V equation over [t0, t0 + dt].  Homogenized: the
// lift is removed, F = J^T f - A0 dV~/dt - bulk(V~), and the boundary data
// vanish; direct: F = J^T f with g carried by the penalty and the front
// equation.
struct MidpointSource {
  CMatX bV;
  cplx bphi = 0.0;
  cplx G = 0.0;  // source of the g3 equation
};

inline MidpointSource midpoint_source(const FrozenSystem& sys, const ModeSolver& s, const DataSet& d,
                                      const ModeData& m, double t0, bool homogenized) {
  const int n1 = sys.grid.n1;
  const double h = sys.grid.h1(), dt = sys.dt, tm = t0 + 0.5 * dt;
  MidpointSource out;
  out.bV = CMatX(8, n1 + 1);
  const Mat8 JT = sys.op.J.transpose();
  for (int j = 0; j <= n1; ++j) out.bV.col(j) = JT.cast<cplx>() * d.f(m, tm, h * j);
  const cplx g1a = 0.5 * (d.g1(m, t0) + d.g1(m, t0 + dt)), g2a = 0.5 * (d.g2(m, t0) + d.g2(m, t0 + dt));
  if (homogenized) {
    const CMatX L0 = boundary_lift(d, m, t0, n1, h), L1 = boundary_lift(d, m, t0 + dt, n1, h);
    if (g1a != 0.0 || g2a != 0.0 || L0.norm() > 0.0 || L1.norm() > 0.0)
      out.bV -= sys.op.A[0].cast<cplx>() * (L1 - L0) / dt + s.apply_bulk(0.5 * (L0 + L1));
  } else {
    out.bV(1, 0) += g2a / (s.node_weight(0) * sys.frozen.d1PhiPlus);
    out.bphi = g1a;
  }
  const CVec8 f0 = d.f(m, tm, 0.0);
  const cplx fn = f0(kH1) - sys.frozen.d2Psi * f0(kH2) - sys.frozen.d3Psi * f0(kH3);
  const cplx kH = cplx(0.0, m.k2 * sys.frozen.Ub.H(1) + m.k3 * sys.frozen.Ub.H(2));
  out.G = kH * g1a - fn;
  return out;
}

struct Homogenization {
  CMatX lift;     // U~ at time t (primary variables)
  CMatX f_sharp;  // modified midpoint source in primary variables, J^{-T} F
};

inline Homogenization homogenize_boundary_data(const FrozenSystem& sys, const DataSet& d, const ModeData& m,
                                               double t0) {
  const ModeSolver s = sys.solver(m.k2, m.k3);
  Homogenization h;
  h.lift = lift_primary(sys, d, m, t0);
  const MidpointSource src = midpoint_source(sys, s, d, m, t0, true);
  h.f_sharp = sys.op.J.transpose().cast<cplx>().partialPivLu().solve(src.bV);
  return h;
}

// ---- trajectories --------------------------------------------------------

struct EvolutionOptions {
  double T = 2.0;
  double dt = 0.0;  // 0: h1 / 2
  bool homogenize = true;
};

struct Trajectory {
  std::shared_ptr<const FrozenSystem> sys;
  std::vector<ModeSolver> solvers;  // one per data mode
  DataSet data;
  bool homogenized = true;
  std::vector<double> times;
  std::vector<std::vector<ModeState>> levels;  // [level][mode]

  int steps() const { return int(times.size()) - 1; }
  double dt() const { return sys->dt; }

  // plasma unknown including the lift, secondary variables
  CMatX total_V(int level, int mode) const {
    const CMatX& V = levels[level][mode].V;
    if (!homogenized) return V;
    return V + boundary_lift(data, data.modes[mode], times[level], sys->grid.n1, sys->grid.h1());
  }
  CMatX total_U(int level, int mode) const { return sys->op.J.cast<cplx>() * total_V(level, mode); }
};

inline ModeState step_frozen(const ModeState& s, const FrozenSystem& sys, const ModeSolver& solver,
                             const DataSet& d, const ModeData& m, bool homogenized = true) {
  const MidpointSource src = midpoint_source(sys, solver, d, m, s.t, homogenized);
  ModeState n = s;
  solver.step(n, src.bV, src.bphi);
  n.g3 = solver.step_g3(s.g3, src.G);
  return n;
}

inline Trajectory evolve_frozen(const FrozenState& f, const SlabGrid& g, const DataSet& d,
                                const EvolutionOptions& o = {}) {
  d.validate();
  for (const auto& m : d.modes)
    if (2 * std::abs(m.k2) >= g.n2 || 2 * std::abs(m.k3) >= g.n3)
      throw std::invalid_argument("evolution: data wavenumber not resolved by the tangential grid");
  Trajectory tr;
  tr.sys = std::make_shared<const FrozenSystem>(f, g, o.T, o.dt);
  tr.data = d;
  tr.homogenized = o.homogenize;
  for (const auto& m : d.modes) tr.solvers.push_back(tr.sys->solver(m.k2, m.k3));
  std::vector<ModeState> cur;
  for (const auto& s : tr.solvers) cur.push_back(s.zero_state());
  tr.times.push_back(0.0);
  tr.levels.push_back(cur);
  for (int n = 0; n < tr.sys->steps; ++n) {
    for (std::size_t i = 0; i < cur.size(); ++i)
      cur[i] = step_frozen(cur[i], *tr.sys, tr.solvers[i], d, d.modes[i], o.homogenize);
    tr.times.push_back((n + 1) * tr.sys->dt);
    for (auto& s : cur) s.t = tr.times.back();
    tr.levels.push_back(cur);
  }
  return tr;
}

// ---- energy ledger -------------------------------------------------------

struct LedgerRow {
  double t = 0.0;
  double I = 0.0, K = 0.0, J = 0.0, L = 0.0, M = 0.0, N = 0.0, Ncal = 0.0;
  double boundary_split = 0.0;  // -2 int q v_N minus its decomposition (weak-condition defect)
  double lhs = 0.0, rhs = 0.0, slack = 0.0;
};

struct EnergyLedger {
  double C = 0.0;
  std::vector<LedgerRow> rows;

  double min_slack() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::min(m, r.slack);
    return m;
  }
  double max_J_gap() const {
    double g = 0.0;
    for (const auto& r : rows)
      if (r.K > 0.0) g = std::max(g, std::abs(r.J - 2.0 * r.K) / (2.0 * r.K));
    return g;
  }
};

namespace detail {

inline double hsum(const ModeSolver& s, const CMatX& V, const Mat8& P) {
  double acc = 0.0;
  for (int j = 0; j <= s.n1(); ++j) acc += s.node_weight(j) * (V.col(j).adjoint() * P.cast<cplx>() * V.col(j))(0).real();
  return acc;
}

inline double hsum(const ModeSolver& s, const CMatX& V) {
  double acc = 0.0;
  for (int j = 0; j <= s.n1(); ++j) acc += s.node_weight(j) * V.col(j).squaredNorm();
  return acc;
}

}  // namespace detail

inline EnergyLedger energy_ledger(const Trajectory& tr) {
  if (!tr.homogenized) throw std::invalid_argument("energy ledger: needs the homogenized trajectory");
  const FrozenSystem& sys = *tr.sys;
  const FrozenState& f = sys.frozen;
  const double dt = sys.dt, area = kTorusArea, w = 2.0;
  const double dabs = std::abs(f.d1PhiMinus), jump = f.jump_dq, beta = f.d1_vN;
  const Mat8 JTinv = sys.op.J.transpose().inverse();
  EnergyLedger led;
  led.C = sys.C68;
  double acc_rhs = 0.0, acc_K = 0.0, acc_M = 0.0;
  for (int n = 0; n <= tr.steps(); ++n) {
    LedgerRow row;
    row.t = tr.times[n];
    double phi2 = 0.0;
    for (std::size_t i = 0; i < tr.solvers.size(); ++i) {
      const ModeSolver& s = tr.solvers[i];
      const ModeState& st = tr.levels[n][i];
      const double p2 = std::norm(st.phi);
      row.I += area * w * detail::hsum(s, st.V, sys.op.A[0]);
      row.K += area * w * s.kappa() * p2;
      row.J += area * w * 2.0 * (std::conj(st.vacuum.a) * st.vacuum.normal_trace()).real();
      phi2 += area * w * p2;
      const cplx g1 = tr.data.g1(tr.data.modes[i], row.t);
      row.boundary_split += -2.0 * area * w * (std::conj(st.V(0, 0) - s.ctilde() * st.phi) * (st.V(1, 0) - g1)).real();
    }
    const double H2 = row.K / dabs;
    row.M = acc_M;
    row.Ncal = -2.0 * beta * acc_K;
    row.lhs = row.I + 0.5 * H2 + 0.5 * jump * phi2;
    row.rhs = led.C * acc_rhs;
    row.slack = row.rhs - row.lhs;
    led.rows.push_back(row);
    if (n == tr.steps()) break;

    // midpoint contributions of [t_n, t_{n+1}]
    for (std::size_t i = 0; i < tr.solvers.size(); ++i) {
      const ModeSolver& s = tr.solvers[i];
      const ModeState &a = tr.levels[n][i], &b = tr.levels[n + 1][i];
      const CMatX Vm = 0.5 * (a.V + b.V);
      const cplx pm = 0.5 * (a.phi + b.phi);
      const MidpointSource src = midpoint_source(sys, s, tr.data, tr.data.modes[i], tr.times[n], true);
      const CMatX fs = JTinv.cast<cplx>() * src.bV;
      const double Km = area * w * s.kappa() * std::norm(pm);
      acc_rhs += dt * area * w *
                 (detail::hsum(s, fs) + detail::hsum(s, Vm, sys.op.A[0]) + std::norm(pm));
      acc_rhs += dt * Km / dabs;
      acc_K += dt * Km;
      // M: -2 int H_N (v', curl-form') on x1 = 0; curl-form' = i k A
      const VacuumMode vm = s.vacuum(pm);
      const cplx vk = cplx(0.0, f.Ub.v(1) * s.k2() + f.Ub.v(2) * s.k3()) * vm.potential(0.0);
      acc_M += -2.0 * dt * area * w * (std::conj(vm.normal_trace()) * vk).real();
    }
  }
  return led;
}

inline void write_ledger_csv(std::ostream& os, const EnergyLedger& led) {
  os << "t,I,K,J,L,M,N,Ncal,boundary_split,lhs68,rhs68,slack68\n";
  for (const auto& r : led.rows) {
    const double v[] = {r.t, r.I, r.K, r.J, r.L, r.M, r.N, r.Ncal, r.boundary_split, r.lhs, r.rhs, r.slack};
    for (std::size_t i = 0; i < std::size(v); ++i) os << (i ? "," : "") << format_double(v[i]);
    os << '\n';
  }
}

// ---- estimate ratios -----------------------------------------------------

struct DataNorms {
  double f_L2 = 0.0;   // ||f||_{L2(Omega_T)}
  double f_2star = 0.0;  // [f]_{2,*,T}
  double g_H1 = 0.0, g_H2 = 0.0;
};

inline ModalTrajectory forcing_trajectory(const DataSet& d) {
  return [d](double t, int j) {
    ModalField u;
    for (const auto& m : d.modes) {
      const double r = d.ramp.derivative(t, j);
      u.modes.push_back({m.k2, m.k3, [m, r](double x) {
                           const double e = std::exp(-x);
                           ProfileSample p;
                           p.v = r * e * (m.f0 + m.f1 * x);
                           p.d1 = r * e * (m.f1 - m.f0 - m.f1 * x);
                           p.d11 = r * e * (m.f0 - 2.0 * m.f1 + m.f1 * x);
                           return p;
                         }});
    }
    return u;
  };
}

inline DataNorms data_norms(const DataSet& d, double T, double L) {
  static const GaussLegendre gl(10);
  const std::vector<double> br{d.ramp.tau};
  auto rint = [&](int j) {
    return gl.integrate([&](double t) { return std::pow(d.ramp.derivative(t, j), 2); }, 0.0, T, br, 4);
  };
  const double R0 = rint(0), R1 = rint(1), R2 = rint(2);
  const ModalField prof = forcing_trajectory(DataSet{Ramp{0.0}, d.modes})(1.0, 0);  // ramp = 1
  const double N0 = weighted_norm_sq(prof, 0, {}, L), N1 = weighted_norm_sq(prof, 1, {}, L),
               N2 = weighted_norm_sq(prof, 2, {}, L);
  DataNorms out;
  out.f_L2 = std::sqrt(N0 * R0);
  out.f_2star = std::sqrt(N2 * R0 + N1 * R1 + N0 * R2);
  double h1 = 0.0, h2 = 0.0;
  for (const auto& m : d.modes) {
    const double a = kTorusArea * 2.0 * (std::norm(m.g1) + std::norm(m.g2));
    const double kk = double(m.k2) * m.k2 + double(m.k3) * m.k3;
    const double k4 = std::pow(m.k2, 4) + double(m.k2) * m.k2 * m.k3 * m.k3 + std::pow(m.k3, 4);
    h1 += a * (R0 * (1.0 + kk) + R1);
    h2 += a * (R0 * (1.0 + kk + k4) + R1 * (1.0 + kk) + R2);
  }
  out.g_H1 = std::sqrt(h1);
  out.g_H2 = std::sqrt(h2);
  return out;
}

struct RatioReport {
  double num40 = 0.0, den40 = 0.0, ratio_40 = 0.0;
  double num42 = 0.0, den42 = 0.0, ratio_42 = 0.0;
  DataNorms data;
};

namespace detail {

// second-order d1 of a profile (one-sided at the ends)
inline CMatX d1_profile(const CMatX& U, double h) {
  const int n = int(U.cols()) - 1;
  CMatX D(8, n + 1);
  D.col(0) = (-3.0 * U.col(0) + 4.0 * U.col(1) - U.col(2)) / (2.0 * h);
  D.col(n) = (3.0 * U.col(n) - 4.0 * U.col(n - 1) + U.col(n - 2)) / (2.0 * h);
  for (int j = 1; j < n; ++j) D.col(j) = (U.col(j + 1) - U.col(j - 1)) / (2.0 * h);
  return D;
}

}  // namespace detail

inline RatioReport estimate_ratio(const Trajectory& tr) {
  const FrozenSystem& sys = *tr.sys;
  const double dt = sys.dt, h = sys.grid.h1(), area = kTorusArea, w = 2.0;
  const Sigma sg;
  double U0 = 0.0, U1 = 0.0, H0 = 0.0, H1 = 0.0, P0 = 0.0, P1 = 0.0;
  for (int n = 0; n < tr.steps(); ++n)
    for (std::size_t i = 0; i < tr.solvers.size(); ++i) {
      const ModeSolver& s = tr.solvers[i];
      const CMatX Ua = tr.total_U(n, i), Ub = tr.total_U(n + 1, i);
      const CMatX Um = 0.5 * (Ua + Ub), Ut = (Ub - Ua) / dt;
      CMatX sd1 = detail::d1_profile(Um, h);
      for (int j = 0; j <= s.n1(); ++j) sd1.col(j) *= sg(h * j);
      const double kk = double(s.k2()) * s.k2() + double(s.k3()) * s.k3();
      const double u0 = detail::hsum(s, Um);
      U0 += dt * area * w * u0;
      U1 += dt * area * w * (u0 * (1.0 + kk) + detail::hsum(s, Ut) + detail::hsum(s, sd1));
      const cplx pm = 0.5 * (tr.levels[n][i].phi + tr.levels[n + 1][i].phi);
      const cplx pt = (tr.levels[n + 1][i].phi - tr.levels[n][i].phi) / dt;
      const double e = s.unit_vacuum().field_l2sq(), lam2 = std::norm(s.unit_vacuum().lambda);
      P0 += dt * area * w * std::norm(pm);
      P1 += dt * area * w * (std::norm(pm) * (1.0 + kk) + std::norm(pt));
      H0 += dt * area * w * e * std::norm(pm);
      H1 += dt * area * w * e * (std::norm(pm) * (1.0 + lam2 + kk) + std::norm(pt));
    }
  RatioReport r;
  r.data = data_norms(tr.data, sys.T(), sys.grid.L);
  r.num40 = std::sqrt(U0) + std::sqrt(H0) + std::sqrt(P0);
  r.den40 = r.data.f_L2 + r.data.g_H1;
  r.num42 = std::sqrt(U1) + std::sqrt(H1) + std::sqrt(P1);
  r.den42 = r.data.f_2star + r.data.g_H2;
  auto ratio = [](double num, double den) {
    if (den > 0.0) return num / den;
    if (num == 0.0) return 0.0;
    throw std::domain_error("estimate ratio: zero data with a nonzero solution");
  };
  r.ratio_40 = ratio(r.num40, r.den40);
  r.ratio_42 = ratio(r.num42, r.den42);
  return r;
}

// ---- front gradient diagnostic ------------------------------------------

// Per step: the front gradient resolved from the interface traces versus the
// spectral gradient of the evolved front, at the midpoint.  Relative error,
// 0 on steps where the front vanishes.
inline std::vector<double> front_gradient_errors(const Trajectory& tr, const Thresholds& th = {}) {
  const FrozenSystem& sys = *tr.sys;
  const FrontResolution res = front_resolution(sys.frozen, th);
  std::vector<double> out;
  for (int n = 0; n < tr.steps(); ++n) {
    double num = 0.0, den = 0.0;
    const double t0 = tr.times[n], t1 = tr.times[n + 1];
    for (std::size_t i = 0; i < tr.solvers.size(); ++i) {
      const ModeSolver& s = tr.solvers[i];
      const ModeState &a = tr.levels[n][i], &b = tr.levels[n + 1][i];
      const ModeData& m = tr.data.modes[i];
      const CMatX Vm = 0.5 * (tr.total_V(n, i) + tr.total_V(n + 1, i));
      FrontTraces<cplx> t;
      t.phi = 0.5 * (a.phi + b.phi);
      t.H_N = Vm(kH1, 0);
      t.v_N = Vm(1, 0);
      t.Hvac_N = s.vacuum_trace_unit() * t.phi;
      t.g3 = 0.5 * (a.g3 + b.g3);
      t.g1 = 0.5 * (tr.data.g1(m, t0) + tr.data.g1(m, t1));
      const Eigen::Matrix<cplx, 3, 1> got = resolve_front_gradient(t, res);
      const Eigen::Matrix<cplx, 3, 1> ref((b.phi - a.phi) / sys.dt, cplx(0.0, s.k2()) * t.phi,
                                          cplx(0.0, s.k3()) * t.phi);
      num += (got - ref).squaredNorm();
      den += ref.squaredNorm();
    }
    out.push_back(den > 0.0 ? std::sqrt(num / den) : 0.0);
  }
  return out;
}

// ---- sampling onto the slab ----------------------------------------------

// real field sum_k (P_k e^{ik.x'} + c.c.) for per-mode profiles on the x1 nodes
inline SlabField synthesize(const SlabGrid& g, const std::vector<std::pair<std::array<int, 2>, CMatX>>& profiles,
                            int ncomp) {
  SlabField u(g, ncomp);
  for (const auto& [k, P] : profiles) {
    if (P.cols() != g.n1 + 1) throw std::invalid_argument("synthesize: profile length");
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        const cplx e = std::exp(cplx(0.0, k[0] * g.x2(a) + k[1] * g.x3(b)));
        for (int j = 0; j <= g.n1; ++j)
          for (int c = 0; c < ncomp; ++c) u(c, j, a, b) += 2.0 * (P(c, j) * e).real();
      }
  }
  return u;
}

inline SlabField sample_plasma(const Trajectory& tr, int level) {
  std::vector<std::pair<std::array<int, 2>, CMatX>> p;
  for (std::size_t i = 0; i < tr.solvers.size(); ++i)
    p.push_back({{tr.solvers[i].k2(), tr.solvers[i].k3()}, tr.total_U(level, i)});
  return synthesize(tr.sys->grid, p, 8);
}

inline PlaneField sample_plane(const SlabGrid& g, const std::vector<std::pair<std::array<int, 2>, cplx>>& amps) {
  PlaneField u(g.n2, g.n3);
  for (const auto& [k, c] : amps)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) u(a, b) += 2.0 * (c * std::exp(cplx(0.0, k[0] * g.x2(a) + k[1] * g.x3(b)))).real();
  return u;
}

inline PlaneField sample_front(const Trajectory& tr, int level) {
  std::vector<std::pair<std::array<int, 2>, cplx>> a;
  for (std::size_t i = 0; i < tr.solvers.size(); ++i)
    a.push_back({{tr.solvers[i].k2(), tr.solvers[i].k3()}, tr.levels[level][i].phi});
  return sample_plane(tr.sys->grid, a);
}

// Constraint sources of the data for frozen coefficients (analytic in x):
// F = (d1 f_n + d1Phi (d2 f_H2 + d3 f_H3)) / d1Phi and G = H'.grad' g1 - f_n on x1 = 0.
inline ScalarSource constraint_source_F(const DataSet& d, const FrozenState& f) {
  return [d, f](double t, const Vec3& x) {
    double s = 0.0;
    for (const auto& m : d.modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x(1) + m.k3 * x(2)));
      const double r = d.ramp.value(t), ex = std::exp(-x(0));
      const CVec8 v = r * ex * (m.f0 + m.f1 * x(0)), d1 = r * ex * (m.f1 - m.f0 - m.f1 * x(0));
      const cplx dn = d1(kH1) - f.d2Psi * d1(kH2) - f.d3Psi * d1(kH3);
      const cplx tan = cplx(0.0, m.k2) * v(kH2) + cplx(0.0, m.k3) * v(kH3);
      s += 2.0 * ((dn + f.d1PhiPlus * tan) * e).real();
    }
    return s / f.d1PhiPlus;
  };
}

// Same source with d1 replaced by the scheme's SBP difference on the grid
// spacing (one-sided within one cell of either wall).  The evolved discrete
// divergence satisfies the transport law with this source exactly, so r built
// from it isolates the time and transport errors.
inline ScalarSource discrete_constraint_source_F(const DataSet& d, const FrozenState& f, const SlabGrid& g) {
  const double h = g.h1(), L = g.L;
  return [d, f, h, L](double t, const Vec3& x) {
    const double x1 = x(0);
    double lo = x1 - h, hi = x1 + h;
    if (x1 < h - 1e-12 * h) lo = x1;
    else if (x1 > L - h + 1e-12 * h) hi = x1;
    double s = 0.0;
    for (const auto& m : d.modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x(1) + m.k3 * x(2)));
      auto fn = [&](double y) {
        const CVec8 v = d.f(m, t, y);
        return v(kH1) - f.d2Psi * v(kH2) - f.d3Psi * v(kH3);
      };
      const CVec8 v = d.f(m, t, x1);
      const cplx dn = (fn(hi) - fn(lo)) / (hi - lo);
      const cplx tan = cplx(0.0, m.k2) * v(kH2) + cplx(0.0, m.k3) * v(kH3);
      s += 2.0 * ((dn + f.d1PhiPlus * tan) * e).real();
    }
    return s / f.d1PhiPlus;
  };
}

inline BoundarySource constraint_source_G(const DataSet& d, const FrozenState& f) {
  return [d, f](double t, double x2, double x3) {
    double s = 0.0;
    for (const auto& m : d.modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x2 + m.k3 * x3));
      const CVec8 v = d.f(m, t, 0.0);
      const cplx fn = v(kH1) - f.d2Psi * v(kH2) - f.d3Psi * v(kH3);
      const cplx kH = cplx(0.0, m.k2 * f.Ub.H(1) + m.k3 * f.Ub.H(2));
      s += 2.0 * ((kH * d.g1(m, t) - fn) * e).real();
    }
    return s;
  };
}

}  // namespace plasmavac
