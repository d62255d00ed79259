#pragma once
// Linearized constraints div h' = r (interior) and the tangency relation with
// g3 on x1 = 0, and the two transport problems that generate r and g3:
//   dt a + { (w^, grad a) + a div u^ } / d1Phi^+ = F,   r = a d1Phi^+,
//   dt g3 + v2^ d2 g3 + v3^ d3 g3 + (d2 v2^ + d3 v3^) g3 = G   on x1 = 0.
// Both are solved semi-Lagrangian: RK2 back-tracking of the characteristic,
// cubic Lagrange interpolation at the departure point and trapezoidal
// integration of source and decay along it.

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "basic_state.hpp"
#include "slab.hpp"

namespace plasmavac {

class TransportCflError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using ScalarSource = std::function<double(double, const Vec3&)>;         // (t, x)
using BoundarySource = std::function<double(double, double, double)>;   // (t, x2, x3)

// characteristic speed w^/d1Phi^+, decay div u^/d1Phi^+ and d1Phi^+ itself
struct TransportCoefficients {
  std::function<Vec3(double, const Vec3&)> velocity;
  std::function<double(double, const Vec3&)> decay;
  std::function<double(double, const Vec3&)> d1Phi;
  bool constant = false;

  static TransportCoefficients from_frozen(const FrozenState& f) {
    const double dP = f.d1PhiPlus;
    const double w1 = normal_component(f.U.v, f.d2Psi, f.d3Psi) - f.dtPsi;
    const Vec3 c(w1 / dP, f.U.v(1), f.U.v(2));
    const double mu = (f.d1_vN + dP * f.div_tan_v) / dP;
    return {[c](double, const Vec3&) { return c; }, [mu](double, const Vec3&) { return mu; },
            [dP](double, const Vec3&) { return dP; }, true};
  }

  static TransportCoefficients from_basic_state(const BasicState& bs, double h = 1e-3) {
    TransportCoefficients tc;
    tc.velocity = [bs](double t, const Vec3& x) {
      const PlasmaDerived d = plasma_derived(bs, t, x);
      return Vec3(d.w / bs.lift(Side::plasma, t, x).d1Phi);
    };
    tc.decay = [bs, h](double t, const Vec3& x) {
      const detail::VecFn u = [&](double tt, const Vec3& y) -> Eigen::VectorXd { return plasma_derived(bs, tt, y).u; };
      const std::vector<double> kinks{bs.cutoff.s0(), bs.cutoff.s1()};
      double div = 0.0;
      for (int a = 1; a <= 3; ++a)
        div += detail::fd_partial(u, t, x, a, h, true, std::numeric_limits<double>::infinity(), kinks)(a - 1);
      return div / bs.lift(Side::plasma, t, x).d1Phi;
    };
    tc.d1Phi = [bs](double t, const Vec3& x) { return bs.lift(Side::plasma, t, x).d1Phi; };
    return tc;
  }
};

// tangential velocity and its divergence on x1 = 0
struct BoundaryTransportCoefficients {
  std::function<std::array<double, 2>(double, double, double)> velocity;
  std::function<double(double, double, double)> decay;

  static BoundaryTransportCoefficients from_frozen(const FrozenState& f) {
    const std::array<double, 2> v{f.Ub.v(1), f.Ub.v(2)};
    const double mu = f.div_tan_v;
    return {[v](double, double, double) { return v; }, [mu](double, double, double) { return mu; }};
  }
  static BoundaryTransportCoefficients from_basic_state(const BasicState& bs, double h = 1e-3) {
    BoundaryTransportCoefficients c;
    c.velocity = [bs](double t, double x2, double x3) {
      const Vec3 v = bs.plasma(t, Vec3(0.0, x2, x3)).v;
      return std::array<double, 2>{v(1), v(2)};
    };
    c.decay = [bs, h](double t, double x2, double x3) {
      const detail::VecFn v = [&](double tt, const Vec3& y) -> Eigen::VectorXd { return bs.plasma(tt, y).v; };
      const Vec3 x(0.0, x2, x3);
      return detail::fd_partial(v, t, x, 2, h, true)(1) + detail::fd_partial(v, t, x, 3, h, true)(2);
    };
    return c;
  }
};

struct TransportOptions {
  double cfl_max = 4.0;  // departure distance limit in cells per step (accuracy guard)
};

namespace detail {

// cubic Lagrange weights for nodes s0..s0+3 at fractional position xi
inline std::array<double, 4> lagrange4(double xi, int s0) {
  std::array<double, 4> w{};
  for (int i = 0; i < 4; ++i) {
    double p = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) p *= (xi - (s0 + j)) / double(i - j);
    w[i] = p;
  }
  return w;
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

// tricubic interpolation of component c; x1 clamped to the slab, x2/x3 periodic
inline double interpolate(const SlabField& u, int c, const Vec3& x) {
  const SlabGrid& g = u.grid();
  const double xi1 = x(0) / g.h1(), xi2 = x(1) / g.h2(), xi3 = x(2) / g.h3();
  const int s1 = std::clamp(int(std::floor(xi1)) - 1, 0, g.n1 - 3);
  const int s2 = int(std::floor(xi2)) - 1, s3 = int(std::floor(xi3)) - 1;
  const auto w1 = lagrange4(xi1, s1), w2 = lagrange4(xi2, s2), w3 = lagrange4(xi3, s3);
  double v = 0.0;
  for (int i = 0; i < 4; ++i) {
    double vi = 0.0;
    for (int j = 0; j < 4; ++j) {
      const int m2 = wrap(s2 + j, g.n2);
      double vj = 0.0;
      for (int k = 0; k < 4; ++k) vj += w3[k] * u(c, s1 + i, m2, wrap(s3 + k, g.n3));
      vi += w2[j] * vj;
    }
    v += w1[i] * vi;
  }
  return v;
}

inline double interpolate(const PlaneField& u, double x2, double x3) {
  const double h2 = 2.0 * std::numbers::pi / u.n2(), h3 = 2.0 * std::numbers::pi / u.n3();
  const double xi2 = x2 / h2, xi3 = x3 / h3;
  const int s2 = int(std::floor(xi2)) - 1, s3 = int(std::floor(xi3)) - 1;
  const auto w2 = lagrange4(xi2, s2), w3 = lagrange4(xi3, s3);
  double v = 0.0;
  for (int j = 0; j < 4; ++j) {
    double vj = 0.0;
    for (int k = 0; k < 4; ++k) vj += w3[k] * u(wrap(s2 + j, u.n2()), wrap(s3 + k, u.n3()));
    v += w2[j] * vj;
  }
  return v;
}

}  // namespace detail

// Interior transport of a = r / d1Phi^+.
class RTransport {
public:
  RTransport(const SlabGrid& g, TransportCoefficients c, ScalarSource F, TransportOptions o = {})
      : grid_(g), coef_(std::move(c)), F_(std::move(F)), opt_(o), a_(g, 1) {
    if (g.n1 < 3 || g.n2 < 4 || g.n3 < 4) throw GridError("constraint transport needs n1 >= 3, n2, n3 >= 4");
  }

  double time() const { return t_; }
  const SlabField& a() const { return a_; }
  std::size_t ghost_reads() const { return ghost_; }    // departures below x1 = 0
  std::size_t far_clamped() const { return far_; }      // departures beyond x1 = L

  SlabField r() const {
    SlabField r(grid_, 1);
    for (int j = 0; j <= grid_.n1; ++j)
      for (int m2 = 0; m2 < grid_.n2; ++m2)
        for (int m3 = 0; m3 < grid_.n3; ++m3) {
          const Vec3 x(grid_.x1(j), grid_.x2(m2), grid_.x3(m3));
          r(0, j, m2, m3) = a_(0, j, m2, m3) * coef_.d1Phi(t_, x);
        }
    return r;
  }

  void step(double dt) {
    const SlabGrid& g = grid_;
    const double th = t_ + 0.5 * dt, t1 = t_ + dt;
    const double hmin[3] = {g.h1(), g.h2(), g.h3()};
    SlabField next(g, 1);
    for (int j = 0; j <= g.n1; ++j)
      for (int m2 = 0; m2 < g.n2; ++m2)
        for (int m3 = 0; m3 < g.n3; ++m3) {
          const Vec3 x(g.x1(j), g.x2(m2), g.x3(m3));
          const Vec3 c0 = coef_.velocity(th, x);
          for (int i = 0; i < 3; ++i)
            if (std::abs(c0(i)) * dt > opt_.cfl_max * hmin[i] || !std::isfinite(c0(i))) {
              std::ostringstream os;
              os << "constraint transport: Courant number " << std::abs(c0(i)) * dt / hmin[i] << " on axis "
                 << i + 1 << " exceeds " << opt_.cfl_max;
              throw TransportCflError(os.str());
            }
          Vec3 xm = x - 0.5 * dt * c0;
          xm(0) = std::max(xm(0), 0.0);
          Vec3 xd = x - dt * coef_.velocity(th, xm);
          if (xd(0) < -1e-12 * g.h1()) ++ghost_;
          if (xd(0) > g.L * (1.0 + 1e-12)) ++far_;
          xd(0) = std::clamp(xd(0), 0.0, g.L);
          const double ad = detail::interpolate(a_, 0, xd);
          const double mud = coef_.decay(t_, xd), mu = coef_.decay(t1, x);
          const double src = 0.5 * dt * (F_ ? F_(t_, xd) + F_(t1, x) : 0.0);
          next(0, j, m2, m3) = (ad * (1.0 - 0.5 * dt * mud) + src) / (1.0 + 0.5 * dt * mu);
        }
    a_ = std::move(next);
    t_ = t1;
  }

private:
  SlabGrid grid_;
  TransportCoefficients coef_;
  ScalarSource F_;
  TransportOptions opt_;
  SlabField a_;
  double t_ = 0.0;
  std::size_t ghost_ = 0, far_ = 0;
};

// Boundary transport of g3.
class G3Transport {
public:
  G3Transport(int n2, int n3, BoundaryTransportCoefficients c, BoundarySource G, TransportOptions o = {})
      : coef_(std::move(c)), G_(std::move(G)), opt_(o), g3_(n2, n3) {
    if (n2 < 4 || n3 < 4) throw GridError("boundary transport needs n2, n3 >= 4");
  }

  double time() const { return t_; }
  const PlaneField& g3() const { return g3_; }

  void step(double dt) {
    const int n2 = g3_.n2(), n3 = g3_.n3();
    const double h2 = 2.0 * std::numbers::pi / n2, h3 = 2.0 * std::numbers::pi / n3;
    const double th = t_ + 0.5 * dt, t1 = t_ + dt;
    PlaneField next(n2, n3);
    for (int a = 0; a < n2; ++a)
      for (int b = 0; b < n3; ++b) {
        const double x2 = a * h2, x3 = b * h3;
        const auto c0 = coef_.velocity(th, x2, x3);
        if (std::abs(c0[0]) * dt > opt_.cfl_max * h2 || std::abs(c0[1]) * dt > opt_.cfl_max * h3 ||
            !std::isfinite(c0[0]) || !std::isfinite(c0[1])) {
          std::ostringstream os;
          os << "boundary transport: Courant number above " << opt_.cfl_max;
          throw TransportCflError(os.str());
        }
        const auto cm = coef_.velocity(th, x2 - 0.5 * dt * c0[0], x3 - 0.5 * dt * c0[1]);
        const double d2 = x2 - dt * cm[0], d3 = x3 - dt * cm[1];
        const double gd = detail::interpolate(g3_, d2, d3);
        const double mud = coef_.decay(t_, d2, d3), mu = coef_.decay(t1, x2, x3);
        const double src = 0.5 * dt * (G_ ? G_(t_, d2, d3) + G_(t1, x2, x3) : 0.0);
        next(a, b) = (gd * (1.0 - 0.5 * dt * mud) + src) / (1.0 + 0.5 * dt * mu);
      }
    g3_ = std::move(next);
    t_ = t1;
  }

private:
  BoundaryTransportCoefficients coef_;
  BoundarySource G_;
  TransportOptions opt_;
  PlaneField g3_;
  double t_ = 0.0;
};

struct RTransportRun {
  SlabField r;                       // at the final time
  std::vector<double> times, r_l2;   // per step, including t = 0
  double r_l2_T = 0.0;               // ||r||_{L2(Omega_T)} by the trapezoid rule in time
  std::size_t ghost_reads = 0;
};

inline RTransportRun evolve_constraint_r(const ScalarSource& F, const TransportCoefficients& c, const SlabGrid& g,
                                         double T, int steps, const TransportOptions& o = {}) {
  RTransport tr(g, c, F, o);
  RTransportRun out;
  const double dt = T / steps;
  out.times.push_back(0.0);
  out.r_l2.push_back(0.0);
  for (int n = 0; n < steps; ++n) {
    tr.step(dt);
    out.times.push_back(tr.time());
    out.r_l2.push_back(tr.r().l2());
  }
  double s = 0.0;
  for (int n = 0; n < steps; ++n) s += 0.5 * dt * (out.r_l2[n] * out.r_l2[n] + out.r_l2[n + 1] * out.r_l2[n + 1]);
  out.r_l2_T = std::sqrt(s);
  out.r = tr.r();
  out.ghost_reads = tr.ghost_reads();
  return out;
}

struct G3TransportRun {
  PlaneField g3;
  std::vector<double> times, g3_l2;
};

inline G3TransportRun evolve_constraint_g3(const BoundarySource& G, const BoundaryTransportCoefficients& c, int n2,
                                           int n3, double T, int steps, const TransportOptions& o = {}) {
  G3Transport tr(n2, n3, c, G, o);
  G3TransportRun out;
  const double dt = T / steps;
  out.times.push_back(0.0);
  out.g3_l2.push_back(0.0);
  for (int n = 0; n < steps; ++n) {
    tr.step(dt);
    out.times.push_back(tr.time());
    out.g3_l2.push_back(tr.g3().l2());
  }
  out.g3 = tr.g3();
  return out;
}

// ---------------------------------------------------------------------------
// sources from the data

// plasma forcing f(t,x) in the (34) variables, 8 components
using PlasmaForcing = std::function<Vec8(double, const Vec3&)>;

// F = div f_H / d1Phi^+ with f_H = (f_n, f6, f7), by fourth-order differences
inline ScalarSource constraint_source_F(const BasicState& bs, PlasmaForcing f, double h = 1e-3) {
  return [bs, f, h](double t, const Vec3& x) {
    const detail::VecFn fH = [&](double tt, const Vec3& y) -> Eigen::VectorXd {
      const Vec8 v = f(tt, y);
      const LiftedFront L = bs.lift(Side::plasma, tt, y);
      return Vec3(v(kH1) - v(kH2) * L.d2Psi - v(kH3) * L.d3Psi, v(kH2), v(kH3));
    };
    const std::vector<double> kinks{bs.cutoff.s0(), bs.cutoff.s1()};
    double div = 0.0;
    for (int a = 1; a <= 3; ++a)
      div += detail::fd_partial(fH, t, x, a, h, true, std::numeric_limits<double>::infinity(), kinks)(a - 1);
    return div / bs.lift(Side::plasma, t, x).d1Phi;
  };
}

// G = { d2(H2^ g1) + d3(H3^ g1) - f_n } on x1 = 0
inline BoundarySource constraint_source_G(const BasicState& bs, PlasmaForcing f, BoundarySource g1, double h = 1e-3) {
  return [bs, f, g1, h](double t, double x2, double x3) {
    const detail::VecFn Hg = [&](double tt, const Vec3& y) -> Eigen::VectorXd {
      const Vec3 H = bs.plasma(tt, y).H;
      return Eigen::Vector2d(H(1) * g1(tt, y(1), y(2)), H(2) * g1(tt, y(1), y(2)));
    };
    const Vec3 x(0.0, x2, x3);
    const double div = detail::fd_partial(Hg, t, x, 2, h, true)(0) + detail::fd_partial(Hg, t, x, 3, h, true)(1);
    const Vec8 v = f(t, x);
    const LiftedFront L = bs.lift(Side::plasma, t, x);
    return div - (v(kH1) - v(kH2) * L.d2Psi - v(kH3) * L.d3Psi);
  };
}

// ---------------------------------------------------------------------------
// residuals

struct ConstraintResiduals {
  double div_residual = 0.0;       // || div h' - r ||_{L2}
  double boundary_residual = 0.0;  // || H2^ d2 phi + H3^ d3 phi - H_N' - phi d1 H_N^ - g3 ||_{L2(x1=0)}
  double r_l2 = 0.0, g3_l2 = 0.0;
};

// Residuals of the two constraints for a plasma perturbation U' (8 components,
// (34) variables) and front phi at frozen coefficients.
inline ConstraintResiduals constraint_residuals(const SlabField& Udot, const PlaneField& phi, const SlabField& r,
                                                const PlaneField& g3, const FrozenState& f,
                                                NormalStencil s = NormalStencil::second_order) {
  if (Udot.ncomp() != 8 || r.ncomp() != 1 || r.grid().n1 != Udot.grid().n1 || r.grid().n2 != Udot.grid().n2 ||
      r.grid().n3 != Udot.grid().n3 || phi.n2() != Udot.grid().n2 || phi.n3() != Udot.grid().n3 ||
      g3.n2() != phi.n2() || g3.n3() != phi.n3())
    throw std::invalid_argument("constraint_residuals: incompatible grids");
  const SlabGrid& g = Udot.grid();
  const double dP = f.d1PhiPlus;
  SlabField h(g, 3);
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        h(0, j, a, b) = Udot(kH1, j, a, b) - Udot(kH2, j, a, b) * f.d2Psi - Udot(kH3, j, a, b) * f.d3Psi;
        h(1, j, a, b) = Udot(kH2, j, a, b) * dP;
        h(2, j, a, b) = Udot(kH3, j, a, b) * dP;
      }
  const SlabField d1 = normal_derivative(h, s), d2 = tangential_derivative(h, 2), d3 = tangential_derivative(h, 3);
  SlabField res(g, 1);
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b)
        res(0, j, a, b) = d1(0, j, a, b) + d2(1, j, a, b) + d3(2, j, a, b) - r(0, j, a, b);

  const PlaneField p2 = tangential_derivative(phi, 2), p3 = tangential_derivative(phi, 3);
  PlaneField bres(g.n2, g.n3);
  const double H2 = f.Ub.H(1), H3 = f.Ub.H(2);
  for (int a = 0; a < g.n2; ++a)
    for (int b = 0; b < g.n3; ++b)
      bres(a, b) = H2 * p2(a, b) + H3 * p3(a, b) - h(0, 0, a, b) - phi(a, b) * f.d1_HN - g3(a, b);

  return {res.l2(), bres.l2(), r.l2(), g3.l2()};
}

// the a-priori bounds for r and g3 read as ratios
struct ConstraintEstimates {
  double ratio_47 = 0.0;  // ||r||_{L2(Omega_T)} / [f]_{2,*,T}
  double ratio_48 = 0.0;  // ||g3||_{H1(bdry_T)} / (||g||_{H2(bdry_T)} + [f]_{2,*,T})
};

inline ConstraintEstimates constraint_estimates(double r_l2_T, double g3_h1_T, double g_h2_T, double f_norm) {
  ConstraintEstimates e;
  if (f_norm > 0.0) e.ratio_47 = r_l2_T / f_norm;
  if (g_h2_T + f_norm > 0.0) e.ratio_48 = g3_h1_T / (g_h2_T + f_norm);
  return e;
}

}  // namespace plasmavac
