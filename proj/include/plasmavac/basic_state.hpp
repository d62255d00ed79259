#pragma once
// Basic state (U^, Hvac^, phi^): representation, constraint validation and
// coefficient freezing. All fields live in the straightened half-space x1 >= 0;
// the vacuum side is mapped with Phi^- = -x1 + Psi^-.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "mhd_core.hpp"

namespace plasmavac {

struct BasicState {
  EquationOfState eos = IdealGas{};
  std::function<PlasmaState(double, const Vec3&)> plasma;
  std::function<Vec3(double, const Vec3&)> vacuum;
  InterfaceField front;
  CutOff cutoff;
  std::string family = "custom";

  LiftedFront lift(Side s, double t, const Vec3& x) const { return lift_front(front, cutoff, s, t, x); }
};

class ConstraintError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GridError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// derived quantities

struct PlasmaDerived {
  double vn, Hn;   // v_n, H_n with the interior lift
  Vec3 u, w, h;    // u^, w^, h^
};

inline PlasmaDerived plasma_derived(const BasicState& bs, double t, const Vec3& x) {
  const PlasmaState U = bs.plasma(t, x);
  const LiftedFront L = bs.lift(Side::plasma, t, x);
  PlasmaDerived d;
  d.vn = U.v(0) - U.v(1) * L.d2Psi - U.v(2) * L.d3Psi;
  d.Hn = U.H(0) - U.H(1) * L.d2Psi - U.H(2) * L.d3Psi;
  d.u = Vec3(d.vn, U.v(1) * L.d1Phi, U.v(2) * L.d1Phi);
  d.w = d.u - Vec3(L.dtPsi, 0.0, 0.0);
  d.h = Vec3(d.Hn, U.H(1) * L.d1Phi, U.H(2) * L.d1Phi);
  return d;
}

struct VacuumDerived {
  Vec3 curl_form;  // (Hvac1 d1Phi^-, Hvac_tau2, Hvac_tau3)
  Vec3 div_form;   // (Hvac_n, Hvac2 d1Phi^-, Hvac3 d1Phi^-)
};

inline VacuumDerived vacuum_forms(const Vec3& Hv, const LiftedFront& L) {
  VacuumDerived d;
  d.curl_form = Vec3(Hv(0) * L.d1Phi, Hv(0) * L.d2Psi + Hv(1), Hv(0) * L.d3Psi + Hv(2));
  d.div_form = Vec3(Hv(0) - Hv(1) * L.d2Psi - Hv(2) * L.d3Psi, Hv(1) * L.d1Phi, Hv(2) * L.d1Phi);
  return d;
}

inline VacuumDerived vacuum_derived(const BasicState& bs, double t, const Vec3& x) {
  return vacuum_forms(bs.vacuum(t, x), bs.lift(Side::vacuum, t, x));
}

// normal components with respect to N = (1, -d2 phi, -d3 phi) at x1 = 0
inline double normal_component(const Vec3& a, double phi2, double phi3) {
  return a(0) - a(1) * phi2 - a(2) * phi3;
}

// ---------------------------------------------------------------------------
// finite differences

enum class StencilMode { analytic, grid };

struct Stencil {
  StencilMode mode = StencilMode::analytic;
  double h_analytic = 1e-3;
};

namespace detail {

using VecFn = std::function<Eigen::VectorXd(double, const Vec3&)>;

// d/d(axis) of f at (t,x); axis 0 is time. Near x1 = 0 (and at x1_max in
// grid mode) one-sided stencils are used so nothing outside the slab is read.
// The same happens next to the x1-kinks of the cut-off (chi'' jumps there):
// stencils never straddle one, otherwise the error drops to O(h).
inline Eigen::VectorXd fd_partial(const VecFn& f, double t, const Vec3& x, int axis, double h,
                                  bool fourth, double x1_max = std::numeric_limits<double>::infinity(),
                                  const std::vector<double>& kinks = {}) {
  auto at = [&](double s) {
    Vec3 y = x;
    double tt = t;
    if (axis == 0) tt += s;
    else y(axis - 1) += s;
    return f(tt, y);
  };
  const int reach = fourth ? 2 : 1;
  bool forward = false, backward = false;
  if (axis == 1) {
    if (x(0) - reach * h < -1e-14 * h) forward = true;
    else if (x(0) + reach * h > x1_max + 1e-12 * h) backward = true;
    for (double c : kinks) {
      if (forward || backward) break;
      if (c > x(0) - reach * h - 1e-12 * h && c <= x(0) + 1e-12 * h) forward = true;
      else if (c > x(0) && c < x(0) + reach * h + 1e-12 * h) backward = true;
    }
  }
  const double sg = backward ? -1.0 : 1.0;
  if (forward || backward) {
    if (fourth)
      return sg * (-25.0 * at(0) + 48.0 * at(sg * h) - 36.0 * at(sg * 2 * h) + 16.0 * at(sg * 3 * h) -
                   3.0 * at(sg * 4 * h)) / (12.0 * h);
    return sg * (-3.0 * at(0) + 4.0 * at(sg * h) - at(sg * 2 * h)) / (2.0 * h);
  }
  if (fourth) return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
  return (at(h) - at(-h)) / (2.0 * h);
}

inline Eigen::VectorXd to_vec(const Vec8& v) { return v; }
inline Eigen::VectorXd to_vec(const Vec3& v) { return v; }

}  // namespace detail

// ---------------------------------------------------------------------------
// families

inline void require_hyperbolic(const EquationOfState& eos, const PlasmaState& U) {
  if (!(hyperbolicity_margin(eos, U) > 0.0))
    throw ConstraintError("basic state violates hyperbolicity (rho > 0, p_rho > 0)");
}

inline BasicState make_constant_state(const PlasmaState& U, const Vec3& Hvac,
                                      const EquationOfState& eos = IdealGas{}) {
  validate_eos(eos);
  require_hyperbolic(eos, U);
  if (U.v(0) != 0.0) throw ConstraintError("constant state: v1 must vanish (kinematic condition)");
  if (U.H(0) != 0.0) throw ConstraintError("constant state: H1 must vanish (H_N = 0)");
  if (Hvac(0) != 0.0) throw ConstraintError("constant state: vacuum field component 1 must vanish");
  BasicState bs;
  bs.eos = eos;
  bs.plasma = [U](double, const Vec3&) { return U; };
  bs.vacuum = [Hvac](double, const Vec3&) { return Hvac; };
  bs.family = "constant";
  return bs;
}

// p = p0 + alpha x1, everything else constant, so [d1 q] = alpha.
inline BasicState make_linear_pressure_state(const PlasmaState& U0, const Vec3& Hvac, double alpha,
                                             const EquationOfState& eos = IdealGas{}) {
  BasicState bs = make_constant_state(U0, Hvac, eos);
  bs.plasma = [U0, alpha](double, const Vec3& x) {
    PlasmaState U = U0;
    U.p += alpha * x(0);
    return U;
  };
  bs.family = "linear_pressure";
  return bs;
}

// phi = A cos(x2 - V t) carried by v = (0, V, 0), with fields along x3.
// Every constraint holds identically.
inline BasicState make_traveling_front_state(double p, double S, double amplitude, double speed,
                                             double H3, double Hvac3,
                                             const EquationOfState& eos = IdealGas{}) {
  if (!(std::abs(amplitude) < 1.0)) throw ConstraintError("front amplitude must satisfy |A| < 1");
  PlasmaState U;
  U.p = p;
  U.S = S;
  U.v = Vec3(0.0, speed, 0.0);
  U.H = Vec3(0.0, 0.0, H3);
  validate_eos(eos);
  require_hyperbolic(eos, U);
  BasicState bs;
  bs.eos = eos;
  bs.plasma = [U](double, const Vec3&) { return U; };
  const Vec3 Hv(0.0, 0.0, Hvac3);
  bs.vacuum = [Hv](double, const Vec3&) { return Hv; };
  bs.front = InterfaceField::single(amplitude, 1, 0, speed);
  bs.family = "traveling_front";
  return bs;
}

// Flat front, constant plasma and Hvac = Hbar + (-d1 psi, d2 psi, d3 psi) with
// the harmonic potential psi = a cosh(k x1) cos(k x2): curl and div free, and
// the normal component vanishes on x1 = 0.
inline BasicState make_harmonic_vacuum_state(const PlasmaState& U, const Vec3& Hbar, double a,
                                             double k, const EquationOfState& eos = IdealGas{}) {
  BasicState bs = make_constant_state(U, Hbar, eos);
  bs.vacuum = [Hbar, a, k](double, const Vec3& x) {
    const double c = std::cos(k * x(1)), s = std::sin(k * x(1));
    return Vec3(Hbar(0) - a * k * std::sinh(k * x(0)) * c, Hbar(1) - a * k * std::cosh(k * x(0)) * s,
                Hbar(2));
  };
  bs.family = "harmonic_vacuum";
  return bs;
}

// ---------------------------------------------------------------------------
// validation

struct ValidationGrid {
  double t0 = 0.0, t1 = 0.0;
  int nt = 1;
  double L = 2.0;
  int n1 = 16, n2 = 16, n3 = 16;

  double h1() const { return L / n1; }
  double h2() const { return 2.0 * std::numbers::pi / n2; }
  double h3() const { return 2.0 * std::numbers::pi / n3; }
  double ht() const { return nt > 1 ? (t1 - t0) / (nt - 1) : h1(); }
  double time(int i) const { return nt > 1 ? t0 + (t1 - t0) * i / (nt - 1) : t0; }
  double finest() const { return std::min({h1(), h2(), h3(), nt > 1 ? ht() : h1()}); }
};

struct ValidationReport {
  double hyperbolicity_min = 0.0;
  double kinematic = 0.0;       // sup |dt phi - v_N| on x1 = 0
  double vacuum_normal = 0.0;   // sup |Hvac_N| on x1 = 0
  double vacuum_curl = 0.0;     // sup |curl of the curl form|
  double vacuum_div = 0.0;      // sup |div of the div form|
  double induction = 0.0;       // sup residual of the H equation
  double plasma_div = 0.0;      // sup |div h|
  double plasma_normal = 0.0;   // sup |H_N| on x1 = 0
  double w2inf_bound = 0.0;     // discrete K of the W^2_inf bound
  double tolerance = 0.0;
  bool pass_hyperbolic = false, pass_boundary = false, pass_vacuum = false, pass_induction = false,
       pass_divergence = false, pass = false;
};

struct ValidationOptions {
  Stencil stencil;
  double tolerance = -1.0;  // < 0: 1e-8 analytic, 10 h^2 grid
};

inline ValidationReport validate_basic_state(const BasicState& bs, const ValidationGrid& g,
                                             const ValidationOptions& opt = ValidationOptions()) {
  if (g.n1 < 2 || g.n2 < 3 || g.n3 < 3 || g.nt < 1 || !(g.L > 0.0) || (g.nt > 1 && !(g.t1 > g.t0)))
    throw GridError("validation grid too coarse for the difference stencils");
  const bool analytic = opt.stencil.mode == StencilMode::analytic;
  const bool fourth = analytic;
  const double hs[4] = {analytic ? opt.stencil.h_analytic : g.ht(), analytic ? opt.stencil.h_analytic : g.h1(),
                        analytic ? opt.stencil.h_analytic : g.h2(), analytic ? opt.stencil.h_analytic : g.h3()};
  const double x1max = analytic ? std::numeric_limits<double>::infinity() : g.L;
  const std::vector<double> kinks{bs.cutoff.s0(), bs.cutoff.s1()};

  ValidationReport r;
  r.tolerance = opt.tolerance >= 0.0 ? opt.tolerance : (analytic ? 1e-8 : 10.0 * g.finest() * g.finest());
  r.hyperbolicity_min = std::numeric_limits<double>::infinity();

  using detail::VecFn;
  const VecFn Ufn = [&](double t, const Vec3& x) { return detail::to_vec(bs.plasma(t, x).to_vector()); };
  const VecFn Hfn = [&](double t, const Vec3& x) { return detail::to_vec(bs.vacuum(t, x)); };
  const VecFn curl_fn = [&](double t, const Vec3& x) { return detail::to_vec(vacuum_derived(bs, t, x).curl_form); };
  const VecFn div_fn = [&](double t, const Vec3& x) { return detail::to_vec(vacuum_derived(bs, t, x).div_form); };
  const VecFn h_fn = [&](double t, const Vec3& x) { return detail::to_vec(plasma_derived(bs, t, x).h); };
  const VecFn u_fn = [&](double t, const Vec3& x) { return detail::to_vec(plasma_derived(bs, t, x).u); };
  auto D = [&](const VecFn& f, double t, const Vec3& x, int axis) {
    return detail::fd_partial(f, t, x, axis, hs[axis], fourth, x1max, kinks);
  };
  // first partials of f as a function again, for nested differences
  auto Dfn = [&](const VecFn& f, int axis) -> VecFn {
    return [&, f, axis](double t, const Vec3& x) { return D(f, t, x, axis); };
  };

  for (int it = 0; it < g.nt; ++it) {
    const double t = g.time(it);
    for (int j = 0; j <= g.n1; ++j)
      for (int m2 = 0; m2 < g.n2; ++m2)
        for (int m3 = 0; m3 < g.n3; ++m3) {
          const Vec3 x(j * g.h1(), m2 * g.h2(), m3 * g.h3());
          const PlasmaState U = bs.plasma(t, x);
          r.hyperbolicity_min = std::min(r.hyperbolicity_min, hyperbolicity_margin(bs.eos, U));

          // (25): curl of the curl form, div of the div form
          Eigen::VectorXd dC[4], dDv[4];
          for (int a = 1; a <= 3; ++a) {
            dC[a] = D(curl_fn, t, x, a);
            dDv[a] = D(div_fn, t, x, a);
          }
          const Vec3 curl(dC[2](2) - dC[3](1), dC[3](0) - dC[1](2), dC[1](1) - dC[2](0));
          r.vacuum_curl = std::max(r.vacuum_curl, curl.cwiseAbs().maxCoeff());
          r.vacuum_div = std::max(r.vacuum_div, std::abs(dDv[1](0) + dDv[2](1) + dDv[3](2)));

          // (27) interior: div h
          double divh = 0.0;
          for (int a = 1; a <= 3; ++a) divh += D(h_fn, t, x, a)(a - 1);
          r.plasma_div = std::max(r.plasma_div, std::abs(divh));

          // (26): dt H + { (w.grad) H - (h.grad) v + H div u } / d1Phi^+
          const PlasmaDerived pd = plasma_derived(bs, t, x);
          const LiftedFront L = bs.lift(Side::plasma, t, x);
          Eigen::VectorXd dU[4];
          for (int a = 0; a <= 3; ++a) dU[a] = D(Ufn, t, x, a);
          double divu = 0.0;
          for (int a = 1; a <= 3; ++a) divu += D(u_fn, t, x, a)(a - 1);
          Vec3 res = dU[0].segment<3>(kH1);
          Vec3 brace = U.H * divu;
          for (int a = 1; a <= 3; ++a)
            brace += pd.w(a - 1) * dU[a].segment<3>(kH1) - pd.h(a - 1) * dU[a].segment<3>(kV1);
          res += brace / L.d1Phi;
          r.induction = std::max(r.induction, res.cwiseAbs().maxCoeff());

          // W^2_inf: U, Hvac, d1 U and their partials up to order 2
          double K = U.to_vector().cwiseAbs().maxCoeff();
          K = std::max(K, bs.vacuum(t, x).cwiseAbs().maxCoeff());
          for (int a = 0; a <= 3; ++a) {
            K = std::max(K, dU[a].cwiseAbs().maxCoeff());
            K = std::max(K, D(Hfn, t, x, a).cwiseAbs().maxCoeff());
          }
          if (it == 0 || g.nt == 1) {
            const VecFn d1U = Dfn(Ufn, 1);
            for (int a = 0; a <= 3; ++a) {
              const VecFn dUa = Dfn(Ufn, a), dHa = Dfn(Hfn, a), d1Ua = Dfn(d1U, a);
              K = std::max(K, D(d1U, t, x, a).cwiseAbs().maxCoeff());
              for (int b = a; b <= 3; ++b) {
                K = std::max(K, D(dUa, t, x, b).cwiseAbs().maxCoeff());
                K = std::max(K, D(dHa, t, x, b).cwiseAbs().maxCoeff());
                K = std::max(K, D(d1Ua, t, x, b).cwiseAbs().maxCoeff());
              }
            }
          }
          r.w2inf_bound = std::max(r.w2inf_bound, K);

          if (j == 0) {
            const double p2 = bs.front.d2(t, x(1), x(2)), p3 = bs.front.d3(t, x(1), x(2));
            r.kinematic = std::max(r.kinematic, std::abs(bs.front.dt(t, x(1), x(2)) - normal_component(U.v, p2, p3)));
            r.vacuum_normal = std::max(r.vacuum_normal, std::abs(normal_component(bs.vacuum(t, x), p2, p3)));
            r.plasma_normal = std::max(r.plasma_normal, std::abs(normal_component(U.H, p2, p3)));
          }
        }
  }
  // phi^ up to third order (exact for the trigonometric representation)
  for (int it = 0; it < g.nt; ++it)
    for (int m2 = 0; m2 < g.n2; ++m2)
      for (int m3 = 0; m3 < g.n3; ++m3)
        for (int nt = 0; nt <= 3; ++nt)
          for (int n2 = 0; n2 + nt <= 3; ++n2)
            for (int n3 = 0; n3 + n2 + nt <= 3; ++n3)
              r.w2inf_bound = std::max(r.w2inf_bound,
                                       std::abs(bs.front.derivative(nt, n2, n3, g.time(it), m2 * g.h2(), m3 * g.h3())));

  const double tol = r.tolerance;
  r.pass_hyperbolic = r.hyperbolicity_min > 0.0;
  r.pass_boundary = r.kinematic <= tol && r.vacuum_normal <= tol;
  r.pass_vacuum = r.vacuum_curl <= tol && r.vacuum_div <= tol;
  r.pass_induction = r.induction <= tol;
  r.pass_divergence = r.plasma_div <= tol && r.plasma_normal <= tol;
  r.pass = r.pass_hyperbolic && r.pass_boundary && r.pass_vacuum && r.pass_induction && r.pass_divergence &&
           std::isfinite(r.w2inf_bound);
  return r;
}

// ---------------------------------------------------------------------------
// frozen coefficients

struct FrozenState {
  EquationOfState eos = IdealGas{};

  // interior point
  PlasmaState U;
  std::array<Vec8, 4> dU{Vec8::Zero(), Vec8::Zero(), Vec8::Zero(), Vec8::Zero()};  // dt, d1, d2, d3
  double dtPsi = 0.0, d2Psi = 0.0, d3Psi = 0.0, d1PhiPlus = 1.0;
  double d2PsiMinus = 0.0, d3PsiMinus = 0.0, d1PhiMinus = -1.0;
  Vec3 Hvac_interior = Vec3::Zero();

  // boundary point
  PlasmaState Ub;
  Vec3 Hvac = Vec3::Zero();
  double phi_t = 0.0, phi_2 = 0.0, phi_3 = 0.0;
  double jump_dq = 0.0;       // [d1 q]
  double d1_vN = 0.0;         // beta in the front equation
  double d1_HN = 0.0;         // d1 H_N, enters the tangency constraint
  double div_tan_v = 0.0;     // d2 v2 + d3 v3 on the boundary
  double div_tan_Hvac = 0.0;  // d2 Hvac2 + d3 Hvac3 on the boundary

  // boundary constraints v_N = dt phi, Hvac_N = 0, H_N = 0
  double boundary_defect() const {
    return std::max({std::abs(normal_component(Ub.v, phi_2, phi_3) - phi_t),
                     std::abs(normal_component(Hvac, phi_2, phi_3)),
                     std::abs(normal_component(Ub.H, phi_2, phi_3))});
  }
};

struct FrozenExtras {
  double jump_dq = 0.0;   // realised through d1 p
  double d1_vN = 0.0;     // realised through d1 v1
  double phi_t = 0.0, phi_2 = 0.0, phi_3 = 0.0;
};

// Direct construction of constant coefficients (interior point on x1 = 0).
inline FrozenState make_frozen(const PlasmaState& U, const Vec3& Hvac, const FrozenExtras& ex = {},
                               const EquationOfState& eos = IdealGas{}, double tol = 1e-12) {
  validate_eos(eos);
  require_hyperbolic(eos, U);
  FrozenState f;
  f.eos = eos;
  f.U = f.Ub = U;
  f.Hvac = f.Hvac_interior = Hvac;
  f.phi_t = f.dtPsi = ex.phi_t;
  f.phi_2 = f.d2Psi = f.d2PsiMinus = ex.phi_2;
  f.phi_3 = f.d3Psi = f.d3PsiMinus = ex.phi_3;
  f.dU[1](kP) = ex.jump_dq;
  f.dU[1](kV1) = ex.d1_vN;
  f.jump_dq = ex.jump_dq;
  f.d1_vN = ex.d1_vN;
  if (f.boundary_defect() > tol) {
    std::ostringstream os;
    os << "frozen boundary constraints violated by " << f.boundary_defect();
    throw ConstraintError(os.str());
  }
  return f;
}

struct FreezeOptions {
  double h1 = 1e-3;   // one-sided stencil step for the boundary normal derivatives
  double tol = 1e-8;  // boundary constraint tolerance at the freeze point
  ValidationGrid domain;
};

inline FrozenState freeze(const BasicState& bs, double t, const Vec3& x, const FreezeOptions& opt = {}) {
  const ValidationGrid& g = opt.domain;
  const double eps = 1e-12;
  if (t < g.t0 - eps || t > std::max(g.t0, g.t1) + eps || x(0) < -eps || x(0) > g.L + eps)
    throw GridError("freeze point outside the validated grid");

  FrozenState f;
  f.eos = bs.eos;
  f.U = bs.plasma(t, x);
  require_hyperbolic(bs.eos, f.U);
  const detail::VecFn Ufn = [&](double tt, const Vec3& y) { return detail::to_vec(bs.plasma(tt, y).to_vector()); };
  const std::vector<double> kinks{bs.cutoff.s0(), bs.cutoff.s1()};
  for (int a = 0; a < 4; ++a)
    f.dU[a] = detail::fd_partial(Ufn, t, x, a, opt.h1, true, std::numeric_limits<double>::infinity(), kinks);
  const LiftedFront Lp = bs.lift(Side::plasma, t, x), Lm = bs.lift(Side::vacuum, t, x);
  f.dtPsi = Lp.dtPsi;
  f.d2Psi = Lp.d2Psi;
  f.d3Psi = Lp.d3Psi;
  f.d1PhiPlus = Lp.d1Phi;
  f.d2PsiMinus = Lm.d2Psi;
  f.d3PsiMinus = Lm.d3Psi;
  f.d1PhiMinus = Lm.d1Phi;
  f.Hvac_interior = bs.vacuum(t, x);

  const Vec3 xb(0.0, x(1), x(2));
  f.Ub = bs.plasma(t, xb);
  f.Hvac = bs.vacuum(t, xb);
  f.phi_t = bs.front.dt(t, x(1), x(2));
  f.phi_2 = bs.front.d2(t, x(1), x(2));
  f.phi_3 = bs.front.d3(t, x(1), x(2));
  if (f.boundary_defect() > opt.tol) {
    std::ostringstream os;
    os << "freeze: boundary constraints violated at the freeze point (defect " << f.boundary_defect() << ")";
    throw ConstraintError(os.str());
  }

  // second-order one-sided differences in x1 at the boundary
  const double h = opt.h1;
  auto d1 = [&](const std::function<double(const Vec3&)>& q) {
    return (-3.0 * q(xb) + 4.0 * q(xb + Vec3(h, 0, 0)) - q(xb + Vec3(2 * h, 0, 0))) / (2.0 * h);
  };
  const double p2 = f.phi_2, p3 = f.phi_3;
  const double dq = d1([&](const Vec3& y) { return total_pressure(bs.plasma(t, y)); });
  const double HdH = d1([&](const Vec3& y) { return 0.5 * bs.vacuum(t, y).squaredNorm(); });
  f.jump_dq = dq - HdH;
  f.d1_vN = d1([&](const Vec3& y) { return normal_component(bs.plasma(t, y).v, p2, p3); });
  f.d1_HN = d1([&](const Vec3& y) { return normal_component(bs.plasma(t, y).H, p2, p3); });

  // tangential divergences on the boundary (fourth-order central)
  const detail::VecFn vb = [&](double tt, const Vec3& y) { return detail::to_vec(bs.plasma(tt, y).v); };
  const detail::VecFn Hb = [&](double tt, const Vec3& y) { return detail::to_vec(bs.vacuum(tt, y)); };
  f.div_tan_v = detail::fd_partial(vb, t, xb, 2, opt.h1, true)(1) + detail::fd_partial(vb, t, xb, 3, opt.h1, true)(2);
  f.div_tan_Hvac = detail::fd_partial(Hb, t, xb, 2, opt.h1, true)(1) + detail::fd_partial(Hb, t, xb, 3, opt.h1, true)(2);
  return f;
}

}  // namespace plasmavac
