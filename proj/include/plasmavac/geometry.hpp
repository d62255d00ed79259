#pragma once
// Interface straightening: cut-off chi, the front phi(t,x') and its lifts
//   Psi^pm = chi(+-x1) phi,   Phi^pm = +-x1 + Psi^pm.
// The tangential plane is the periodic torus [0, 2pi)^2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mhd_core.hpp"

namespace plasmavac {

// chi = 1 on [-s0, s0], 0 outside [-s1, s1], cosine smoothstep in between.
class CutOff {
public:
  explicit CutOff(double s0 = 1.0, double s1 = 4.2) : s0_(s0), s1_(s1) {
    if (!(s0 >= 1.0 && s1 > s0)) throw std::invalid_argument("cut-off needs 1 <= s0 < s1");
    if (!(max_slope() < 0.5))
      throw std::invalid_argument("cut-off transition too steep: max|chi'| must stay below 1/2");
  }

  double s0() const { return s0_; }
  double s1() const { return s1_; }
  double max_slope() const { return std::numbers::pi / (2.0 * (s1_ - s0_)); }

  double value(double s) const {
    const double a = std::abs(s);
    if (a <= s0_) return 1.0;
    if (a >= s1_) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (a - s0_) / (s1_ - s0_)));
  }
  double derivative(double s) const {
    const double a = std::abs(s);
    if (a <= s0_ || a >= s1_) return 0.0;
    const double w = s1_ - s0_;
    const double d = -0.5 * std::numbers::pi / w * std::sin(std::numbers::pi * (a - s0_) / w);
    return s < 0 ? -d : d;
  }
  // bounded but discontinuous at the transition ends
  double second_derivative(double s) const {
    const double a = std::abs(s);
    if (a <= s0_ || a >= s1_) return 0.0;
    const double w = s1_ - s0_;
    const double k = std::numbers::pi / w;
    return -0.5 * k * k * std::cos(k * (a - s0_));
  }

private:
  double s0_, s1_;
};

struct CutOffValue {
  double chi, dchi;
};
inline CutOffValue cutoff_eval(const CutOff& c, double s) { return {c.value(s), c.derivative(s)}; }

// a * cos(k2 x2 + k3 x3 - omega t + theta)
struct FrontMode {
  double amplitude = 0.0;
  int k2 = 0, k3 = 0;
  double omega = 0.0;
  double theta = 0.0;
};

// phi(t,x') = c0 + ct t + c2 x2 + c3 x3 + sum of travelling cosines.
// The linear part is only meant for local probes (it is not periodic).
class InterfaceField {
public:
  double c0 = 0.0, ct = 0.0, c2 = 0.0, c3 = 0.0;
  std::vector<FrontMode> modes;

  InterfaceField() = default;
  static InterfaceField zero() { return {}; }
  static InterfaceField single(double a, int k2, int k3, double omega = 0.0, double theta = 0.0) {
    InterfaceField f;
    f.modes.push_back({a, k2, k3, omega, theta});
    return f;
  }

  // d^nt/dt d^n2/dx2 d^n3/dx3 phi
  double derivative(int nt, int n2, int n3, double t, double x2, double x3) const {
    double r = 0.0;
    const int n = nt + n2 + n3;
    if (n == 0) r = c0 + ct * t + c2 * x2 + c3 * x3;
    else if (n == 1) r = nt ? ct : (n2 ? c2 : c3);
    for (const auto& m : modes) {
      const double arg = m.k2 * x2 + m.k3 * x3 - m.omega * t + m.theta;
      const double fac = std::pow(-m.omega, nt) * std::pow(double(m.k2), n2) * std::pow(double(m.k3), n3);
      if (fac == 0.0) continue;
      r += m.amplitude * fac * std::cos(arg + 0.5 * n * std::numbers::pi);
    }
    return r;
  }
  double value(double t, double x2, double x3) const { return derivative(0, 0, 0, t, x2, x3); }
  double dt(double t, double x2, double x3) const { return derivative(1, 0, 0, t, x2, x3); }
  double d2(double t, double x2, double x3) const { return derivative(0, 1, 0, t, x2, x3); }
  double d3(double t, double x2, double x3) const { return derivative(0, 0, 1, t, x2, x3); }

  // bound on sup|phi| without sampling (exact for a single mode)
  double amplitude_bound() const {
    double s = std::abs(c0);
    for (const auto& m : modes) s += std::abs(m.amplitude);
    return s;
  }
};

enum class Side { plasma, vacuum };
inline double side_sign(Side s) { return s == Side::plasma ? 1.0 : -1.0; }

struct LiftedFront {
  double Psi, Phi;
  double d1Phi;
  double d1Psi;
  double dtPsi, d2Psi, d3Psi;
};

inline LiftedFront lift_front(const InterfaceField& phi, const CutOff& c, Side side, double t,
                              const Vec3& x) {
  const double sg = side_sign(side);
  const double chi = c.value(sg * x(0));
  const double dchi = sg * c.derivative(sg * x(0));
  const double f = phi.value(t, x(1), x(2));
  LiftedFront L;
  L.Psi = chi * f;
  L.Phi = sg * x(0) + L.Psi;
  L.d1Psi = dchi * f;
  L.d1Phi = sg + L.d1Psi;
  L.dtPsi = chi * phi.dt(t, x(1), x(2));
  L.d2Psi = chi * phi.d2(t, x(1), x(2));
  L.d3Psi = chi * phi.d3(t, x(1), x(2));
  return L;
}

struct AdmissibilityReport {
  double sup_abs_phi = 0.0;
  double inf_d1phi_plus = 1.0;
  double sup_d1phi_minus = -1.0;
  bool pass = true;
};

struct SampleSpec {
  int n2 = 32, n3 = 32;
  std::vector<double> times{0.0};
};

// Grid sampling of phi. On x1 >= 0 one has chi'(x1) in [-m, 0], so
// d1Phi^+ = 1 + chi' phi >= 1 - m max(phi, 0) and d1Phi^- = -1 - chi'(-x1) phi
// <= -1 + m max(-phi, 0), with equality where |chi'| = m.
inline AdmissibilityReport admissibility(const InterfaceField& phi, const CutOff& c = CutOff(),
                                         const SampleSpec& s = SampleSpec()) {
  AdmissibilityReport r;
  const double two_pi = 2.0 * std::numbers::pi;
  double hi = 0.0, lo = 0.0;
  for (double t : s.times)
    for (int i = 0; i < s.n2; ++i)
      for (int j = 0; j < s.n3; ++j) {
        const double f = phi.value(t, two_pi * i / s.n2, two_pi * j / s.n3);
        hi = std::max(hi, f);
        lo = std::min(lo, f);
      }
  r.sup_abs_phi = std::max(hi, -lo);
  r.inf_d1phi_plus = 1.0 - c.max_slope() * hi;
  r.sup_d1phi_minus = -1.0 - c.max_slope() * lo;
  r.pass = r.sup_abs_phi <= 1.0;
  return r;
}

inline Vec3 front_normal(const InterfaceField& phi, double t, double x2, double x3) {
  return Vec3(1.0, -phi.d2(t, x2, x3), -phi.d3(t, x2, x3));
}

}  // namespace plasmavac
