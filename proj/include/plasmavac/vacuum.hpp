#pragma once
// Vacuum field through the scalar potential: curl form = grad A, div of the
// div form = 0, normal component prescribed on x1 = 0, decay as x1 -> inf.
//
// With constant front slopes psi = (psi2, psi3) and d = d1Phi^- < 0, a mode
// A = a e^{lambda x1} e^{i k.x'} solves the system iff
//   (1 + |psi|^2) lambda^2 - 2 i d (psi.k) lambda - d^2 |k|^2 = 0,
// and the decaying root is lambda = d (i psi.k + s) / (1 + |psi|^2) with
//   s = sqrt((1 + |psi|^2)|k|^2 - (psi.k)^2) > 0.
// Its normal trace is s a, so a = g_N / s.

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "basic_state.hpp"
#include "slab.hpp"

namespace plasmavac {

using CVec3 = Eigen::Matrix<cplx, 3, 1>;

struct VacuumCoefficients {
  double psi2 = 0.0, psi3 = 0.0;  // tangential slopes of Psi^- (front slopes at x1 = 0)
  double d = -1.0;                // d1Phi^-

  static VacuumCoefficients from_frozen(const FrozenState& f) {
    return {f.d2PsiMinus, f.d3PsiMinus, f.d1PhiMinus};
  }
};

class SolvabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConditioningError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct VacuumMode {
  int k2 = 0, k3 = 0;
  cplx a = 0.0;        // A(0)
  cplx lambda = 0.0;
  double s = 0.0;
  VacuumCoefficients c;

  cplx potential(double x1) const { return a * std::exp(lambda * x1); }
  // field components (Hvac'_1, Hvac'_2, Hvac'_3) at x1
  CVec3 field(double x1) const {
    const cplx A = potential(x1);
    const cplx h1 = lambda * A / c.d;
    return CVec3(h1, cplx(0.0, k2) * A - c.psi2 * h1, cplx(0.0, k3) * A - c.psi3 * h1);
  }
  CVec3 d1_field(double x1) const { return lambda * field(x1); }
  cplx normal_trace() const { return s * a; }
  // int_0^inf |field|^2 dx1 per unit tangential area
  double field_l2sq() const {
    if (a == 0.0) return 0.0;
    const CVec3 h = field(0.0);
    return h.squaredNorm() / (-2.0 * lambda.real());
  }
};

inline VacuumMode solve_vacuum_mode(int k2, int k3, cplx gN, const VacuumCoefficients& c) {
  VacuumMode m;
  m.k2 = k2;
  m.k3 = k3;
  m.c = c;
  if (k2 == 0 && k3 == 0) {
    if (std::abs(gN) > 0.0) {
      std::ostringstream os;
      os << "vacuum: k = 0 boundary data must have zero mean (got " << std::abs(gN) << ")";
      throw SolvabilityError(os.str());
    }
    return m;
  }
  if (!(c.d <= -0.5)) throw ConditioningError("vacuum: d1Phi^- must be <= -1/2");
  const double pk = c.psi2 * k2 + c.psi3 * k3;
  const double q = 1.0 + c.psi2 * c.psi2 + c.psi3 * c.psi3;
  m.s = std::sqrt(q * (double(k2) * k2 + double(k3) * k3) - pk * pk);
  m.lambda = c.d * cplx(m.s, pk) / q;
  m.a = gN / m.s;
  return m;
}

// Boundary data per mode; modes are stored for the half-plane and the
// conjugate partner is implied (the physical field is real).
struct ModeDatum {
  int k2, k3;
  cplx value;
};

struct VacuumSolution {
  VacuumCoefficients c;
  std::vector<VacuumMode> modes;

  // real field sum over stored modes (+ conjugates for k != 0)
  Vec3 field(const Vec3& x) const {
    Vec3 h = Vec3::Zero();
    for (const auto& m : modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x(1) + m.k3 * x(2)));
      const CVec3 v = m.field(x(0)) * e;
      h += (m.k2 == 0 && m.k3 == 0 ? 1.0 : 2.0) * v.real();
    }
    return h;
  }
  double potential(const Vec3& x) const {
    double A = 0.0;
    for (const auto& m : modes) {
      const cplx e = std::exp(cplx(0.0, m.k2 * x(1) + m.k3 * x(2)));
      A += (m.k2 == 0 && m.k3 == 0 ? 1.0 : 2.0) * (m.potential(x(0)) * e).real();
    }
    return A;
  }
  SlabField sample(const SlabGrid& g) const {
    return SlabField::sample(g, 3, [&](double a, double b, double cc) { return field(Vec3(a, b, cc)); });
  }
};

inline VacuumSolution solve_vacuum(const std::vector<ModeDatum>& gN, const VacuumCoefficients& c) {
  VacuumSolution sol;
  sol.c = c;
  for (const auto& d : gN) sol.modes.push_back(solve_vacuum_mode(d.k2, d.k3, d.value, c));
  return sol;
}

struct VacuumEnergy {
  double J = 0.0;  // 2 int A Hvac'_N dx' on x1 = 0
  double K = 0.0;  // -int d1Phi^- |Hvac'|^2 dx
  double gap = 0.0;
};

// J from the boundary trace, K by composite Gauss quadrature in x1 (tangential
// integrals exact by orthogonality on the 2pi-torus).
inline VacuumEnergy vacuum_energy_identity(const VacuumSolution& sol, double L = 25.0, int panels = 64) {
  const double area = 4.0 * std::numbers::pi * std::numbers::pi;
  static const GaussLegendre gl(10);
  VacuumEnergy e;
  for (const auto& m : sol.modes) {
    const double w = (m.k2 == 0 && m.k3 == 0) ? 1.0 : 2.0;
    e.J += 2.0 * area * w * std::real(std::conj(m.potential(0.0)) * m.normal_trace());
    const double q = gl.integrate([&](double x1) { return m.field(x1).squaredNorm(); }, 0.0, L, {}, panels);
    e.K += -sol.c.d * area * w * q;
  }
  const double den = std::max(std::abs(e.J), std::abs(2.0 * e.K));
  e.gap = den > 0.0 ? std::abs(e.J - 2.0 * e.K) / den : 0.0;
  return e;
}

struct VacuumRecovery {
  SlabField d1H;
  double ratio = 0.0;  // ||d1 H||^2 / (||d2 H||^2 + ||d3 H||^2)
};

// Normal derivatives from the curl and div relations:
//   psi3 X1 + X3 = d d3H1,  psi2 X1 + X2 = d d2H1,  X1 - psi2 X2 - psi3 X3 = -d (d2H2 + d3H3)
inline Vec3 normal_derivative_from_tangential(const VacuumCoefficients& c, const Vec3& d2H, const Vec3& d3H) {
  if (!(std::abs(c.d) >= 0.5)) throw ConditioningError("vacuum recovery: |d1Phi^-| below 1/2");
  Eigen::Matrix3d M;
  M << c.psi3, 0.0, 1.0, c.psi2, 1.0, 0.0, 1.0, -c.psi2, -c.psi3;
  const Vec3 rhs(c.d * d3H(0), c.d * d2H(0), -c.d * (d2H(1) + d3H(2)));
  return M.partialPivLu().solve(rhs);
}

inline VacuumRecovery recover_normal_derivative_vacuum(const SlabField& H, const VacuumCoefficients& c) {
  if (H.ncomp() != 3) throw std::invalid_argument("vacuum recovery expects a 3-component field");
  const SlabGrid& g = H.grid();
  const SlabField d2 = tangential_derivative(H, 2), d3 = tangential_derivative(H, 3);
  VacuumRecovery out;
  out.d1H = SlabField(g, 3);
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        const Vec3 x2(d2(0, j, a, b), d2(1, j, a, b), d2(2, j, a, b));
        const Vec3 x3(d3(0, j, a, b), d3(1, j, a, b), d3(2, j, a, b));
        const Vec3 X = normal_derivative_from_tangential(c, x2, x3);
        for (int i = 0; i < 3; ++i) out.d1H(i, j, a, b) = X(i);
      }
  const double den = d2.l2() * d2.l2() + d3.l2() * d3.l2();
  out.ratio = den > 0.0 ? out.d1H.l2() * out.d1H.l2() / den : 0.0;
  return out;
}

// Discrete curl of the curl form and div of the div form of a sampled field.
struct VacuumResiduals {
  double curl = 0.0, div = 0.0;  // L2 norms over the slab
};

inline VacuumResiduals vacuum_residuals(const SlabField& H, const VacuumCoefficients& c,
                                        NormalStencil s = NormalStencil::second_order) {
  const SlabGrid& g = H.grid();
  SlabField curlf(g, 3), divf(g, 3);
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        const double h1 = H(0, j, a, b), h2 = H(1, j, a, b), h3 = H(2, j, a, b);
        curlf(0, j, a, b) = h1 * c.d;
        curlf(1, j, a, b) = h1 * c.psi2 + h2;
        curlf(2, j, a, b) = h1 * c.psi3 + h3;
        divf(0, j, a, b) = h1 - h2 * c.psi2 - h3 * c.psi3;
        divf(1, j, a, b) = h2 * c.d;
        divf(2, j, a, b) = h3 * c.d;
      }
  const SlabField C1 = normal_derivative(curlf, s), C2 = tangential_derivative(curlf, 2),
                  C3 = tangential_derivative(curlf, 3);
  const SlabField D1 = normal_derivative(divf, s), D2 = tangential_derivative(divf, 2),
                  D3 = tangential_derivative(divf, 3);
  SlabField rc(g, 3), rd(g, 1);
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        rc(0, j, a, b) = C2(2, j, a, b) - C3(1, j, a, b);
        rc(1, j, a, b) = C3(0, j, a, b) - C1(2, j, a, b);
        rc(2, j, a, b) = C1(1, j, a, b) - C2(0, j, a, b);
        rd(0, j, a, b) = D1(0, j, a, b) + D2(1, j, a, b) + D3(2, j, a, b);
      }
  return {rc.l2(), rd.l2()};
}

}  // namespace plasmavac
