#pragma once
// Good unknowns, the secondary unknown V = J^{-1} U', and the symmetric
// operator A0 dt V + sum Ak dk V + A4 V in V variables.

#include <functional>
#include <stdexcept>

#include <Eigen/SVD>

#include "basic_state.hpp"
#include "slab.hpp"

namespace plasmavac {

class AdmissibilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// U' = U - Psi / d1Phi * d1U^ (plasma), same shape for the vacuum field.
template <class Vec>
Vec good_unknown(Side side, const Vec& perturbation, double Psi, double d1Phi, const Vec& d1_basic) {
  const double sg = side_sign(side);
  if (!(sg * d1Phi >= 0.5))
    throw AdmissibilityError("good unknown: |d1Phi| below 1/2 on the " +
                             std::string(side == Side::plasma ? "plasma" : "vacuum") + " side");
  return perturbation - (Psi / d1Phi) * d1_basic;
}

// J with U' = J V; unit upper triangular.
inline Mat8 secondary_jacobian(const Vec3& H, double d2Psi, double d3Psi) {
  Mat8 J = Mat8::Identity();
  J(0, kH1) = -H(0);
  J(0, kH2) = -(H(0) * d2Psi + H(1));
  J(0, kH3) = -(H(0) * d3Psi + H(2));
  J(1, kV2) = d2Psi;
  J(1, kV3) = d3Psi;
  J(4, kH2) = d2Psi;
  J(4, kH3) = d3Psi;
  return J;
}

// V from U': q = p + (H,H'), v_n = v1 - psi.v', H_n = H1 - psi.H'
template <class Vec>
Vec to_secondary(const Vec& U, const Vec3& H, double d2Psi, double d3Psi) {
  Vec V = U;
  V(kV1) = U(kV1) - d2Psi * U(kV2) - d3Psi * U(kV3);
  V(kH1) = U(kH1) - d2Psi * U(kH2) - d3Psi * U(kH3);
  V(kP) = U(kP) + H(0) * U(kH1) + H(1) * U(kH2) + H(2) * U(kH3);
  return V;
}

template <class Vec>
Vec from_secondary(const Vec& V, const Vec3& H, double d2Psi, double d3Psi) {
  Vec U = V;
  U(kV1) = V(kV1) + d2Psi * V(kV2) + d3Psi * V(kV3);
  U(kH1) = V(kH1) + d2Psi * V(kH2) + d3Psi * V(kH3);
  U(kP) = V(kP) - H(0) * V(kH1) - (H(0) * d2Psi + H(1)) * V(kH2) - (H(0) * d3Psi + H(2)) * V(kH3);
  return U;
}

// Coefficients of the operator at one point.
struct LocalOperator {
  Mat8 J;
  std::array<Mat8, 4> Ahat;  // A0, A1~, A2, A3 at U^
  Mat8 C;                    // the gradient contraction C^
  std::array<Mat8, 4> A;     // J^T Ahat J
  Mat8 A4;
  double d1PhiPlus = 1.0;

  // A1 - E12 / d1Phi^+; vanishes on x1 = 0
  Mat8 boundary_remainder() const {
    Mat8 E = Mat8::Zero();
    E(0, 1) = E(1, 0) = 1.0 / d1PhiPlus;
    return A[1] - E;
  }
};

namespace detail {

template <class T>
void plasma_matrices(const EquationOfState& eos, const Vec8T<T>& u, double dtPsi, double d2Psi, double d3Psi,
                     double d1Phi, std::array<Mat8T<T>, 4>& A) {
  assemble_matrices_t<T>(eos, u, A[0], A[1], A[2], A[3]);
  A[1] = (A[1] - A[0] * dtPsi - A[2] * d2Psi - A[3] * d3Psi) / d1Phi;
}

// C^ by complex-step differentiation of the assembled matrices
inline Mat8 gradient_contraction(const EquationOfState& eos, const Vec8& u, const std::array<Vec8, 4>& dU,
                                 double dtPsi, double d2Psi, double d3Psi, double d1Phi) {
  Mat8 C = Mat8::Zero();
  bool any = false;
  for (const auto& d : dU) any = any || d.cwiseAbs().maxCoeff() > 0.0;
  if (!any) return C;
  const double eps = 1e-30;
  for (int i = 0; i < 8; ++i) {
    Vec8T<cplx> uc = u.cast<cplx>();
    uc(i) += cplx(0.0, eps);
    std::array<Mat8T<cplx>, 4> A;
    plasma_matrices<cplx>(eos, uc, dtPsi, d2Psi, d3Psi, d1Phi, A);
    Vec8 col = Vec8::Zero();
    for (int a = 0; a < 4; ++a) col += (A[a].imag() / eps) * dU[a];
    C.col(i) = col;
  }
  return C;
}

}  // namespace detail

// Frozen coefficients: derivative terms of J vanish, A4 = J^T C^ J.
inline LocalOperator assemble_linearized(const FrozenState& f) {
  LocalOperator op;
  op.d1PhiPlus = f.d1PhiPlus;
  op.J = secondary_jacobian(f.U.H, f.d2Psi, f.d3Psi);
  std::array<Mat8T<double>, 4> A;
  detail::plasma_matrices<double>(f.eos, f.U.to_vector(), f.dtPsi, f.d2Psi, f.d3Psi, f.d1PhiPlus, A);
  op.Ahat = A;
  op.C = detail::gradient_contraction(f.eos, f.U.to_vector(), f.dU, f.dtPsi, f.d2Psi, f.d3Psi, f.d1PhiPlus);
  for (int a = 0; a < 4; ++a) {
    op.A[a] = op.J.transpose() * op.Ahat[a] * op.J;
    const Mat8 S = op.A[a];
    op.A[a] = 0.5 * (S + S.transpose());  // congruence is symmetric; remove rounding asymmetry
  }
  op.A4 = op.J.transpose() * op.C * op.J;
  return op;
}

// Variable coefficients at (t,x): derivatives of U^ and J by fourth-order
// differences with step h.
inline LocalOperator assemble_linearized(const BasicState& bs, double t, const Vec3& x, double h = 1e-3) {
  FreezeOptions fo;
  fo.h1 = h;
  fo.tol = std::numeric_limits<double>::infinity();
  fo.domain.t0 = fo.domain.t1 = t;
  fo.domain.L = std::max(x(0), 1.0);
  FrozenState f = freeze(bs, t, x, fo);
  LocalOperator op = assemble_linearized(f);
  const detail::VecFn Jfn = [&](double tt, const Vec3& y) -> Eigen::VectorXd {
    const LiftedFront L = bs.lift(Side::plasma, tt, y);
    const Mat8 J = secondary_jacobian(bs.plasma(tt, y).H, L.d2Psi, L.d3Psi);
    return Eigen::Map<const Eigen::VectorXd>(J.data(), 64);
  };
  Mat8 extra = Mat8::Zero();
  for (int a = 0; a < 4; ++a) {
    const Eigen::VectorXd dJ = detail::fd_partial(Jfn, t, x, a, h, true, std::numeric_limits<double>::infinity(),
                                                  {bs.cutoff.s0(), bs.cutoff.s1()});
    extra += op.Ahat[a] * Eigen::Map<const Mat8>(dJ.data());
  }
  op.A4 += op.J.transpose() * extra;
  return op;
}

struct LinearOperator {
  std::function<LocalOperator(double, const Vec3&)> at;
  bool frozen = false;

  static LinearOperator from_frozen(const FrozenState& f) {
    const LocalOperator op = assemble_linearized(f);
    return {[op](double, const Vec3&) { return op; }, true};
  }
  static LinearOperator from_basic_state(const BasicState& bs, double h = 1e-3) {
    return {[bs, h](double t, const Vec3& x) { return assemble_linearized(bs, t, x, h); }, false};
  }
};

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct OperatorOptions {
  NormalStencil stencil = NormalStencil::second_order;
};

// residual = A0 dtV + sum Ak dkV + A4 V - F on every node; 8-component fields
inline SlabField apply_plasma_operator(const LinearOperator& op, double t, const SlabField& V,
                                       const SlabField& dtV, const SlabField& F,
                                       const OperatorOptions& opt = {}) {
  if (V.ncomp() != 8 || !V.same_shape(dtV) || !V.same_shape(F))
    throw ShapeError("apply_plasma_operator: fields must be 8-component and share one grid");
  const SlabGrid& g = V.grid();
  const SlabField d1 = normal_derivative(V, opt.stencil);
  const SlabField d2 = tangential_derivative(V, 2);
  const SlabField d3 = tangential_derivative(V, 3);
  SlabField r(g, 8);
  LocalOperator L;
  if (op.frozen) L = op.at(t, Vec3::Zero());
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        if (!op.frozen) L = op.at(t, Vec3(g.x1(j), g.x2(a), g.x3(b)));
        Vec8 v, vt, v1, v2, v3, f;
        for (int c = 0; c < 8; ++c) {
          v(c) = V(c, j, a, b);
          vt(c) = dtV(c, j, a, b);
          v1(c) = d1(c, j, a, b);
          v2(c) = d2(c, j, a, b);
          v3(c) = d3(c, j, a, b);
          f(c) = F(c, j, a, b);
        }
        const Vec8 res = L.A[0] * vt + L.A[1] * v1 + L.A[2] * v2 + L.A[3] * v3 + L.A4 * v - f;
        for (int c = 0; c < 8; ++c) r(c, j, a, b) = res(c);
      }
  return r;
}

struct NormalRecovery {
  SlabField d1Vn;  // components: d1 q', d1 v_n', d1 H_n'
  double l2 = 0.0;
  double ratio = 0.0;  // ||d1 Vn||^2 / rhs_sq when rhs_sq > 0
};

// Noncharacteristic normal derivatives: d1 q' and d1 v_n' from the first two
// rows of the V system, d1 H_n' from div h' = r. The characteristic part of
// the boundary matrix (A1 - E12/d1Phi) is moved to the right-hand side using
// differences of V; it vanishes on x1 = 0.
inline NormalRecovery recover_normal_derivative_plasma(const LinearOperator& op, double t, const SlabField& V,
                                                       const SlabField& dtV, const SlabField& F,
                                                       const SlabField& r, double rhs_sq = 0.0,
                                                       const OperatorOptions& opt = {}) {
  if (V.ncomp() != 8 || !V.same_shape(dtV) || !V.same_shape(F) || r.ncomp() != 1)
    throw ShapeError("recover_normal_derivative_plasma: field shapes");
  const SlabGrid& g = V.grid();
  const SlabField d1 = normal_derivative(V, opt.stencil);
  const SlabField d2 = tangential_derivative(V, 2);
  const SlabField d3 = tangential_derivative(V, 3);
  NormalRecovery out;
  out.d1Vn = SlabField(g, 3);
  LocalOperator L;
  if (op.frozen) L = op.at(t, Vec3::Zero());
  for (int j = 0; j <= g.n1; ++j)
    for (int a = 0; a < g.n2; ++a)
      for (int b = 0; b < g.n3; ++b) {
        const Vec3 x(g.x1(j), g.x2(a), g.x3(b));
        if (!op.frozen) L = op.at(t, x);
        Vec8 v, vt, v1, v2, v3, f;
        for (int c = 0; c < 8; ++c) {
          v(c) = V(c, j, a, b);
          vt(c) = dtV(c, j, a, b);
          v1(c) = d1(c, j, a, b);
          v2(c) = d2(c, j, a, b);
          v3(c) = d3(c, j, a, b);
          f(c) = F(c, j, a, b);
        }
        const Vec8 rhs = f - L.A[0] * vt - L.A[2] * v2 - L.A[3] * v3 - L.A4 * v - L.boundary_remainder() * v1;
        const double dP = L.d1PhiPlus;
        out.d1Vn(0, j, a, b) = dP * rhs(1);
        out.d1Vn(1, j, a, b) = dP * rhs(0);
        out.d1Vn(2, j, a, b) = r(0, j, a, b) - dP * (v2(kH2) + v3(kH3));
      }
  out.l2 = out.d1Vn.l2();
  if (rhs_sq > 0.0) out.ratio = out.l2 * out.l2 / rhs_sq;
  return out;
}

// singular values of A1 on x1 = 0 (rank check)
inline Eigen::Matrix<double, 8, 1> boundary_singular_values(const LocalOperator& op) {
  Eigen::JacobiSVD<Mat8> svd(op.A[1]);
  return svd.singularValues();
}

}  // namespace plasmavac
