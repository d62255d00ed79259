#pragma once
// Equation of state and the symmetric quasilinear form of ideal MHD,
//   A0(U) dU/dt + sum_j Aj(U) dU/dxj = 0,   U = (p, v, H, S).

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <Eigen/Dense>

namespace plasmavac {

using Vec3 = Eigen::Vector3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using cplx = std::complex<double>;
using CVec8 = Eigen::Matrix<cplx, 8, 1>;
using CMat8 = Eigen::Matrix<cplx, 8, 8>;

// component indices of U (0-based; the usual displays count from 1)
enum Comp : int { kP = 0, kV1, kV2, kV3, kH1, kH2, kH3, kS };

// p = exp(S) rho^gamma
struct IdealGas {
  double gamma = 5.0 / 3.0;
};

// Barotropic-linear closure rho = rho_ref + (p - p_ref)/c2 with constant c2.
// Handy for synthetic states where rho and c^2 are prescribed directly.
struct LinearEos {
  double p_ref = 1.0;
  double rho_ref = 1.0;
  double c2 = 1.0;
};

using EquationOfState = std::variant<IdealGas, LinearEos>;

class EosDomainError : public std::domain_error {
public:
  EosDomainError(const std::string& what, double value)
      : std::domain_error(what), value_(value) {}
  double value() const { return value_; }

private:
  double value_;
};

struct EosValues {
  double rho;
  double c2;     // p_rho(rho, S)
  double rho_p;  // d rho / d p at fixed S
};

namespace detail {

inline double real_part(double x) { return x; }
inline double real_part(const cplx& x) { return x.real(); }

// rho and c^2 for any scalar type (complex-step differentiation uses cplx)
template <class T>
void eos_rho_c2(const EquationOfState& eos, const T& p, const T& S, T& rho, T& c2) {
  if (const auto* g = std::get_if<IdealGas>(&eos)) {
    if (!(real_part(p) > 0.0)) {
      std::ostringstream os;
      os << "ideal gas requires p > 0, got p = " << real_part(p);
      throw EosDomainError(os.str(), real_part(p));
    }
    rho = std::pow(p * std::exp(-S), 1.0 / g->gamma);
    c2 = g->gamma * p / rho;
  } else {
    const auto& l = std::get<LinearEos>(eos);
    rho = T(l.rho_ref) + (p - T(l.p_ref)) / l.c2;
    c2 = T(l.c2);
  }
}

}  // namespace detail

inline void validate_eos(const EquationOfState& eos) {
  if (const auto* g = std::get_if<IdealGas>(&eos)) {
    if (!(g->gamma > 1.0)) throw std::invalid_argument("ideal gas gamma must exceed 1");
  } else {
    const auto& l = std::get<LinearEos>(eos);
    if (!(l.c2 > 0.0)) throw std::invalid_argument("linear EoS needs c2 > 0");
  }
}

inline EosValues evaluate_eos(const EquationOfState& eos, double p, double S) {
  double rho, c2;
  detail::eos_rho_c2(eos, p, S, rho, c2);
  return {rho, c2, 1.0 / c2};
}

struct PlasmaState {
  double p = 1.0;
  Vec3 v = Vec3::Zero();
  Vec3 H = Vec3::Zero();
  double S = 0.0;

  Vec8 to_vector() const {
    Vec8 u;
    u << p, v, H, S;
    return u;
  }
  static PlasmaState from_vector(const Vec8& u) {
    PlasmaState s;
    s.p = u(kP);
    s.v = u.segment<3>(kV1);
    s.H = u.segment<3>(kH1);
    s.S = u(kS);
    return s;
  }
};

struct MatrixSet {
  Mat8 A0, A1, A2, A3;
  const Mat8& operator[](int j) const {
    switch (j) {
      case 0: return A0;
      case 1: return A1;
      case 2: return A2;
      default: return A3;
    }
  }
};

template <class T>
using Mat8T = Eigen::Matrix<T, 8, 8>;
template <class T>
using Vec8T = Eigen::Matrix<T, 8, 1>;

// Fill the four matrices; entries are placed pairwise so symmetry is exact.
template <class T>
void assemble_matrices_t(const EquationOfState& eos, const Vec8T<T>& u, Mat8T<T>& A0,
                         Mat8T<T>& A1, Mat8T<T>& A2, Mat8T<T>& A3) {
  T rho, c2;
  detail::eos_rho_c2(eos, u(kP), u(kS), rho, c2);
  A0.setZero();
  A0(0, 0) = T(1.0) / (rho * c2);
  A0(1, 1) = A0(2, 2) = A0(3, 3) = rho;
  A0(4, 4) = A0(5, 5) = A0(6, 6) = A0(7, 7) = T(1.0);

  Mat8T<T>* A[3] = {&A1, &A2, &A3};
  for (int j = 0; j < 3; ++j) {
    Mat8T<T>& M = *A[j];
    M.setZero();
    const T vj = u(kV1 + j);
    const T Hj = u(kH1 + j);
    M(0, 0) = vj / (rho * c2);
    M(0, 1 + j) = M(1 + j, 0) = T(1.0);
    for (int i = 0; i < 3; ++i) {
      M(1 + i, 1 + i) = rho * vj;
      M(4 + i, 4 + i) = vj;
    }
    M(7, 7) = vj;
    // magnetic coupling: velocity row i, field column i carries -Hj, and the
    // j-th velocity row picks up +H_i in field column i (i != j)
    for (int i = 0; i < 3; ++i) {
      if (i == j) continue;
      M(1 + i, 4 + i) = M(4 + i, 1 + i) = -Hj;
      M(1 + j, 4 + i) = M(4 + i, 1 + j) = u(kH1 + i);
    }
  }
}

inline MatrixSet assemble_matrices(const EquationOfState& eos, const PlasmaState& U) {
  MatrixSet m;
  assemble_matrices_t<double>(eos, U.to_vector(), m.A0, m.A1, m.A2, m.A3);
  return m;
}

// min(rho, p_rho); non-positive when the state leaves the hyperbolic region.
inline double hyperbolicity_margin(const EquationOfState& eos, const PlasmaState& U) {
  if (std::holds_alternative<IdealGas>(eos) && !(U.p > 0.0)) return 0.0;  // rho -> 0
  const EosValues e = evaluate_eos(eos, U.p, U.S);
  return std::min(e.rho, e.c2);
}

inline double total_pressure(const PlasmaState& U) { return U.p + 0.5 * U.H.squaredNorm(); }

// A smooth field U(t,x) with exact first partials. axis 0 is time, 1..3 space.
struct AnalyticPlasmaField {
  std::function<Vec8(double, const Vec3&)> value;
  std::function<Vec8(double, const Vec3&, int)> partial;
};

inline Vec8 nonconservative_residual(const EquationOfState& eos, const AnalyticPlasmaField& field,
                                     double t, const Vec3& x) {
  const MatrixSet m = assemble_matrices(eos, PlasmaState::from_vector(field.value(t, x)));
  Vec8 r = m.A0 * field.partial(t, x, 0);
  for (int j = 1; j <= 3; ++j) r += m[j] * field.partial(t, x, j);
  return r;
}

}  // namespace plasmavac
