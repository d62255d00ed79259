#pragma once
// The two sufficient stability conditions at the interface, the resolution of
// the front gradient under the non-parallel-fields condition, and parameter
// scans of both margins.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basic_state.hpp"

namespace plasmavac {

struct Thresholds {
  double eps = 1e-6;   // gas-dynamical: [d1 q] >= eps
  double eps1 = 1e-6;  // purely MHD:   |H2 Hv3 - H3 Hv2| >= eps1
};

enum class StabilityClass { neither, gas_dynamical, purely_mhd, both };

inline const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::gas_dynamical: return "gas-dynamical";
    case StabilityClass::purely_mhd: return "purely-MHD";
    case StabilityClass::both: return "both";
    default: return "neither";
  }
}

// The coefficients the margins depend on, all taken on x1 = 0.
struct InterfaceCoefficients {
  Vec3 H = Vec3::Zero();     // plasma field
  Vec3 Hvac = Vec3::Zero();  // vacuum field
  double jump_dq = 0.0;

  static InterfaceCoefficients from_frozen(const FrozenState& f) { return {f.Ub.H, f.Hvac, f.jump_dq}; }
};

struct MarginReport {
  double gasdyn_margin = 0.0;
  double mhd_margin = 0.0;
  StabilityClass classification = StabilityClass::neither;
};

inline MarginReport compute_margins(const InterfaceCoefficients& c, const Thresholds& th = {}) {
  MarginReport m;
  m.gasdyn_margin = c.jump_dq;
  m.mhd_margin = std::abs(c.H(1) * c.Hvac(2) - c.H(2) * c.Hvac(1));
  const bool gd = m.gasdyn_margin >= th.eps, mhd = m.mhd_margin >= th.eps1;
  m.classification = gd && mhd ? StabilityClass::both
                     : gd      ? StabilityClass::gas_dynamical
                     : mhd     ? StabilityClass::purely_mhd
                               : StabilityClass::neither;
  return m;
}

inline MarginReport compute_margins(const FrozenState& f, const Thresholds& th = {}) {
  return compute_margins(InterfaceCoefficients::from_frozen(f), th);
}

class EllipticityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// grad_{t,x'} phi = a1 H_N + a2 Hvac_N + a3 v_N + a4 phi + a0 g3 (+ a5 g1).
// Components are ordered (t, x2, x3).
struct FrontResolution {
  Vec3 a0 = Vec3::Zero(), a1 = Vec3::Zero(), a2 = Vec3::Zero(), a3 = Vec3::Zero(), a4 = Vec3::Zero();
  Vec3 a5 = Vec3::Zero();  // g1 enters the time component only; zero effect once g1 is homogenized away
};

// Tangential system from the tangency constraint and the vacuum boundary condition:
//   H'.grad' phi    = H_N + phi d1H_N + g3
//   Hvac'.grad' phi = Hvac_N - phi div'Hvac'
// and the kinematic condition for the time component.
inline FrontResolution front_resolution(const FrozenState& f, const Thresholds& th = {}) {
  const double H2 = f.Ub.H(1), H3 = f.Ub.H(2), Hv2 = f.Hvac(1), Hv3 = f.Hvac(2);
  const double D = H2 * Hv3 - H3 * Hv2;
  if (std::abs(D) < th.eps1) {
    std::ostringstream os;
    os << "front gradient: interface symbol not elliptic (|H2 Hv3 - H3 Hv2| = " << std::abs(D) << " < " << th.eps1
       << ")";
    throw EllipticityError(os.str());
  }
  Eigen::Matrix2d Minv;
  Minv << Hv3, -H3, -Hv2, H2;
  Minv /= D;
  const Eigen::Vector2d c1 = Minv.col(0), c2 = Minv.col(1);
  const Eigen::Vector2d c4 = Minv * Eigen::Vector2d(f.d1_HN, -f.div_tan_Hvac);
  const double v2 = f.Ub.v(1), v3 = f.Ub.v(2);
  auto lift = [&](const Eigen::Vector2d& s, double t_extra) {
    return Vec3(t_extra - v2 * s(0) - v3 * s(1), s(0), s(1));
  };
  FrontResolution r;
  r.a1 = lift(c1, 0.0);
  r.a0 = r.a1;
  r.a2 = lift(c2, 0.0);
  r.a3 = Vec3(1.0, 0.0, 0.0);
  r.a4 = lift(c4, f.d1_vN);
  r.a5 = Vec3(1.0, 0.0, 0.0);
  return r;
}

template <class T>
struct FrontTraces {
  T H_N{}, Hvac_N{}, v_N{}, phi{}, g3{}, g1{};
};

template <class T>
Eigen::Matrix<T, 3, 1> resolve_front_gradient(const FrontTraces<T>& tr, const FrontResolution& r) {
  return r.a1.cast<T>() * tr.H_N + r.a2.cast<T>() * tr.Hvac_N + r.a3.cast<T>() * tr.v_N + r.a4.cast<T>() * tr.phi +
         r.a0.cast<T>() * tr.g3 + r.a5.cast<T>() * tr.g1;
}

template <class T>
Eigen::Matrix<T, 3, 1> resolve_front_gradient(const FrontTraces<T>& tr, const FrozenState& f,
                                               const Thresholds& th = {}) {
  return resolve_front_gradient(tr, front_resolution(f, th));
}

// ---- scans --------------------------------------------------------------

// Axis values; an empty axis makes the whole grid empty.  The vacuum field is
// parametrised in polar form so that angle sweeps are direct.
struct ScanSpec {
  std::vector<double> H2{1.0}, H3{0.0};
  std::vector<double> Hvac_mag{1.0}, Hvac_angle{0.0};
  std::vector<double> v2{0.0}, v3{0.0};
  std::vector<double> jump_dq{0.0};
  std::vector<double> p{1.0}, S{0.0};

  static constexpr const char* names[9] = {"H2", "H3", "Hvac_mag", "Hvac_angle", "v2", "v3", "jump_dq", "p", "S"};
  std::array<const std::vector<double>*, 9> axes() const {
    return {&H2, &H3, &Hvac_mag, &Hvac_angle, &v2, &v3, &jump_dq, &p, &S};
  }
  std::size_t size() const {
    std::size_t n = 1;
    for (auto* a : axes()) n *= a->size();
    return n;
  }
};

struct ScanRow {
  std::array<double, 9> params{};
  MarginReport margins;
};

// Rows in lexicographic order of the axis indices, first axis slowest.
inline std::vector<ScanRow> scan_stability(const ScanSpec& spec, const Thresholds& th = {}) {
  const auto ax = spec.axes();
  const std::size_t n = spec.size();
  std::vector<ScanRow> rows(n);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat;
    ScanRow& row = rows[flat];
    for (int i = 8; i >= 0; --i) {
      const std::size_t m = ax[i]->size();
      row.params[i] = (*ax[i])[rem % m];
      rem /= m;
    }
    const double mag = row.params[2], ang = row.params[3];
    InterfaceCoefficients c;
    c.H = Vec3(0.0, row.params[0], row.params[1]);
    c.Hvac = Vec3(0.0, mag * std::cos(ang), mag * std::sin(ang));
    c.jump_dq = row.params[6];
    row.margins = compute_margins(c, th);
  }
  return rows;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  for (const char* n : ScanSpec::names) os << n << ',';
  os << "gasdyn_margin,mhd_margin,class\n";
  for (const auto& r : rows) {
    for (double v : r.params) os << format_double(v) << ',';
    os << format_double(r.margins.gasdyn_margin) << ',' << format_double(r.margins.mhd_margin) << ','
       << to_string(r.margins.classification) << '\n';
  }
}

}  // namespace plasmavac
