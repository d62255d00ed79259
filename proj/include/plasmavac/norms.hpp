#pragma once
// Anisotropic weighted norms on the slab: the tangential derivatives count
// fully, the normal one only through sigma d1 (plus a plain d1 at order 2).

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "slab.hpp"

namespace plasmavac {

// sigma(x) = x on [0, 1/2], the Hermite join to (3/2, 1) with zero end slope
// (which degenerates to -s^2/2 + s + 1/2, s = x - 1/2), and 1 beyond.
struct Sigma {
  double operator()(double x) const {
    if (x <= 0.5) return x;
    if (x >= 1.5) return 1.0;
    const double s = x - 0.5;
    return -0.5 * s * s + s + 0.5;
  }
  double derivative(double x) const {
    if (x <= 0.5) return 1.0;
    if (x >= 1.5) return 0.0;
    return 1.0 - (x - 0.5);
  }
  static std::vector<double> breaks() { return {0.5, 1.5}; }
};

// ---- modal fields ---------------------------------------------------------
//
// u(x) = sum over entries of P_k(x1) e^{i k.x'} + c.c. for k != 0, plus the
// real profile P_0 for k = 0.  Entries must carry distinct wavenumbers, with
// k and -k never both present.

struct ProfileSample {
  Eigen::VectorXcd v, d1, d11;  // per component: value, d1, d1^2
};

struct ModalEntry {
  int k2 = 0, k3 = 0;
  std::function<ProfileSample(double)> profile;
};

struct ModalField {
  std::vector<ModalEntry> modes;
};

namespace detail {

inline double pair_weight(int k2, int k3) { return (k2 == 0 && k3 == 0) ? 1.0 : 2.0; }

// integrand of ||.||^2_{m,*} for one mode at x1 (before the torus area factor)
inline double weighted_density(const ProfileSample& p, int k2, int k3, int m, const Sigma& sg, double x1) {
  const double kk = double(k2) * k2 + double(k3) * k3;
  const double u = p.v.squaredNorm();
  double s = u;
  if (m >= 1) {
    const double sig = sg(x1);
    s += sig * sig * p.d1.squaredNorm() + kk * u;
  }
  if (m >= 2) {
    const double sig = sg(x1), dsig = sg.derivative(x1);
    const double k4 = double(k2) * k2 * k2 * k2 + double(k2) * k2 * k3 * k3 + double(k3) * k3 * k3 * k3;
    s += (sig * dsig * p.d1 + sig * sig * p.d11).squaredNorm();  // (sigma d1)^2
    s += kk * sig * sig * p.d1.squaredNorm();                    // sigma d1 d2, sigma d1 d3
    s += k4 * u;                                                 // d22, d23, d33
    s += p.d1.squaredNorm();                                     // d1 (k = 1 term)
  }
  return s;
}

}  // namespace detail

// ||u||^2_{m,*} on (0, L) x T^2 by composite Gauss-Legendre in x1 (split at
// the kinks of sigma) and Parseval in x'.
inline double weighted_norm_sq(const ModalField& u, int m, const Sigma& sg = {}, double L = 8.0, int panels = 16) {
  if (m < 0 || m > 2) throw std::invalid_argument("weighted norm: order must be 0, 1 or 2");
  static const GaussLegendre gl(12);
  double s = 0.0;
  for (const auto& e : u.modes) {
    const double w = detail::pair_weight(e.k2, e.k3);
    s += w * gl.integrate([&](double x1) { return detail::weighted_density(e.profile(x1), e.k2, e.k3, m, sg, x1); },
                          0.0, L, Sigma::breaks(), panels);
  }
  return 4.0 * std::numbers::pi * std::numbers::pi * s;
}

// time derivatives d_t^j u(t) as modal fields
using ModalTrajectory = std::function<ModalField(double t, int j)>;

struct WeightedNorm {
  int m = 1;
  double norm = 0.0;    // ||u(t)||_{m,*}
  double triple = 0.0;  // |||u(t)|||_{m,*}
  double bracket = 0.0; // [u]_{m,*,T}, data vanishing for t < t0
};

inline double triple_norm_sq(const ModalTrajectory& u, int m, double t, const Sigma& sg = {}, double L = 8.0) {
  double s = 0.0;
  for (int j = 0; j <= m; ++j) s += weighted_norm_sq(u(t, j), m - j, sg, L);
  return s;
}

inline WeightedNorm weighted_norm(const ModalTrajectory& u, int m, double t, double t0, double T, const Sigma& sg = {},
                                  double L = 8.0, const std::vector<double>& time_breaks = {}) {
  static const GaussLegendre gl(10);
  WeightedNorm w;
  w.m = m;
  w.norm = std::sqrt(weighted_norm_sq(u(t, 0), m, sg, L));
  w.triple = std::sqrt(triple_norm_sq(u, m, t, sg, L));
  if (T > t0)
    w.bracket = std::sqrt(gl.integrate([&](double s) { return triple_norm_sq(u, m, s, sg, L); }, t0, T, time_breaks, 4));
  return w;
}

// ---- sampled fields -------------------------------------------------------

// ||u||_{m,*} of a sampled field: second-order differences in x1, spectral in
// x', trapezoid weights.  Accurate to O(h1^2) only; the modal version is the
// reference.
inline double weighted_norm(const SlabField& u, int m, const Sigma& sg = {}) {
  if (m < 0 || m > 2) throw std::invalid_argument("weighted norm: order must be 0, 1 or 2");
  const SlabGrid& g = u.grid();
  auto scale_sigma = [&](SlabField f) {
    for (int c = 0; c < f.ncomp(); ++c)
      for (int j = 0; j <= g.n1; ++j) {
        const double s = sg(g.x1(j));
        for (int a = 0; a < g.n2; ++a)
          for (int b = 0; b < g.n3; ++b) f(c, j, a, b) *= s;
      }
    return f;
  };
  auto sq = [](const SlabField& f) { return f.l2() * f.l2(); };
  double s = sq(u);
  if (m == 0) return std::sqrt(s);
  const SlabField d1 = normal_derivative(u, NormalStencil::second_order);
  const SlabField d2 = tangential_derivative(u, 2), d3 = tangential_derivative(u, 3);
  const SlabField sd1 = scale_sigma(d1);
  s += sq(sd1) + sq(d2) + sq(d3);
  if (m == 1) return std::sqrt(s);
  s += sq(scale_sigma(normal_derivative(sd1, NormalStencil::second_order)));
  s += sq(tangential_derivative(sd1, 2)) + sq(tangential_derivative(sd1, 3));
  s += sq(tangential_derivative(d2, 2)) + sq(tangential_derivative(d2, 3)) + sq(tangential_derivative(d3, 3));
  s += sq(d1);
  return std::sqrt(s);
}

}  // namespace plasmavac
