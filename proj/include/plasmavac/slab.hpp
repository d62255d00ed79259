#pragma once
// Slab grid [0,L] x T^2: nodal fields, tangential FFTs, normal difference
// operators and the quadrature weights that go with them.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace plasmavac {

struct SlabGrid {
  int n1 = 32, n2 = 16, n3 = 16;
  double L = 8.0;

  double h1() const { return L / n1; }
  double h2() const { return 2.0 * std::numbers::pi / n2; }
  double h3() const { return 2.0 * std::numbers::pi / n3; }
  double x1(int j) const { return j * h1(); }
  double x2(int m) const { return m * h2(); }
  double x3(int m) const { return m * h3(); }
  int nodes1() const { return n1 + 1; }
  std::size_t plane() const { return std::size_t(n2) * n3; }
  std::size_t size() const { return plane() * nodes1(); }
  // signed wavenumber of FFT index m (Nyquist reported as +n/2)
  static int wavenumber(int m, int n) { return m <= n / 2 ? m : m - n; }
  static int index_of(int k, int n) { return k >= 0 ? k : k + n; }
  // trapezoid (= SBP norm) weight in x1
  double weight1(int j) const { return (j == 0 || j == n1) ? 0.5 * h1() : h1(); }
};

// ncomp scalar fields; layout [c][j][m2][m3] so each x1-plane is contiguous.
class SlabField {
public:
  SlabField() = default;
  SlabField(const SlabGrid& g, int ncomp) : grid_(g), ncomp_(ncomp), data_(g.size() * ncomp, 0.0) {}

  const SlabGrid& grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  double& operator()(int c, int j, int m2, int m3) { return data_[index(c, j, m2, m3)]; }
  double operator()(int c, int j, int m2, int m3) const { return data_[index(c, j, m2, m3)]; }
  double* plane(int c, int j) { return data_.data() + (std::size_t(c) * grid_.nodes1() + j) * grid_.plane(); }
  const double* plane(int c, int j) const {
    return data_.data() + (std::size_t(c) * grid_.nodes1() + j) * grid_.plane();
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const SlabField& o) const {
    return ncomp_ == o.ncomp_ && grid_.n1 == o.grid_.n1 && grid_.n2 == o.grid_.n2 && grid_.n3 == o.grid_.n3;
  }

  template <class F>
  static SlabField sample(const SlabGrid& g, int ncomp, F&& f) {  // f(x1,x2,x3) -> indexable
    SlabField u(g, ncomp);
    for (int j = 0; j <= g.n1; ++j)
      for (int a = 0; a < g.n2; ++a)
        for (int b = 0; b < g.n3; ++b) {
          const auto v = f(g.x1(j), g.x2(a), g.x3(b));
          for (int c = 0; c < ncomp; ++c) u(c, j, a, b) = v[c];
        }
    return u;
  }

  // L2 norm over the slab (all components), trapezoid in x1
  double l2() const {
    double s = 0.0;
    for (int c = 0; c < ncomp_; ++c)
      for (int j = 0; j <= grid_.n1; ++j) {
        const double* p = plane(c, j);
        double t = 0.0;
        for (std::size_t i = 0; i < grid_.plane(); ++i) t += p[i] * p[i];
        s += grid_.weight1(j) * t;
      }
    return std::sqrt(s * grid_.h2() * grid_.h3());
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  std::size_t index(int c, int j, int m2, int m3) const {
    return ((std::size_t(c) * grid_.nodes1() + j) * grid_.n2 + m2) * grid_.n3 + m3;
  }
  SlabGrid grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

// one scalar on the boundary plane x1 = 0, layout [m2][m3]
class PlaneField {
public:
  PlaneField() = default;
  PlaneField(int n2, int n3) : n2_(n2), n3_(n3), data_(std::size_t(n2) * n3, 0.0) {}
  explicit PlaneField(const SlabGrid& g) : PlaneField(g.n2, g.n3) {}

  int n2() const { return n2_; }
  int n3() const { return n3_; }
  double& operator()(int a, int b) { return data_[std::size_t(a) * n3_ + b]; }
  double operator()(int a, int b) const { return data_[std::size_t(a) * n3_ + b]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  double l2() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s * (2.0 * std::numbers::pi / n2_) * (2.0 * std::numbers::pi / n3_));
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  template <class F>
  static PlaneField sample(int n2, int n3, F&& f) {  // f(x2, x3)
    PlaneField p(n2, n3);
    for (int a = 0; a < n2; ++a)
      for (int b = 0; b < n3; ++b) p(a, b) = f(2.0 * std::numbers::pi * a / n2, 2.0 * std::numbers::pi * b / n3);
    return p;
  }

private:
  int n2_ = 0, n3_ = 0;
  std::vector<double> data_;
};

// 2-D complex FFT on an n2 x n3 plane. Plans are created once per object;
// FFTW planning is not thread-safe, so build these on one thread.
class TangentialFFT {
public:
  TangentialFFT(int n2, int n3) : n2_(n2), n3_(n3) {
    in_ = fftw_alloc_complex(std::size_t(n2) * n3);
    out_ = fftw_alloc_complex(std::size_t(n2) * n3);
    fwd_ = fftw_plan_dft_2d(n2, n3, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n2, n3, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~TangentialFFT() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(in_);
    fftw_free(out_);
  }
  TangentialFFT(const TangentialFFT&) = delete;
  TangentialFFT& operator=(const TangentialFFT&) = delete;

  int n2() const { return n2_; }
  int n3() const { return n3_; }

  // coefficients c_k with u(x) = sum_k c_k e^{i k.x}
  void forward(const double* u, std::complex<double>* c) {
    const std::size_t n = std::size_t(n2_) * n3_;
    for (std::size_t i = 0; i < n; ++i) {
      in_[i][0] = u[i];
      in_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < n; ++i) c[i] = std::complex<double>(out_[i][0], out_[i][1]) / double(n);
  }
  // real part of sum_k c_k e^{i k.x}
  void backward(const std::complex<double>* c, double* u) {
    const std::size_t n = std::size_t(n2_) * n3_;
    for (std::size_t i = 0; i < n; ++i) {
      in_[i][0] = c[i].real();
      in_[i][1] = c[i].imag();
    }
    fftw_execute(bwd_);
    for (std::size_t i = 0; i < n; ++i) u[i] = out_[i][0];
  }

  // spectral d/dx2 (axis 2) or d/dx3 (axis 3) of one plane; Nyquist dropped
  void derivative(const double* u, double* du, int axis) {
    const std::size_t n = std::size_t(n2_) * n3_;
    std::vector<std::complex<double>> c(n);
    forward(u, c.data());
    for (int a = 0; a < n2_; ++a)
      for (int b = 0; b < n3_; ++b) {
        const int k2 = SlabGrid::wavenumber(a, n2_), k3 = SlabGrid::wavenumber(b, n3_);
        const bool nyq = (2 * std::abs(k2) == n2_) || (2 * std::abs(k3) == n3_);
        const double k = axis == 2 ? k2 : k3;
        auto& z = c[std::size_t(a) * n3_ + b];
        z = nyq ? 0.0 : std::complex<double>(0.0, k) * z;
      }
    backward(c.data(), du);
  }

private:
  int n2_, n3_;
  fftw_complex *in_, *out_;
  fftw_plan fwd_, bwd_;
};

inline SlabField tangential_derivative(const SlabField& u, int axis) {
  const SlabGrid& g = u.grid();
  SlabField du(g, u.ncomp());
  TangentialFFT fft(g.n2, g.n3);
  for (int c = 0; c < u.ncomp(); ++c)
    for (int j = 0; j <= g.n1; ++j) fft.derivative(u.plane(c, j), du.plane(c, j), axis);
  return du;
}

inline PlaneField tangential_derivative(const PlaneField& u, int axis) {
  PlaneField du(u.n2(), u.n3());
  TangentialFFT fft(u.n2(), u.n3());
  fft.derivative(u.data(), du.data(), axis);
  return du;
}

// Normal first-derivative operators on nodes 0..n:
//  sbp:          H^{-1} Q with H = h diag(1/2, 1, ..., 1, 1/2) (first-order closure)
//  second_order: central interior, second-order one-sided ends
enum class NormalStencil { sbp, second_order };

template <class T>
void apply_d1(const T* u, T* du, int n, double h, NormalStencil s, std::ptrdiff_t stride = 1) {
  auto U = [&](int j) -> const T& { return u[j * stride]; };
  for (int j = 1; j < n; ++j) du[j * stride] = (U(j + 1) - U(j - 1)) / (2.0 * h);
  if (s == NormalStencil::sbp || n < 2) {
    du[0] = (U(1) - U(0)) / h;
    du[n * stride] = (U(n) - U(n - 1)) / h;
  } else {
    du[0] = (-3.0 * U(0) + 4.0 * U(1) - U(2)) / (2.0 * h);
    du[n * stride] = (3.0 * U(n) - 4.0 * U(n - 1) + U(n - 2)) / (2.0 * h);
  }
}

inline SlabField normal_derivative(const SlabField& u, NormalStencil s = NormalStencil::second_order) {
  const SlabGrid& g = u.grid();
  SlabField du(g, u.ncomp());
  const std::ptrdiff_t stride = std::ptrdiff_t(g.plane());
  for (int c = 0; c < u.ncomp(); ++c)
    for (std::size_t i = 0; i < g.plane(); ++i)
      apply_d1(u.plane(c, 0) + i, du.plane(c, 0) + i, g.n1, g.h1(), s, stride);
  return du;
}

// Gauss-Legendre nodes/weights on [-1, 1] (Newton on P_n)
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (z * p1 - p0) / (z * z - 1.0);
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  // composite rule over [a,b] split at the given sorted breakpoints, each
  // piece further split into `panels` equal panels
  template <class F>
  double integrate(F&& f, double a, double b, const std::vector<double>& breaks = {}, int panels = 8) const {
    std::vector<double> pts{a};
    for (double c : breaks)
      if (c > a && c < b) pts.push_back(c);
    pts.push_back(b);
    double s = 0.0;
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
      const double h = (pts[p + 1] - pts[p]) / panels;
      for (int q = 0; q < panels; ++q) {
        const double lo = pts[p] + q * h, mid = lo + 0.5 * h;
        for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * h * w[i] * f(mid + 0.5 * h * x[i]);
      }
    }
    return s;
  }
};

}  // namespace plasmavac
