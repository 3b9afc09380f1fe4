// Periodic grid functions and the spectral primitives built on them.
//
// The real line is modelled by a periodic cell [-P/2, P/2) sampled at
// n uniformly spaced nodes x_j = -P/2 + j*P/n.  Everything here acts on the
// trigonometric interpolant of the samples.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "muskat/error.hpp"

namespace muskat {

using cplx = std::complex<double>;

class Grid {
 public:
  Grid() = default;
  Grid(std::size_t n_points, double period) : n_(n_points), period_(period) {
    if (n_points < 16 || (n_points & (n_points - 1)) != 0) {
      throw InvalidArgument("grid: n_points must be a power of two >= 16, got " +
                            std::to_string(n_points));
    }
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw InvalidArgument("grid: period must be positive and finite");
    }
  }

  std::size_t size() const noexcept { return n_; }
  double period() const noexcept { return period_; }
  double spacing() const noexcept { return period_ / static_cast<double>(n_); }
  double node(std::size_t j) const noexcept {
    return -0.5 * period_ + static_cast<double>(j) * spacing();
  }
  /// Physical wavenumber of FFT bin m (bins above n/2 are negative modes).
  double wavenumber(std::size_t m) const noexcept {
    const auto n = static_cast<long>(n_);
    long mm = static_cast<long>(m);
    if (mm > n / 2) mm -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(mm) / period_;
  }
  bool is_nyquist(std::size_t m) const noexcept { return m == n_ / 2; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.period_ == b.period_;
  }

 private:
  std::size_t n_ = 0;
  double period_ = 0.0;
};

/// Real samples of a periodic function on a Grid.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const Grid& g, double fill = 0.0) : grid_(g), values_(g.size(), fill) {}
  GridFunction(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
    if (values_.size() != g.size()) {
      throw InvalidArgument("grid function: value count does not match grid size");
    }
  }

  template <class F>
  static GridFunction sample(const Grid& g, F&& fn) {
    GridFunction out(g);
    for (std::size_t j = 0; j < g.size(); ++j) out.values_[j] = fn(g.node(j));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  double& operator[](std::size_t j) noexcept { return values_[j]; }

  GridFunction& operator+=(const GridFunction& o) {
    check_same(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] += o.values_[j];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check_same(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] -= o.values_[j];
    return *this;
  }
  GridFunction& operator*=(const GridFunction& o) {
    check_same(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] *= o.values_[j];
    return *this;
  }
  GridFunction& operator/=(const GridFunction& o) {
    check_same(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] /= o.values_[j];
    return *this;
  }
  GridFunction& operator*=(double a) noexcept {
    for (double& v : values_) v *= a;
    return *this;
  }
  GridFunction& operator+=(double a) noexcept {
    for (double& v : values_) v += a;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(GridFunction a, const GridFunction& b) { return a *= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
  friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
  friend GridFunction operator+(GridFunction a, double s) { return a += s; }
  friend GridFunction operator+(double s, GridFunction a) { return a += s; }
  friend GridFunction operator-(GridFunction a, double s) { return a += -s; }
  friend GridFunction operator-(double s, GridFunction a) {
    for (double& v : a.values_) v = s - v;
    return a;
  }
  friend GridFunction operator/(GridFunction a, const GridFunction& b) { return a /= b; }
  friend GridFunction operator/(double s, GridFunction a) {
    for (double& v : a.values_) v = s / v;
    return a;
  }
  friend GridFunction operator-(GridFunction a) { return a *= -1.0; }

  void check_same(const GridFunction& o) const {
    if (!(grid_ == o.grid_)) throw GridMismatch("grid functions live on different grids");
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline void require_finite(const GridFunction& u, const char* what) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(u[j])) {
      throw InvalidArgument(std::string(what) + ": non-finite value at node " + std::to_string(j));
    }
  }
}

inline double max_abs(const GridFunction& u) noexcept {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double mean(const GridFunction& u) noexcept {
  double s = 0.0;
  for (double v : u.values()) s += v;
  return s / static_cast<double>(u.size());
}

/// Trapezoid inner product spacing * sum u_j v_j.
inline double inner(const GridFunction& u, const GridFunction& v) {
  u.check_same(v);
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * v[j];
  return s * u.grid().spacing();
}

inline double l2_norm(const GridFunction& u) { return std::sqrt(inner(u, u)); }

namespace detail {

/// Normalized coefficients c_m = (1/n) sum_j u_j exp(-2 pi i j m / n), so that
/// u(x) = sum_m c_m exp(i k_m (x - x_0)) with x_0 = -P/2.
inline std::vector<cplx> coefficients(const GridFunction& u) {
  Eigen::FFT<double> fft;
  std::vector<cplx> c;
  fft.fwd(c, u.vec());
  const double inv_n = 1.0 / static_cast<double>(u.size());
  for (auto& z : c) z *= inv_n;
  return c;
}

inline GridFunction synthesize(const Grid& g, std::vector<cplx> c) {
  const double n = static_cast<double>(g.size());
  for (auto& z : c) z *= n;
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.inv(out, c);
  std::vector<double> v(g.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = out[j].real();
  return GridFunction(g, std::move(v));
}

}  // namespace detail

/// Applies a Fourier symbol sigma(k) to every resolved mode.  The Nyquist bin
/// is multiplied by `nyquist_factor` (odd symbols must pass 0 there).
template <class Symbol>
GridFunction apply_symbol(const GridFunction& u, Symbol&& sigma, double nyquist_factor) {
  const Grid& g = u.grid();
  auto c = detail::coefficients(u);
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (g.is_nyquist(m)) {
      c[m] *= nyquist_factor;
    } else {
      c[m] *= sigma(g.wavenumber(m));
    }
  }
  return detail::synthesize(g, std::move(c));
}

/// Derivative of the trigonometric interpolant.
inline GridFunction spectral_derivative(const GridFunction& u) {
  require_finite(u, "spectral_derivative");
  return apply_symbol(u, [](double k) { return cplx(0.0, k); }, 0.0);
}

/// Hilbert transform: e^{ikx} -> -i sign(k) e^{ikx}; the mean is annihilated.
inline GridFunction hilbert_multiplier(const GridFunction& u) {
  require_finite(u, "hilbert_multiplier");
  return apply_symbol(
      u,
      [](double k) {
        if (k > 0.0) return cplx(0.0, -1.0);
        if (k < 0.0) return cplx(0.0, 1.0);
        return cplx(0.0, 0.0);
      },
      0.0);
}

/// (-d^2/dx^2)^{1/2}: e^{ikx} -> |k| e^{ikx}.  Nyquist is dropped so that this is
/// exactly hilbert_multiplier(spectral_derivative(u)).
inline GridFunction half_laplacian(const GridFunction& u) {
  require_finite(u, "half_laplacian");
  return apply_symbol(u, [](double k) { return cplx(std::abs(k), 0.0); }, 0.0);
}

/// Values of the interpolant at the translated nodes x_j - tau.
inline GridFunction translate(const GridFunction& u, double tau) {
  const double kn = std::numbers::pi / u.grid().spacing();
  return apply_symbol(
      u, [tau](double k) { return std::polar(1.0, -k * tau); }, std::cos(kn * tau));
}

/// Cyclic shift by j nodes: result[i] = u[i - j].
inline GridFunction shift(const GridFunction& u, long j) {
  const auto n = static_cast<long>(u.size());
  GridFunction out(u.grid());
  const long jj = ((j % n) + n) % n;
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>((i + jj) % n)] = u[static_cast<std::size_t>(i)];
  return out;
}

/// Grid reflection (Ru)(x) = u(-x).  On the grid x_j = -P/2 + jh the reflected
/// node of j is n - j (mod n).
inline GridFunction reflect(const GridFunction& u) {
  const std::size_t n = u.size();
  GridFunction out(u.grid());
  for (std::size_t j = 0; j < n; ++j) out[j] = u[(n - j) % n];
  return out;
}

/// H^r norm (sum_k (1+k^2)^r |u_k|^2)^{1/2}, normalized so r = 0 is the L2 norm
/// of the interpolant over one period.
inline double sobolev_norm(const GridFunction& u, double r) {
  if (!(r >= 0.0 && r <= 2.0)) throw InvalidArgument("sobolev_norm: r must lie in [0, 2]");
  const Grid& g = u.grid();
  const auto c = detail::coefficients(u);
  double s = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double k = g.wavenumber(m);
    s += std::pow(1.0 + k * k, r) * std::norm(c[m]);
  }
  return std::sqrt(g.period() * s);
}

/// Fraction of the spectral energy carried by modes with |m| > n/4.
inline double high_mode_fraction(const GridFunction& u) {
  const auto c = detail::coefficients(u);
  const std::size_t n = c.size();
  double hi = 0.0, total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t mm = m <= n / 2 ? m : n - m;
    const double e = std::norm(c[m]);
    total += e;
    if (mm > n / 4) hi += e;
  }
  return total > 0.0 ? hi / total : 0.0;
}

/// Zero-padded spectral upsampling by an integer power-of-two factor.
inline GridFunction upsample(const GridFunction& u, std::size_t factor) {
  if (factor == 1) return u;
  const Grid& g = u.grid();
  const Grid fine(g.size() * factor, g.period());
  const auto c = detail::coefficients(u);
  const std::size_t n = g.size();
  const std::size_t nf = fine.size();
  std::vector<cplx> cf(nf, cplx(0.0, 0.0));
  for (std::size_t m = 0; m < n; ++m) {
    if (m < n / 2) {
      cf[m] = c[m];
    } else if (m > n / 2) {
      cf[nf - (n - m)] = c[m];
    } else {
      cf[m] += 0.5 * c[m];
      cf[nf - m] += 0.5 * c[m];
    }
  }
  return detail::synthesize(fine, std::move(cf));
}

/// Point evaluation of the trigonometric interpolant and its derivatives.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const GridFunction& u) : grid_(u.grid()), c_(detail::coefficients(u)) {}

  double operator()(double x) const { return eval(x, 0); }
  double derivative(double x, int order = 1) const { return eval(x, order); }

  /// Exact integral of the interpolant over [a, b].
  double integral(double a, double b) const {
    const double x0 = -0.5 * grid_.period();
    double s = c_[0].real() * (b - a);
    const std::size_t n = c_.size();
    for (std::size_t m = 1; m < n; ++m) {
      const double k = grid_.wavenumber(m);
      cplx w = c_[m];
      if (grid_.is_nyquist(m)) {
        // Nyquist term contributes c cos(k (x - x0)).
        s += w.real() * (std::sin(k * (b - x0)) - std::sin(k * (a - x0))) / k;
        continue;
      }
      const cplx eb = std::polar(1.0, k * (b - x0));
      const cplx ea = std::polar(1.0, k * (a - x0));
      s += (w * (eb - ea) / cplx(0.0, k)).real();
    }
    return s;
  }

  const Grid& grid() const noexcept { return grid_; }

 private:
  double eval(double x, int order) const {
    const double x0 = -0.5 * grid_.period();
    cplx s(0.0, 0.0);
    const std::size_t n = c_.size();
    for (std::size_t m = 0; m < n; ++m) {
      const double k = grid_.wavenumber(m);
      if (grid_.is_nyquist(m)) {
        if (order == 0) s += c_[m].real() * std::cos(k * (x - x0));
        continue;
      }
      cplx fac = std::polar(1.0, k * (x - x0));
      for (int o = 0; o < order; ++o) fac *= cplx(0.0, k);
      s += c_[m] * fac;
    }
    return s.real();
  }

  Grid grid_;
  std::vector<cplx> c_;
};

}  // namespace muskat
