// Offset-node trapezoid quadrature for periodic (principal-value) integrals.
//
// For a collocation node x_i the integration variable runs over
// s_q = (q + theta) h, q = -n/2 .. n/2 - 1.  With theta = 1/2 the node set is
// symmetric about s = 0 and never contains it, so odd 1/s singularities cancel
// pairwise and the rule realizes the principal value with spectral accuracy.
// Values at x_i - s_q = x_{i-q} - theta h are read from a copy of each function
// translated by theta h (exact for the trigonometric interpolant).
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/kernels.hpp"

namespace muskat {

struct QuadratureScheme {
  double offset_fraction = 0.5;
  int image_pairs = 1024;

  void validate() const {
    if (!(offset_fraction > 0.0 && offset_fraction < 1.0)) {
      throw InvalidArgument("quadrature: offset_fraction must lie in (0, 1)");
    }
    if (image_pairs < 1) throw InvalidArgument("quadrature: image_pairs must be >= 1");
  }
};

/// Quadrature offsets, their trigonometric phases and the staggered-index map.
class OffsetNodes {
 public:
  OffsetNodes(const Grid& g, const QuadratureScheme& scheme) : grid_(g), scheme_(scheme) {
    scheme.validate();
    const std::size_t n = g.size();
    s_.resize(n);
    phase_.resize(n);
    const double h = g.spacing();
    for (std::size_t qi = 0; qi < n; ++qi) {
      const double q = static_cast<double>(qi) - static_cast<double>(n / 2);
      s_[qi] = (q + scheme.offset_fraction) * h;
      phase_[qi] = kernels::Phase::of(s_[qi], g.period());
    }
  }

  std::size_t size() const noexcept { return s_.size(); }
  double s(std::size_t qi) const noexcept { return s_[qi]; }
  const kernels::Phase& phase(std::size_t qi) const noexcept { return phase_[qi]; }
  double weight() const noexcept { return grid_.spacing(); }
  const Grid& grid() const noexcept { return grid_; }
  const QuadratureScheme& scheme() const noexcept { return scheme_; }

  /// Index into a staggered array for collocation node i and offset qi.
  std::size_t stag_index(std::size_t i, std::size_t qi) const noexcept {
    const std::size_t n = s_.size();
    // x_i - s_q = x_{i - q} - theta h with q = qi - n/2
    return (i + n + n / 2 - qi) % n;
  }

  /// u evaluated at x_j - theta h.
  GridFunction staggered(const GridFunction& u) const {
    return translate(u, scheme_.offset_fraction * grid_.spacing());
  }

 private:
  Grid grid_;
  QuadratureScheme scheme_;
  std::vector<double> s_;
  std::vector<kernels::Phase> phase_;
};

}  // namespace muskat
