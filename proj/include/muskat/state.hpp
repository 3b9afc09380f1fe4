// Physical parameters and the interface pair X = (f, h).
#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"

namespace muskat {

struct PhysicalParams {
  double k = 1.0;    // permeability
  double mu = 1.0;   // viscosity
  double g = 1.0;    // gravity
  double rho1 = 1.0;
  double rho2 = 2.0;
  double rho3 = 3.0;
  double c_inf = 1.0;

  double theta1() const noexcept { return k * g * (rho1 - rho2) / (2.0 * mu); }
  double theta2() const noexcept { return k * g * (rho2 - rho3) / (2.0 * mu); }

  /// Every violated invariant, in a stable order.  With allow_two_phase the
  /// lower pair may coincide (rho2 == rho3, so theta2 == 0).
  std::vector<std::string> violations(bool allow_two_phase = false) const {
    std::vector<std::string> out;
    auto positive = [&](double v, const char* name) {
      if (!(std::isfinite(v) && v > 0.0)) out.push_back(std::string(name) + " must be positive and finite");
    };
    positive(k, "k");
    positive(mu, "mu");
    positive(g, "g");
    positive(c_inf, "c_inf");
    for (double r : {rho1, rho2, rho3}) {
      if (!std::isfinite(r)) {
        out.emplace_back("densities must be finite");
        break;
      }
    }
    const bool lower_ok = allow_two_phase ? rho2 <= rho3 : rho2 < rho3;
    if (!(rho1 < rho2 && lower_ok)) out.emplace_back("densities must be strictly increasing");
    return out;
  }

  void validate(bool allow_two_phase = false) const {
    const auto v = violations(allow_two_phase);
    if (v.empty()) return;
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i];
    throw InvalidArgument("physical parameters: " + os.str());
  }

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

/// Upper interface y = c_inf + f(x) over lower interface y = h(x).
struct InterfaceState {
  GridFunction f;
  GridFunction h;
  PhysicalParams params;

  InterfaceState() = default;
  InterfaceState(GridFunction f_, GridFunction h_, PhysicalParams p)
      : f(std::move(f_)), h(std::move(h_)), params(p) {
    f.check_same(h);
  }

  static InterfaceState flat(const Grid& g, const PhysicalParams& p) {
    return InterfaceState(GridFunction(g), GridFunction(g), p);
  }

  const Grid& grid() const noexcept { return f.grid(); }
  double c_inf() const noexcept { return params.c_inf; }
};

/// min_j (c_inf + f_j - h_j)
inline double admissibility_gap(const InterfaceState& X) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < X.f.size(); ++j) gap = std::min(gap, X.c_inf() + X.f[j] - X.h[j]);
  return gap;
}

/// Throws AdmissibilityError naming the first node with the smallest gap if it is not positive.
inline void require_admissible(const InterfaceState& X, const char* what) {
  std::size_t worst = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < X.f.size(); ++j) {
    const double gj = X.c_inf() + X.f[j] - X.h[j];
    if (!(gj >= gap)) {  // also catches NaN
      gap = gj;
      worst = j;
    }
  }
  if (!(gap > 0.0)) {
    std::ostringstream os;
    os << what << ": inadmissible state, gap " << gap << " at node " << worst << " (x = " << X.grid().node(worst)
       << ")";
    throw AdmissibilityError(os.str(), worst, gap);
  }
}

/// X + a * Y for a direction Y = (u, v).
inline InterfaceState perturbed(const InterfaceState& X, const GridFunction& u, const GridFunction& v, double a) {
  return InterfaceState(X.f + a * u, X.h + a * v, X.params);
}

}  // namespace muskat
