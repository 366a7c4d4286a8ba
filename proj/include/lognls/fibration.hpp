#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "error.hpp"
#include "functional.hpp"
#include "grid.hpp"
#include "logkernel.hpp"

namespace lognls {

// The pieces of u that fix its whole dilation fiber u_t(x) = t u(t x).
struct FiberInvariants {
  double mass = 0.0;   // invariant under dilation
  double grad2 = 0.0;  // scales as t^2
  double lp = 0.0;     // scales as t^{p-2}
  double chi0 = 0.0;   // shifts by -mass^2 log t
};

inline FiberInvariants fiber_invariants(const Field& u, const Params& prm) {
  const LogConvolver conv(u.grid, Kernel::full);
  const Vec q = squares(u);
  return {mass(u), dirichlet_energy(u), lp_power(u, prm.p), u.grid->weight() * dot(q, conv.apply(q))};
}

// h(t) = J(u_t).
inline double fiber_energy(const FiberInvariants& f, const Params& prm, double t) {
  return 0.5 * t * t * f.grad2 + 0.25 * prm.alpha * f.chi0 -
         0.25 * prm.alpha * f.mass * f.mass * std::log(t) -
         prm.power_weight() / prm.p * std::pow(t, prm.p - 2.0) * f.lp;
}

// P(u_t), the Pohozaev functional along the fiber; h'(t) = P(u_t) / t.
inline double fiber_pohozaev(const FiberInvariants& f, const Params& prm, double t) {
  return t * t * f.grad2 - 0.25 * prm.alpha * f.mass * f.mass -
         prm.power_weight() * (prm.p - 2.0) / prm.p * std::pow(t, prm.p - 2.0) * f.lp;
}

inline double fiber_slope(const FiberInvariants& f, const Params& prm, double t) {
  return fiber_pohozaev(f, prm, t) / t;
}

// Unique zero of P(u_t) inside [lo, hi], by bisection in log t to relative width rtol.
inline double fiber_root(const FiberInvariants& f, const Params& prm, double lo, double hi,
                         double rtol = 1e-12) {
  require(lo > 0.0 && hi > lo, "fiber root: need 0 < lo < hi");
  double plo = fiber_pohozaev(f, prm, lo), phi = fiber_pohozaev(f, prm, hi);
  if (!(plo > 0.0 && phi < 0.0))
    fail(ErrorKind::convergence, "fiber root: no +/- sign change of h' in the bracket");
  double a = std::log(lo), b = std::log(hi);
  while (b - a > rtol) {
    const double m = 0.5 * (a + b);
    if (fiber_pohozaev(f, prm, std::exp(m)) > 0.0)
      a = m;
    else
      b = m;
  }
  return std::exp(0.5 * (a + b));
}

struct FiberScan {
  std::vector<double> t, h, dh;
  int sign_changes = 0;
  bool plus_to_minus = false;  // the single sign change goes from h' > 0 to h' < 0
  double t_u = 0.0;
  double h_max = 0.0;
};

// Log-spaced scan of the fiber; locates t_u when h' changes sign exactly once.
inline FiberScan fiber_scan(const FiberInvariants& f, const Params& prm, double t_min,
                            double t_max, int points = 10000) {
  require(t_min > 0.0 && t_max > t_min && points >= 2, "fiber scan: bad range");
  FiberScan s;
  s.t.resize(points);
  s.h.resize(points);
  s.dh.resize(points);
  const double la = std::log(t_min), lb = std::log(t_max);
  int bracket = -1;
  for (int i = 0; i < points; ++i) {
    const double t = std::exp(la + (lb - la) * i / (points - 1));
    s.t[i] = t;
    s.h[i] = fiber_energy(f, prm, t);
    s.dh[i] = fiber_slope(f, prm, t);
    if (i > 0 && (s.dh[i] > 0.0) != (s.dh[i - 1] > 0.0)) {
      ++s.sign_changes;
      if (s.dh[i - 1] > 0.0) bracket = i;
    }
  }
  s.plus_to_minus = s.sign_changes == 1 && bracket > 0;
  if (bracket < 0) fail(ErrorKind::convergence, "fiber scan: h' has no +/- sign change in range");
  s.t_u = fiber_root(f, prm, s.t[bracket - 1], s.t[bracket]);
  s.h_max = fiber_energy(f, prm, s.t_u);
  return s;
}

// Exact dilation: the same nodal values times t on the grid of Omega_{R/t}.
inline Field dilate(const Field& u, double t) {
  require(t > 0.0 && std::isfinite(t), "dilate: need t > 0");
  if (t == 1.0) return u;
  const Grid& g = *u.grid;
  Field out(build_grid(g.shape(), g.R() / t, g.n()), u.v);
  scale(t, out.v);
  return out;
}

// Value of u at an arbitrary point by Keys bicubic interpolation on the full lattice, with zero
// outside the interior mask.
inline double interpolate(const Field& u, double x, double y) {
  const Grid& g = *u.grid;
  const double half = 0.5 * (g.n() - 1);
  const double fx = x / g.h() + half, fy = y / g.h() + half;
  const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
  if (i0 < -2 || j0 < -2 || i0 > g.n() + 1 || j0 > g.n() + 1) return 0.0;
  const auto keys = [](double s) {
    const double a = -0.5;
    s = std::abs(s);
    if (s < 1.0) return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
    if (s < 2.0) return ((a * s - 5.0 * a) * s + 8.0 * a) * s - 4.0 * a;
    return 0.0;
  };
  std::array<double, 4> wx, wy;
  for (int q = 0; q < 4; ++q) {
    wx[q] = keys(fx - (i0 - 1 + q));
    wy[q] = keys(fy - (j0 - 1 + q));
  }
  double s = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) {
      const int k = g.index(i0 - 1 + a, j0 - 1 + b);
      if (k >= 0) s += wx[a] * wy[b] * u.v[k];
    }
  return s;
}

// u_t resampled onto a given grid: u_t(x) = t u(t x).
inline Field dilate_onto(const Field& u, double t, const GridPtr& target) {
  require(t > 0.0 && std::isfinite(t), "dilate: need t > 0");
  const Grid& tg = *target;
  if (u.grid->R() / t < 2.0 * tg.h())
    fail(ErrorKind::parameter, "dilate: support falls below the grid resolution");
  Field out(target);
  for (int k = 0; k < tg.size(); ++k) out.v[k] = t * interpolate(u, t * tg.x(k), t * tg.y(k));
  return out;
}

}  // namespace lognls
