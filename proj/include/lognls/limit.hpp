#pragma once

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "logkernel.hpp"

namespace lognls {

// Positive radial decaying solution of -W'' - W'/r + W = W^{p-1} in the plane, sampled on a
// uniform radial grid. Beyond r_match the samples follow the linear tail c K0(r).
struct GroundState {
  double p = 0.0;
  double W0 = 0.0;
  double dr = 0.0;
  double r_match = 0.0;
  double r_max = 0.0;
  double tail_c = 0.0;
  Vec W, dW;           // samples at r_k = k dr, k = 0 .. size-1
  double mass = 0.0;   // |W|_2^2
  double lp = 0.0;     // |W|_p^p
  double grad2 = 0.0;  // |grad W|_2^2

  int size() const { return static_cast<int>(W.size()); }
  double radius(int k) const { return k * dr; }

  // Cubic Hermite interpolation of the samples, the analytic tail past r_max.
  double value(double r) const {
    if (r >= r_max) return tail_c * std::cyl_bessel_k(0.0, r);
    int k = static_cast<int>(r / dr);
    k = std::min(k, size() - 2);
    const double s = (r - k * dr) / dr;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * W[k] + h10 * dr * dW[k] + h01 * W[k + 1] + h11 * dr * dW[k + 1];
  }

  // Weinstein quotient |W|_p^p / (|W|_2^2 |grad W|_2^{p-2}); W maximizes it.
  double weinstein_quotient() const { return lp / (mass * std::pow(grad2, 0.5 * (p - 2.0))); }
};

namespace detail {

using RadialState = std::array<double, 5>;  // W, W', and running integrals of W^2, |W|^p, W'^2

struct RadialSystem {
  double p;
  void operator()(const RadialState& y, RadialState& dy, double r) const {
    const double w = y[0], v = y[1];
    const double aw = std::abs(w);
    dy[0] = v;
    dy[1] = -v / r + w - std::pow(aw, p - 2.0) * w;
    const double c = 2.0 * std::numbers::pi * r;
    dy[2] = c * w * w;
    dy[3] = c * std::pow(aw, p);
    dy[4] = c * v * v;
  }
};

// Regular series start at small r.
inline RadialState radial_start(double p, double W0, double r0) {
  const double a = W0 - std::pow(W0, p - 1.0);
  return {W0 + 0.25 * a * r0 * r0, 0.5 * a * r0, 0.0, 0.0, 0.0};
}

enum class Shot { undershoot, overshoot };

inline Shot classify_shot(double p, double W0, double r_end) {
  namespace ode = boost::numeric::odeint;
  const double r0 = 1e-4;
  auto stepper = ode::make_dense_output(1e-14, 1e-13, ode::runge_kutta_dopri5<RadialState>());
  stepper.initialize(radial_start(p, W0, r0), r0, 1e-4);
  const RadialSystem sys{p};
  while (stepper.current_time() < r_end) {
    stepper.do_step(sys);
    const RadialState& y = stepper.current_state();
    if (y[0] < 0.0) return Shot::overshoot;
    if (y[1] > 0.0) return Shot::undershoot;
  }
  return stepper.current_state()[1] >= 0.0 ? Shot::undershoot : Shot::overshoot;
}

}  // namespace detail

// Bisection on W(0): a sign crossing means W(0) too large, a turning point means too small.
inline GroundState shoot_ground_state(double p, double tol = 1e-15, double dr = 1e-3) {
  namespace ode = boost::numeric::odeint;
  require(p > 2.0, "shooting: need p > 2");
  require(tol > 0.0 && dr > 0.0, "shooting: tolerances must be positive");
  const double r_probe = 40.0;
  double lo = 1.0, hi = 2.0;
  int guard = 0;
  while (detail::classify_shot(p, hi, r_probe) == detail::Shot::undershoot) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 30) fail(ErrorKind::convergence, "shooting: no overshooting bracket found");
  }
  for (int it = 0; it < 200 && hi - lo > tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (detail::classify_shot(p, mid, r_probe) == detail::Shot::overshoot)
      hi = mid;
    else
      lo = mid;
  }

  GroundState gs;
  gs.p = p;
  gs.W0 = 0.5 * (lo + hi);
  gs.dr = dr;
  gs.W.push_back(gs.W0);
  gs.dW.push_back(0.0);

  // Integrate the converged shot sample to sample (no dense-output interpolation) until the
  // linear tail takes over. Match once the neglected nonlinearity is small relative to W; for p
  // near 2 that level is out of reach of a double-precision shot, so it is capped at W = 1e-7.
  const double w_match = std::max(std::pow(1e-8, 1.0 / (p - 2.0)), 1e-7);
  const double r0 = 1e-4;
  auto stepper = ode::make_controlled(1e-14, 1e-13, ode::runge_kutta_dopri5<detail::RadialState>());
  const detail::RadialSystem sys{p};
  detail::RadialState y = detail::radial_start(p, gs.W0, r0);
  double r = r0, step = 1e-4;
  double integrals[3] = {0.0, 0.0, 0.0};
  for (int k = 1;; ++k) {
    const double rk = k * dr;
    if (rk > r_probe) fail(ErrorKind::convergence, "shooting: trajectory never reached the linear tail");
    ode::integrate_adaptive(stepper, sys, y, r, rk, std::min(step, rk - r));
    r = rk;
    if (y[0] <= 0.0 || y[1] >= 0.0)
      fail(ErrorKind::convergence, "shooting: trajectory left the positive decreasing branch");
    gs.W.push_back(y[0]);
    gs.dW.push_back(y[1]);
    if (rk >= 6.0 && y[0] < w_match) {
      gs.r_match = rk;
      integrals[0] = y[2];
      integrals[1] = y[3];
      integrals[2] = y[4];
      break;
    }
  }

  // Past the match point the shot is blended into c K0 over one unit of radius with a C2 weight,
  // which keeps the samples smooth for finite-difference residual checks.
  gs.tail_c = gs.W.back() / std::cyl_bessel_k(0.0, gs.r_match);
  const int k_match = gs.size() - 1;
  for (int k = k_match + 1;; ++k) {
    const double rk = k * dr;
    const double xi = rk - gs.r_match;
    const double tw = gs.tail_c * std::cyl_bessel_k(0.0, rk);
    const double tv = -gs.tail_c * std::cyl_bessel_k(1.0, rk);
    if (xi < 1.0) {
      ode::integrate_adaptive(stepper, sys, y, r, rk, std::min(step, rk - r));
      r = rk;
      const double b = xi * xi * xi * (10.0 - 15.0 * xi + 6.0 * xi * xi);
      const double db = 30.0 * xi * xi * (1.0 - xi) * (1.0 - xi);
      gs.W.push_back((1.0 - b) * y[0] + b * tw);
      gs.dW.push_back((1.0 - b) * y[1] + b * tv + db * (tw - y[0]));
      continue;
    }
    gs.W.push_back(tw);
    gs.dW.push_back(tv);
    if (tw < 1e-12) {
      gs.r_max = rk;
      break;
    }
  }

  // Tail integrals on [r_match, r_max] by Gauss-Legendre panels of unit length.
  static const auto rule = detail::gauss_legendre(16);
  double tail[3] = {0.0, 0.0, 0.0};
  for (double a = gs.r_match; a < gs.r_max; a += 1.0) {
    const double b = std::min(a + 1.0, gs.r_max);
    for (const auto& [xi, wi] : rule) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
      const double w = gs.tail_c * std::cyl_bessel_k(0.0, r);
      const double v = gs.tail_c * std::cyl_bessel_k(1.0, r);
      const double c = 0.5 * (b - a) * wi * 2.0 * std::numbers::pi * r;
      tail[0] += c * w * w;
      tail[1] += c * std::pow(w, p);
      tail[2] += c * v * v;
    }
  }
  gs.mass = integrals[0] + tail[0];
  gs.lp = integrals[1] + tail[1];
  gs.grad2 = integrals[2] + tail[2];
  return gs;
}

// Pointwise ODE residual of the samples with fourth-order central differences.
inline Vec ground_state_residual(const GroundState& gs) {
  const int m = gs.size();
  Vec res(m, 0.0);
  const double dr = gs.dr;
  for (int k = 2; k + 2 < m; ++k) {
    const double* w = &gs.W[k];
    const double d2 = (-w[-2] + 16 * w[-1] - 30 * w[0] + 16 * w[1] - w[2]) / (12 * dr * dr);
    const double d1 = (w[-2] - 8 * w[-1] + 8 * w[1] - w[2]) / (12 * dr);
    res[k] = -d2 - d1 / (k * dr) + w[0] - std::pow(w[0], gs.p - 1.0);
  }
  return res;
}

// Normalized solution of the limit problem with mass rho, obtained by rescaling W.
struct LimitSolution {
  std::shared_ptr<const GroundState> ground;
  double p = 0.0, rho = 0.0;
  double lambda_bar = 0.0;
  double amplitude = 0.0;  // lambda_bar^{1/(p-2)}
  double grad2 = 0.0;      // |grad u|_2^2
  double lp = 0.0;         // |u|_p^p
  double mass = 0.0;       // independent radial quadrature of u^2
  double m_rho = 0.0;      // energy level (p-4)/(2(p-2)) |grad u|^2

  double value(double r) const { return amplitude * ground->value(std::sqrt(lambda_bar) * r); }
  double pohozaev_defect() const { return grad2 - (p - 2.0) / p * lp; }
};

inline LimitSolution limit_solution(std::shared_ptr<const GroundState> ground, double rho) {
  require(rho > 0.0, "limit: need rho > 0");
  const GroundState& W = *ground;
  require(W.p > 4.0, "limit: the normalized rescaling needs p > 4");
  const double p = W.p;
  LimitSolution sol;
  sol.ground = ground;
  sol.p = p;
  sol.rho = rho;
  sol.lambda_bar = std::pow(W.mass / rho, (p - 2.0) / (p - 4.0));
  sol.amplitude = std::pow(sol.lambda_bar, 1.0 / (p - 2.0));
  const double scale = std::pow(sol.lambda_bar, 2.0 / (p - 2.0));
  sol.grad2 = scale * W.grad2;
  sol.lp = scale * W.lp;
  double simpson = 0.0;
  const int m = W.size() - (W.size() % 2 == 0 ? 1 : 0);
  for (int k = 0; k < m; ++k) {
    const double c = (k == 0 || k == m - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    simpson += c * k * W.dr * W.W[k] * W.W[k];
  }
  simpson *= 2.0 * std::numbers::pi * W.dr / 3.0;
  sol.mass = simpson * std::pow(sol.lambda_bar, (4.0 - p) / (p - 2.0));
  sol.m_rho = (p - 4.0) / (2.0 * (p - 2.0)) * sol.grad2;
  return sol;
}

struct DecayCertificate {
  double R0 = 0.0, C1 = 0.0, C2 = 0.0;
  bool holds = false;
};

// u <= C1 exp(-C2 |x|) beyond the radius where u^{p-2} drops below lambda_bar/2.
inline DecayCertificate decay_certificate(const LimitSolution& sol) {
  const GroundState& W = *sol.ground;
  const double sl = std::sqrt(sol.lambda_bar);
  int k0 = -1;
  for (int k = 0; k < W.size(); ++k)
    if (std::pow(W.W[k], sol.p - 2.0) <= 0.5) {
      k0 = k;
      break;
    }
  if (k0 < 0 || k0 + 1 >= W.size()) fail(ErrorKind::parameter, "decay: radial samples too short");
  DecayCertificate c;
  c.R0 = W.radius(k0) / sl;
  c.C2 = std::sqrt(0.5 * sol.lambda_bar);
  c.C1 = sol.amplitude * W.W[k0] * std::exp(c.C2 * c.R0);
  c.holds = true;
  for (int k = k0; k < W.size(); ++k) {
    const double r = W.radius(k) / sl;
    if (sol.amplitude * W.W[k] > c.C1 * std::exp(-c.C2 * r) * (1.0 + 1e-12)) c.holds = false;
  }
  return c;
}

// The limit profile centred at (cx, cy), sampled on the interior nodes of a grid.
inline Field sample_on_grid(const LimitSolution& sol, const GridPtr& grid, double cx = 0.0,
                            double cy = 0.0) {
  Field u(grid);
  for (int k = 0; k < grid->size(); ++k)
    u.v[k] = sol.value(std::hypot(grid->x(k) - cx, grid->y(k) - cy));
  return u;
}

}  // namespace lognls
