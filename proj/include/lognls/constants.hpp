#pragma once

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <vector>

#include "error.hpp"
#include "functional.hpp"
#include "grid.hpp"
#include "logkernel.hpp"

namespace lognls {

// |u|_p^p / (|u|_2^2 |grad u|_2^{p-2}) for a grid field.
inline double weinstein_quotient(const Field& u, double p) {
  return lp_power(u, p) / (mass(u) * std::pow(dirichlet_energy(u), 0.5 * (p - 2.0)));
}

// Radial fields on [0, L] with u(L) = 0, nodes r_i = i dr. Integrals use the cell areas around
// each node; the gradient energy uses midpoint radii on each interval.
class RadialQuotient {
 public:
  RadialQuotient(double p, double L, int intervals) : p_(p), N_(intervals), dr_(L / intervals) {
    w_.resize(N_);
    w_[0] = std::numbers::pi * dr_ * dr_ / 4.0;
    for (int i = 1; i < N_; ++i) w_[i] = 2.0 * std::numbers::pi * i * dr_ * dr_;
    e_.resize(N_);
    for (int i = 0; i < N_; ++i) e_[i] = 2.0 * std::numbers::pi * (i + 0.5);  // edge i -> i+1
  }

  int size() const { return N_; }
  double dr() const { return dr_; }
  double radius(int i) const { return i * dr_; }

  double lp(const Vec& u) const {
    double s = 0.0;
    for (int i = 0; i < N_; ++i) s += w_[i] * std::pow(std::abs(u[i]), p_);
    return s;
  }
  double l2(const Vec& u) const {
    double s = 0.0;
    for (int i = 0; i < N_; ++i) s += w_[i] * u[i] * u[i];
    return s;
  }
  double grad2(const Vec& u) const {
    double s = 0.0;
    for (int i = 0; i < N_; ++i) {
      const double next = i + 1 < N_ ? u[i + 1] : 0.0;
      s += e_[i] * (next - u[i]) * (next - u[i]);
    }
    return s;
  }
  double log_quotient(const Vec& u) const {
    return std::log(lp(u)) - std::log(l2(u)) - 0.5 * (p_ - 2.0) * std::log(grad2(u));
  }

  // Euclidean gradient of the log quotient.
  Vec gradient(const Vec& u) const {
    const double A = lp(u), B = l2(u), G = grad2(u);
    Vec g(N_);
    for (int i = 0; i < N_; ++i) {
      const double next = i + 1 < N_ ? u[i + 1] : 0.0;
      const double prev = i > 0 ? u[i - 1] : 0.0;
      double su = e_[i] * (u[i] - next);
      if (i > 0) su += e_[i - 1] * (u[i] - prev);
      g[i] = p_ * w_[i] * std::pow(std::abs(u[i]), p_ - 2.0) * u[i] / A - 2.0 * w_[i] * u[i] / B -
             (p_ - 2.0) * su / G;
    }
    return g;
  }

  Vec sobolev_apply(const Vec& x, double c) const {
    Vec y(N_);
    for (int i = 0; i < N_; ++i) {
      const double next = i + 1 < N_ ? x[i + 1] : 0.0;
      const double prev = i > 0 ? x[i - 1] : 0.0;
      double s = e_[i] * (x[i] - next) + c * w_[i] * x[i];
      if (i > 0) s += e_[i - 1] * (x[i] - prev);
      y[i] = s;
    }
    return y;
  }

  // Generator of L2-preserving dilations, r u'(r) + u.
  Vec dilation(const Vec& u) const {
    Vec v(N_);
    for (int i = 0; i < N_; ++i) {
      const double next = i + 1 < N_ ? u[i + 1] : 0.0;
      const double prev = i > 0 ? u[i - 1] : u[1];
      v[i] = 0.5 * i * (next - prev) + u[i];
    }
    return v;
  }

  // Solve (S + c W) x = b with S the stiffness of grad2/2 and W the node weights (Thomas).
  Vec sobolev_solve(const Vec& b, double c) const {
    Vec diag(N_), off(N_, 0.0), x(b);
    for (int i = 0; i < N_; ++i) {
      diag[i] = e_[i] + (i > 0 ? e_[i - 1] : 0.0) + c * w_[i];
      if (i + 1 < N_) off[i] = -e_[i];
    }
    for (int i = 1; i < N_; ++i) {
      const double m = off[i - 1] / diag[i - 1];
      diag[i] -= m * off[i - 1];
      x[i] -= m * x[i - 1];
    }
    x[N_ - 1] /= diag[N_ - 1];
    for (int i = N_ - 2; i >= 0; --i) x[i] = (x[i] - off[i] * x[i + 1]) / diag[i];
    return x;
  }

 private:
  double p_;
  int N_;
  double dr_;
  Vec w_, e_;
};

struct GNResult {
  double value = 0.0;          // maximized quotient
  double stationarity = 0.0;   // Sobolev-norm of the log-quotient gradient at the end
  int iterations = 0;
  Vec profile;                 // maximizer, unit L2 norm
  double dr = 0.0;
};

// Best Gagliardo-Nirenberg constant by Sobolev-preconditioned gradient ascent of the Weinstein
// quotient over radial profiles. The quotient is invariant under amplitude and dilation, so
// each iterate is renormalized to unit L2 norm.
inline GNResult gn_constant_ascent(double p, double L = 30.0, int intervals = 6000,
                                   int max_it = 5000, double tol = 1e-9) {
  require(p > 2.0, "gn constant: need p > 2");
  const RadialQuotient q(p, L, intervals);
  const int N = q.size();
  Vec u(N);
  for (int i = 0; i < N; ++i) u[i] = std::exp(-0.5 * q.radius(i) * q.radius(i));
  scale(1.0 / std::sqrt(q.l2(u)), u);
  GNResult out;
  out.dr = q.dr();
  double f = q.log_quotient(u);
  double tau = 1.0;
  // On the lattice the dilation mode is not exactly flat, so the ascent also stops once the
  // quotient gains less than stall_gain over a window of iterations.
  constexpr int window = 100;
  constexpr double stall_gain = 1e-7;
  double f_window = f;
  for (int it = 1; it <= max_it; ++it) {
    const Vec g = q.gradient(u);
    const double c = q.grad2(u) / q.l2(u);
    Vec d = q.sobolev_solve(g, c);
    // The discrete quotient is almost dilation invariant; drifting along that mode is slow and
    // pointless, so the step is kept orthogonal to it in the Sobolev metric.
    const Vec v = q.dilation(u);
    axpy(-dot(v, g) / dot(v, q.sobolev_apply(v, c)), v, d);
    const double slope = dot(g, d);
    out.iterations = it;
    out.stationarity = std::sqrt(std::max(slope, 0.0));
    if (out.stationarity < tol) break;
    tau = std::min(4.0 * tau, 1e3);
    Vec trial(N);
    double ft = -std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < N; ++i) trial[i] = u[i] + tau * d[i];
      ft = q.log_quotient(trial);
      if (std::isfinite(ft) && ft >= f + 1e-4 * tau * slope) break;
      tau *= 0.5;
    }
    if (!(ft >= f)) break;
    u = trial;
    scale(1.0 / std::sqrt(q.l2(u)), u);
    f = ft;
    if (it % window == 0) {
      if (f - f_window < stall_gain) break;
      f_window = f;
    }
    if (it == max_it) fail(ErrorKind::convergence, "gn constant: iteration limit reached");
  }
  out.value = std::exp(f);
  out.profile = u;
  return out;
}

inline double gn_constant(double p) { return gn_constant_ascent(p).value; }

// Closed form of the GN constant in terms of the ground-state mass |W|_2^2.
inline double gn_constant_from_mass(double p, double ground_mass) {
  return 0.5 * p * std::pow(0.5 * (p - 2.0), -0.5 * (p - 2.0)) * std::pow(ground_mass, -0.5 * (p - 2.0));
}

// Smooth random fields: a few Gaussian bumps with random centres, widths and signs.
inline Field random_bump_field(const GridPtr& grid, std::mt19937_64& rng, double min_width,
                               double max_width, int max_bumps = 4) {
  const Grid& g = *grid;
  std::uniform_int_distribution<int> count(1, max_bumps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double reach = 0.35 * g.R();
  Field u(grid);
  const int nb = count(rng);
  for (int b = 0; b < nb; ++b) {
    const double cx = reach * (2.0 * unit(rng) - 1.0), cy = reach * (2.0 * unit(rng) - 1.0);
    const double wdt = min_width * std::pow(max_width / min_width, unit(rng));
    const double amp = 0.5 + unit(rng);
    for (int k = 0; k < g.size(); ++k) {
      const double dx = g.x(k) - cx, dy = g.y(k) - cy;
      u.v[k] += amp * std::exp(-0.5 * (dx * dx + dy * dy) / (wdt * wdt));
    }
  }
  return u;
}

struct HLSEstimate {
  double raw = 0.0;       // largest observed chi2(u^2,u^2) / |u|_{8/3}^4
  double inflated = 0.0;  // raw times the safety factor
  int trials = 0;
};

inline double hls_quotient(const ChiEvaluator& chi, const Field& u) {
  const double n83 = std::pow(lp_power(u, 8.0 / 3.0), 1.5);  // |u|_{8/3}^4
  return chi.singular_only(u) / n83;
}

// Empirical constant for chi2(u^2,u^2) <= C |u|_{8/3}^4 over random smooth fields.
inline HLSEstimate hls_constant_estimate(const GridPtr& grid, int trials, unsigned long seed = 7,
                                         double safety = 2.0) {
  require(trials >= 100, "hls estimate: need at least 100 trials");
  const ChiEvaluator chi(grid);
  std::mt19937_64 rng(seed);
  HLSEstimate e;
  e.trials = trials;
  const double hmin = 2.0 * grid->h(), wmax = 0.3 * grid->R();
  for (int t = 0; t < trials; ++t) {
    const Field u = random_bump_field(grid, rng, hmin, std::max(wmax, 2.0 * hmin));
    e.raw = std::max(e.raw, hls_quotient(chi, u));
  }
  e.inflated = safety * e.raw;
  return e;
}

// Constants that do not depend on R.
struct BaseConstants {
  double C_p = 0.0;
  double C_83 = 0.0;        // GN constant for p = 8/3
  double C_hls_raw = 0.0;
  double C_hls = 0.0;       // inflated HLS estimate
};

struct Thresholds {
  double p = 0.0, rho = 0.0, R = 0.0, alpha = 0.0, lambda1 = 0.0, area = 0.0;
  double C_p = 0.0, C_83 = 0.0, C_hls_raw = 0.0, C_hls = 0.0;
  double x_star = 0.0;
  double f_at_xstar = 0.0;
  double R0 = 0.0;
  double alpha0 = 0.0, alpha1 = 0.0, alpha_star = 0.0;
  double rho_star = 0.0;
  bool defined = false;  // R > R0, the ball-constrained set is non-empty
};

inline void to_json(nlohmann::json& j, const Thresholds& t) {
  j = {{"p", t.p},           {"rho", t.rho},         {"R", t.R},
       {"alpha", t.alpha},   {"lambda1", t.lambda1}, {"area", t.area},
       {"C_p", t.C_p},       {"C_8_3", t.C_83},      {"C_hls_raw", t.C_hls_raw},
       {"C_hls", t.C_hls},   {"x_star", t.x_star},   {"f_at_xstar", t.f_at_xstar},
       {"R0", t.R0},         {"alpha0", t.alpha0},   {"alpha1", t.alpha1},
       {"alpha_star", t.alpha_star},                 {"rho_star", t.rho_star},
       {"defined", t.defined}};
}

inline double x_star(double p, double rho, double C_p) {
  return std::pow(p / ((p - 2.0) * rho * C_p), 1.0 / (p - 4.0));
}

// f(x) = x^2/2 - C_p x^{p-2} rho / p + alpha rho^2 log(1+R) / 4
inline double barrier(double x, const Params& prm, double R, double C_p) {
  return 0.5 * x * x - C_p * std::pow(x, prm.p - 2.0) * prm.rho / prm.p +
         0.25 * prm.alpha * prm.rho * prm.rho * std::log1p(R);
}

inline double barrier_slope(double x, const Params& prm, double C_p) {
  return x - (prm.p - 2.0) / prm.p * C_p * std::pow(x, prm.p - 3.0) * prm.rho;
}

// lambda1 is the principal Dirichlet eigenvalue and area the area of the reference domain.
inline Thresholds thresholds(const Params& prm, double R, double lambda1, double area,
                             const BaseConstants& bc) {
  prm.validate();
  require(R > 0.0 && lambda1 > 0.0 && area > 0.0, "thresholds: need R, lambda1, area > 0");
  const double p = prm.p, rho = prm.rho;
  Thresholds t;
  t.p = p;
  t.rho = rho;
  t.R = R;
  t.alpha = prm.alpha;
  t.lambda1 = lambda1;
  t.area = area;
  t.C_p = bc.C_p;
  t.C_83 = bc.C_83;
  t.C_hls_raw = bc.C_hls_raw;
  t.C_hls = bc.C_hls;
  t.x_star = x_star(p, rho, bc.C_p);
  const double xs2 = t.x_star * t.x_star;
  const double logR = std::log1p(R);
  t.f_at_xstar = (p - 4.0) / (2.0 * (p - 2.0)) * xs2 + 0.25 * prm.alpha * rho * rho * logR;
  t.R0 = std::sqrt(lambda1 * rho) / t.x_star;
  const double k1 = lambda1 / (R * R);
  t.alpha0 = (2.0 * k1 - 4.0 / p * bc.C_p * std::pow(k1 * rho, 0.5 * (p - 2.0))) / (rho * logR);
  const double num = 2.0 * (p - 4.0) / (p - 2.0) * xs2 - 2.0 * k1 * rho +
                     4.0 / p * std::pow(R, -(p - 2.0)) * std::pow(rho, 0.5 * p) *
                         std::pow(area, -0.5 * (p - 2.0));
  const double den = rho * rho * logR +
                     bc.C_hls * std::pow(bc.C_83, 1.5) * std::sqrt(lambda1) / R * rho * rho;
  t.alpha1 = num / den;
  t.alpha_star = std::min(t.alpha0, t.alpha1);
  t.rho_star = std::pow(lambda1, -(p - 4.0) / (p - 2.0)) *
               std::pow(p / ((p - 2.0) * bc.C_p), 2.0 / (p - 2.0));
  t.defined = R > t.R0;
  return t;
}

}  // namespace lognls
