#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "fibration.hpp"
#include "functional.hpp"
#include "grid.hpp"
#include "linalg.hpp"
#include "preconditioner.hpp"

namespace lognls {

struct SolverOptions {
  double tol = 1e-8;          // local min: stop when |g + lambda u| / |Lu| < tol
  int max_iterations = 5000;
  int trap_window = 25;       // consecutive ball backtracks that count as a boundary trap
  double interior_margin = 1e-3;
  int path_nodes = 21;
  int path_iterations = 300;
  double path_step = 0.2;
  double path_energy_weight = 4.0;  // extra node density near the top of the path
  bool s_homotopy = false;
  std::vector<double> s_schedule{0.5, 0.75, 1.0};
  int climb_iterations = 400;
  double climb_tol = 1e-3;    // climbing image hands over to Newton below this residual
  double saddle_tol = 1e-6;   // refinement: stop when |g + lambda u| / |Lu| < saddle_tol
  int newton_iterations = 60;
  int krylov_iterations = 4000;
  double pohozaev_tol = 1e-2;
  bool allow_zero_alpha = false;  // limit-problem runs only
};

struct Certificates {
  bool converged = false;
  bool in_Q = false;       // |grad u| < x*
  bool interior = false;   // in_Q with margin and no boundary trap
  bool pohozaev_ok = false;
  bool energy_positive = false;
  bool above_barrier = false;     // mountain pass: energy >= f(x*)
  bool above_min = false;         // mountain pass: energy > local-min energy
  bool saddle_signature = false;  // maximal along the path, fiber curvature negative
  bool degenerate = false;        // path maximum at an endpoint
};

inline void to_json(nlohmann::json& j, const Certificates& c) {
  j = {{"converged", c.converged},     {"in_Q", c.in_Q},
       {"interior", c.interior},       {"pohozaev_ok", c.pohozaev_ok},
       {"energy_positive", c.energy_positive}, {"above_barrier", c.above_barrier},
       {"above_min", c.above_min},     {"saddle_signature", c.saddle_signature},
       {"degenerate", c.degenerate}};
}

struct TraceRow {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
};

struct SolveReport {
  std::string mode;    // "min" or "mp"
  std::string status;  // converged, boundary_trap, degenerate
  Field solution;
  double lagrange_lambda = 0.0;
  EnergyBreakdown energy;
  int iterations = 0;
  double residual = 0.0;   // |g + lambda u| / |Lu|
  double grad_norm = 0.0;  // |grad u|_2
  double pohozaev_relative = 0.0;
  double reference_energy = 0.0;  // min: J(psi_R); mp: local-min energy
  std::vector<double> path_energy;
  int path_max = -1;
  double path_curvature = 0.0;   // energy second difference at the path maximum
  double fiber_curvature = 0.0;  // h''(1) of the solution's dilation fiber
  Certificates cert;
  std::vector<TraceRow> trace;
};

inline void to_json(nlohmann::json& j, const SolveReport& r) {
  j = {{"mode", r.mode},
       {"status", r.status},
       {"lagrange_lambda", r.lagrange_lambda},
       {"energy", r.energy},
       {"iterations", r.iterations},
       {"residual", r.residual},
       {"grad_norm", r.grad_norm},
       {"pohozaev_relative", r.pohozaev_relative},
       {"reference_energy", r.reference_energy},
       {"path_energy", r.path_energy},
       {"path_max", r.path_max},
       {"path_curvature", r.path_curvature},
       {"fiber_curvature", r.fiber_curvature},
       {"certificates", r.cert}};
}

namespace detail {

inline void check_regime(const Params& prm, const SolverOptions& opt) {
  prm.validate();
  if (opt.allow_zero_alpha && prm.alpha == 0.0) return;
  prm.validate_for_solve();
}

struct Residual {
  double lambda = 0.0;
  Vec r;              // g + lambda u, orthogonal to u
  double relative = 0.0;
};

inline Residual residual(const EnergyFunctional& F, const Field& u) {
  Residual out;
  const Field g = F.gradient(u);
  out.lambda = -dot(g.v, u.v) / dot(u.v, u.v);
  out.r = g.v;
  axpy(out.lambda, u.v, out.r);
  out.relative = norm2(out.r) / norm2(laplacian(u).v);
  return out;
}

inline void project_tangent(const Vec& u, Vec& v) { axpy(-dot(u, v) / dot(u, u), u, v); }

inline Field renormalized(const Field& u, double rho) {
  Field out = u;
  normalize_mass(out, rho);
  return out;
}

inline double h1_distance(const Field& a, const Field& b) {
  Field d = a;
  axpy(-1.0, b.v, d.v);
  return std::sqrt(dirichlet_energy(d) + mass(d));
}

// h''(1) of the dilation fiber through u.
inline double fiber_curvature(const Field& u, const Params& prm) {
  const double m = mass(u);
  return dirichlet_energy(u) + 0.25 * prm.alpha * m * m -
         prm.power_weight() * (prm.p - 2.0) * (prm.p - 3.0) / prm.p * lp_power(u, prm.p);
}

}  // namespace detail

// Recomputes every certificate from the stored field.
inline void certify(SolveReport& rep, const Params& prm, const Thresholds& th,
                    const SolverOptions& opt, const SolveReport* local_min = nullptr) {
  const EnergyFunctional F(rep.solution.grid, prm);
  const Field& u = rep.solution;
  rep.energy = F.breakdown(u);
  rep.lagrange_lambda = rep.energy.lagrange_lambda;
  const detail::Residual res = detail::residual(F, u);
  rep.residual = res.relative;
  rep.grad_norm = std::sqrt(2.0 * rep.energy.kinetic);
  const double scale = 2.0 * rep.energy.kinetic + std::abs(prm.alpha) * prm.rho * prm.rho / 4.0;
  rep.pohozaev_relative =
      std::abs(rep.energy.pohozaev_interior - rep.energy.boundary_flux) / scale;
  rep.fiber_curvature = detail::fiber_curvature(u, prm);
  Certificates& c = rep.cert;
  const bool mp = rep.mode == "mp";
  c.converged = rep.residual < (mp ? opt.saddle_tol : opt.tol);
  c.in_Q = rep.grad_norm < th.x_star;
  c.interior = c.in_Q && rep.grad_norm < (1.0 - opt.interior_margin) * th.x_star &&
               rep.status != "boundary_trap";
  c.pohozaev_ok = rep.pohozaev_relative < opt.pohozaev_tol;
  c.energy_positive = rep.energy.total > 0.0;
  if (mp) {
    c.degenerate = rep.status == "degenerate";
    c.above_barrier = rep.energy.total >= th.f_at_xstar;
    c.above_min = local_min != nullptr && rep.energy.total > local_min->energy.total;
    c.saddle_signature = !c.degenerate && rep.path_curvature < 0.0 && rep.fiber_curvature < 0.0;
  }
}

// Local minimizer on Q = {mass = rho, |grad u| <= x*}: preconditioned projected gradient
// descent from psi_R with Barzilai-Borwein steps, Armijo backtracking and the ball enforced by
// backtracking only.
inline SolveReport solve_local_min(const GridPtr& grid, const Params& prm, const Thresholds& th,
                                   const SolverOptions& opt = {}) {
  detail::check_regime(prm, opt);
  const EnergyFunctional F(grid, prm);
  const Grid& g = *grid;
  const int m = g.size();
  const BoxPreconditioner box(grid);
  const auto apply_L = [&](const Vec& in, Vec& out) { g.apply_laplacian(in.data(), out.data()); };
  const auto apply_B = [&](const Vec& in, Vec& out) { box.apply(in, out); };
  const auto solve_L = [&](const Vec& b) {
    Vec x(m, 0.0);
    pcg(apply_L, apply_B, b, x, 1e-10, 4 * g.n() + 200);
    return x;
  };

  SolveReport rep;
  rep.mode = "min";
  rep.status = "iterating";
  Field u = principal_eigenpair(grid, prm.rho).psi;
  rep.reference_energy = F.energy(u);
  if (std::sqrt(dirichlet_energy(u)) >= th.x_star)
    fail(ErrorKind::parameter, "local min: the ball set Q is empty here (need R > R0)");

  double E = rep.reference_energy;
  Field u_prev;
  Vec r_prev;
  int ball_run = 0;
  double tau = 1.0;
  for (int it = 0;; ++it) {
    const detail::Residual res = detail::residual(F, u);
    rep.trace.push_back({it, E, res.relative, tau, std::sqrt(dirichlet_energy(u))});
    rep.iterations = it;
    if (res.relative < opt.tol) {
      rep.status = "converged";
      break;
    }
    if (it >= opt.max_iterations)
      fail(ErrorKind::convergence, "local min: iteration limit reached");
    const Vec z = solve_L(res.r), zu = solve_L(u.v);
    Vec d = zu;
    scale(dot(u.v, z) / dot(u.v, zu), d);
    axpy(-1.0, z, d);  // d = -(z - c zu), tangent to the sphere
    const double slope = dot(res.r, d);
    if (!u_prev.v.empty()) {
      Vec s = u.v, y = res.r, ls(m);
      axpy(-1.0, u_prev.v, s);
      axpy(-1.0, r_prev, y);
      apply_L(s, ls);
      const double sy = dot(s, y);
      tau = sy > 0.0 ? std::clamp(dot(s, ls) / sy, 1e-4, 1e4) : 1.0;
    } else {
      tau = 1.0;
    }
    const double noise = 1e-13 * (std::abs(E) + dirichlet_energy(u));
    bool ball_hit = false, accepted = false;
    Field trial(grid);
    double Et = E;
    for (int bt = 0; bt < 60; ++bt) {
      trial.v = u.v;
      axpy(tau, d, trial.v);
      normalize_mass(trial, prm.rho);
      if (std::sqrt(dirichlet_energy(trial)) > th.x_star) {
        ball_hit = true;
        tau *= 0.5;
        continue;
      }
      Et = F.energy(trial);
      if (Et <= E + 1e-4 * tau * slope + noise) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) fail(ErrorKind::convergence, "local min: line search failed");
    ball_run = ball_hit ? ball_run + 1 : 0;
    u_prev = u;
    r_prev = res.r;
    u = trial;
    E = Et;
    if (ball_run >= opt.trap_window) {
      rep.status = "boundary_trap";
      break;
    }
  }
  rep.solution = u;
  certify(rep, prm, th, opt);
  return rep;
}

namespace detail {

// Nodes redistributed to equal energy-weighted H1 arc length; endpoints stay fixed.
inline void reparametrize(std::vector<Field>& path, const std::vector<double>& energy,
                          double weight, double rho) {
  const int K = static_cast<int>(path.size());
  const auto [emin, emax] = std::minmax_element(energy.begin(), energy.end());
  const double span = std::max(*emax - *emin, 1e-300);
  std::vector<double> cum(K, 0.0);
  for (int k = 0; k + 1 < K; ++k) {
    const double mid = 0.5 * (energy[k] + energy[k + 1]);
    const double w = 1.0 + weight * (mid - *emin) / span;
    cum[k + 1] = cum[k] + w * h1_distance(path[k], path[k + 1]);
  }
  std::vector<Field> out(path);
  int seg = 0;
  for (int k = 1; k + 1 < K; ++k) {
    const double target = cum[K - 1] * k / (K - 1);
    while (seg + 2 < K && cum[seg + 1] < target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double a = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    out[k].v = path[seg].v;
    scale(1.0 - a, out[k].v);
    axpy(a, path[seg + 1].v, out[k].v);
    normalize_mass(out[k], rho);
  }
  path.swap(out);
}

// One preconditioned steepest-descent step of every interior node with Armijo backtracking;
// steps[k] adapts per node and never exceeds max_step.
inline void relax_path(const EnergyFunctional& F, const BoxPreconditioner& box,
                       std::vector<Field>& path, std::vector<double>& steps, double max_step,
                       double rho) {
  const int K = static_cast<int>(path.size());
  for (int k = 1; k + 1 < K; ++k) {
    const Residual res = residual(F, path[k]);
    Vec d;
    box.apply(res.r, d, std::abs(res.lambda));
    project_tangent(path[k].v, d);
    const double slope = dot(res.r, d) * path[k].grid->weight();
    const double E = F.energy(path[k]);
    for (int bt = 0; bt < 30; ++bt) {
      Field trial = path[k];
      axpy(-steps[k], d, trial.v);
      normalize_mass(trial, rho);
      if (F.energy(trial) <= E - 1e-4 * steps[k] * slope) {
        path[k] = std::move(trial);
        steps[k] = std::min(1.5 * steps[k], max_step);
        break;
      }
      steps[k] *= 0.5;
    }
  }
}

inline std::vector<double> path_energies(const EnergyFunctional& F, const std::vector<Field>& path) {
  std::vector<double> e(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) e[k] = F.energy(path[k]);
  return e;
}

// One climbing-image step: the residual component along the path tangent is reversed before
// preconditioning, so the node ascends along the path and descends across it. Fixed points are
// critical points.
inline Vec climb_direction(const BoxPreconditioner& box, const Field& prev, const Field& node,
                           const Field& next, const Residual& res) {
  Vec r = res.r, tau = next.v;
  axpy(-1.0, prev.v, tau);
  project_tangent(node.v, tau);
  const double tt = dot(tau, tau);
  if (tt > 0.0) axpy(-2.0 * dot(r, tau) / tt, tau, r);
  Vec d;
  box.apply(r, d, std::abs(res.lambda));
  project_tangent(node.v, d);
  return d;
}

// Constrained Newton step on the sphere: MINRES on the tangent space for
// P (H + lambda) P delta = -r with the projected box preconditioner.
inline Vec newton_direction(const EnergyFunctional& F, const BoxPreconditioner& box,
                            const Field& u, const Residual& res, double rtol, int max_it) {
  const Vec w = F.potential(u);
  const GridPtr& grid = u.grid;
  const double shift = std::max(res.lambda, 0.0);
  const auto A = [&](const Vec& in, Vec& out) {
    Field v(grid, in);
    project_tangent(u.v, v.v);
    Field hv = F.hessian_apply(u, w, v);
    axpy(res.lambda, v.v, hv.v);
    project_tangent(u.v, hv.v);
    out = std::move(hv.v);
  };
  const auto M = [&](const Vec& in, Vec& out) {
    Vec t = in;
    project_tangent(u.v, t);
    box.apply(t, out, shift);
    project_tangent(u.v, out);
  };
  Vec rhs = res.r;
  scale(-1.0, rhs);
  Vec delta(rhs.size(), 0.0);
  minres(A, M, rhs, delta, rtol, max_it);
  project_tangent(u.v, delta);
  return delta;
}

// Damped Newton on the sphere until the relative residual drops below saddle_tol; every
// accepted step strictly reduces the residual.
inline void newton_refine(const EnergyFunctional& F, const BoxPreconditioner& box, Field& u,
                          double rho, const SolverOptions& opt, std::vector<TraceRow>& trace,
                          int& iteration) {
  for (int it = 0;; ++it, ++iteration) {
    const Residual res = residual(F, u);
    trace.push_back({iteration, F.energy(u), res.relative, 1.0, std::sqrt(dirichlet_energy(u))});
    if (res.relative < opt.saddle_tol) return;
    if (it >= opt.newton_iterations)
      fail(ErrorKind::convergence, "saddle refinement did not converge");
    const double eta = std::clamp(res.relative, 1e-6, 1e-2);
    const Vec delta = newton_direction(F, box, u, res, eta, opt.krylov_iterations);
    bool accepted = false;
    for (double a = 1.0; a > 1e-4; a *= 0.5) {
      Field trial = u;
      axpy(a, delta, trial.v);
      normalize_mass(trial, rho);
      if (residual(F, trial).relative < (1.0 - 1e-4 * a) * res.relative) {
        u = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) fail(ErrorKind::convergence, "saddle refinement diverged");
  }
}

}  // namespace detail

// Mountain-pass solution: string method between the local minimizer and a dilated endpoint
// below zero energy outside the ball, then Newton refinement of the highest node.
inline SolveReport solve_mountain_pass(const GridPtr& grid, const Params& prm,
                                       const Thresholds& th, const SolveReport& local_min,
                                       const SolverOptions& opt = {}) {
  detail::check_regime(prm, opt);
  require(local_min.status == "converged" && local_min.cert.interior,
          "mountain pass: needs a converged interior local minimizer");
  require(opt.path_nodes >= 3, "mountain pass: need at least 3 path nodes");
  const Grid& g = *grid;
  EnergyFunctional F(grid, prm);
  const BoxPreconditioner box(grid);
  const Field& u0 = local_min.solution;
  const double rho = prm.rho;

  std::vector<double> schedule{1.0};
  if (opt.s_homotopy) schedule = opt.s_schedule;
  // The endpoint must be admissible for the smallest s used, which has the largest energy.
  F.set_s(*std::min_element(schedule.begin(), schedule.end()));
  double t_end = 1.0;
  Field end;
  for (;;) {
    t_end *= 1.25;
    if (g.R() / t_end < 2.0 * g.h())
      fail(ErrorKind::convergence, "mountain pass: no admissible endpoint above grid resolution");
    end = detail::renormalized(dilate_onto(u0, t_end, grid), rho);
    if (F.energy(end) < 0.0 && std::sqrt(dirichlet_energy(end)) > th.x_star) break;
  }

  const int K = opt.path_nodes;
  std::vector<Field> path(K);
  path.front() = u0;
  path.back() = end;
  for (int k = 1; k + 1 < K; ++k)
    path[k] = detail::renormalized(
        dilate_onto(u0, std::pow(t_end, static_cast<double>(k) / (K - 1)), grid), rho);

  SolveReport rep;
  rep.mode = "mp";
  rep.status = "iterating";
  rep.reference_energy = local_min.energy.total;
  int iteration = 0;
  std::vector<double> energy, steps(K, opt.path_step);
  for (double s : schedule) {
    F.set_s(s);
    double last_top = std::numeric_limits<double>::infinity();
    int quiet = 0;
    for (int it = 0; it < opt.path_iterations; ++it, ++iteration) {
      detail::relax_path(F, box, path, steps, opt.path_step, rho);
      energy = detail::path_energies(F, path);
      detail::reparametrize(path, energy, opt.path_energy_weight, rho);
      energy = detail::path_energies(F, path);
      const int top = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
      rep.trace.push_back({iteration, energy[top], 0.0, steps[top], 0.0});
      quiet = std::abs(energy[top] - last_top) < 1e-3 * std::abs(energy[top]) ? quiet + 1 : 0;
      last_top = energy[top];
      if (quiet >= 10) break;
    }
  }
  F.set_s(1.0);
  energy = detail::path_energies(F, path);
  const int top = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
  rep.path_energy = energy;
  rep.path_max = top;
  if (top == 0 || top == K - 1) {
    rep.status = "degenerate";
    rep.solution = path[top];
    rep.iterations = iteration;
    certify(rep, prm, th, opt, &local_min);
    return rep;
  }

  // Climbing image with residual backtracking.
  double step = opt.path_step;
  detail::Residual res = detail::residual(F, path[top]);
  for (int it = 0; it < opt.climb_iterations; ++it, ++iteration) {
    rep.trace.push_back({iteration, F.energy(path[top]), res.relative, step,
                         std::sqrt(dirichlet_energy(path[top]))});
    if (res.relative < opt.climb_tol) break;
    if (it >= 20 && res.relative > 0.99 * rep.trace[rep.trace.size() - 11].residual) break;
    const Vec d = detail::climb_direction(box, path[top - 1], path[top], path[top + 1], res);
    bool moved = false;
    for (int bt = 0; bt < 20 && !moved; ++bt) {
      Field trial = path[top];
      axpy(-step, d, trial.v);
      normalize_mass(trial, rho);
      detail::Residual tr = detail::residual(F, trial);
      if (tr.relative < res.relative) {
        path[top] = std::move(trial);
        res = std::move(tr);
        step = std::min(1.5 * step, opt.path_step);
        moved = true;
      } else {
        step *= 0.5;
      }
    }
    if (!moved) break;
  }

  Field u = path[top];
  detail::newton_refine(F, box, u, rho, opt, rep.trace, iteration);
  path[top] = u;
  const double e_top = F.energy(u);
  rep.path_energy[top] = e_top;
  rep.path_curvature = rep.path_energy[top - 1] - 2.0 * e_top + rep.path_energy[top + 1];
  rep.solution = u;
  rep.iterations = iteration;
  rep.status = "converged";
  certify(rep, prm, th, opt, &local_min);
  return rep;
}

// Critical point on the mass sphere nearest an initial guess, by constrained Newton. Used where
// the target is a saddle with no minimizing path, such as the zero-coupling limit problem.
inline SolveReport refine_critical_point(const Field& guess, const Params& prm,
                                         const SolverOptions& opt = {}) {
  detail::check_regime(prm, opt);
  const EnergyFunctional F(guess.grid, prm);
  const BoxPreconditioner box(guess.grid);
  SolveReport rep;
  rep.mode = "critical";
  rep.solution = detail::renormalized(guess, prm.rho);
  int iteration = 0;
  detail::newton_refine(F, box, rep.solution, prm.rho, opt, rep.trace, iteration);
  rep.status = "converged";
  rep.iterations = iteration;
  rep.energy = F.breakdown(rep.solution);
  rep.lagrange_lambda = rep.energy.lagrange_lambda;
  rep.residual = detail::residual(F, rep.solution).relative;
  rep.grad_norm = std::sqrt(2.0 * rep.energy.kinetic);
  rep.fiber_curvature = detail::fiber_curvature(rep.solution, prm);
  rep.cert.converged = true;
  return rep;
}

// Proxy for "the local minimizer is a ground state": it has the lowest energy among the found
// critical points and satisfies the bounded-domain Pohozaev identity.
inline bool ground_state_check(const SolveReport& local_min, const SolveReport& mountain_pass) {
  return local_min.cert.converged && local_min.cert.pohozaev_ok &&
         local_min.energy.total <= mountain_pass.energy.total;
}

}  // namespace lognls
