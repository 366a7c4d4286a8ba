// Acceptance run: one line per criterion with its measured quantities and wall time.
// Exit status is 0 when every criterion ran to completion; pass --strict to also require
// that every criterion passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "lognls/pipeline.hpp"

using namespace lognls;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Params p6(double alpha, double rho = 1.0) { return Params{6.0, alpha, 1.0, rho, 1.0}; }

Field random_field(const GridPtr& g, std::mt19937_64& rng) {
  Field u = random_bump_field(g, rng, 2.0 * g->h(), 0.25 * g->R());
  normalize_mass(u, 1.0);
  return u;
}

// Shared between criteria; each is built by the first criterion that needs it.
struct Shared {
  std::optional<Context> ctx;
  RunConfig cfg;
  GridPtr grid;
  Params prm;
  Thresholds th;
  std::optional<SolveReport> local_min;
};

Shared& shared() {
  static Shared s;
  return s;
}

const Context& context() {
  Shared& s = shared();
  if (!s.ctx) s.ctx = make_context(s.cfg);
  return *s.ctx;
}

// Disk, p = 6, rho = 1, R = 16, n = 97, alpha = -alpha* / 2.
void prepare_solve_setting() {
  Shared& s = shared();
  if (s.grid) return;
  const Context& ctx = context();
  s.prm = p6(-1.0);
  s.prm.alpha = -0.5 * thresholds_at(ctx, 16.0, s.prm).alpha_star;
  s.th = thresholds_at(ctx, 16.0, s.prm);
  s.grid = build_grid(Shape::disk, 16.0, 97);
}

double directional_fd(const EnergyFunctional& F, const Field& u, const Field& v, double eps) {
  Field a = u, b = u;
  axpy(eps, v.v, a.v);
  axpy(-eps, v.v, b.v);
  return (F.energy(a) - F.energy(b)) / (2.0 * eps);
}

Verdict gradient_consistency() {
  std::mt19937_64 rng(101);
  const GridPtr g = build_grid(Shape::disk, 4.0, 17);
  const EnergyFunctional F(g, p6(-0.01));
  double worst = 0.0, sum[3] = {0.0, 0.0, 0.0};
  const double eps[3] = {1e-3, 1e-4, 1e-5};
  for (int t = 0; t < 20; ++t) {
    const Field u = random_field(g, rng), v = random_field(g, rng);
    const double exact = inner(F.gradient(u), v);
    for (int i = 0; i < 3; ++i) {
      const double err = std::abs(directional_fd(F, u, v, eps[i]) - exact) / std::abs(exact);
      sum[i] += err;
      if (i == 2) worst = std::max(worst, err);
    }
  }
  // Observed order of the pooled error per decade of step.
  const double order34 = std::log10(sum[0] / sum[1]), order45 = std::log10(sum[1] / sum[2]);
  return {worst < 1e-6 && order34 > 1.9 && order34 < 2.1,
          fmt("max rel err at 1e-5 = %.2e; pooled rel err %.2e, %.2e, %.2e; observed order "
              "%.3f (1e-3 to 1e-4), %.3f (1e-4 to 1e-5)",
              worst, sum[0] / 20, sum[1] / 20, sum[2] / 20, order34, order45)};
}

Verdict convolution_oracle() {
  std::mt19937_64 rng(102);
  const GridPtr g = build_grid(Shape::disk, 4.0, 33);
  const LogConvolver conv(g);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Field u = random_field(g, rng);
    const Vec q = squares(u);
    const Vec fast = conv.apply(q), dense = convolve_dense(*g, Kernel::full, q);
    double wmax = 0.0, dmax = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      wmax = std::max(wmax, std::abs(dense[k]));
      dmax = std::max(dmax, std::abs(fast[k] - dense[k]));
    }
    worst = std::max(worst, dmax / wmax);
  }
  return {worst < 1e-10, fmt("max rel difference = %.2e", worst)};
}

Verdict fibration_structure() {
  std::mt19937_64 rng(103);
  const GridPtr g = build_grid(Shape::disk, 8.0, 33);
  const Params prm = p6(-0.01);
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Field u = random_field(g, rng);
    const FiberScan s = fiber_scan(fiber_invariants(u, prm), prm, 1e-3, 1e3, 10000);
    if (s.sign_changes != 1 || !s.plus_to_minus) {
      ++bad;
      continue;
    }
    const Field ut = dilate(u, s.t_u);
    const EnergyFunctional F(ut.grid, prm);
    worst = std::max(worst, std::abs(F.pohozaev_interior(ut)) / dirichlet_energy(ut));
  }
  return {bad == 0 && worst < 1e-8,
          fmt("fields without a single sign change = %d, max |P|/|grad|^2 = %.2e", bad, worst)};
}

bool strictly_monotone(const std::vector<LandscapeRow>& rows, bool increasing) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (increasing ? !(rows[i].energy > rows[i - 1].energy) : !(rows[i].energy < rows[i - 1].energy))
      return false;
  return true;
}

Verdict landscape_witnesses() {
  RunConfig c;
  c.params = p6(-0.1);
  const LandscapeResult r = run_landscape(c, nullptr);
  const double v_target = c.params.alpha / 8.0;
  const double w_target = (6.0 - 4.0) / (2.0 * (6.0 - 2.0)) * r.lambda1;
  const bool v_ok = strictly_monotone(r.V, false) && rel(r.V_slope, v_target) < 0.05;
  const bool w_ok = strictly_monotone(r.W, true) && rel(r.W_slope, w_target) < 0.10;
  return {v_ok && w_ok,
          fmt("V decreasing %d, slope %.6f vs %.6f (rel %.2e); W increasing %d, linear "
              "coefficient %.4f vs %.4f (rel %.2e), growth exponent %.3f",
              strictly_monotone(r.V, false), r.V_slope, v_target, rel(r.V_slope, v_target),
              strictly_monotone(r.W, true), r.W_slope, w_target, rel(r.W_slope, w_target),
              r.W_exponent)};
}

Verdict threshold_algebra() {
  const Context& ctx = context();
  const double Cp = ctx.base.C_p;
  const Params prm = p6(-0.01);
  const double xs = x_star(6.0, 1.0, Cp);
  const double slope = std::abs(barrier_slope(xs, prm, Cp));
  const double rs = thresholds(prm, 16.0, ctx.lambda1, ctx.area, ctx.base).rho_star;
  const double R0 = thresholds(p6(-0.01, rs), 16.0, ctx.lambda1, ctx.area, ctx.base).R0;
  bool mono = true;
  double prev = std::numeric_limits<double>::infinity(), first = 0.0;
  std::string seq;
  for (double R : {10.0, 1e2, 1e3, 1e4}) {
    const double v = thresholds(prm, R, ctx.lambda1, ctx.area, ctx.base).alpha0 * std::log1p(R);
    if (first == 0.0) first = v;
    mono = mono && v > 0.0 && v < prev;
    prev = v;
    seq += fmt(" %.3e", v);
  }
  return {slope < 1e-10 && std::abs(R0 - 1.0) < 1e-10 && mono && prev < 1e-3 * first,
          fmt("|f'(x*)| = %.1e, |R0(rho*) - 1| = %.1e, alpha0 log(1+R):%s", slope,
              std::abs(R0 - 1.0), seq.c_str())};
}

Verdict local_minimizer() {
  prepare_solve_setting();
  Shared& s = shared();
  s.local_min = solve_local_min(s.grid, s.prm, s.th);
  const SolveReport& r = *s.local_min;
  // Independent recomputation of the reference energy.
  const EnergyFunctional F(s.grid, s.prm);
  const double ref = F.energy(principal_eigenpair(s.grid, s.prm.rho).psi);
  const SolveReport fine =
      solve_local_min(build_grid(Shape::disk, 16.0, 193), s.prm, s.th);
  const double ratio = r.pohozaev_relative / fine.pohozaev_relative;
  const bool ok = r.status == "converged" && r.cert.converged && r.cert.interior &&
                  r.energy.total > 0.0 && r.energy.total <= ref && r.pohozaev_relative < 1e-2 &&
                  ratio > 3.0 && ratio < 5.5;
  return {ok, fmt("alpha = %.5f, energy %.8f <= J(psi_R) %.8f, |grad u| %.4f < x* %.4f, "
                  "Pohozaev rel %.2e (n=97) / %.2e (n=193) = %.2f",
                  s.prm.alpha, r.energy.total, ref, r.grad_norm, s.th.x_star,
                  r.pohozaev_relative, fine.pohozaev_relative, ratio)};
}

Verdict mountain_pass() {
  prepare_solve_setting();
  Shared& s = shared();
  if (!s.local_min) s.local_min = solve_local_min(s.grid, s.prm, s.th);
  const SolveReport r = solve_mountain_pass(s.grid, s.prm, s.th, *s.local_min);
  const bool ok = r.status == "converged" && r.residual < 1e-6 && r.cert.above_min &&
                  r.cert.above_barrier;
  return {ok, fmt("saddle energy %.6f vs f(x*) %.6f (>= %d) and local min %.6f (> %d), "
                  "residual %.2e, multiplier %.4f",
                  r.energy.total, s.th.f_at_xstar, int(r.cert.above_barrier),
                  s.local_min->energy.total, int(r.cert.above_min), r.residual,
                  r.lagrange_lambda)};
}

Verdict limit_closed_forms() {
  const auto ground = std::make_shared<const GroundState>(shoot_ground_state(6.0));
  const LimitSolution bar = limit_solution(ground, 1.0);
  // Zero-coupling solve on two grids of halving spacing, extrapolated in h^2.
  Params prm = p6(0.0);
  SolverOptions opt;
  opt.allow_zero_alpha = true;
  opt.saddle_tol = 1e-9;
  double lam[2];
  const int ns[2] = {129, 257};
  for (int i = 0; i < 2; ++i) {
    const GridPtr g = build_grid(Shape::disk, 4.0, ns[i]);
    lam[i] = refine_critical_point(sample_on_grid(bar, g), prm, opt).lagrange_lambda;
  }
  const double extrapolated = (4.0 * lam[1] - lam[0]) / 3.0;
  const double lam_err = rel(extrapolated, bar.lambda_bar);
  double lo = 1e300, hi = -1e300;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    const double v = limit_solution(ground, s).m_rho * std::pow(s, 2.0 / (6.0 - 4.0));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double spread = (hi - lo) / lo;
  const DecayCertificate dc = decay_certificate(bar);
  const bool decay_ok = dc.holds && dc.C2 == std::sqrt(0.5 * bar.lambda_bar);
  return {lam_err < 1e-3 && spread < 1e-3 && decay_ok,
          fmt("lambda_bar %.8f, solve %.6f (n=129) %.6f (n=257) extrapolated %.6f (rel %.2e); "
              "scaled m spread %.2e; decay holds %d with C2 = %.6f",
              bar.lambda_bar, lam[0], lam[1], extrapolated, lam_err, spread, int(decay_ok), dc.C2)};
}

Verdict asymptotics() {
  RunConfig c = shared().cfg;
  c.params = p6(-1.0);
  const AsymptoticsResult r = run_asymptotics(c, context(), nullptr);
  std::string rows;
  for (const auto& row : r.rows)
    rows += fmt(" [R=%g n=%d alpha=%.4f C=%.5f grad=%.4f lam=%.4f gap=%.4f H1=%.4f%s]", row.R,
                row.n, row.alpha, row.C, row.grad_u0, row.lambda1, row.lambda_gap,
                row.h1_distance, row.ok ? "" : (" " + row.message).c_str());
  const bool ok = r.C_decreasing && r.grad_decreasing && r.lambda_gap_decreasing && r.h1_decreasing;
  return {ok, fmt("decreasing: C %d, grad %d, gap %d, H1 %d;", int(r.C_decreasing),
                  int(r.grad_decreasing), int(r.lambda_gap_decreasing), int(r.h1_decreasing)) +
                  rows};
}

Verdict gn_cross_validation() {
  std::string detail;
  bool ok = true;
  for (double p : {4.0, 6.0}) {
    const double ascent = gn_constant(p);
    const double shooting = shoot_ground_state(p).weinstein_quotient();
    ok = ok && rel(ascent, shooting) < 1e-2;
    detail += fmt("p=%g ascent %.8f shooting %.8f (rel %.1e); ", p, ascent, shooting,
                  rel(ascent, shooting));
  }
  std::mt19937_64 rng(110);
  const GridPtr g = build_grid(Shape::disk, 8.0, 33);
  const double C6 = gn_constant(6.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t)
    worst = std::max(worst, weinstein_quotient(random_field(g, rng), 6.0) / C6);
  ok = ok && worst <= 1.0;
  return {ok, detail + fmt("max quotient / C6 over 200 fields = %.4f", worst)};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const Criterion criteria[] = {
      {"gradient consistency", 10.0, gradient_consistency},
      {"convolution oracle equivalence", 30.0, convolution_oracle},
      {"fibration structure", 60.0, fibration_structure},
      {"descending and ascending bump families", 120.0, landscape_witnesses},
      {"threshold algebra", 5.0, threshold_algebra},
      {"local minimizer", 300.0, local_minimizer},
      {"mountain pass", 600.0, mountain_pass},
      {"limit problem closed forms", 60.0, limit_closed_forms},
      {"large-domain asymptotics", 1800.0, asymptotics},
      {"Gagliardo-Nirenberg constant", 60.0, gn_cross_validation},
  };
  const auto s0 = std::chrono::steady_clock::now();
  context();
  std::printf("setup: constants and reference eigenpair [%.1f s]\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count());
  int failed = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const Error& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < c.budget_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("C%-2d %-4s %s: %s [%.1f s, budget %.0f s%s]\n", index, pass ? "PASS" : "FAIL",
                c.name, v.detail.c_str(), dt, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return strict && failed > 0 ? 1 : 0;
}
