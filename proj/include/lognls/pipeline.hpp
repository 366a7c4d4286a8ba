#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "fibration.hpp"
#include "field_io.hpp"
#include "functional.hpp"
#include "grid.hpp"
#include "limit.hpp"
#include "sequences.hpp"
#include "solvers.hpp"

namespace lognls {

struct RunConfig {
  Params params;
  Shape shape = Shape::disk;
  double R = 16.0;
  int n = 97;
  std::string mode = "min";  // solve: min or mp (mp runs the local min first)
  SolverOptions solver;
  int reference_n = 129;     // grid for lambda1 and psi of the unscaled domain
  int hls_trials = 200;
  unsigned long seed = 7;
  // constants and asymptotics
  std::vector<double> R_list{4.0, 8.0, 16.0, 32.0};
  double alpha_cap = 0.5;      // alpha is capped at alpha_cap * alpha* in sweeps
  double sweep_h = 1.0 / 6.0;  // constant spacing for the asymptotics sweep
  // landscape
  std::vector<int> V_list{5, 10, 20, 40, 80};
  std::vector<int> W_list{2, 4, 8, 16};
  int profile_n = 49;
  // fibration
  double t_min = 1e-3, t_max = 1e3;
  int t_points = 10000;
  // limit
  std::vector<double> rho_list{0.5, 1.0, 2.0, 4.0};
  double limit_r_max = 4.0;
  int limit_samples = 401;
  std::string out_dir = "out";
};

inline nlohmann::json to_json_value(const RunConfig& c) {
  return {{"p", c.params.p},
          {"alpha", c.params.alpha},
          {"beta", c.params.beta},
          {"rho", c.params.rho},
          {"s", c.params.s},
          {"shape", to_string(c.shape)},
          {"R", c.R},
          {"n", c.n},
          {"mode", c.mode},
          {"tol", c.solver.tol},
          {"max_iterations", c.solver.max_iterations},
          {"saddle_tol", c.solver.saddle_tol},
          {"path_nodes", c.solver.path_nodes},
          {"path_iterations", c.solver.path_iterations},
          {"path_step", c.solver.path_step},
          {"s_homotopy", c.solver.s_homotopy},
          {"s_schedule", c.solver.s_schedule},
          {"reference_n", c.reference_n},
          {"hls_trials", c.hls_trials},
          {"seed", c.seed},
          {"R_list", c.R_list},
          {"alpha_cap", c.alpha_cap},
          {"sweep_h", c.sweep_h},
          {"V_list", c.V_list},
          {"W_list", c.W_list},
          {"profile_n", c.profile_n},
          {"t_min", c.t_min},
          {"t_max", c.t_max},
          {"t_points", c.t_points},
          {"rho_list", c.rho_list},
          {"limit_r_max", c.limit_r_max},
          {"limit_samples", c.limit_samples},
          {"out_dir", c.out_dir}};
}

// Overrides the keys present in j; unknown keys are rejected.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::io, "config: top level must be a JSON object");
  const nlohmann::json known = to_json_value(c);
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) fail(ErrorKind::parameter, "config: unknown key '" + k + "'");
  try {
    const auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) j.at(key).get_to(dst);
    };
    get("p", c.params.p);
    get("alpha", c.params.alpha);
    get("beta", c.params.beta);
    get("rho", c.params.rho);
    get("s", c.params.s);
    if (j.contains("shape")) c.shape = parse_shape(j.at("shape").get<std::string>());
    get("R", c.R);
    get("n", c.n);
    get("mode", c.mode);
    get("tol", c.solver.tol);
    get("max_iterations", c.solver.max_iterations);
    get("saddle_tol", c.solver.saddle_tol);
    get("path_nodes", c.solver.path_nodes);
    get("path_iterations", c.solver.path_iterations);
    get("path_step", c.solver.path_step);
    get("s_homotopy", c.solver.s_homotopy);
    get("s_schedule", c.solver.s_schedule);
    get("reference_n", c.reference_n);
    get("hls_trials", c.hls_trials);
    get("seed", c.seed);
    get("R_list", c.R_list);
    get("alpha_cap", c.alpha_cap);
    get("sweep_h", c.sweep_h);
    get("V_list", c.V_list);
    get("W_list", c.W_list);
    get("profile_n", c.profile_n);
    get("t_min", c.t_min);
    get("t_max", c.t_max);
    get("t_points", c.t_points);
    get("rho_list", c.rho_list);
    get("limit_r_max", c.limit_r_max);
    get("limit_samples", c.limit_samples);
    get("out_dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("config: mistyped value: ") + e.what());
  }
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "config: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("config: malformed JSON: ") + e.what());
  }
  RunConfig c;
  apply_json(c, j);
  return c;
}

// FNV-1a 64 of the canonical (sorted-key) JSON form, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  const std::string text = to_json_value(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline bool artifact_matches(const nlohmann::json& artifact, const RunConfig& c) {
  return artifact.contains("config_hash") && artifact.at("config_hash") == config_hash(c);
}

// ---------------------------------------------------------------------------------------------
// Output helpers. Writes are serialized per output directory by the single-threaded driver.

class Artifacts {
 public:
  explicit Artifacts(const RunConfig& c) : dir_(c.out_dir), hash_(config_hash(c)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::io, "output: cannot create directory " + dir_.string());
  }

  const std::string& hash() const { return hash_; }
  const std::filesystem::path& dir() const { return dir_; }

  void json(const std::string& name, nlohmann::json j) const {
    j["config_hash"] = hash_;
    std::ofstream out(dir_ / name);
    if (!out) fail(ErrorKind::io, "output: cannot write " + (dir_ / name).string());
    out << j.dump(2) << '\n';
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) const {
    std::ofstream out(dir_ / name);
    if (!out) fail(ErrorKind::io, "output: cannot write " + (dir_ / name).string());
    out << "# config_hash " << hash_ << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    char buf[32];
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        out << (i ? "," : "") << buf;
      }
      out << '\n';
    }
  }

  void field(const std::string& name, const Field& u) const {
    write_field(dir_ / name, u, {{"config_hash", hash_}});
  }

 private:
  std::filesystem::path dir_;
  std::string hash_;
};

// ---------------------------------------------------------------------------------------------
// Shared context: constants that do not depend on R.

struct Context {
  BaseConstants base;
  double lambda1 = 0.0;  // principal eigenvalue of the unscaled domain
  double area = 0.0;
};

// The HLS estimate uses wide random bumps on a large disk, where the quotient approaches its
// supremum from below.
inline Context make_context(const RunConfig& c) {
  c.params.validate();
  Context ctx;
  ctx.base.C_p = gn_constant(c.params.p);
  ctx.base.C_83 = gn_constant(8.0 / 3.0);
  const HLSEstimate e = hls_constant_estimate(build_grid(Shape::disk, 64.0, 65), c.hls_trials, c.seed);
  ctx.base.C_hls_raw = e.raw;
  ctx.base.C_hls = e.inflated;
  ctx.lambda1 = principal_eigenpair(build_grid(c.shape, 1.0, c.reference_n), c.params.rho).lambda;
  ctx.area = reference_area(c.shape);
  return ctx;
}

inline Thresholds thresholds_at(const Context& ctx, double R, const Params& prm) {
  return thresholds(prm, R, ctx.lambda1, ctx.area, ctx.base);
}

// ---------------------------------------------------------------------------------------------
// constants

inline nlohmann::json run_constants(const RunConfig& c, const Context& ctx, const Artifacts* out) {
  std::vector<std::vector<double>> rows;
  nlohmann::json list = nlohmann::json::array();
  std::vector<double> radii = c.R_list;
  if (radii.empty()) radii.push_back(c.R);
  for (double R : radii) {
    const Thresholds t = thresholds_at(ctx, R, c.params);
    list.push_back(t);
    rows.push_back({t.p, t.rho, t.R, t.alpha, t.C_p, t.C_hls, t.x_star, t.f_at_xstar, t.R0,
                    t.alpha0, t.alpha1, t.alpha_star, t.rho_star, t.defined ? 1.0 : 0.0});
  }
  nlohmann::json j = {{"config", to_json_value(c)},
                      {"lambda1", ctx.lambda1},
                      {"C_hls_raw", ctx.base.C_hls_raw},
                      {"thresholds", list}};
  if (out) {
    out->json("constants.json", j);
    out->csv("constants.csv",
             {"p", "rho", "R", "alpha", "C_p", "C_hls", "x_star", "f_at_xstar", "R0", "alpha0",
              "alpha1", "alpha_star", "rho_star", "defined"},
             rows);
  }
  return j;
}

// ---------------------------------------------------------------------------------------------
// fibration

inline nlohmann::json run_fibration(const RunConfig& c, const Artifacts* out) {
  c.params.validate();
  const GridPtr grid = build_grid(c.shape, c.R, c.n);
  std::mt19937_64 rng(c.seed);
  Field u = random_bump_field(grid, rng, 2.0 * grid->h(), 0.2 * c.R);
  normalize_mass(u, c.params.rho);
  const FiberInvariants inv = fiber_invariants(u, c.params);
  const FiberScan s = fiber_scan(inv, c.params, c.t_min, c.t_max, c.t_points);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.t.size(); ++i) rows.push_back({s.t[i], s.h[i], s.dh[i]});
  nlohmann::json j = {{"config", to_json_value(c)},
                      {"mass", inv.mass},
                      {"grad2", inv.grad2},
                      {"lp", inv.lp},
                      {"chi0", inv.chi0},
                      {"t_u", s.t_u},
                      {"h_max", s.h_max},
                      {"sign_changes", s.sign_changes},
                      {"unique_maximum", s.plus_to_minus},
                      {"pohozaev_at_t_u", fiber_pohozaev(inv, c.params, s.t_u)}};
  if (out) {
    out->json("fibration.json", j);
    out->csv("fibration.csv", {"t", "h", "dh"}, rows);
  }
  return j;
}

// ---------------------------------------------------------------------------------------------
// landscape

struct LandscapeRow {
  int n = 0;
  double t = 0.0, energy = 0.0, pohozaev = 0.0, grad2 = 0.0, chi0 = 0.0, lower_bound = 0.0;
};

struct LandscapeResult {
  std::vector<LandscapeRow> V, W;
  double lambda1 = 0.0;
  double V_slope = 0.0;      // least-squares slope of J(V_n) against log(n^2 - 1)
  double W_slope = 0.0;      // least-squares slope of J(W_n) against n
  double W_exponent = 0.0;   // least-squares slope of log J(W_n) against log n
};

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline LandscapeResult run_landscape(const RunConfig& c, const Artifacts* out) {
  c.params.validate();
  LandscapeResult res;
  if (!c.V_list.empty() || !c.W_list.empty()) {
    const BumpProfile prof = bump_profile(build_grid(c.shape, 1.0, c.profile_n), c.params);
    res.lambda1 = prof.eig.lambda;
    const auto fill = [&](BumpKind kind, int n) {
      const BumpFamily fam = build_bumps(prof, kind, n);
      const OnManifold m = project_to_manifold(fam, c.params);
      LandscapeRow r{n, m.t, m.energy, m.pohozaev, m.grad2, fam.inv.chi0, 0.0};
      if (kind == BumpKind::W) r.lower_bound = wn_lower_bound(prof.eig.lambda, n, c.params);
      return r;
    };
    for (int n : c.V_list) res.V.push_back(fill(BumpKind::V, n));
    for (int n : c.W_list) res.W.push_back(fill(BumpKind::W, n));
  }
  std::vector<double> x, y, xn, yn, lx, ly;
  for (const auto& r : res.V) {
    x.push_back(std::log(static_cast<double>(r.n) * r.n - 1.0));
    y.push_back(r.energy);
  }
  for (const auto& r : res.W) {
    xn.push_back(r.n);
    yn.push_back(r.energy);
    lx.push_back(std::log(static_cast<double>(r.n)));
    ly.push_back(std::log(std::abs(r.energy)));
  }
  res.V_slope = ls_slope(x, y);
  res.W_slope = ls_slope(xn, yn);
  res.W_exponent = ls_slope(lx, ly);
  if (out) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : res.V) rows.push_back({double(r.n), r.t, r.energy, r.pohozaev, r.grad2, r.chi0});
    out->csv("landscape_V.csv", {"n", "t0", "J_on_P", "pohozaev", "grad2", "chi0"}, rows);
    rows.clear();
    for (const auto& r : res.W)
      rows.push_back({double(r.n), r.t, r.energy, r.pohozaev, r.grad2, r.chi0, r.lower_bound});
    out->csv("landscape_W.csv", {"n", "t1", "J_on_P", "pohozaev", "grad2", "chi0", "lower_bound"}, rows);
    out->json("landscape.json", {{"config", to_json_value(c)},
                                 {"lambda1", res.lambda1},
                                 {"V_slope_vs_log_n2m1", res.V_slope},
                                 {"V_slope_target", c.params.alpha * c.params.rho * c.params.rho / 8.0},
                                 {"W_slope_vs_n", res.W_slope},
                                 {"W_growth_exponent", res.W_exponent},
                                 {"V_count", res.V.size()},
                                 {"W_count", res.W.size()}});
  }
  return res;
}

// ---------------------------------------------------------------------------------------------
// solve

struct SolveOutcome {
  Thresholds th;
  SolveReport local_min;
  std::unique_ptr<SolveReport> mountain_pass;
  bool ground_state = false;
};

inline SolveOutcome run_solve(const RunConfig& c, const Context& ctx, const Artifacts* out) {
  c.params.validate_for_solve();
  if (c.mode != "min" && c.mode != "mp") fail(ErrorKind::parameter, "solve: mode must be min or mp");
  SolveOutcome o;
  o.th = thresholds_at(ctx, c.R, c.params);
  if (!o.th.defined) fail(ErrorKind::parameter, "solve: R <= R0, the set Q is empty");
  const GridPtr grid = build_grid(c.shape, c.R, c.n);
  o.local_min = solve_local_min(grid, c.params, o.th, c.solver);
  if (c.mode == "mp") {
    o.mountain_pass = std::make_unique<SolveReport>(
        solve_mountain_pass(grid, c.params, o.th, o.local_min, c.solver));
    o.ground_state = ground_state_check(o.local_min, *o.mountain_pass);
  }
  if (out) {
    const auto trace_rows = [](const SolveReport& r) {
      std::vector<std::vector<double>> rows;
      for (const auto& t : r.trace)
        rows.push_back({double(t.iteration), t.energy, t.residual, t.step, t.grad_norm});
      return rows;
    };
    nlohmann::json j = {{"config", to_json_value(c)},
                        {"thresholds", o.th},
                        {"alpha_within_alpha_star", std::abs(c.params.alpha) < o.th.alpha_star},
                        {"local_min", o.local_min}};
    out->field("local_min", o.local_min.solution);
    out->csv("local_min_trace.csv", {"iteration", "energy", "residual", "step", "grad_norm"},
             trace_rows(o.local_min));
    if (o.mountain_pass) {
      j["mountain_pass"] = *o.mountain_pass;
      j["ground_state_check"] = o.ground_state;
      out->field("mountain_pass", o.mountain_pass->solution);
      out->csv("mountain_pass_trace.csv", {"iteration", "energy", "residual", "step", "grad_norm"},
               trace_rows(*o.mountain_pass));
    }
    out->json("solve.json", j);
  }
  return o;
}

// ---------------------------------------------------------------------------------------------
// limit

struct LimitOutcome {
  std::shared_ptr<const GroundState> ground;
  LimitSolution solution;
  DecayCertificate decay;
  std::vector<LimitSolution> sweep;  // one per rho in rho_list
};

inline LimitOutcome run_limit(const RunConfig& c, const Artifacts* out) {
  require(c.params.p > 4.0, "limit: need p > 4");
  LimitOutcome o;
  o.ground = std::make_shared<const GroundState>(shoot_ground_state(c.params.p));
  o.solution = limit_solution(o.ground, c.params.rho);
  o.decay = decay_certificate(o.solution);
  for (double rho : c.rho_list) o.sweep.push_back(limit_solution(o.ground, rho));
  if (out) {
    std::vector<std::vector<double>> rows;
    const GroundState& W = *o.ground;
    for (int k = 0; k < W.size(); k += std::max(1, W.size() / 2000)) rows.push_back({W.radius(k), W.W[k]});
    out->csv("ground_state.csv", {"r", "W"}, rows);
    rows.clear();
    const int m = std::max(2, c.limit_samples);
    for (int k = 0; k < m; ++k) {
      const double r = c.limit_r_max * k / (m - 1);
      rows.push_back({r, o.solution.value(r)});
    }
    out->csv("limit_profile.csv", {"r", "u_bar"}, rows);
    nlohmann::json sweep = nlohmann::json::array();
    const double p = c.params.p;
    for (const auto& s : o.sweep)
      sweep.push_back({{"rho", s.rho}, {"lambda_bar", s.lambda_bar}, {"m_rho", s.m_rho},
                       {"m_rho_scaled", s.m_rho * std::pow(s.rho, 2.0 / (p - 4.0))}});
    out->json("limit.json", {{"config", to_json_value(c)},
                             {"W0", W.W0},
                             {"W_mass", W.mass},
                             {"W_lp", W.lp},
                             {"W_grad2", W.grad2},
                             {"lambda_bar", o.solution.lambda_bar},
                             {"mass", o.solution.mass},
                             {"grad2", o.solution.grad2},
                             {"m_rho", o.solution.m_rho},
                             {"pohozaev_defect", o.solution.pohozaev_defect()},
                             {"decay", {{"R0", o.decay.R0}, {"C1", o.decay.C1}, {"C2", o.decay.C2},
                                        {"holds", o.decay.holds}}},
                             {"rho_sweep", sweep}});
  }
  return o;
}

// ---------------------------------------------------------------------------------------------
// asymptotics

struct AsymptoticsRow {
  double R = 0.0;
  int n = 0;
  double alpha = 0.0;
  double C = 0.0;             // local-min energy
  double grad_u0 = 0.0;       // |grad u0|_2
  double lambda1 = 0.0;       // multiplier of the mountain-pass solution
  double lambda_gap = 0.0;    // |lambda1 - lambda_bar|
  double h1_distance = 0.0;   // |u1 - u_bar|_{H1}, u_bar centred at the centre of mass of u1
  double mp_energy = 0.0;
  bool ok = false;
  std::string message;
};

struct AsymptoticsResult {
  std::vector<AsymptoticsRow> rows;
  double lambda_bar = 0.0;
  bool C_decreasing = false, grad_decreasing = false, lambda_gap_decreasing = false,
       h1_decreasing = false;
};

// Odd node count so the origin is a node, spacing at most h.
inline int nodes_for_spacing(Shape shape, double R, double h) {
  int n = static_cast<int>(std::ceil(box_side(shape) * R / h)) + 1;
  if (n % 2 == 0) ++n;
  return std::max(n, 9);
}

inline bool strictly_decreasing(const std::vector<AsymptoticsRow>& rows,
                                double AsymptoticsRow::*col) {
  if (rows.size() < 2) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].ok) return false;
    if (i > 0 && !(rows[i].*col < rows[i - 1].*col)) return false;
  }
  return true;
}

inline AsymptoticsResult run_asymptotics(const RunConfig& c, const Context& ctx,
                                         const Artifacts* out) {
  c.params.validate_for_solve();
  for (std::size_t i = 1; i < c.R_list.size(); ++i)
    require(c.R_list[i] > c.R_list[i - 1], "asymptotics: R list must increase");
  AsymptoticsResult res;
  const auto ground = std::make_shared<const GroundState>(shoot_ground_state(c.params.p));
  const LimitSolution bar = limit_solution(ground, c.params.rho);
  res.lambda_bar = bar.lambda_bar;
  for (double R : c.R_list) {
    AsymptoticsRow row;
    row.R = R;
    row.n = nodes_for_spacing(c.shape, R, c.sweep_h);
    try {
      Params prm = c.params;
      const Thresholds t0 = thresholds_at(ctx, R, prm);
      if (!t0.defined) fail(ErrorKind::parameter, "R <= R0");
      prm.alpha = -std::min(std::abs(c.params.alpha), c.alpha_cap * t0.alpha_star);
      row.alpha = prm.alpha;
      const Thresholds th = thresholds_at(ctx, R, prm);
      const GridPtr grid = build_grid(c.shape, R, row.n);
      const SolveReport r0 = solve_local_min(grid, prm, th, c.solver);
      const SolveReport r1 = solve_mountain_pass(grid, prm, th, r0, c.solver);
      row.C = r0.energy.total;
      row.grad_u0 = r0.grad_norm;
      row.lambda1 = r1.lagrange_lambda;
      row.lambda_gap = std::abs(r1.lagrange_lambda - bar.lambda_bar);
      row.mp_energy = r1.energy.total;
      const Field& u1 = r1.solution;
      const Grid& g = *grid;
      double cx = 0.0, cy = 0.0, m = 0.0;
      for (int k = 0; k < g.size(); ++k) {
        const double q = u1.v[k] * u1.v[k];
        cx += g.x(k) * q;
        cy += g.y(k) * q;
        m += q;
      }
      row.h1_distance = detail::h1_distance(u1, sample_on_grid(bar, grid, cx / m, cy / m));
      row.ok = r0.cert.converged && r1.cert.converged;
      row.message = r1.status;
    } catch (const Error& e) {
      row.ok = false;
      row.message = e.what();
    }
    res.rows.push_back(row);
  }
  res.C_decreasing = strictly_decreasing(res.rows, &AsymptoticsRow::C);
  res.grad_decreasing = strictly_decreasing(res.rows, &AsymptoticsRow::grad_u0);
  res.lambda_gap_decreasing = strictly_decreasing(res.rows, &AsymptoticsRow::lambda_gap);
  res.h1_decreasing = strictly_decreasing(res.rows, &AsymptoticsRow::h1_distance);
  if (out) {
    std::vector<std::vector<double>> rows;
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& r : res.rows) {
      rows.push_back({r.R, double(r.n), r.alpha, r.C, r.grad_u0, r.lambda1, r.lambda_gap,
                      r.h1_distance, r.mp_energy, r.ok ? 1.0 : 0.0});
      flags.push_back({{"R", r.R}, {"ok", r.ok}, {"message", r.message}});
    }
    out->csv("asymptotics.csv",
             {"R", "n", "alpha", "C_R", "grad_u0", "lambda1", "lambda_gap", "h1_distance",
              "mp_energy", "ok"},
             rows);
    out->json("asymptotics.json", {{"config", to_json_value(c)},
                                   {"lambda_bar", res.lambda_bar},
                                   {"rows", flags},
                                   {"C_decreasing", res.C_decreasing},
                                   {"grad_decreasing", res.grad_decreasing},
                                   {"lambda_gap_decreasing", res.lambda_gap_decreasing},
                                   {"h1_decreasing", res.h1_decreasing}});
  }
  return res;
}

}  // namespace lognls
