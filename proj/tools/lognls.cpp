// Command-line driver: one subcommand per experiment, artifacts written under --out.

#include <CLI11.hpp>
#include <cstdio>
#include <optional>

#include "lognls/pipeline.hpp"

namespace {

using namespace lognls;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parameter: return 2;
    case ErrorKind::convergence: return 3;
    case ErrorKind::io: return 4;
  }
  return 1;
}

struct Overrides {
  std::string config;
  std::optional<std::string> shape, mode, out;
  std::optional<double> R, p, alpha, beta, rho, s;
  std::optional<int> n;
  std::optional<unsigned long> seed;
  bool s_homotopy = false;
  std::vector<double> R_list, rho_list;
  std::vector<int> V_list, W_list;
  bool empty_V = false, empty_W = false;

  RunConfig apply() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    if (shape) c.shape = parse_shape(*shape);
    if (mode) c.mode = *mode;
    if (out) c.out_dir = *out;
    if (R) c.R = *R;
    if (p) c.params.p = *p;
    if (alpha) c.params.alpha = *alpha;
    if (beta) c.params.beta = *beta;
    if (rho) c.params.rho = *rho;
    if (s) c.params.s = *s;
    if (n) c.n = *n;
    if (seed) c.seed = *seed;
    if (s_homotopy) c.solver.s_homotopy = true;
    if (!R_list.empty()) c.R_list = R_list;
    if (!rho_list.empty()) c.rho_list = rho_list;
    if (!V_list.empty() || empty_V) c.V_list = V_list;
    if (!W_list.empty() || empty_W) c.W_list = W_list;
    return c;
  }
};

void summary(const nlohmann::json& j) { std::printf("%s\n", j.dump(2).c_str()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized solutions of the planar logarithmic Choquard equation on large domains"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration; flags override it");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--shape", o.shape, "disk or square");
  app.add_option("--R", o.R, "domain scale");
  app.add_option("--n", o.n, "nodes per side");
  app.add_option("--p", o.p, "power, p > 4");
  app.add_option("--alpha", o.alpha, "log coupling");
  app.add_option("--beta", o.beta, "power-term weight");
  app.add_option("--rho", o.rho, "prescribed mass");
  app.add_option("--s", o.s, "homotopy weight on the power term");
  app.add_option("--seed", o.seed, "random seed");

  auto* constants = app.add_subcommand("constants", "GN and HLS constants and thresholds");
  constants->add_option("--R-list", o.R_list, "domain scales");
  auto* fibration = app.add_subcommand("fibration", "dilation fiber of a random field");
  auto* landscape = app.add_subcommand("landscape", "energy tables along the two bump families");
  landscape->add_option("--V", o.V_list, "indices of the descending family");
  landscape->add_option("--W", o.W_list, "indices of the ascending family");
  landscape->add_flag("--no-V", o.empty_V, "skip the descending family");
  landscape->add_flag("--no-W", o.empty_W, "skip the ascending family");
  auto* solve = app.add_subcommand("solve", "local minimizer and mountain-pass solution");
  solve->add_option("--mode", o.mode, "min or mp")->check(CLI::IsMember({"min", "mp"}));
  solve->add_flag("--s-homotopy", o.s_homotopy, "continue the power weight from 1/2 to 1");
  auto* limit = app.add_subcommand("limit", "whole-plane limit profile");
  limit->add_option("--rho-list", o.rho_list, "masses for the scaling sweep");
  auto* asymptotics = app.add_subcommand("asymptotics", "large-domain sweep");
  asymptotics->add_option("--R-list", o.R_list, "increasing domain scales");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = o.apply();
    const Artifacts out(cfg);
    if (*constants) {
      summary(run_constants(cfg, make_context(cfg), &out));
    } else if (*fibration) {
      const nlohmann::json j = run_fibration(cfg, &out);
      summary({{"t_u", j["t_u"]}, {"sign_changes", j["sign_changes"]},
               {"unique_maximum", j["unique_maximum"]}});
    } else if (*landscape) {
      const LandscapeResult r = run_landscape(cfg, &out);
      summary({{"V_slope", r.V_slope}, {"W_slope", r.W_slope}, {"W_exponent", r.W_exponent}});
    } else if (*solve) {
      const SolveOutcome r = run_solve(cfg, make_context(cfg), &out);
      nlohmann::json j = {{"local_min", {{"status", r.local_min.status},
                                          {"energy", r.local_min.energy.total},
                                          {"certificates", r.local_min.cert}}}};
      if (r.mountain_pass)
        j["mountain_pass"] = {{"status", r.mountain_pass->status},
                              {"energy", r.mountain_pass->energy.total},
                              {"certificates", r.mountain_pass->cert}};
      summary(j);
    } else if (*limit) {
      const LimitOutcome r = run_limit(cfg, &out);
      summary({{"lambda_bar", r.solution.lambda_bar}, {"m_rho", r.solution.m_rho},
               {"decay_holds", r.decay.holds}});
    } else if (*asymptotics) {
      const AsymptoticsResult r = run_asymptotics(cfg, make_context(cfg), &out);
      summary({{"C_decreasing", r.C_decreasing},
               {"grad_decreasing", r.grad_decreasing},
               {"lambda_gap_decreasing", r.lambda_gap_decreasing},
               {"h1_decreasing", r.h1_decreasing}});
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  }
  return 0;
}
