#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"
#include "fibration.hpp"
#include "functional.hpp"
#include "grid.hpp"

namespace lognls {

enum class BumpKind { V, W };

// Per-profile quantities of the base bump psi, computed once.
struct BumpProfile {
  EigenPair eig;
  double mass = 0.0, grad2 = 0.0, lp = 0.0, chi0 = 0.0;
  double p = 0.0;
  std::vector<double> x, y, q;  // node coordinates and psi^2 h^2
};

inline BumpProfile bump_profile(const GridPtr& grid, const Params& prm) {
  BumpProfile b;
  b.p = prm.p;
  b.eig = principal_eigenpair(grid, prm.rho);
  const Field& psi = b.eig.psi;
  b.mass = mass(psi);
  b.grad2 = dirichlet_energy(psi);
  b.lp = lp_power(psi, prm.p);
  const LogConvolver conv(grid, Kernel::full);
  const Vec sq = squares(psi);
  b.chi0 = grid->weight() * dot(sq, conv.apply(sq));
  const Grid& g = *grid;
  b.x.resize(g.size());
  b.y.resize(g.size());
  b.q.resize(g.size());
  for (int k = 0; k < g.size(); ++k) {
    b.x[k] = g.x(k);
    b.y[k] = g.y(k);
    b.q[k] = g.weight() * sq[k];
  }
  return b;
}

// sum_i a psi(b (x + i n^2 e)) for i = 1..count, with e the unit x direction.
struct BumpFamily {
  BumpKind kind = BumpKind::V;
  int n = 0;
  int count = 0;
  double amplitude = 0.0;
  double scale = 0.0;
  double separation = 0.0;  // n^2
  FiberInvariants inv;      // of the family at t = 1
};

inline BumpFamily build_bumps(const BumpProfile& prof, BumpKind kind, int n);

// Cross term of two unit-amplitude psi^2 densities whose centres differ by d along e, with the
// bump coordinates divided by b: sum log|(x - y)/b + d e| q_x q_y.
inline double bump_cross(const BumpProfile& prof, double b, double d) {
  const std::size_t m = prof.q.size();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double dx = (prof.x[i] - prof.x[j]) / b + d, dy = (prof.y[i] - prof.y[j]) / b;
      row += 0.5 * std::log(dx * dx + dy * dy) * prof.q[j];
    }
    s += row * prof.q[i];
  }
  return s;
}

// chi0 of the whole family: self terms by the dilation law plus pairwise cross terms.
inline double chi0_multibump(const BumpProfile& prof, const BumpFamily& fam) {
  const double a = fam.amplitude, b = fam.scale;
  const double f4 = std::pow(a / b, 4.0);
  const double self = f4 * (prof.chi0 - prof.mass * prof.mass * std::log(b));
  double total = fam.count * self;
  // Pairs at index distance m occur 2 (count - m) times in the ordered double sum.
  for (int m = 1; m < fam.count; ++m)
    total += 2.0 * (fam.count - m) * f4 * bump_cross(prof, b, m * fam.separation);
  return total;
}

inline BumpFamily build_bumps(const BumpProfile& prof, BumpKind kind, int n) {
  require(n >= 2, "bumps: need n >= 2");
  const double p = prof.p;
  const double base = kind == BumpKind::V ? 2.0 : static_cast<double>(n);
  BumpFamily f;
  f.kind = kind;
  f.n = n;
  f.count = kind == BumpKind::V ? 2 : n;
  f.amplitude = std::pow(base, 1.0 / (p - 4.0));
  f.scale = std::pow(base, (p - 2.0) / (2.0 * (p - 4.0)));
  f.separation = static_cast<double>(n) * n;
  const double a = f.amplitude, b = f.scale;
  f.inv.mass = f.count * a * a / (b * b) * prof.mass;
  f.inv.grad2 = f.count * a * a * prof.grad2;
  f.inv.lp = f.count * std::pow(a, p) / (b * b) * prof.lp;
  f.inv.chi0 = chi0_multibump(prof, f);
  return f;
}

struct OnManifold {
  double t = 0.0;       // Pohozaev time of the family
  double energy = 0.0;  // J of the family dilated to t
  double pohozaev = 0.0;
  double grad2 = 0.0;   // |grad|^2 at t
};

inline OnManifold project_to_manifold(const BumpFamily& fam, const Params& prm) {
  prm.validate();
  OnManifold r;
  double lo = 1e-6, hi = 1e6;
  r.t = fiber_root(fam.inv, prm, lo, hi);
  r.energy = fiber_energy(fam.inv, prm, r.t);
  r.pohozaev = fiber_pohozaev(fam.inv, prm, r.t);
  r.grad2 = r.t * r.t * fam.inv.grad2;
  return r;
}

inline OnManifold vn_energy_on_P(const BumpProfile& prof, int n, const Params& prm) {
  return project_to_manifold(build_bumps(prof, BumpKind::V, n), prm);
}

inline OnManifold wn_energy_on_P(const BumpProfile& prof, int n, const Params& prm) {
  return project_to_manifold(build_bumps(prof, BumpKind::W, n), prm);
}

// Lower bound for J((W_n)_{t_{1,n}}) from the construction, without the vanishing n^{-1} term.
inline double wn_lower_bound(double lambda1, int n, const Params& prm) {
  const double p = prm.p, rho = prm.rho, a = prm.alpha;
  return (p - 4.0) / (2.0 * (p - 2.0)) * lambda1 * rho * n + a * rho * rho / (4.0 * (p - 2.0)) +
         0.25 * a * rho * rho * std::log(std::pow(static_cast<double>(n), 3.0) + 1.0) +
         0.25 * a * rho * rho * std::log(3.0) / n;
}

}  // namespace lognls
