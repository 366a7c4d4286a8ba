#pragma once

#include <cmath>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>

#include "error.hpp"
#include "grid.hpp"
#include "logkernel.hpp"

namespace lognls {

struct Params {
  double p = 6.0;       // nonlinearity power, p > 4
  double alpha = -0.01; // log coupling, negative in the studied regime
  double beta = 1.0;    // weight of the power term in the unperturbed problem
  double rho = 1.0;     // prescribed mass
  double s = 1.0;       // homotopy weight on the power term, in [1/2, 1]

  double power_weight() const { return beta * s; }

  void validate() const {
    require(p > 4.0, "params: need p > 4 (mass supercritical regime)");
    require(rho > 0.0, "params: need rho > 0");
    require(s >= 0.5 && s <= 1.0, "params: need s in [1/2, 1]");
    require(std::isfinite(alpha) && std::isfinite(beta), "params: non-finite coupling");
  }

  // The solvers work in the regime alpha < 0, beta > 0, p > 4.
  void validate_for_solve() const {
    validate();
    require(alpha < 0.0 && beta > 0.0,
            "params: solvers need the regime alpha < 0, beta > 0, p > 4");
  }
};

inline void to_json(nlohmann::json& j, const Params& p) {
  j = {{"p", p.p}, {"alpha", p.alpha}, {"beta", p.beta}, {"rho", p.rho}, {"s", p.s}};
}

struct EnergyBreakdown {
  double kinetic = 0.0;  // 1/2 |grad u|^2
  double logterm = 0.0;  // alpha/4 chi0(u^2, u^2)
  double pterm = 0.0;    // beta s / p |u|_p^p
  double total = 0.0;    // kinetic + logterm - pterm
  double pohozaev_interior = 0.0;
  double boundary_flux = 0.0;
  double lagrange_lambda = 0.0;
};

inline void to_json(nlohmann::json& j, const EnergyBreakdown& e) {
  j = {{"kinetic", e.kinetic},
       {"logterm", e.logterm},
       {"pterm", e.pterm},
       {"total", e.total},
       {"pohozaev_interior", e.pohozaev_interior},
       {"boundary_flux", e.boundary_flux},
       {"lagrange_lambda", e.lagrange_lambda}};
}

// Constrained energy on a fixed grid with its gradient, Hessian action and Pohozaev functionals.
class EnergyFunctional {
 public:
  EnergyFunctional(GridPtr grid, Params prm) : grid_(std::move(grid)), prm_(prm) {
    prm_.validate();
    if (prm_.alpha != 0.0) conv_ = std::make_shared<const LogConvolver>(grid_, Kernel::full);
  }

  const GridPtr& grid() const { return grid_; }
  const Params& params() const { return prm_; }
  void set_s(double s) {
    prm_.s = s;
    prm_.validate();
  }

  // (log|.| * u^2), zero when alpha = 0 since it is never needed then.
  Vec potential(const Field& u) const {
    if (!conv_) return Vec(u.v.size(), 0.0);
    return conv_->apply(squares(u));
  }

  double chi0(const Field& u) const {
    if (!conv_) return chi0_direct(u);
    return grid_->weight() * dot(squares(u), conv_->apply(squares(u)));
  }

  double energy(const Field& u) const {
    check(u);
    const double kin = 0.5 * dirichlet_energy(u);
    const double lg = prm_.alpha == 0.0 ? 0.0 : 0.25 * prm_.alpha * chi0(u);
    return kin + lg - prm_.power_weight() / prm_.p * lp_power(u, prm_.p);
  }

  EnergyBreakdown breakdown(const Field& u) const {
    check(u);
    EnergyBreakdown e;
    const double grad2 = dirichlet_energy(u);
    const double lp = lp_power(u, prm_.p);
    const double c0 = prm_.alpha == 0.0 ? 0.0 : chi0(u);
    const double m = mass(u);
    e.kinetic = 0.5 * grad2;
    e.logterm = 0.25 * prm_.alpha * c0;
    e.pterm = prm_.power_weight() / prm_.p * lp;
    e.total = e.kinetic + e.logterm - e.pterm;
    e.pohozaev_interior = grad2 - prm_.power_weight() * (prm_.p - 2.0) / prm_.p * lp -
                          0.25 * prm_.alpha * m * m;
    e.boundary_flux = boundary_flux(u);
    e.lagrange_lambda = m > 0.0 ? (prm_.power_weight() * lp - grad2 - prm_.alpha * c0) / m : 0.0;
    return e;
  }

  // Unconstrained L2 gradient -Delta u + alpha w u - beta s |u|^{p-2} u.
  Field gradient(const Field& u) const {
    check(u);
    Field g = laplacian(u);
    const Vec w = potential(u);
    const double c = prm_.power_weight(), pm2 = prm_.p - 2.0;
    for (int k = 0; k < g.size(); ++k) {
      const double uk = u.v[k];
      g.v[k] += prm_.alpha * w[k] * uk - c * std::pow(std::abs(uk), pm2) * uk;
    }
    return g;
  }

  // Second derivative of the energy at u applied to v; w is potential(u).
  Field hessian_apply(const Field& u, const Vec& w, const Field& v) const {
    Field out = laplacian(v);
    const double c = prm_.power_weight() * (prm_.p - 1.0), pm2 = prm_.p - 2.0;
    Vec dw;
    if (conv_) {
      Vec q(u.v.size());
      for (std::size_t k = 0; k < q.size(); ++k) q[k] = 2.0 * u.v[k] * v.v[k];
      dw = conv_->apply(q);
    }
    for (int k = 0; k < out.size(); ++k) {
      double t = -c * std::pow(std::abs(u.v[k]), pm2) * v.v[k];
      if (conv_) t += prm_.alpha * (w[k] * v.v[k] + u.v[k] * dw[k]);
      out.v[k] += t;
    }
    return out;
  }

  // Multiplier from the constraint identity, requires mass(u) = rho.
  double lagrange_multiplier(const Field& u) const {
    check(u);
    const double m = mass(u);
    if (std::abs(m - prm_.rho) > 1e-8 * prm_.rho)
      fail(ErrorKind::parameter, "lagrange multiplier: mass " + std::to_string(m) +
                                     " violates the constraint rho = " + std::to_string(prm_.rho));
    const double c0 = prm_.alpha == 0.0 ? 0.0 : chi0(u);
    return (prm_.power_weight() * lp_power(u, prm_.p) - dirichlet_energy(u) - prm_.alpha * c0) /
           prm_.rho;
  }

  double pohozaev_interior(const Field& u) const {
    check(u);
    const double m = mass(u);
    return dirichlet_energy(u) -
           prm_.power_weight() * (prm_.p - 2.0) / prm_.p * lp_power(u, prm_.p) -
           0.25 * prm_.alpha * m * m;
  }

  struct PohozaevBoundary {
    double residual = 0.0;
    double flux = 0.0;
  };

  PohozaevBoundary pohozaev_boundary(const Field& u) const {
    const double f = boundary_flux(u);
    return {pohozaev_interior(u) - f, f};
  }

  // 1/2 of the boundary integral of (x.n)|d_n u|^2 through its domain form
  // int (x . grad u) Delta u, exact for u = 0 on the boundary.
  double boundary_flux(const Field& u) const {
    check(u);
    const Grid& g = *grid_;
    const Field lu = laplacian(u);
    double s = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      const double gx = arm_derivative(u, k, 0), gy = arm_derivative(u, k, 2);
      s -= (g.x(k) * gx + g.y(k) * gy) * lu.v[k];
    }
    return g.weight() * s;
  }

  // Same boundary integral sampled at the lattice crossings with a one-sided quadratic fit
  // for the normal derivative. Never negative; first order on curved boundaries.
  double boundary_flux_sampled(const Field& u) const {
    check(u);
    double s = 0.0;
    for (const Crossing& c : grid_->crossings()) {
      const double u1 = u.v[c.node];
      double a = u1 / c.d1;
      if (c.inner >= 0) {
        const double u2 = u.v[c.inner];
        a = (u1 * c.d2 * c.d2 - u2 * c.d1 * c.d1) / (c.d1 * c.d2 * (c.d2 - c.d1));
      }
      s += c.weight * a * a;
    }
    return s;
  }

 private:
  void check(const Field& u) const {
    if (!(u.grid == grid_ || u.grid->same_as(*grid_)))
      fail(ErrorKind::parameter, "functional: field lives on a different grid");
  }

  double chi0_direct(const Field& u) const {
    const LogConvolver conv(grid_);
    return grid_->weight() * dot(squares(u), conv.apply(squares(u)));
  }

  // Three-point derivative along axis pair (first = +direction index) using the boundary zero
  // at the true cut distance on cut arms.
  double arm_derivative(const Field& u, int k, int plus) const {
    const Grid& g = *grid_;
    const auto& nb = g.neighbours(k);
    const auto& fr = g.arm_fractions(k);
    const double h = g.h();
    const double dp = fr[plus] * h, dm = fr[plus + 1] * h;
    const double up = nb[plus] >= 0 ? u.v[nb[plus]] : 0.0;
    const double um = nb[plus + 1] >= 0 ? u.v[nb[plus + 1]] : 0.0;
    const double u0 = u.v[k];
    return (up * dm * dm - um * dp * dp + u0 * (dp * dp - dm * dm)) / (dp * dm * (dp + dm));
  }

  GridPtr grid_;
  Params prm_;
  std::shared_ptr<const LogConvolver> conv_;
};

}  // namespace lognls
