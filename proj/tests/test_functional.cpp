#include <gtest/gtest.h>

#include <cmath>

#include "lognls/constants.hpp"
#include "lognls/functional.hpp"
#include "support.hpp"

using namespace lognls;
using lognls::testing::random_field;
using lognls::testing::rel;

namespace {

Params params(double alpha) {
  Params p;
  p.p = 6.0;
  p.alpha = alpha;
  p.rho = 1.0;
  return p;
}

double directional_fd(const EnergyFunctional& F, const Field& u, const Field& v, double eps) {
  Field a = u, b = u;
  axpy(eps, v.v, a.v);
  axpy(-eps, v.v, b.v);
  return (F.energy(a) - F.energy(b)) / (2.0 * eps);
}

}  // namespace

TEST(Functional, ZeroFieldHasZeroEnergy) {
  const GridPtr g = build_grid(Shape::disk, 4.0, 21);
  const EnergyFunctional F(g, params(-0.01));
  const Field z(g);
  const EnergyBreakdown e = F.breakdown(z);
  EXPECT_EQ(e.kinetic, 0.0);
  EXPECT_EQ(e.logterm, 0.0);
  EXPECT_EQ(e.pterm, 0.0);
  EXPECT_EQ(e.total, 0.0);
  EXPECT_EQ(e.pohozaev_interior, 0.0);
  for (double x : F.gradient(z).v) EXPECT_EQ(x, 0.0);
}

TEST(Functional, BreakdownAssemblesTotal) {
  std::mt19937_64 rng(1);
  const GridPtr g = build_grid(Shape::disk, 6.0, 33);
  const EnergyFunctional F(g, params(-0.3));
  for (int t = 0; t < 5; ++t) {
    const Field u = random_field(g, rng);
    const EnergyBreakdown e = F.breakdown(u);
    EXPECT_LT(rel(e.total, F.energy(u)), 1e-12);
    EXPECT_DOUBLE_EQ(e.total, e.kinetic + e.logterm - e.pterm);
    EXPECT_DOUBLE_EQ(e.kinetic, 0.5 * dirichlet_energy(u));
    EXPECT_DOUBLE_EQ(e.pterm, lp_power(u, 6.0) / 6.0);
  }
}

TEST(Functional, NoLogTermWithoutCoupling) {
  std::mt19937_64 rng(2);
  const GridPtr g = build_grid(Shape::square, 5.0, 25);
  const EnergyFunctional F(g, params(0.0));
  const Field u = random_field(g, rng);
  EXPECT_DOUBLE_EQ(F.energy(u), 0.5 * dirichlet_energy(u) - lp_power(u, 6.0) / 6.0);
  const Field gr = F.gradient(u), lu = laplacian(u);
  for (int k = 0; k < g->size(); ++k)
    EXPECT_NEAR(gr.v[k], lu.v[k] - std::pow(u.v[k], 5), 1e-12 * (1.0 + std::abs(gr.v[k])));
}

TEST(Functional, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  const GridPtr g = build_grid(Shape::disk, 4.0, 17);
  const EnergyFunctional F(g, params(-0.01));
  for (int t = 0; t < 10; ++t) {
    const Field u = random_field(g, rng), v = random_field(g, rng);
    const double exact = inner(F.gradient(u), v);
    // Steps large enough that round-off stays far below the truncation error.
    const double e2 = std::abs(directional_fd(F, u, v, 1e-2) - exact);
    const double e3 = std::abs(directional_fd(F, u, v, 1e-3) - exact);
    EXPECT_LT(std::abs(directional_fd(F, u, v, 1e-5) - exact), 1e-6 * std::abs(exact));
    EXPECT_NEAR(e2 / e3, 100.0, 10.0);  // second order in the step
  }
}

TEST(Functional, HessianMatchesGradientDifferences) {
  std::mt19937_64 rng(4);
  const GridPtr g = build_grid(Shape::disk, 4.0, 17);
  const EnergyFunctional F(g, params(-0.2));
  const Field u = random_field(g, rng), v = random_field(g, rng);
  const Field hv = F.hessian_apply(u, F.potential(u), v);
  const double eps = 1e-5;
  Field a = u, b = u;
  axpy(eps, v.v, a.v);
  axpy(-eps, v.v, b.v);
  const Field ga = F.gradient(a), gb = F.gradient(b);
  double err = 0.0, ref = 0.0;
  for (int k = 0; k < g->size(); ++k) {
    err = std::max(err, std::abs((ga.v[k] - gb.v[k]) / (2.0 * eps) - hv.v[k]));
    ref = std::max(ref, std::abs(hv.v[k]));
  }
  EXPECT_LT(err, 1e-6 * ref);
}

TEST(Functional, MultiplierIsTheConstraintQuotient) {
  std::mt19937_64 rng(5);
  const GridPtr g = build_grid(Shape::disk, 6.0, 33);
  const EnergyFunctional F(g, params(-0.1));
  const Field u = random_field(g, rng);
  // <g, u> = |grad u|^2 + alpha chi0 - |u|_p^p, so lambda = -<g, u> / rho.
  EXPECT_LT(rel(F.lagrange_multiplier(u), -inner(F.gradient(u), u)), 1e-10);
  EXPECT_LT(rel(F.breakdown(u).lagrange_lambda, F.lagrange_multiplier(u)), 1e-12);
  Field off = u;
  scale(1.01, off.v);
  EXPECT_THROW(F.lagrange_multiplier(off), Error);
}

TEST(Functional, PohozaevInteriorFormula) {
  std::mt19937_64 rng(6);
  const GridPtr g = build_grid(Shape::disk, 6.0, 33);
  const Params prm = params(-0.1);
  const EnergyFunctional F(g, prm);
  EXPECT_EQ(F.pohozaev_interior(Field(g)), 0.0);
  const Field u = random_field(g, rng, 2.0);
  const double expect = dirichlet_energy(u) - 4.0 / 6.0 * lp_power(u, 6.0) + 0.1 * 4.0 / 4.0;
  EXPECT_LT(rel(F.pohozaev_interior(u), expect), 1e-12);
}

TEST(Functional, BoundaryFluxIsNonNegativeAndConsistent) {
  std::mt19937_64 rng(7);
  for (Shape s : {Shape::disk, Shape::square}) {
    const GridPtr g = build_grid(s, 8.0, 65);
    const EnergyFunctional F(g, params(-0.01));
    for (int t = 0; t < 5; ++t) EXPECT_GE(F.boundary_flux_sampled(random_field(g, rng)), 0.0);
  }
  // On the disk x.n = R/2 (the radius), so the flux is (R/4) times the boundary integral of
  // |d_n psi|^2; for psi_R both quadratures approach it.
  const GridPtr g = build_grid(Shape::disk, 8.0, 129);
  const EnergyFunctional F(g, params(-0.01));
  const Field psi = principal_eigenpair(g, 1.0).psi;
  EXPECT_LT(rel(F.boundary_flux(psi), F.boundary_flux_sampled(psi)), 0.05);
  // Rellich identity in the plane: the flux of a Dirichlet eigenfunction equals lambda rho.
  EXPECT_LT(rel(F.boundary_flux(psi), dirichlet_energy(psi)), 0.02);
}

TEST(Functional, LongRangeFormBoundedByDiameter) {
  std::mt19937_64 rng(8);
  for (double R : {2.0, 8.0}) {
    const GridPtr g = build_grid(Shape::disk, R, 33);
    for (int t = 0; t < 5; ++t) {
      const Field u = random_field(g, rng, 1.5);
      const double chi1 = chi_forms(u, u).long_range;
      const double rho = mass(u);
      EXPECT_LE(chi1, std::log1p(R) * rho * rho);
      EXPECT_LE(chi1, std::log1p(2.0 * R) * rho * rho);
    }
  }
}

TEST(Functional, ScaledEigenfunctionEnergyBound) {
  // J(psi_R) <= R^-2 lambda rho / 2 - R^-(p-2) rho^{p/2} |Omega|^{-(p-2)/2} / p
  //             - (alpha/4) C_hls C_{8/3}^{3/2} R^-1 lambda^{1/2} rho^2.
  const double p = 6.0, rho = 1.0, alpha = -0.05;
  const HLSEstimate hls = hls_constant_estimate(build_grid(Shape::disk, 64.0, 65), 100);
  const double c83 = gn_constant(8.0 / 3.0);
  for (double R : {4.0, 16.0}) {
    const GridPtr g = build_grid(Shape::disk, R, 65);
    const EigenPair e = principal_eigenpair(g, rho);
    const double lambda = e.lambda * R * R;
    const double area = reference_area(Shape::disk);
    const double bound = 0.5 * lambda * rho / (R * R) -
                         std::pow(R, -(p - 2.0)) * std::pow(rho, p / 2.0) *
                             std::pow(area, -(p - 2.0) / 2.0) / p -
                         0.25 * alpha * hls.inflated * std::pow(c83, 1.5) * std::sqrt(lambda) * rho * rho / R;
    const EnergyFunctional F(g, Params{p, alpha, 1.0, rho, 1.0});
    EXPECT_LE(F.energy(e.psi), bound);
  }
}
