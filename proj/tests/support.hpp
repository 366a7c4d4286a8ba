#pragma once

#include <random>

#include "lognls/constants.hpp"
#include "lognls/grid.hpp"

namespace lognls::testing {

// A few Gaussian bumps, normalized to mass rho.
inline Field random_field(const GridPtr& grid, std::mt19937_64& rng, double rho = 1.0) {
  const double h = grid->h();
  Field u = random_bump_field(grid, rng, 2.0 * h, 0.25 * grid->R());
  normalize_mass(u, rho);
  return u;
}

// Independent white-noise field, for algebraic identities that need no smoothness.
inline Field noise_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Field u(grid);
  for (double& x : u.v) x = nd(rng);
  return u;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace lognls::testing
