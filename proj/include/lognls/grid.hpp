#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace lognls {

// Reference domains have diameter 1: a disk of radius 1/2 or a square of side 1/sqrt(2),
// both centred at the origin. Omega_R is the reference domain scaled by R.
enum class Shape { disk, square };

inline std::string to_string(Shape s) { return s == Shape::disk ? "disk" : "square"; }

inline Shape parse_shape(const std::string& name) {
  if (name == "disk") return Shape::disk;
  if (name == "square") return Shape::square;
  fail(ErrorKind::parameter, "unknown shape '" + name + "' (expected disk or square)");
}

inline double box_side(Shape s) { return s == Shape::disk ? 1.0 : 1.0 / std::numbers::sqrt2; }
inline double reference_area(Shape s) { return s == Shape::disk ? std::numbers::pi / 4.0 : 0.5; }

// One place where a lattice arm leaves the domain. The quadratic one-sided fit through the
// boundary zero and the values at inward distances d1 and d2 gives the normal derivative;
// weight folds in the line element, x.n and the partition of unity between arm directions.
struct Crossing {
  int node = -1;
  int inner = -1;  // next node inward along the same line, -1 if it is not interior
  double d1 = 0.0, d2 = 0.0;
  double weight = 0.0;
};

class Grid {
 public:
  static constexpr double min_cut_fraction = 1e-8;

  Grid(Shape shape, double R, int n) : shape_(shape), R_(R), n_(n) {
    require(R > 0.0 && std::isfinite(R), "grid: R must be positive");
    require(n >= 3, "grid: need at least 3 nodes per axis");
    side_ = R * box_side(shape);
    h_ = side_ / (n - 1);
    radius_ = 0.5 * R;
    index_.assign(static_cast<std::size_t>(n) * n, -1);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (inside(i, j)) {
          index_[j * n + i] = static_cast<int>(col_.size());
          col_.push_back(i);
          row_.push_back(j);
        }
    if (col_.empty())
      fail(ErrorKind::parameter, "grid: degenerate, no interior node for n=" + std::to_string(n));
    build_stencil();
  }

  Shape shape() const { return shape_; }
  double R() const { return R_; }
  int n() const { return n_; }
  double h() const { return h_; }
  double weight() const { return h_ * h_; }
  double side() const { return side_; }
  int size() const { return static_cast<int>(col_.size()); }
  double area() const { return R_ * R_ * reference_area(shape_); }

  double coord(int i) const { return (i - 0.5 * (n_ - 1)) * h_; }
  double x(int k) const { return coord(col_[k]); }
  double y(int k) const { return coord(row_[k]); }
  int col(int k) const { return col_[k]; }
  int row(int k) const { return row_[k]; }
  int index(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) return -1;
    return index_[j * n_ + i];
  }

  // Neighbours in the order +x, -x, +y, -y; -1 marks a cut arm.
  const std::array<int, 4>& neighbours(int k) const { return nbr_[k]; }
  // Inside length of each arm in units of h: 1 for a full arm, the cut fraction otherwise.
  const std::array<double, 4>& arm_fractions(int k) const { return arm_[k]; }
  double diagonal(int k) const { return diag_[k]; }
  const std::vector<Crossing>& crossings() const { return crossings_; }

  // Symmetric cut-cell stencil of -Delta with u = 0 on the true boundary.
  void apply_laplacian(const double* u, double* out) const {
    const double c = 1.0 / (h_ * h_);
    const int m = size();
    for (int k = 0; k < m; ++k) {
      double s = diag_[k] * u[k];
      for (int q : nbr_[k])
        if (q >= 0) s -= c * u[q];
      out[k] = s;
    }
  }

  bool same_as(const Grid& o) const { return shape_ == o.shape_ && R_ == o.R_ && n_ == o.n_; }

 private:
  bool inside(int i, int j) const {
    if (shape_ == Shape::square) return i > 0 && j > 0 && i < n_ - 1 && j < n_ - 1;
    const double x = coord(i), y = coord(j);
    return x * x + y * y < radius_ * radius_;
  }

  // Fraction of the arm from node (x,y) along unit axis direction (ex,ey) that lies inside.
  double cut_fraction(double x, double y, int ex, int ey) const {
    if (shape_ == Shape::square) return 1.0;
    const double across = ex != 0 ? y : x;
    const double along = ex != 0 ? x * ex : y * ey;
    const double reach = std::sqrt(std::max(radius_ * radius_ - across * across, 0.0));
    return std::clamp((reach - along) / h_, min_cut_fraction, 1.0);
  }

  void build_stencil() {
    static constexpr std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    const int m = size();
    const double c = 1.0 / (h_ * h_);
    nbr_.resize(m);
    arm_.assign(m, {1.0, 1.0, 1.0, 1.0});
    diag_.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
      const double x0 = x(k), y0 = y(k);
      for (int d = 0; d < 4; ++d) {
        const int ex = dirs[d][0], ey = dirs[d][1];
        const int q = index(col_[k] + ex, row_[k] + ey);
        nbr_[k][d] = q;
        if (q >= 0) {
          diag_[k] += c;
          continue;
        }
        const double theta = cut_fraction(x0, y0, ex, ey);
        arm_[k][d] = theta;
        diag_[k] += c / theta;
        Crossing cr;
        cr.node = k;
        cr.inner = index(col_[k] - ex, row_[k] - ey);
        cr.d1 = theta * h_;
        cr.d2 = (1.0 + theta) * h_;
        const double bx = x0 + ex * theta * h_, by = y0 + ey * theta * h_;
        double nx = ex, ny = ey, xn = 0.0;
        if (shape_ == Shape::disk) {
          const double r = std::hypot(bx, by);
          nx = bx / r;
          ny = by / r;
          xn = radius_;
        } else {
          xn = 0.5 * side_;
        }
        const double pu = std::pow(std::abs(nx), 3) + std::pow(std::abs(ny), 3);
        cr.weight = h_ * 0.5 * xn / pu;
        crossings_.push_back(cr);
      }
    }
  }

  Shape shape_;
  double R_;
  int n_;
  double side_ = 0.0, h_ = 0.0, radius_ = 0.0;
  std::vector<int> index_, col_, row_;
  std::vector<std::array<int, 4>> nbr_;
  std::vector<std::array<double, 4>> arm_;
  std::vector<double> diag_;
  std::vector<Crossing> crossings_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(Shape shape, double R, int n) {
  return std::make_shared<const Grid>(shape, R, n);
}

// Nodal values on the interior nodes of a grid, in row-major interior order.
struct Field {
  GridPtr grid;
  Vec v;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), v(grid->size(), 0.0) {}
  Field(GridPtr g, Vec values) : grid(std::move(g)), v(std::move(values)) {
    require(static_cast<int>(v.size()) == grid->size(), "field: value count does not match grid");
  }
  int size() const { return static_cast<int>(v.size()); }
};

inline void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid == b.grid || a.grid->same_as(*b.grid)))
    fail(ErrorKind::parameter, "grid mismatch between fields");
}

// Quadrature inner product h^2 * sum(u v).
inline double inner(const Field& a, const Field& b) { return a.grid->weight() * dot(a.v, b.v); }
inline double mass(const Field& u) { return inner(u, u); }
inline double l2_norm(const Field& u) { return std::sqrt(mass(u)); }

inline double lp_power(const Field& u, double p) {
  double s = 0.0;
  for (double x : u.v) s += std::pow(std::abs(x), p);
  return u.grid->weight() * s;
}

inline Field laplacian(const Field& u) {
  Field out(u.grid);
  u.grid->apply_laplacian(u.v.data(), out.v.data());
  return out;
}

// Squared gradient norm by summation by parts, <-Delta u, u>.
inline double dirichlet_energy(const Field& u) { return inner(laplacian(u), u); }

inline void normalize_mass(Field& u, double rho) {
  const double m = mass(u);
  require(m > 0.0, "cannot normalize a zero field");
  scale(std::sqrt(rho / m), u.v);
}

// Jacobi-preconditioned solve of (-Delta + shift) x = b on the grid.
inline KrylovResult solve_shifted_laplacian(const Grid& g, double shift, const Vec& b, Vec& x,
                                            double rtol, int max_it) {
  const auto A = [&](const Vec& in, Vec& out) {
    g.apply_laplacian(in.data(), out.data());
    if (shift != 0.0) axpy(shift, in, out);
  };
  const auto M = [&](const Vec& in, Vec& out) {
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] / (g.diagonal(static_cast<int>(k)) + shift);
  };
  if (x.size() != b.size()) x.assign(b.size(), 0.0);
  return pcg(A, M, b, x, rtol, max_it);
}

struct EigenPair {
  Field psi;            // positive, mass rho
  double lambda = 0.0;  // principal eigenvalue of the discrete -Delta on Omega_R
  double residual = 0.0;
  int iterations = 0;
};

// Inverse power iteration. Convergence is measured as ||L psi - lambda psi|| / (lambda ||psi||).
inline EigenPair principal_eigenpair(const GridPtr& grid, double rho, double tol = 1e-10,
                                     int max_it = 500) {
  require(rho > 0.0, "eigenpair: rho must be positive");
  const Grid& g = *grid;
  const int m = g.size();
  Vec x(m), y(m), lx(m);
  const double j01 = 2.404825557695773;
  const double r = 0.5 * g.R(), s = g.side();
  for (int k = 0; k < m; ++k) {
    if (g.shape() == Shape::disk)
      x[k] = std::max(std::cyl_bessel_j(0.0, j01 * std::hypot(g.x(k), g.y(k)) / r), 1e-3);
    else
      x[k] = std::cos(std::numbers::pi * g.x(k) / s) * std::cos(std::numbers::pi * g.y(k) / s);
  }
  scale(1.0 / norm2(x), x);
  EigenPair out;
  for (int it = 1; it <= max_it; ++it) {
    g.apply_laplacian(x.data(), lx.data());
    const double lam = dot(x, lx);
    Vec res = lx;
    axpy(-lam, x, res);
    out.lambda = lam;
    out.residual = norm2(res) / lam;
    out.iterations = it;
    if (out.residual < tol) break;
    y = x;
    scale(1.0 / lam, y);
    solve_shifted_laplacian(g, 0.0, x, y, 1e-14, 20 * m + 100);
    scale(1.0 / norm2(y), y);
    x.swap(y);
    if (it == max_it) fail(ErrorKind::convergence, "eigenpair: iteration limit reached");
  }
  double sum = 0.0;
  for (double xi : x) sum += xi;
  if (sum < 0.0) scale(-1.0, x);
  out.psi = Field(grid, x);
  normalize_mass(out.psi, rho);
  return out;
}

}  // namespace lognls
