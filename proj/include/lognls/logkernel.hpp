#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace lognls {

// log r = log(1+r) - log(1+1/r): the full kernel and its long-range and singular parts.
enum class Kernel { full, long_range, singular };

namespace detail {

// Gauss-Legendre rule on [-1, 1].
inline std::vector<std::pair<double, double>> gauss_legendre(int order) {
  std::vector<std::pair<double, double>> rule(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
  }
  return rule;
}

// Average over the cell [-h/2, h/2]^2 of a radial function whose moment integral
// G(a) = int_0^a r k(r) dr is known in closed form. The cell splits into 8 congruent
// triangles; along each ray the radius runs to h / (2 cos phi).
template <class Moment>
double cell_average(double h, const Moment& G) {
  static const auto rule = gauss_legendre(40);
  const double quarter = std::numbers::pi / 4.0;
  double s = 0.0;
  for (const auto& [xi, wi] : rule) {
    const double phi = 0.5 * quarter * (xi + 1.0);
    s += wi * G(h / (2.0 * std::cos(phi)));
  }
  s *= 0.5 * quarter;
  return 8.0 * s / (h * h);
}

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

inline double cell_average_log(double h) {
  return detail::cell_average(h, [](double a) { return 0.5 * a * a * std::log(a) - 0.25 * a * a; });
}

inline double cell_average_log1p(double h) {
  return detail::cell_average(h, [](double a) {
    return 0.5 * (a * a - 1.0) * std::log1p(a) - 0.25 * a * a + 0.5 * a;
  });
}

inline double kernel_at(Kernel k, double r) {
  switch (k) {
    case Kernel::full: return std::log(r);
    case Kernel::long_range: return std::log1p(r);
    case Kernel::singular: return std::log1p(1.0 / r);
  }
  return 0.0;
}

inline double kernel_diagonal(Kernel k, double h) {
  switch (k) {
    case Kernel::full: return cell_average_log(h);
    case Kernel::long_range: return cell_average_log1p(h);
    case Kernel::singular: return cell_average_log1p(h) - cell_average_log(h);
  }
  return 0.0;
}

// Kernel between lattice offsets (di, dj); the zero offset uses the cell average.
inline double lattice_kernel(Kernel k, int di, int dj, double h, double diag) {
  if (di == 0 && dj == 0) return diag;
  return kernel_at(k, h * std::hypot(static_cast<double>(di), static_cast<double>(dj)));
}

// Free-space convolution w_i = h^2 sum_j K(x_i - x_j) q_j by zero-padded FFT. The padded
// period 2n exceeds the largest offset span 2n-1, so the cyclic sum equals the free-space sum.
class LogConvolver {
 public:
  explicit LogConvolver(GridPtr grid, Kernel kind = Kernel::full)
      : grid_(std::move(grid)), kind_(kind), n_(grid_->n()), N_(2 * grid_->n()) {
    const std::size_t real_size = static_cast<std::size_t>(N_) * N_;
    const std::size_t spec_size = static_cast<std::size_t>(N_) * (N_ / 2 + 1);
    real_ = fftw_alloc_real(real_size);
    spec_ = fftw_alloc_complex(spec_size);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      forward_ = fftw_plan_dft_r2c_2d(N_, N_, real_, spec_, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_2d(N_, N_, spec_, real_, FFTW_ESTIMATE);
    }
    const double h = grid_->h();
    const double diag = kernel_diagonal(kind_, h);
    std::fill(real_, real_ + real_size, 0.0);
    for (int dj = -(n_ - 1); dj <= n_ - 1; ++dj)
      for (int di = -(n_ - 1); di <= n_ - 1; ++di)
        real_[wrap(dj) * N_ + wrap(di)] = lattice_kernel(kind_, di, dj, h, diag);
    fftw_execute(forward_);
    kernel_hat_.resize(spec_size);
    for (std::size_t k = 0; k < spec_size; ++k) kernel_hat_[k] = {spec_[k][0], spec_[k][1]};
  }

  LogConvolver(const LogConvolver&) = delete;
  LogConvolver& operator=(const LogConvolver&) = delete;

  ~LogConvolver() {
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(real_);
    fftw_free(spec_);
  }

  const GridPtr& grid() const { return grid_; }
  Kernel kind() const { return kind_; }

  // q holds nodal densities (for instance u^2) on interior nodes.
  Vec apply(const Vec& q) const {
    const Grid& g = *grid_;
    const int m = g.size();
    const std::size_t real_size = static_cast<std::size_t>(N_) * N_;
    std::fill(real_, real_ + real_size, 0.0);
    for (int k = 0; k < m; ++k) real_[static_cast<std::size_t>(g.row(k)) * N_ + g.col(k)] = q[k];
    fftw_execute(forward_);
    const std::size_t spec_size = kernel_hat_.size();
    for (std::size_t k = 0; k < spec_size; ++k) {
      const std::complex<double> z = std::complex<double>(spec_[k][0], spec_[k][1]) * kernel_hat_[k];
      spec_[k][0] = z.real();
      spec_[k][1] = z.imag();
    }
    fftw_execute(backward_);
    const double factor = g.weight() / static_cast<double>(real_size);
    Vec w(m);
    for (int k = 0; k < m; ++k) w[k] = factor * real_[static_cast<std::size_t>(g.row(k)) * N_ + g.col(k)];
    return w;
  }

 private:
  std::size_t wrap(int d) const { return static_cast<std::size_t>(d < 0 ? d + N_ : d); }

  GridPtr grid_;
  Kernel kind_;
  int n_, N_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr, backward_ = nullptr;
  std::vector<std::complex<double>> kernel_hat_;
};

inline Vec squares(const Field& u) {
  Vec q(u.v.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = u.v[k] * u.v[k];
  return q;
}

// Dense reference path: one kernel row at a time, any grid size.
inline Vec convolve_dense(const Grid& g, Kernel kind, const Vec& q) {
  const int m = g.size();
  const double h = g.h(), diag = kernel_diagonal(kind, h);
  Vec w(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      s += lattice_kernel(kind, g.col(i) - g.col(j), g.row(i) - g.row(j), h, diag) * q[j];
    w[i] = g.weight() * s;
  }
  return w;
}

// Materialized symmetric kernel table over interior nodes.
class KernelMatrix {
 public:
  static constexpr int max_nodes = 5000;

  KernelMatrix(GridPtr grid, Kernel kind = Kernel::full) : grid_(std::move(grid)), kind_(kind) {
    const Grid& g = *grid_;
    const int m = g.size();
    if (m > max_nodes)
      fail(ErrorKind::parameter, "kernel matrix: " + std::to_string(m) + " nodes exceeds memory guard");
    const double h = g.h(), diag = kernel_diagonal(kind, h);
    K_.resize(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) {
        const double k = lattice_kernel(kind, g.col(i) - g.col(j), g.row(i) - g.row(j), h, diag);
        K_[static_cast<std::size_t>(i) * m + j] = k;
        K_[static_cast<std::size_t>(j) * m + i] = k;
      }
  }

  int size() const { return grid_->size(); }
  double operator()(int i, int j) const { return K_[static_cast<std::size_t>(i) * size() + j]; }

  Vec apply(const Vec& q) const {
    const int m = size();
    Vec w(m, 0.0);
    for (int i = 0; i < m; ++i) {
      const double* row = &K_[static_cast<std::size_t>(i) * m];
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += row[j] * q[j];
      w[i] = grid_->weight() * s;
    }
    return w;
  }

 private:
  GridPtr grid_;
  Kernel kind_;
  std::vector<double> K_;
};

// (log|.| * u^2) at the interior nodes, fast path.
inline Field log_convolve(const Field& u) {
  const LogConvolver conv(u.grid);
  return Field(u.grid, conv.apply(squares(u)));
}

// Plain double loop over node pairs. Test oracle only.
inline double brute_force_chi0(const Field& u) {
  const Grid& g = *u.grid;
  const int m = g.size();
  if (m > KernelMatrix::max_nodes)
    fail(ErrorKind::parameter, "brute force: " + std::to_string(m) + " nodes exceeds oracle guard");
  const double h = g.h(), diag = cell_average_log(h), w2 = g.weight() * g.weight();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double qi = u.v[i] * u.v[i];
    for (int j = 0; j < m; ++j) {
      const double k = i == j ? diag
                              : std::log(h * std::hypot(static_cast<double>(g.col(i) - g.col(j)),
                                                        static_cast<double>(g.row(i) - g.row(j))));
      s += k * qi * u.v[j] * u.v[j];
    }
  }
  return w2 * s;
}

struct ChiForms {
  double full = 0.0;        // chi0, kernel log|x-y|
  double long_range = 0.0;  // chi1, kernel log(1+|x-y|)
  double singular = 0.0;    // chi2, kernel log(1+1/|x-y|)
};

// Holds one convolver per kernel for repeated evaluation on a grid.
class ChiEvaluator {
 public:
  explicit ChiEvaluator(const GridPtr& grid)
      : full_(grid, Kernel::full), long_(grid, Kernel::long_range), sing_(grid, Kernel::singular) {}

  ChiForms operator()(const Field& u, const Field& v) const {
    require_same_grid(u, v);
    const Vec qu = squares(u), qv = squares(v);
    const double w = u.grid->weight();
    ChiForms c;
    c.full = w * dot(qu, full_.apply(qv));
    c.long_range = w * dot(qu, long_.apply(qv));
    c.singular = w * dot(qu, sing_.apply(qv));
    return c;
  }

  double singular_only(const Field& u) const {
    const Vec q = squares(u);
    return u.grid->weight() * dot(q, sing_.apply(q));
  }

 private:
  LogConvolver full_, long_, sing_;
};

inline ChiForms chi_forms(const Field& u, const Field& v) {
  require_same_grid(u, v);
  return ChiEvaluator(u.grid)(u, v);
}

}  // namespace lognls
