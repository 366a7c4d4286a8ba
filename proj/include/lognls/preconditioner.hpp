#pragma once

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "grid.hpp"
#include "logkernel.hpp"

namespace lognls {

// Approximate inverse of (-Delta + shift) on a grid: zero-extend to the full box, solve the
// box Dirichlet problem exactly by a sine transform, restrict back. Symmetric positive definite
// for shift > -lambda1(box), so it is a valid preconditioner for CG and MINRES.
class BoxPreconditioner {
 public:
  explicit BoxPreconditioner(GridPtr grid) : grid_(std::move(grid)) {
    const Grid& g = *grid_;
    m_ = g.n() - 2;
    require(m_ >= 1, "box preconditioner: grid too small");
    buf_ = fftw_alloc_real(static_cast<std::size_t>(m_) * m_);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      plan_ = fftw_plan_r2r_2d(m_, m_, buf_, buf_, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    }
    const double h2 = g.h() * g.h();
    eig_.resize(m_);
    for (int k = 0; k < m_; ++k) {
      const double sn = std::sin(0.5 * std::numbers::pi * (k + 1) / (m_ + 1));
      eig_[k] = 4.0 * sn * sn / h2;
    }
  }
  ~BoxPreconditioner() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  BoxPreconditioner(const BoxPreconditioner&) = delete;
  BoxPreconditioner& operator=(const BoxPreconditioner&) = delete;

  double min_eigenvalue() const { return 2.0 * eig_[0]; }

  void apply(const Vec& in, Vec& out, double shift = 0.0) const {
    require(min_eigenvalue() + shift > 0.0, "box preconditioner: shift makes it indefinite");
    const Grid& g = *grid_;
    const std::size_t cells = static_cast<std::size_t>(m_) * m_;
    std::fill(buf_, buf_ + cells, 0.0);
    for (int k = 0; k < g.size(); ++k)
      buf_[static_cast<std::size_t>(g.row(k) - 1) * m_ + (g.col(k) - 1)] = in[k];
    fftw_execute(plan_);
    // RODFT00 applied twice scales by 2(m+1) per axis.
    const double norm = 4.0 * (m_ + 1.0) * (m_ + 1.0);
    for (int j = 0; j < m_; ++j)
      for (int i = 0; i < m_; ++i)
        buf_[static_cast<std::size_t>(j) * m_ + i] /= (eig_[i] + eig_[j] + shift) * norm;
    fftw_execute(plan_);
    out.resize(in.size());
    for (int k = 0; k < g.size(); ++k)
      out[k] = buf_[static_cast<std::size_t>(g.row(k) - 1) * m_ + (g.col(k) - 1)];
  }

 private:
  GridPtr grid_;
  int m_ = 0;
  double* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
  std::vector<double> eig_;
};

}  // namespace lognls
