#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace lognls {

using Vec = std::vector<double>;

// Sums run in index order so results are reproducible bit for bit.
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, Vec& x) {
  for (double& xi : x) xi *= alpha;
}

struct KrylovResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradients for SPD A. x holds the initial guess on entry.
template <class Op, class Prec>
KrylovResult pcg(const Op& apply_A, const Prec& apply_Minv, const Vec& b, Vec& x, double rtol,
                 int max_it) {
  const std::size_t m = b.size();
  KrylovResult out;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    out.converged = true;
    return out;
  }
  Vec r(m), z(m), p(m), q(m);
  apply_A(x, q);
  for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - q[i];
  apply_Minv(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_it; ++it) {
    apply_A(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double a = rz / pq;
    axpy(a, p, x);
    axpy(-a, q, r);
    out.iterations = it;
    out.rel_residual = norm2(r) / bnorm;
    if (out.rel_residual < rtol) {
      out.converged = true;
      return out;
    }
    apply_Minv(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
  }
  return out;
}

// Preconditioned MINRES (Paige and Saunders) for symmetric, possibly indefinite A with SPD
// preconditioner. Starts from x = 0; rel_residual is the preconditioned-norm estimate.
template <class Op, class Prec>
KrylovResult minres(const Op& apply_A, const Prec& apply_Minv, const Vec& b, Vec& x, double rtol,
                    int max_it) {
  const std::size_t m = b.size();
  KrylovResult out;
  x.assign(m, 0.0);
  Vec r1 = b, r2 = b, y(m), v(m), w(m, 0.0), w1(m, 0.0), w2(m, 0.0);
  apply_Minv(r1, y);
  const double beta1 = std::sqrt(std::max(dot(r1, y), 0.0));
  if (beta1 == 0.0) {
    out.converged = true;
    return out;
  }
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  const double tiny = std::numeric_limits<double>::epsilon();
  for (int it = 1; it <= max_it; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < m; ++i) v[i] = s * y[i];
    apply_A(v, y);
    if (it >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1.swap(r2);
    r2 = y;
    apply_Minv(r2, y);
    oldb = beta;
    beta = std::sqrt(std::max(dot(r2, y), 0.0));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < m; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    axpy(phi, w, x);
    out.iterations = it;
    out.rel_residual = phibar / beta1;
    if (out.rel_residual < rtol) {
      out.converged = true;
      return out;
    }
    if (beta == 0.0) break;
  }
  return out;
}

}  // namespace lognls
