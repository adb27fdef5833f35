#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rwseg/csr.hpp"
#include "rwseg/error.hpp"
#include "rwseg/graph.hpp"

namespace rwseg {

enum class SolveMethod { iterative, dense_direct };

struct SolveOptions {
  double tolerance = 1e-8;
  /// 0 means 10 * n_unseeded.
  long max_iterations = 0;
  SolveMethod method = SolveMethod::iterative;

  void validate() const {
    if (!(tolerance > 0.0)) throw Error(ErrorCode::invalid_input, "tolerance must be > 0");
    if (max_iterations < 0) throw Error(ErrorCode::invalid_input, "max_iterations must be >= 1");
  }
};

struct SolveStats {
  long iterations = 0;
  double relative_residual = 0.0;
  /// Conjugate gradients met non-positive curvature and MINRES finished the solve.
  bool indefinite = false;
};

inline constexpr std::size_t kDenseLimit = 4096;

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b) {
  std::vector<double> r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

/// ||b - Ax|| / max(||b||, 1)
inline double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b) {
  return norm(residual(a, x, b)) / std::max(norm(b), 1.0);
}

// Both criteria: relative 2-norm residual and the Jacobi-scaled residual
// max_i |r_i| / a_ii. The latter is exactly the per-pixel harmonic residual.
inline bool converged(std::span<const double> r, std::span<const double> diag, double bnorm, double tol) {
  if (norm(r) / std::max(bnorm, 1.0) > tol) return false;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (std::abs(r[i]) > tol * std::abs(diag[i])) return false;
  return true;
}

/// Jacobi-preconditioned MINRES (Paige-Saunders recurrences) from the
/// starting guess `x`; handles symmetric indefinite, nonsingular systems.
inline std::vector<double> minres(const CsrMatrix& a, std::span<const double> b, std::vector<double> x,
                                  std::span<const double> diag, const SolveOptions& opts, long it, long max_it,
                                  SolveStats* stats) {
  const std::size_t n = a.rows;
  const double bnorm = norm(b);
  std::vector<double> m(n);
  double max_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = std::abs(diag[i]);
    if (!(m[i] > 0.0)) throw Error(ErrorCode::singular_system, "zero diagonal entry");
    max_m = std::max(max_m, m[i]);
  }
  std::vector<double> r1 = residual(a, x, b);
  auto finish = [&](const std::vector<double>& r) {
    if (stats) *stats = {it, norm(r) / std::max(bnorm, 1.0), true};
    return x;
  };
  if (converged(r1, diag, bnorm, opts.tolerance)) return finish(r1);

  std::vector<double> y(n), r2 = r1, v(n), w(n, 0.0), w1(n), w2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = r1[i] / m[i];
  double beta = std::sqrt(dot(r1, y));
  double oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta, cs = -1.0, sn = 0.0;
  const double est_limit = opts.tolerance * std::max(bnorm, 1.0) / std::sqrt(max_m);
  for (long k = 1;; ++k, ++it) {
    if (it >= max_it) throw SolverFailure(norm(residual(a, x, b)) / std::max(bnorm, 1.0), it);
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    a.multiply(v, y);
    if (k >= 2)
      for (std::size_t i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
    const double alfa = dot(v, y);
    for (std::size_t i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
    r1.swap(r2);
    r2 = y;
    for (std::size_t i = 0; i < n; ++i) y[i] = r2[i] / m[i];
    oldb = beta;
    beta = std::sqrt(std::max(dot(r2, y), 0.0));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
      x[i] += phi * w[i];
    }
    if (phibar <= est_limit || beta == 0.0 || k % 50 == 0) {
      auto r = residual(a, x, b);
      if (converged(r, diag, bnorm, opts.tolerance)) {
        ++it;
        return finish(r);
      }
      if (beta == 0.0) throw SolverFailure(norm(r) / std::max(bnorm, 1.0), it + 1);
    }
  }
}

inline std::vector<double> pcg(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts,
                               SolveStats* stats) {
  const std::size_t n = a.rows;
  const long max_it = opts.max_iterations > 0 ? opts.max_iterations : static_cast<long>(10 * n);
  const std::vector<double> diag = a.diagonal();
  for (double d : diag)
    if (!(d > 0.0)) return minres(a, b, std::vector<double>(n, 0.0), diag, opts, 0, max_it, stats);

  const double bnorm = norm(b);
  std::vector<double> x(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), q(n);

  long it = 0;
  auto restart = [&] {
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    return dot(r, z);
  };
  double rz = restart();
  while (true) {
    if (converged(r, diag, bnorm, opts.tolerance)) {
      // Recurrence residuals drift; confirm against the true residual and
      // keep iterating from it if they disagree.
      r = residual(a, x, b);
      if (converged(r, diag, bnorm, opts.tolerance)) break;
      rz = restart();
    }
    if (it >= max_it) throw SolverFailure(norm(residual(a, x, b)) / std::max(bnorm, 1.0), it);
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) return minres(a, b, std::move(x), diag, opts, it, max_it, stats);
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;
  }
  if (stats) {
    stats->iterations = it;
    stats->relative_residual = norm(r) / std::max(bnorm, 1.0);
    stats->indefinite = false;
  }
  return x;
}

/// Dense Cholesky solve; rejects matrices that are not positive definite.
inline std::vector<double> cholesky_solve(const CsrMatrix& a, std::span<const double> b) {
  const std::size_t n = a.rows;
  if (n > kDenseLimit) throw Error(ErrorCode::oracle_too_large, "dense solve limited to 4096 unknowns");
  std::vector<double> l = a.to_dense();
  for (std::size_t j = 0; j < n; ++j) {
    double d = l[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) throw Error(ErrorCode::not_positive_definite, "cholesky pivot " + std::to_string(j) + " <= 0");
    d = std::sqrt(d);
    l[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = l[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / d;
    }
  }
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l[i * n + k] * y[k];
    y[i] /= l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l[k * n + i] * y[k];
    y[i] /= l[i * n + i];
  }
  return y;
}

}  // namespace detail

/// Solves A x = b for symmetric A. Iterative solves stop once
/// ||b - Ax|| / max(||b||, 1) <= tolerance and every |r_i| <= tolerance * |a_ii|.
/// Conjugate gradients switch to MINRES on an indefinite matrix; the dense
/// method is Cholesky and rejects it.
inline std::vector<double> solve_system(const CsrMatrix& a, std::span<const double> rhs,
                                        const SolveOptions& opts = {}, SolveStats* stats = nullptr) {
  opts.validate();
  if (a.rows != a.cols || rhs.size() != a.rows)
    throw Error(ErrorCode::dimension_mismatch, "system size does not match right-hand side");
  if (std::all_of(rhs.begin(), rhs.end(), [](double v) { return v == 0.0; })) {
    if (stats) *stats = {};
    return std::vector<double>(rhs.size(), 0.0);
  }
  if (opts.method == SolveMethod::dense_direct) {
    auto x = detail::cholesky_solve(a, rhs);
    const double rel = detail::relative_residual(a, x, rhs);
    if (rel > opts.tolerance) throw SolverFailure(rel, 0);
    if (stats) *stats = {0, rel};
    return x;
  }
  return detail::pcg(a, rhs, opts, stats);
}

inline std::vector<double> solve_system(const SparseLaplacian& lap, std::span<const double> rhs,
                                        const SolveOptions& opts = {}, SolveStats* stats = nullptr) {
  return solve_system(lap.lu, rhs, opts, stats);
}

/// Gaussian elimination with partial pivoting on the densified system.
/// Verification only: refuses more than 4096 unknowns.
inline std::vector<double> dense_oracle_solve(const CsrMatrix& a, std::span<const double> rhs) {
  const std::size_t n = a.rows;
  if (n > kDenseLimit)
    throw Error(ErrorCode::oracle_too_large, std::to_string(n) + " unknowns exceeds the oracle limit of 4096");
  if (a.cols != n || rhs.size() != n)
    throw Error(ErrorCode::dimension_mismatch, "system size does not match right-hand side");
  std::vector<double> m = a.to_dense();
  std::vector<double> x(rhs.begin(), rhs.end());
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  const double tiny = scale * 1e-14 * static_cast<double>(std::max<std::size_t>(n, 1));

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i * n + k]) > std::abs(m[piv * n + k])) piv = i;
    if (!(std::abs(m[piv * n + k]) > tiny))
      throw Error(ErrorCode::singular_system, "zero pivot in column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / m[k * n + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      x[i] -= f * x[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i * n + j] * x[j];
    x[i] = s / m[i * n + i];
  }
  return x;
}

inline std::vector<double> dense_oracle_solve(const SparseLaplacian& lap, std::span<const double> rhs) {
  return dense_oracle_solve(lap.lu, rhs);
}

}  // namespace rwseg
