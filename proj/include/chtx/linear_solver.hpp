#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "chtx/grid.hpp"
#include "chtx/operators.hpp"

namespace chtx {

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

struct SolveTolerance {
  double target = 1e-14;      // iterate until here when possible
  double acceptable = 1e-10;  // stagnating above this is a failure
  int max_iterations = 2000;
};

/// Solves (diag I - diffusion Laplacian) x = rhs by conjugate gradients.
///
/// The mirror-ghost Laplacian is self-adjoint in the dual-volume inner product,
/// so CG runs in that inner product. `x` holds the initial guess on entry.
inline SolveStats solve_shifted_laplacian(const Grid& grid, double diag, double diffusion,
                                          std::span<const double> rhs, std::span<double> x,
                                          const SolveTolerance& tol = {}) {
  const std::size_t n = grid.size();
  const auto w = grid.node_volumes();
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
  };
  std::vector<double> r(n), p(n), ap(n);
  auto apply = [&](std::span<const double> in, std::vector<double>& out) {
    apply_laplacian(grid, in, out);
    for (std::size_t i = 0; i < n; ++i) out[i] = diag * in[i] - diffusion * out[i];
  };

  double b_norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) b_norm_sq += w[i] * rhs[i] * rhs[i];
  const double b_norm = std::sqrt(b_norm_sq);

  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  double rr = dot(r, r);
  SolveStats stats;
  if (b_norm == 0.0) {
    // A is positive definite, so the solution is exactly zero.
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.0;
    stats.converged = true;
    return stats;
  }
  stats.relative_residual = std::sqrt(rr) / b_norm;
  p = r;
  double best = stats.relative_residual;
  int since_best = 0;
  while (stats.relative_residual > tol.target && stats.iterations < tol.max_iterations) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    ++stats.iterations;
    stats.relative_residual = std::sqrt(rr_new) / b_norm;
    if (stats.relative_residual < 0.5 * best) {
      best = stats.relative_residual;
      since_best = 0;
    } else if (++since_best > 20) {
      break;  // stagnated at round-off level
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  stats.converged = stats.relative_residual <= tol.acceptable;
  return stats;
}

}  // namespace chtx
