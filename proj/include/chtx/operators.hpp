#pragma once

// Discrete spatial operators with homogeneous Neumann boundaries.
//
// Fluxes live on the faces between neighbouring nodes. Dividing the flux
// difference by the dual-cell width reproduces the mirror-ghost stencil
// f_{-1} = f_{1} at boundary nodes, and the volume-weighted sum of any
// divergence telescopes to zero.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/grid.hpp"

namespace chtx {

enum class FluxScheme {
  Upwind,   // first-order donor cell, positivity preserving
  Central,  // arithmetic face average; convergence studies only
};

/// out = Laplacian(in). `out` is overwritten.
inline void apply_laplacian(const Grid& grid, std::span<const double> in, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int k = 0; k < grid.dim(); ++k) {
    const double h = grid.spacing(k);
    for_each_face(grid, k, [&](std::size_t lo, std::size_t hi, int i) {
      const double d = (in[hi] - in[lo]) / h;
      out[lo] += d / grid.dual_width(k, i);
      out[hi] -= d / grid.dual_width(k, i + 1);
    });
  }
}

inline ScalarField laplacian(const ScalarField& f) {
  ScalarField out(f.grid_ptr());
  apply_laplacian(f.grid(), f.values(), out.values());
  out.debug_check_finite("laplacian");
  return out;
}

/// Largest Euclidean norm of the nodal gradient; centered differences inside,
/// one-sided at boundary nodes.
inline double gradient_sup_norm(const ScalarField& f) {
  const Grid& grid = f.grid();
  const auto in = f.values();
  std::vector<double> sq(grid.size(), 0.0);
  for (int k = 0; k < grid.dim(); ++k) {
    const double h = grid.spacing(k);
    for_each_line(grid, k, [&](std::size_t start, std::size_t stride, int n) {
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = start + static_cast<std::size_t>(i) * stride;
        double d;
        if (i == 0) {
          d = (in[idx + stride] - in[idx]) / h;
        } else if (i == n - 1) {
          d = (in[idx] - in[idx - stride]) / h;
        } else {
          d = (in[idx + stride] - in[idx - stride]) / (2.0 * h);
        }
        sq[idx] += d * d;
      }
    });
  }
  double m = 0.0;
  for (double s : sq) m = std::max(m, s);
  return std::sqrt(m);
}

/// Adds scale * div(coeff * density * grad potential) to out.
///
/// The face velocity is coeff * (potential_hi - potential_lo) / h; with the
/// upwind scheme the face density is taken from the node the velocity points
/// away from.
inline void accumulate_advective_divergence(const Grid& grid, std::span<const double> density,
                                            std::span<const double> potential, double coeff,
                                            double scale, std::span<double> out,
                                            FluxScheme scheme = FluxScheme::Upwind) {
  for (int k = 0; k < grid.dim(); ++k) {
    const double h = grid.spacing(k);
    for_each_face(grid, k, [&](std::size_t lo, std::size_t hi, int i) {
      const double velocity = coeff * (potential[hi] - potential[lo]) / h;
      double face_density;
      if (scheme == FluxScheme::Upwind) {
        face_density = velocity > 0.0 ? density[lo] : density[hi];
      } else {
        face_density = 0.5 * (density[lo] + density[hi]);
      }
      const double flux = scale * velocity * face_density;
      out[lo] += flux / grid.dual_width(k, i);
      out[hi] -= flux / grid.dual_width(k, i + 1);
    });
  }
}

inline constexpr double kDensityNegativityTolerance = 1e-13;

/// div(coeff * density * grad potential), conservative with zero boundary flux.
inline ScalarField advective_divergence(const ScalarField& density, const ScalarField& potential,
                                        double coeff, FluxScheme scheme = FluxScheme::Upwind) {
  require(density.same_grid(potential), ErrorCode::InvalidArgument,
          "advective_divergence needs fields on one grid");
  require(density.min() >= -kDensityNegativityTolerance, ErrorCode::NegativeDensity,
          "advective_divergence received a negative density");
  ScalarField out(density.grid_ptr());
  accumulate_advective_divergence(density.grid(), density.values(), potential.values(), coeff, 1.0,
                                  out.values(), scheme);
  out.debug_check_finite("advective_divergence");
  return out;
}

/// Largest |coeff * d(potential)/dn| over the faces normal to `axis`.
inline double max_face_speed(const Grid& grid, std::span<const double> potential, double coeff, int axis) {
  const double h = grid.spacing(axis);
  double m = 0.0;
  for_each_face(grid, axis, [&](std::size_t lo, std::size_t hi, int) {
    m = std::max(m, std::abs(coeff * (potential[hi] - potential[lo]) / h));
  });
  return m;
}

/// Dual-cell weighted sum of f^p (trapezoidal on nodes).
inline double integrate_power(const ScalarField& f, double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorCode::InvalidArgument, "integrate_power requires p >= 1");
  const Grid& grid = f.grid();
  const auto v = f.values();
  const bool integer_p = std::floor(p) == p;
  double sum = 0.0;
  if (p == 1.0) {
    for (std::size_t i = 0; i < v.size(); ++i) sum += grid.node_volume(i) * v[i];
  } else if (p == 2.0) {
    for (std::size_t i = 0; i < v.size(); ++i) sum += grid.node_volume(i) * (v[i] * v[i]);
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0.0 && !integer_p) {
        fail(ErrorCode::DomainError, "integrate_power: negative base with fractional exponent");
      }
      sum += grid.node_volume(i) * std::pow(v[i], p);
    }
  }
  return sum;
}

inline double integrate(const ScalarField& f) { return integrate_power(f, 1.0); }

/// Discrete Dirichlet energy: sum over faces of (face area * h) * (difference / h)^2.
/// Equals -<Laplacian f, f> in the dual-volume inner product.
inline double dirichlet_energy(const ScalarField& f) {
  const Grid& grid = f.grid();
  const auto in = f.values();
  double sum = 0.0;
  for (int k = 0; k < grid.dim(); ++k) {
    const double h = grid.spacing(k);
    for_each_face(grid, k, [&](std::size_t lo, std::size_t hi, int i) {
      // face area times h equals the lo dual volume rescaled to a full cell along k
      const double weight = grid.node_volume(lo) / grid.dual_width(k, i) * h;
      const double d = (in[hi] - in[lo]) / h;
      sum += weight * d * d;
    });
  }
  return sum;
}

}  // namespace chtx
