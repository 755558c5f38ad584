#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/grid.hpp"
#include "chtx/operators.hpp"

namespace chtx {

/// Coefficients of
///   u_t = Lap u - chi div(u grad v) - xi div(u grad w) + u (a - mu u^{r-1} - w)
///   v_t = Lap v - v + u
///   w_t = -v w
/// plus the grid and the step-control settings.
struct SimParams {
  double chi = 1.0;
  double xi = 1.0;
  double mu = 1.0;
  double a = 1.0;
  double r = 2.0;
  GridPtr grid;
  double t_end = 1.0;
  double dt_init = 1e-3;  // first step and upper cap on every step
  double dt_min = 1e-10;
  double linf_cap = 1e6;
  double cfl_safety = 0.9;
  FluxScheme flux_scheme = FluxScheme::Upwind;

  void validate() const {
    auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::ConfigValidation, what); };
    check(grid != nullptr, "a grid is required");
    check(std::isfinite(chi) && chi >= 0.0, "chi must be >= 0");
    check(std::isfinite(xi) && xi >= 0.0, "xi must be >= 0");
    check(std::isfinite(mu) && mu >= 0.0, "mu must be >= 0");
    check(std::isfinite(a), "a must be finite");
    check(std::isfinite(r) && r > 1.0, "r must satisfy r > 1 (generalized logistic exponent)");
    check(std::isfinite(t_end) && t_end > 0.0, "t_end must be > 0");
    check(dt_init > 0.0, "dt_init must be > 0");
    check(dt_min > 0.0 && dt_min <= dt_init, "dt_min must satisfy 0 < dt_min <= dt_init");
    check(linf_cap > 0.0, "linf_cap must be > 0");
    check(cfl_safety > 0.0 && cfl_safety < 1.0, "cfl_safety must lie in (0,1)");
  }

  bool operator==(const SimParams& o) const {
    return chi == o.chi && xi == o.xi && mu == o.mu && a == o.a && r == o.r &&
           ((grid == o.grid) || (grid && o.grid && *grid == *o.grid)) && t_end == o.t_end &&
           dt_init == o.dt_init && dt_min == o.dt_min && linf_cap == o.linf_cap &&
           cfl_safety == o.cfl_safety && flux_scheme == o.flux_scheme;
  }
};

/// Initial data that passed validate_initial_data().
struct InitialData {
  ScalarField u0;
  ScalarField v0;
  ScalarField w0;
};

/// Fields at time t. `v_accum` holds V(x,t) = int_0^t v ds (trapezoidal) and
/// `w0` the initial ECM density, so that w = w0 exp(-V) at every step.
struct SimState {
  double t = 0.0;
  ScalarField u;
  ScalarField v;
  ScalarField w;
  ScalarField v_accum;
  ScalarField w0;
  std::int64_t step_count = 0;

  const Grid& grid() const { return u.grid(); }
};

inline constexpr double kDefaultFluxTolerance = 0.05;

/// Checks nonnegativity, u0 not identically zero, and that the second-order
/// one-sided normal difference quotient of w0 at every boundary node stays below
/// flux_tolerance * max(1, ||w0||_inf).
inline InitialData validate_initial_data(ScalarField u0, ScalarField v0, ScalarField w0,
                                         double flux_tolerance = kDefaultFluxTolerance) {
  require(u0.same_grid(v0) && u0.same_grid(w0), ErrorCode::InvalidArgument,
          "initial fields must share one grid");
  require(u0.min() >= 0.0, ErrorCode::InitialNegative, "u0 must be nonnegative");
  require(v0.min() >= 0.0, ErrorCode::InitialNegative, "v0 must be nonnegative");
  require(w0.min() >= 0.0, ErrorCode::InitialNegative, "w0 must be nonnegative");
  require(u0.max() > 0.0, ErrorCode::InitialZero, "u0 must not vanish identically");

  const Grid& grid = w0.grid();
  const auto w = w0.values();
  const double limit = flux_tolerance * std::max(1.0, w0.sup_norm());
  for (int k = 0; k < grid.dim(); ++k) {
    const double h = grid.spacing(k);
    for_each_line(grid, k, [&](std::size_t start, std::size_t stride, int n) {
      const std::size_t first = start;
      const std::size_t last = start + static_cast<std::size_t>(n - 1) * stride;
      const double lo_flux = std::abs(-3.0 * w[first] + 4.0 * w[first + stride] - w[first + 2 * stride]) / (2.0 * h);
      const double hi_flux = std::abs(3.0 * w[last] - 4.0 * w[last - stride] + w[last - 2 * stride]) / (2.0 * h);
      if (lo_flux > limit || hi_flux > limit) {
        fail(ErrorCode::InitialFluxViolation,
             "w0 violates the zero normal-flux condition on axis " + std::to_string(k) +
                 " (normal derivative " + std::to_string(std::max(lo_flux, hi_flux)) + ")");
      }
    });
  }
  // Share one grid instance between the three fields.
  GridPtr g = u0.grid_ptr();
  auto rebind = [&](ScalarField& f) {
    if (f.grid_ptr() != g) f = ScalarField(g, std::vector<double>(f.values().begin(), f.values().end()));
  };
  rebind(v0);
  rebind(w0);
  return InitialData{std::move(u0), std::move(v0), std::move(w0)};
}

inline SimState make_initial_state(const InitialData& init) {
  SimState s;
  s.u = init.u0;
  s.v = init.v0;
  s.w = init.w0;
  s.w0 = init.w0;
  s.v_accum = ScalarField(init.u0.grid_ptr(), 0.0);
  return s;
}

}  // namespace chtx
