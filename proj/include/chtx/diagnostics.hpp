#pragma once

// Norms and functionals tracked along a run, and empirical surrogates for the
// two constants the boundedness threshold depends on but never states
// numerically (C_gamma and C_beta).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/linear_solver.hpp"
#include "chtx/operators.hpp"
#include "chtx/state.hpp"

namespace chtx {

struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0;            // int u
  double l2_v_sq = 0.0;           // int v^2
  double h1_v_seminorm_sq = 0.0;  // int |grad v|^2
  double linf_u = 0.0;
  double w1inf_v = 0.0;  // ||v||_inf + ||grad v||_inf
  std::vector<std::pair<double, double>> lp_u;  // (p, int u^p)
  double st_grad_v_sq = 0.0;  // int_0^t int |grad v|^2
  double st_u_r = 0.0;        // int_0^t int u^r
  double st_lap_v_sq = 0.0;   // int_0^t int |Lap v|^2

  // Instantaneous integrands behind the space-time accumulators.
  double u_r = 0.0;
  double lap_v_sq = 0.0;

  /// int u + int v^2 + int |grad v|^2
  double functional() const { return mass_u + l2_v_sq + h1_v_seminorm_sq; }

  bool operator==(const DiagnosticsRecord&) const = default;
};

/// Fills a record from the state. Accumulators advance from `previous` by the
/// trapezoidal rule in t; without a previous record they start at zero.
inline DiagnosticsRecord snapshot(const SimState& state, const SimParams& params,
                                  std::span<const double> p_list,
                                  const DiagnosticsRecord* previous = nullptr) {
  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.mass_u = integrate_power(state.u, 1.0);
  rec.l2_v_sq = integrate_power(state.v, 2.0);
  rec.h1_v_seminorm_sq = dirichlet_energy(state.v);
  rec.linf_u = state.u.sup_norm();
  rec.w1inf_v = state.v.sup_norm() + gradient_sup_norm(state.v);
  for (double p : p_list) rec.lp_u.emplace_back(p, integrate_power(state.u, p));
  rec.u_r = integrate_power(state.u, params.r);
  rec.lap_v_sq = integrate_power(laplacian(state.v), 2.0);
  if (previous != nullptr) {
    const double half_dt = 0.5 * (rec.t - previous->t);
    rec.st_grad_v_sq = previous->st_grad_v_sq + half_dt * (previous->h1_v_seminorm_sq + rec.h1_v_seminorm_sq);
    rec.st_u_r = previous->st_u_r + half_dt * (previous->u_r + rec.u_r);
    rec.st_lap_v_sq = previous->st_lap_v_sq + half_dt * (previous->lap_v_sq + rec.lap_v_sq);
  }
  return rec;
}

struct SpaceTimeTotals {
  double grad_v_sq = 0.0;
  double u_r = 0.0;
  double lap_v_sq = 0.0;
};

/// Recomputes the space-time accumulators from a finished record sequence.
inline SpaceTimeTotals accumulate_space_time(std::span<const DiagnosticsRecord> records) {
  SpaceTimeTotals totals;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double dt = records[i].t - records[i - 1].t;
    totals.grad_v_sq += 0.5 * dt * (records[i - 1].h1_v_seminorm_sq + records[i].h1_v_seminorm_sq);
    totals.u_r += 0.5 * dt * (records[i - 1].u_r + records[i].u_r);
    totals.lap_v_sq += 0.5 * dt * (records[i - 1].lap_v_sq + records[i].lap_v_sq);
  }
  return totals;
}

/// Times at which int u + int v^2 + int |grad v|^2 exceeds `bound`.
inline std::vector<double> apriori_violation(std::span<const DiagnosticsRecord> records, double bound) {
  require(!records.empty(), ErrorCode::InvalidArgument, "apriori_violation needs at least one record");
  std::vector<double> times;
  for (const auto& rec : records) {
    if (rec.functional() > bound) times.push_back(rec.t);
  }
  return times;
}

// --- CSV ---------------------------------------------------------------------

inline std::string diagnostics_csv_header(std::span<const double> p_list) {
  std::string h = "t,mass_u,l2_v_sq,h1_v_sq,linf_u,w1inf_v,st_grad_v_sq,st_u_r,st_lap_v_sq";
  for (double p : p_list) {
    char buf[48];
    std::snprintf(buf, sizeof buf, ",lp_u@%g", p);
    h += buf;
  }
  return h;
}

inline std::string diagnostics_csv_row(const DiagnosticsRecord& rec) {
  std::string row;
  char buf[32];
  auto put = [&](double x, bool first = false) {
    std::snprintf(buf, sizeof buf, "%.12e", x);
    if (!first) row += ',';
    row += buf;
  };
  put(rec.t, true);
  put(rec.mass_u);
  put(rec.l2_v_sq);
  put(rec.h1_v_seminorm_sq);
  put(rec.linf_u);
  put(rec.w1inf_v);
  put(rec.st_grad_v_sq);
  put(rec.st_u_r);
  put(rec.st_lap_v_sq);
  for (const auto& [p, value] : rec.lp_u) put(value);
  return row;
}

inline void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsRecord> records,
                                  std::span<const double> p_list) {
  out << diagnostics_csv_header(p_list) << '\n';
  for (const auto& rec : records) out << diagnostics_csv_row(rec) << '\n';
}

// --- C_beta surrogate --------------------------------------------------------

/// max{ xi beta + M2, xi ||w0||_inf, M2 } with M2 = max{2 xi sup|grad w0|, 2 sup|Lap w0|}.
/// Heuristic: the constant is assembled from the pieces of the w-term estimate,
/// which never combines them explicitly.
inline double c_beta_estimate(double xi, double w0_sup, double grad_w0_sup, double lap_w0_sup, double beta) {
  require(xi >= 0.0, ErrorCode::InvalidArgument, "c_beta_estimate requires xi >= 0");
  require(w0_sup >= 0.0 && grad_w0_sup >= 0.0 && lap_w0_sup >= 0.0 && beta > 0.0,
          ErrorCode::InvalidArgument, "c_beta_estimate requires nonnegative sups and beta > 0");
  const double m1 = xi * beta;
  const double m2 = std::max(2.0 * xi * grad_w0_sup, 2.0 * lap_w0_sup);
  return std::max({m1 + m2, xi * w0_sup, m2});
}

inline double c_beta_estimate(double xi, const ScalarField& w0, double beta) {
  return c_beta_estimate(xi, w0.sup_norm(), gradient_sup_norm(w0), laplacian(w0).sup_norm(), beta);
}

// --- C_gamma surrogate -------------------------------------------------------

/// g(x,t) = amplitude (offset + prod_k cos(modes_k pi x_k / L_k)) * (omega != 0 ? sin(omega t) : 1).
/// Axes beyond the grid dimension are ignored.
struct ForcingSpec {
  std::string name = "constant";
  double amplitude = 1.0;
  std::array<int, kMaxDim> modes{0, 0, 0};
  double offset = 0.0;
  double omega = 0.0;

  double spatial(const Grid& grid, std::size_t idx) const {
    double prod = 1.0;
    for (int k = 0; k < grid.dim(); ++k) {
      if (modes[k] != 0) {
        prod *= std::cos(modes[k] * std::numbers::pi * grid.coordinate(idx, k) / grid.extent(k));
      }
    }
    return offset + prod;
  }
  double temporal(double t) const { return omega != 0.0 ? std::sin(omega * t) : 1.0; }
};

/// Frozen eight-member forcing family the surrogate maximizes over.
inline std::vector<ForcingSpec> default_forcing_family() {
  return {
      {"constant", 1.0, {0, 0, 0}, 0.0, 0.0},
      {"cos1", 1.0, {1, 0, 0}, 0.0, 0.0},
      {"cos2", 1.0, {2, 0, 0}, 0.0, 0.0},
      {"cos1_all_axes", 1.0, {1, 1, 1}, 0.0, 0.0},
      {"cos1_sin1t", 1.0, {1, 0, 0}, 0.0, 1.0},
      {"cos2_sin4t", 1.0, {2, 0, 0}, 0.0, 4.0},
      {"one_plus_cos1", 1.0, {1, 0, 0}, 1.0, 0.0},
      {"cos3", 1.0, {3, 0, 0}, 0.0, 0.0},
  };
}

struct CregEstimate {
  double ratio = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  bool zero_forcing = false;  // 0/0 guarded; ratio reported as 0
};

struct CregSettings {
  double t_end = 1.0;
  double dt = 1e-2;
};

/// Solves v_t = Lap v - v + g from v = 0 (Crank-Nicolson) and returns
///   int e^{gamma s} (||v||_gamma^gamma + ||Lap v||_gamma^gamma) ds / int e^{gamma s} ||g||_gamma^gamma ds,
/// an empirical lower witness for the maximal-regularity constant.
inline CregEstimate maximal_regularity_estimate(double gamma, const ForcingSpec& forcing, const GridPtr& grid,
                                                const CregSettings& settings = {}) {
  require(gamma > 1.0, ErrorCode::InvalidArgument, "maximal_regularity_estimate requires gamma > 1");
  require(settings.t_end > 0.0 && settings.dt > 0.0, ErrorCode::InvalidArgument,
          "maximal_regularity_estimate requires positive t_end and dt");
  const std::size_t n = grid->size();
  const int steps = static_cast<int>(std::ceil(settings.t_end / settings.dt - 1e-9));
  const double dt = settings.t_end / steps;

  std::vector<double> shape(n);
  for (std::size_t i = 0; i < n; ++i) shape[i] = forcing.amplitude * forcing.spatial(*grid, i);

  ScalarField v(grid, 0.0);
  ScalarField lap(grid, 0.0);
  ScalarField g(grid, 0.0);
  std::vector<double> rhs(n);

  auto norm_gamma = [&](const ScalarField& f) {
    double s = 0.0;
    const auto vals = f.values();
    for (std::size_t i = 0; i < n; ++i) s += grid->node_volume(i) * std::pow(std::abs(vals[i]), gamma);
    return s;
  };
  auto fill_forcing = [&](double t) {
    const double tf = forcing.temporal(t);
    for (std::size_t i = 0; i < n; ++i) g[i] = shape[i] * tf;
  };
  // Weights e^{gamma (s - T)}; the common factor e^{gamma T} cancels in the ratio.
  auto weight = [&](double t) { return std::exp(gamma * (t - settings.t_end)); };

  fill_forcing(0.0);
  double num_prev = weight(0.0) * (norm_gamma(v) + norm_gamma(lap));
  double den_prev = weight(0.0) * norm_gamma(g);
  double numerator = 0.0;
  double denominator = 0.0;
  for (int s = 1; s <= steps; ++s) {
    const double t_old = (s - 1) * dt;
    const double t_new = s == steps ? settings.t_end : s * dt;
    const double h = t_new - t_old;
    const auto g_old = std::vector<double>(g.values().begin(), g.values().end());
    fill_forcing(t_new);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = (1.0 - 0.5 * h) * v[i] + 0.5 * h * lap[i] + 0.5 * h * (g_old[i] + g[i]);
    }
    const auto stats = solve_shifted_laplacian(*grid, 1.0 + 0.5 * h, 0.5 * h, rhs, v.values());
    require(stats.converged, ErrorCode::SolverDivergence, "Crank-Nicolson solve did not converge");
    apply_laplacian(*grid, v.values(), lap.values());
    const double num_new = weight(t_new) * (norm_gamma(v) + norm_gamma(lap));
    const double den_new = weight(t_new) * norm_gamma(g);
    numerator += 0.5 * h * (num_prev + num_new);
    denominator += 0.5 * h * (den_prev + den_new);
    num_prev = num_new;
    den_prev = den_new;
  }

  CregEstimate out;
  out.numerator = numerator;
  out.denominator = denominator;
  if (denominator == 0.0) {
    out.zero_forcing = true;
    out.ratio = 0.0;
  } else {
    out.ratio = numerator / denominator;
  }
  return out;
}

struct CregFamilyEstimate {
  double max_ratio = 0.0;
  std::vector<std::pair<std::string, double>> members;
};

/// Maximum of maximal_regularity_estimate over default_forcing_family().
inline CregFamilyEstimate estimate_c_reg(double gamma, const GridPtr& grid, const CregSettings& settings = {}) {
  CregFamilyEstimate out;
  for (const auto& forcing : default_forcing_family()) {
    const double ratio = maximal_regularity_estimate(gamma, forcing, grid, settings).ratio;
    out.members.emplace_back(forcing.name, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

}  // namespace chtx
