#pragma once

// Closed-form constants of the boundedness analysis for the
// chemotaxis-haptotaxis system with logistic damping u(a - mu u^{r-1} - w).
//
// Every routine here is a pure function. Constants the analysis never gives
// numerically (the maximal-regularity constant C_gamma and C_beta) are caller
// inputs; see diagnostics.hpp for empirical surrogates.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chtx/error.hpp"

namespace chtx {

/// Weight of the Young splitting used to absorb the taxis terms:
///   A1(delta) = 1/(delta+1) * ((delta+1)/delta)^(-delta) * ((delta-1)/delta)^(delta+1).
/// Vanishes at delta = 1.
inline double a1_coefficient(double delta) {
  require(delta >= 1.0, ErrorCode::DomainError, "a1_coefficient requires delta >= 1");
  const double log_a1 = -std::log(delta + 1.0) - delta * std::log((delta + 1.0) / delta);
  const double tail = std::pow((delta - 1.0) / delta, delta + 1.0);
  return std::exp(log_a1) * tail;
}

struct YoungMinimum {
  double y_star = 0.0;
  double min_value = 0.0;
};

/// H(y) = y + A1(delta) y^{-delta} coeff^{delta+1} c_reg.
/// coeff = chi gives H, coeff = C_beta gives the tilde variant.
inline double young_objective(double y, double delta, double coeff, double c_reg) {
  return y + a1_coefficient(delta) * std::pow(y, -delta) * std::pow(coeff, delta + 1.0) * c_reg;
}

/// Closed-form minimizer of young_objective over y > 0.
/// For delta == 1 there is no interior minimizer; use young_infimum_at_unit_delta().
inline YoungMinimum minimize_weighted_young(double delta, double coeff, double c_reg) {
  require(delta > 1.0, ErrorCode::DomainError,
          "minimize_weighted_young requires delta > 1 (delta == 1 has infimum 0, no argmin)");
  require(coeff > 0.0 && c_reg > 0.0, ErrorCode::InvalidArgument,
          "minimize_weighted_young requires coeff > 0 and c_reg > 0");
  YoungMinimum out;
  out.y_star = std::pow(a1_coefficient(delta) * c_reg * delta, 1.0 / (delta + 1.0)) * coeff;
  out.min_value = (delta - 1.0) / delta * std::pow(c_reg, 1.0 / (delta + 1.0)) * coeff;
  return out;
}

/// Limit of min H as delta -> 1+: A1 = 0 so H(y) = y and the infimum over y > 0 is 0.
constexpr double young_infimum_at_unit_delta() { return 0.0; }

/// mu* = ((N-2)_+ / N) (chi + C_beta) c_reg^{1/(N/2+1)}, c_reg standing in for C_{N/2+1}.
inline double mu_star(int dim, double chi, double c_beta, double c_reg) {
  require(dim > 0, ErrorCode::InvalidArgument, "mu_star requires N >= 1");
  require(chi > 0.0 && c_beta > 0.0 && c_reg > 0.0, ErrorCode::InvalidArgument,
          "mu_star requires chi, c_beta, c_reg > 0");
  if (dim <= 2) return 0.0;
  const double n = static_cast<double>(dim);
  return (n - 2.0) / n * (chi + c_beta) * std::pow(c_reg, 1.0 / (n / 2.0 + 1.0));
}

inline constexpr int kQ0GridPoints = 10000;
inline constexpr double kQ0GridOffset = 50.0;

/// Geometric grid from N/2 (1 + 1e-3) to N/2 + 50 with 10^4 points.
inline std::vector<double> q0_search_grid(int dim) {
  require(dim > 0, ErrorCode::InvalidArgument, "q0_search_grid requires N >= 1");
  const double half = dim / 2.0;
  const double lo = half * (1.0 + 1e-3);
  const double hi = half + kQ0GridOffset;
  const double log_ratio = std::log(hi / lo);
  std::vector<double> grid(kQ0GridPoints);
  for (int j = 0; j < kQ0GridPoints; ++j) {
    grid[j] = lo * std::exp(log_ratio * j / (kQ0GridPoints - 1));
  }
  grid.back() = hi;
  return grid;
}

/// Left-hand side ((q0-1)/q0)(C_beta + chi) C_{q0+1}^{1/(q0+1)} of the q0 admissibility test.
inline double q0_condition_value(double q0, double chi, double c_beta,
                                 const std::function<double(double)>& c_reg_at) {
  const double c = c_reg_at(q0 + 1.0);
  return (q0 - 1.0) / q0 * (c_beta + chi) * std::pow(c, 1.0 / (q0 + 1.0));
}

/// Smallest q0 on q0_search_grid(dim) with q0_condition_value(q0) < mu, if any.
inline std::optional<double> select_q0(int dim, double mu, double chi, double c_beta,
                                       const std::function<double(double)>& c_reg_at) {
  require(mu > 0.0, ErrorCode::InvalidArgument, "select_q0 requires mu > 0");
  for (double q0 : q0_search_grid(dim)) {
    if (q0_condition_value(q0, chi, c_beta, c_reg_at) < mu) return q0;
  }
  return std::nullopt;
}

/// Interpolation exponent for ||u^{p/2}||_{L^{2 q0/(q0-1)}} against ||grad u^{p/2}||_2 and
/// ||u^{p/2}||_{L^{2 q0/p}}:
///   p (N/(2 q0) - N / (2 (q0/(q0-1)) p)) / (1 - N/2 + N p / (2 q0)).
inline double gn_exponent(double p, double q0, int dim) {
  require(dim > 0, ErrorCode::InvalidArgument, "gn_exponent requires N >= 1");
  const double n = static_cast<double>(dim);
  require(q0 > n / 2.0, ErrorCode::DomainError, "gn_exponent requires q0 > N/2");
  require(q0 > 1.0, ErrorCode::DomainError, "gn_exponent requires q0 > 1");
  require(p > q0 - 1.0, ErrorCode::DomainError, "gn_exponent requires p > q0 - 1");
  const double conjugate = q0 / (q0 - 1.0);
  const double numerator = p * (n / (2.0 * q0) - n / (2.0 * conjugate * p));
  const double denominator = 1.0 - n / 2.0 + n * p / (2.0 * q0);
  const double value = numerator / denominator;
  require(value > 0.0 && value < 1.0, ErrorCode::DomainError,
          "gn_exponent left (0,1): " + std::to_string(value));
  return value;
}

struct ThresholdReport {
  int dimension = 0;
  double chi = 0.0;
  double c_beta = 0.0;
  double c_reg = 0.0;
  double mu_star = 0.0;
  std::optional<double> mu;
  std::optional<double> q0;
};

/// mu* for the given constants; when mu is supplied, also selects q0 with a constant c_reg.
inline ThresholdReport threshold_report(int dim, double chi, double c_beta, double c_reg,
                                        std::optional<double> mu = std::nullopt) {
  ThresholdReport report;
  report.dimension = dim;
  report.chi = chi;
  report.c_beta = c_beta;
  report.c_reg = c_reg;
  report.mu_star = mu_star(dim, chi, c_beta, c_reg);
  report.mu = mu;
  if (mu && *mu > 0.0) {
    report.q0 = select_q0(dim, *mu, chi, c_beta, [c_reg](double) { return c_reg; });
  }
  return report;
}

// Moser iteration bookkeeping. All bounds are held as natural logarithms since
// M_i ~ M_0^{2^i}.

struct MoserLevel {
  int i = 0;
  double p = 1.0;                   // p_i = 2^i
  double log_bound = 0.0;           // log M_i from M_i = lambda^i M_{i-1}^2
  double log_bound_closed = 0.0;    // log of lambda^{i + i(i-1)/2} M_0^{2^i}
  double log_bound_unrolled = 0.0;  // log of lambda^{2^{i+1} - i - 2} M_0^{2^i}
  double root = 1.0;                // M_i^{1/p_i} from the recursion
  double root_closed = 1.0;         // closed-form bound ^ (1/p_i)
};

struct MoserTrace {
  double m0 = 1.0;
  double lambda = 1.0;
  std::vector<MoserLevel> levels;
  double recursion_sup_root = 1.0;
  double closed_form_sup_root = 1.0;
};

/// Runs M_i = lambda^i M_{i-1}^2 for i = 1..i_max next to the closed form
/// lambda^{i + sum_{j=2}^i (j-1)} M_0^{2^i} and records the p_i-th roots of both.
///
/// The two coincide only for i <= 1: unrolling the recursion gives the exponent
/// sum_{k=1}^i k 2^{i-k} = 2^{i+1} - i - 2, which is also recorded.
inline MoserTrace moser_sup_bound(double m0, double lambda, int i_max) {
  require(m0 >= 1.0, ErrorCode::InvalidArgument, "moser_sup_bound requires m0 >= 1");
  require(lambda > 1.0, ErrorCode::InvalidArgument, "moser_sup_bound requires lambda > 1");
  require(i_max > 0, ErrorCode::InvalidArgument, "moser_sup_bound requires i_max >= 1");
  MoserTrace trace;
  trace.m0 = m0;
  trace.lambda = lambda;
  const double log_lambda = std::log(lambda);
  const double log_m0 = std::log(m0);

  double log_prev = log_m0;
  trace.levels.push_back({0, 1.0, log_m0, log_m0, log_m0, m0, m0});
  trace.recursion_sup_root = m0;
  trace.closed_form_sup_root = m0;
  for (int i = 1; i <= i_max; ++i) {
    MoserLevel level;
    level.i = i;
    level.p = std::ldexp(1.0, i);
    level.log_bound = i * log_lambda + 2.0 * log_prev;
    const double di = static_cast<double>(i);
    level.log_bound_closed = (di + di * (di - 1.0) / 2.0) * log_lambda + level.p * log_m0;
    level.log_bound_unrolled = (std::ldexp(1.0, i + 1) - di - 2.0) * log_lambda + level.p * log_m0;
    level.root = std::exp(level.log_bound / level.p);
    level.root_closed = std::exp(level.log_bound_closed / level.p);
    trace.recursion_sup_root = std::max(trace.recursion_sup_root, level.root);
    trace.closed_form_sup_root = std::max(trace.closed_form_sup_root, level.root_closed);
    trace.levels.push_back(level);
    log_prev = level.log_bound;
  }
  return trace;
}

}  // namespace chtx
