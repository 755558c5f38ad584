#pragma once

// Time integration of the chemotaxis-haptotaxis system.
//
// One step of size dt, in this order:
//   1. v: backward Euler for v_t = Lap v - v + u with u frozen at t_n
//   2. V += dt (v_n + v_{n+1}) / 2
//   3. w = w0 exp(-V)
//   4. u: explicit upwind taxis against v_{n+1}, w_{n+1}; backward-Euler
//      diffusion; then the reaction as a Patankar-type update
//        u_{n+1} = u^ (1 + dt a+) / (1 + dt (a- + mu u^{r-1} + w_{n+1}))
//      with u^ the post-transport value.
// Every stage maps nonnegative data to nonnegative data under the step limit
// in stable_time_step().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chtx/diagnostics.hpp"
#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/field_io.hpp"
#include "chtx/linear_solver.hpp"
#include "chtx/operators.hpp"
#include "chtx/state.hpp"

namespace chtx {

inline constexpr double kClampTolerance = 1e-14;
inline constexpr int kMaxStepRetries = 20;

namespace detail {

/// Zeroes negatives of magnitude <= kClampTolerance * max(1, sup); larger ones are an error.
inline void clamp_round_off(std::span<double> values, const char* name) {
  double sup = 1.0;
  for (double x : values) {
    if (!std::isfinite(x)) fail(ErrorCode::NonFinite, std::string("non-finite ") + name);
    sup = std::max(sup, std::abs(x));
  }
  const double tol = kClampTolerance * sup;
  for (double& x : values) {
    if (x < 0.0) {
      if (x < -tol) fail(ErrorCode::InvariantViolation, std::string("negative ") + name);
      x = 0.0;
    }
  }
}

inline double sink_power(double u, double r) {
  if (r == 2.0) return u;
  if (r == 3.0) return u * u;
  return std::pow(u, r - 1.0);
}

}  // namespace detail

/// Largest step the explicit parts tolerate:
///   cfl_safety * min_k h_k^2 / (2 d + 4 d h_k s_k),
/// with s_k the largest taxis face speed chi |dv/dn| + xi |dw/dn| across axis k,
/// capped by dt_init.
inline double stable_time_step(const SimState& state, const SimParams& params) {
  const Grid& grid = state.grid();
  const double d = grid.dim();
  double dt = params.dt_init;
  for (int k = 0; k < grid.dim(); ++k) {
    const double h = grid.spacing(k);
    double speed = 0.0;
    if (params.chi != 0.0) speed += max_face_speed(grid, state.v.values(), params.chi, k);
    if (params.xi != 0.0) speed += max_face_speed(grid, state.w.values(), params.xi, k);
    dt = std::min(dt, params.cfl_safety * h * h / (2.0 * d + 4.0 * d * h * speed));
  }
  return dt;
}

/// Advances one step of size dt. Throws Error with InvariantViolation,
/// SolverDivergence or NonFinite when the step must be retried smaller.
inline SimState step(const SimState& state, double dt, const SimParams& params) {
  require(dt > 0.0, ErrorCode::InvalidArgument, "step requires dt > 0");
  const Grid& grid = state.grid();
  const std::size_t n = grid.size();
  const SolveTolerance tol{};

  SimState next;
  next.t = state.t + dt;
  next.step_count = state.step_count + 1;
  next.w0 = state.w0;

  // (1) (1 + dt) v - dt Lap v = v_n + dt u_n
  next.v = state.v;
  {
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = state.v[i] + dt * state.u[i];
    const auto stats = solve_shifted_laplacian(grid, 1.0 + dt, dt, rhs, next.v.values(), tol);
    if (!stats.converged) fail(ErrorCode::SolverDivergence, "v solve did not converge");
    detail::clamp_round_off(next.v.values(), "v");
  }

  // (2), (3)
  next.v_accum = state.v_accum;
  next.w = ScalarField(state.u.grid_ptr(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    next.v_accum[i] = state.v_accum[i] + 0.5 * dt * (state.v[i] + next.v[i]);
    next.w[i] = state.w0[i] * std::exp(-next.v_accum[i]);
  }

  // (4) transport
  next.u = state.u;
  if (params.chi != 0.0) {
    accumulate_advective_divergence(grid, state.u.values(), next.v.values(), params.chi, -dt,
                                    next.u.values(), params.flux_scheme);
  }
  if (params.xi != 0.0) {
    accumulate_advective_divergence(grid, state.u.values(), next.w.values(), params.xi, -dt,
                                    next.u.values(), params.flux_scheme);
  }
  detail::clamp_round_off(next.u.values(), "u after taxis");
  {
    const std::vector<double> rhs(next.u.values().begin(), next.u.values().end());
    const auto stats = solve_shifted_laplacian(grid, 1.0, dt, rhs, next.u.values(), tol);
    if (!stats.converged) fail(ErrorCode::SolverDivergence, "u diffusion solve did not converge");
    detail::clamp_round_off(next.u.values(), "u after diffusion");
  }

  // reaction
  const double growth = std::max(params.a, 0.0);
  const double decay = std::max(-params.a, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u_hat = next.u[i];
    const double sink = decay + params.mu * detail::sink_power(u_hat, params.r) + next.w[i];
    next.u[i] = u_hat * (1.0 + dt * growth) / (1.0 + dt * sink);
  }
  next.u.check_finite("u after reaction");
  return next;
}

/// ||u||_inf + ||v||_inf + ||grad v||_inf > cap
inline bool blow_up_check(const SimState& state, double cap) {
  return state.u.sup_norm() + state.v.sup_norm() + gradient_sup_norm(state.v) > cap;
}

enum class RunStatus { Completed, BlowUpDetected, StepSizeUnderflow };

inline const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::BlowUpDetected: return "BlowUpDetected";
    case RunStatus::StepSizeUnderflow: return "StepSizeUnderflow";
  }
  return "Unknown";
}

struct RunOutcome {
  RunStatus status = RunStatus::Completed;
  double t_event = 0.0;  // detection / failure time; t reached when Completed
  std::vector<DiagnosticsRecord> records;
  SimState final_state;
  std::string message;
};

/// Called after every accepted step with the states before and after it.
using StepObserver = std::function<void(const SimState&, const SimState&)>;

struct RunOptions {
  double record_every = 1.0;
  std::vector<double> p_list{2.0};
  StepObserver observer;
};

/// Everything needed to continue a run bit-exactly.
struct RunProgress {
  SimState state;
  std::int64_t next_record = 1;  // index k of the next record time min(k * record_every, t_end)
  std::optional<DiagnosticsRecord> last_record;
};

inline double record_time(std::int64_t k, double record_every, double t_end) {
  return std::min(static_cast<double>(k) * record_every, t_end);
}

/// Advances `progress` until t_stop (clamped to t_end), blow-up, or step underflow.
/// Returns the records emitted during this call.
inline RunOutcome advance(const SimParams& params, RunProgress& progress, const RunOptions& options,
                          double t_stop) {
  require(options.record_every > 0.0, ErrorCode::InvalidArgument, "record_every must be > 0");
  t_stop = std::min(t_stop, params.t_end);
  RunOutcome outcome;
  SimState& state = progress.state;

  auto emit = [&]() {
    if (progress.last_record && progress.last_record->t >= state.t) return;
    auto rec = snapshot(state, params, options.p_list, progress.last_record ? &*progress.last_record : nullptr);
    progress.last_record = rec;
    outcome.records.push_back(std::move(rec));
  };

  while (state.t < t_stop) {
    const double target = std::min(record_time(progress.next_record, options.record_every, params.t_end), t_stop);
    const double remaining = target - state.t;
    if (remaining <= 0.0) {
      ++progress.next_record;
      continue;
    }
    const double dt_limit = stable_time_step(state, params);
    double dt = remaining;
    if (dt_limit < remaining) dt = remaining / std::ceil(remaining / dt_limit);

    int retries = 0;
    std::optional<SimState> next;
    while (!next) {
      try {
        next = step(state, dt, params);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InvariantViolation && e.code() != ErrorCode::SolverDivergence &&
            e.code() != ErrorCode::NonFinite) {
          throw;
        }
        dt *= 0.5;
        if (++retries > kMaxStepRetries || dt < params.dt_min) {
          emit();
          outcome.status = RunStatus::StepSizeUnderflow;
          outcome.t_event = state.t;
          outcome.message = e.what();
          outcome.final_state = state;
          return outcome;
        }
      }
    }
    if (dt == remaining) next->t = target;
    if (options.observer) options.observer(state, *next);
    state = std::move(*next);

    if (state.t == record_time(progress.next_record, options.record_every, params.t_end)) {
      emit();
      ++progress.next_record;
    }
    if (blow_up_check(state, params.linf_cap)) {
      emit();
      outcome.status = RunStatus::BlowUpDetected;
      outcome.t_event = state.t;
      outcome.final_state = state;
      return outcome;
    }
  }
  outcome.status = RunStatus::Completed;
  outcome.t_event = state.t;
  outcome.final_state = state;
  return outcome;
}

inline RunProgress start_run(const SimParams& params, const InitialData& initial, const RunOptions& options) {
  params.validate();
  require(params.linf_cap > initial.u0.sup_norm(), ErrorCode::ConfigValidation,
          "linf_cap must exceed ||u0||_inf");
  RunProgress progress;
  progress.state = make_initial_state(initial);
  progress.last_record = snapshot(progress.state, params, options.p_list, nullptr);
  progress.next_record = 1;
  return progress;
}

/// Integrates from t = 0 to t_end, recording at multiples of record_every and at t_end.
inline RunOutcome run(const SimParams& params, const InitialData& initial, const RunOptions& options) {
  RunProgress progress = start_run(params, initial, options);
  const DiagnosticsRecord first = *progress.last_record;
  RunOutcome outcome = advance(params, progress, options, params.t_end);
  outcome.records.insert(outcome.records.begin(), first);
  return outcome;
}

// --- checkpoints -------------------------------------------------------------
//
// Text header of `key = value` lines closed by `end_header`, followed by the
// raw binary blocks of u, v, w, v_accum and w0 (field snapshot binary layout).
// Floating-point header values are hexadecimal so reload is exact.

namespace detail {

inline std::string hex(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline double parse_hex(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) fail(ErrorCode::Io, "bad number in checkpoint: " + s);
  return x;
}

inline std::vector<double> parse_hex_list(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_hex(tok));
  return out;
}

}  // namespace detail

struct Checkpoint {
  SimParams params;
  RunProgress progress;
  double record_every = 1.0;
};

inline void save_checkpoint(const std::string& path, const SimParams& params, const RunProgress& progress,
                            double record_every) {
  using detail::hex;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint " + path);
  const Grid& grid = progress.state.grid();
  out << "chtx-checkpoint 1\n";
  out << "chi = " << hex(params.chi) << "\nxi = " << hex(params.xi) << "\nmu = " << hex(params.mu)
      << "\na = " << hex(params.a) << "\nr = " << hex(params.r) << "\nt_end = " << hex(params.t_end)
      << "\ndt_init = " << hex(params.dt_init) << "\ndt_min = " << hex(params.dt_min)
      << "\nlinf_cap = " << hex(params.linf_cap) << "\ncfl_safety = " << hex(params.cfl_safety)
      << "\nflux_scheme = " << (params.flux_scheme == FluxScheme::Upwind ? "upwind" : "central") << "\n";
  out << "cells =";
  for (int k = 0; k < grid.dim(); ++k) out << ' ' << grid.cells(k);
  out << "\nspacing =";
  for (int k = 0; k < grid.dim(); ++k) out << ' ' << hex(grid.spacing(k));
  out << "\nt = " << hex(progress.state.t) << "\nstep_count = " << progress.state.step_count
      << "\nnext_record = " << progress.next_record << "\nrecord_every = " << hex(record_every) << "\n";
  if (progress.last_record) {
    const auto& r = *progress.last_record;
    out << "last_record =";
    for (double x : {r.t, r.mass_u, r.l2_v_sq, r.h1_v_seminorm_sq, r.linf_u, r.w1inf_v, r.st_grad_v_sq,
                     r.st_u_r, r.st_lap_v_sq, r.u_r, r.lap_v_sq}) {
      out << ' ' << hex(x);
    }
    out << "\nlast_record_lp =";
    for (const auto& [p, v] : r.lp_u) out << ' ' << hex(p) << ' ' << hex(v);
    out << "\n";
  }
  out << "fields = u v w v_accum w0\nend_header\n";
  for (const ScalarField* f : {&progress.state.u, &progress.state.v, &progress.state.w,
                               &progress.state.v_accum, &progress.state.w0}) {
    detail::write_raw(out, f->values());
  }
  if (!out) fail(ErrorCode::Io, "failed writing checkpoint " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read checkpoint " + path);
  std::string line;
  std::getline(in, line);
  if (line != "chtx-checkpoint 1") fail(ErrorCode::Io, path + " is not a checkpoint file");
  std::map<std::string, std::string> kv;
  while (std::getline(in, line) && line != "end_header") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Io, "malformed checkpoint header line: " + line);
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  if (line != "end_header") fail(ErrorCode::Io, "checkpoint header not terminated");
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorCode::Io, "checkpoint missing key " + key);
    return it->second;
  };
  using detail::parse_hex;
  Checkpoint cp;
  SimParams& p = cp.params;
  p.chi = parse_hex(get("chi"));
  p.xi = parse_hex(get("xi"));
  p.mu = parse_hex(get("mu"));
  p.a = parse_hex(get("a"));
  p.r = parse_hex(get("r"));
  p.t_end = parse_hex(get("t_end"));
  p.dt_init = parse_hex(get("dt_init"));
  p.dt_min = parse_hex(get("dt_min"));
  p.linf_cap = parse_hex(get("linf_cap"));
  p.cfl_safety = parse_hex(get("cfl_safety"));
  p.flux_scheme = get("flux_scheme") == "central" ? FluxScheme::Central : FluxScheme::Upwind;
  p.grid = Grid::from_spacing(detail::parse_list<int>(get("cells"), "cells"),
                              detail::parse_hex_list(get("spacing")));
  cp.record_every = parse_hex(get("record_every"));

  SimState& s = cp.progress.state;
  s.t = parse_hex(get("t"));
  s.step_count = std::stoll(get("step_count"));
  cp.progress.next_record = std::stoll(get("next_record"));
  if (kv.count("last_record")) {
    const auto v = detail::parse_hex_list(kv["last_record"]);
    if (v.size() != 11) fail(ErrorCode::Io, "checkpoint last_record has wrong length");
    DiagnosticsRecord r;
    r.t = v[0];
    r.mass_u = v[1];
    r.l2_v_sq = v[2];
    r.h1_v_seminorm_sq = v[3];
    r.linf_u = v[4];
    r.w1inf_v = v[5];
    r.st_grad_v_sq = v[6];
    r.st_u_r = v[7];
    r.st_lap_v_sq = v[8];
    r.u_r = v[9];
    r.lap_v_sq = v[10];
    const auto lp = detail::parse_hex_list(kv.count("last_record_lp") ? kv["last_record_lp"] : "");
    for (std::size_t i = 0; i + 1 < lp.size(); i += 2) r.lp_u.emplace_back(lp[i], lp[i + 1]);
    cp.progress.last_record = r;
  }
  const std::size_t n = p.grid->size();
  s.u = ScalarField(p.grid, detail::read_raw(in, n, path));
  s.v = ScalarField(p.grid, detail::read_raw(in, n, path));
  s.w = ScalarField(p.grid, detail::read_raw(in, n, path));
  s.v_accum = ScalarField(p.grid, detail::read_raw(in, n, path));
  s.w0 = ScalarField(p.grid, detail::read_raw(in, n, path));
  return cp;
}

}  // namespace chtx
