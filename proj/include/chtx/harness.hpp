#pragma once

// Scenario driver: runs a config, emits result files, and runs parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chtx/analysis_constants.hpp"
#include "chtx/config.hpp"
#include "chtx/diagnostics.hpp"
#include "chtx/dynamics.hpp"

namespace chtx {

inline constexpr int kExitCompleted = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitBlowUp = 2;
inline constexpr int kExitUnderflow = 3;

inline int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return kExitCompleted;
    case RunStatus::BlowUpDetected: return kExitBlowUp;
    case RunStatus::StepSizeUnderflow: return kExitUnderflow;
  }
  return kExitConfigError;
}

/// C_{N/2+1} used for the threshold report, and where it came from.
struct CregChoice {
  double value = 0.0;
  std::string source;
};

inline CregChoice resolve_c_reg(const ScenarioConfig& cfg) {
  if (cfg.c_reg) return {*cfg.c_reg, "config"};
  const Grid& grid = *cfg.params.grid;
  std::vector<int> cells(grid.dim(), cfg.creg_cells);
  const auto est_grid = Grid::make(cells, grid.extents_vector());
  const double gamma = grid.dim() / 2.0 + 1.0;
  const auto est = estimate_c_reg(gamma, est_grid, CregSettings{cfg.creg_t_end, cfg.creg_dt});
  return {est.max_ratio, "estimated over the forcing family"};
}

struct ScenarioResult {
  RunOutcome outcome;
  int exit_code = kExitCompleted;
  double peak_linf_u = 0.0;
  double t_peak = 0.0;
  double initial_functional = 0.0;
  double final_functional = 0.0;
  double c_beta = 0.0;
  CregChoice c_reg;
  std::optional<ThresholdReport> threshold;  // absent when chi, C_beta or C_reg vanishes
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

inline std::string summary_text(const ScenarioConfig& cfg, const ScenarioResult& res) {
  using detail::fmt;
  const auto& out = res.outcome;
  const DiagnosticsRecord& last = out.records.back();
  std::ostringstream s;
  s << "status = " << to_string(out.status) << "\n";
  s << "exit_code = " << res.exit_code << "\n";
  s << "t_reached = " << fmt(out.final_state.t) << "\n";
  if (out.status == RunStatus::BlowUpDetected) s << "t_detect = " << fmt(out.t_event) << "\n";
  if (out.status == RunStatus::StepSizeUnderflow) s << "t_underflow = " << fmt(out.t_event) << "\n";
  if (!out.message.empty()) s << "message = " << out.message << "\n";
  s << "steps = " << out.final_state.step_count << "\n";
  s << "peak_linf_u = " << fmt(res.peak_linf_u) << "\n";
  s << "t_peak = " << fmt(res.t_peak) << "\n";
  s << "final_linf_u = " << fmt(last.linf_u) << "\n";
  s << "final_mass_u = " << fmt(last.mass_u) << "\n";
  s << "final_l2_v_sq = " << fmt(last.l2_v_sq) << "\n";
  s << "final_h1_v_sq = " << fmt(last.h1_v_seminorm_sq) << "\n";
  s << "final_w1inf_v = " << fmt(last.w1inf_v) << "\n";
  s << "initial_functional = " << fmt(res.initial_functional) << "\n";
  s << "final_functional = " << fmt(res.final_functional) << "\n";
  s << "c_beta = " << fmt(res.c_beta) << "\n";
  s << "c_beta_note = heuristic surrogate from w0 sup norms and beta = " << fmt(cfg.beta) << "\n";
  s << "c_reg = " << fmt(res.c_reg.value) << "\n";
  s << "c_reg_source = " << res.c_reg.source << "\n";
  s << "dimension = " << cfg.params.grid->dim() << "\n";
  s << "mu = " << fmt(cfg.params.mu) << "\n";
  if (!res.threshold) {
    s << "mu_star = undefined (needs chi, c_beta and c_reg > 0)\n";
    return s.str();
  }
  s << "mu_star = " << fmt(res.threshold->mu_star) << "\n";
  s << "mu_above_threshold = " << (cfg.params.mu > res.threshold->mu_star ? "yes" : "no") << "\n";
  if (res.threshold->q0) {
    s << "q0 = " << fmt(*res.threshold->q0) << "\n";
  } else {
    s << "q0 = none\n";
  }
  return s.str();
}

/// Runs a resolved config and writes diagnostics.csv, checkpoint.chk,
/// summary.txt and resolved.cfg into out_dir (cfg.outputs when empty).
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, std::filesystem::path out_dir = {}) {
  if (out_dir.empty()) out_dir = cfg.outputs;
  validate_config(cfg);
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "resolved.cfg", resolved_config_text(cfg));

  const InitialData init = build_initial_data(cfg);
  RunOptions options;
  options.record_every = cfg.record_every;
  options.p_list = cfg.p_list;
  RunProgress progress = start_run(cfg.params, init, options);
  const DiagnosticsRecord first = *progress.last_record;

  ScenarioResult res;
  res.outcome = advance(cfg.params, progress, options, cfg.params.t_end);
  res.outcome.records.insert(res.outcome.records.begin(), first);
  res.exit_code = exit_code(res.outcome.status);

  for (const auto& rec : res.outcome.records) {
    if (rec.linf_u > res.peak_linf_u) {
      res.peak_linf_u = rec.linf_u;
      res.t_peak = rec.t;
    }
  }
  res.initial_functional = res.outcome.records.front().functional();
  res.final_functional = res.outcome.records.back().functional();
  res.c_beta = c_beta_estimate(cfg.params.xi, init.w0, cfg.beta);
  res.c_reg = resolve_c_reg(cfg);
  if (cfg.params.chi > 0.0 && res.c_beta > 0.0 && res.c_reg.value > 0.0) {
    res.threshold = threshold_report(cfg.params.grid->dim(), cfg.params.chi, res.c_beta, res.c_reg.value,
                                     cfg.params.mu);
  }

  {
    std::ofstream csv(out_dir / "diagnostics.csv", std::ios::binary);
    if (!csv) fail(ErrorCode::Io, "cannot write diagnostics.csv");
    write_diagnostics_csv(csv, res.outcome.records, cfg.p_list);
  }
  save_checkpoint((out_dir / "checkpoint.chk").string(), cfg.params, progress, cfg.record_every);
  write_text(out_dir / "summary.txt", summary_text(cfg, res));
  return res;
}

enum class SweepAxis { Mu, R, Chi };

inline SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "mu") return SweepAxis::Mu;
  if (name == "r") return SweepAxis::R;
  if (name == "chi") return SweepAxis::Chi;
  fail(ErrorCode::ConfigValidation, "sweep axis must be mu, r or chi, got '" + name + "'");
}

inline const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Mu: return "mu";
    case SweepAxis::R: return "r";
    case SweepAxis::Chi: return "chi";
  }
  return "?";
}

struct SweepSpec {
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::Mu;
  std::vector<double> values;
  int parallel_width = 1;

  void validate() const {
    require(!values.empty(), ErrorCode::ConfigValidation, "sweep values must not be empty");
    require(parallel_width >= 1, ErrorCode::ConfigValidation, "sweep parallel width must be >= 1");
    for (std::size_t i = 1; i < values.size(); ++i) {
      require(values[i] > values[i - 1], ErrorCode::ConfigValidation, "sweep values must be strictly increasing");
    }
    for (double x : values) {
      switch (axis) {
        case SweepAxis::Mu: require(x >= 0.0, ErrorCode::ConfigValidation, "sweep values need mu >= 0"); break;
        case SweepAxis::R: require(x > 1.0, ErrorCode::ConfigValidation, "sweep values need r > 1"); break;
        case SweepAxis::Chi: require(x > 0.0, ErrorCode::ConfigValidation, "sweep values need chi > 0"); break;
      }
    }
  }
};

/// The base config with the swept coefficient replaced.
inline ScenarioConfig sweep_point_config(const SweepSpec& spec, double value) {
  ScenarioConfig cfg = spec.base;
  switch (spec.axis) {
    case SweepAxis::Mu: cfg.params.mu = value; break;
    case SweepAxis::R: cfg.params.r = value; break;
    case SweepAxis::Chi: cfg.params.chi = value; break;
  }
  return cfg;
}

struct SweepRow {
  double value = 0.0;
  std::string status;
  double sup_linf_u = 0.0;
  double t_peak = 0.0;
  double final_functional = 0.0;
  std::string message;
};

inline std::string sweep_point_dir(SweepAxis axis, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu", to_string(axis), index);
  return buf;
}

inline std::string sweep_csv_text(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string text = std::string(to_string(axis)) + ",status,sup_linf_u,t_peak,final_functional\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.12e,%s,%.12e,%.12e,%.12e\n", row.value, row.status.c_str(), row.sup_linf_u,
                  row.t_peak, row.final_functional);
    text += buf;
  }
  return text;
}

/// Runs every sweep point (up to parallel_width at once) into
/// out_dir/<axis>_<index>/ and writes out_dir/sweep.csv sorted by value.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::filesystem::path out_dir = {}) {
  spec.validate();
  if (out_dir.empty()) out_dir = spec.base.outputs;
  std::filesystem::create_directories(out_dir);
  std::vector<SweepRow> rows(spec.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.value = spec.values[i];
      try {
        ScenarioConfig cfg = sweep_point_config(spec, row.value);
        const ScenarioResult res = run_scenario(cfg, out_dir / sweep_point_dir(spec.axis, i));
        row.status = to_string(res.outcome.status);
        row.sup_linf_u = res.peak_linf_u;
        row.t_peak = res.t_peak;
        row.final_functional = res.final_functional;
      } catch (const std::exception& e) {
        row.status = "Error";
        row.message = e.what();
      }
    }
  };
  const int width = std::min<int>(spec.parallel_width, static_cast<int>(spec.values.size()));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int k = 0; k < width; ++k) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
  write_text(out_dir / "sweep.csv", sweep_csv_text(spec.axis, rows));
  return rows;
}

}  // namespace chtx
