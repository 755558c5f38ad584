#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chtx/chtx.hpp"

namespace {

chtx::ConfigOverrides parse_sets(const std::vector<std::string>& sets) {
  chtx::ConfigOverrides out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) chtx::fail(chtx::ErrorCode::ConfigParse, "--set expects key=value, got '" + s + "'");
    out.emplace_back(chtx::detail::trim(s.substr(0, eq)), chtx::detail::trim(s.substr(eq + 1)));
  }
  return out;
}

void print_kv(const std::string& key, double value) {
  std::printf("%s=%s\n", key.c_str(), chtx::detail::format_double(value).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chemotaxis-haptotaxis simulator with logistic source"};
  app.require_subcommand(1);

  std::string cfg_path, out_dir;
  std::vector<std::string> sets;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario config");
  run_cmd->add_option("config", cfg_path, "Scenario config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides 'outputs')");
  run_cmd->add_option("--set", sets, "Override a config key, key=value");

  std::string axis;
  std::vector<double> values;
  int jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep mu, r or chi over a list of values");
  sweep_cmd->add_option("config", cfg_path, "Base scenario config file")->required();
  sweep_cmd->add_option("--axis", axis, "mu | r | chi (overrides 'sweep_axis')");
  sweep_cmd->add_option("--values", values, "Axis values (overrides 'sweep_values')")->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "Parallel points (overrides 'jobs')");
  sweep_cmd->add_option("--out", out_dir, "Output directory (overrides 'outputs')");
  sweep_cmd->add_option("--set", sets, "Override a config key, key=value");

  int dim = 2;
  double chi = 0.0, cbeta = 0.0, creg = 0.0, mu = -1.0;
  auto* constants_cmd = app.add_subcommand("constants", "Print the mu* threshold report");
  constants_cmd->add_option("--dim", dim, "Space dimension N")->required();
  constants_cmd->add_option("--chi", chi, "Chemotactic sensitivity")->required();
  constants_cmd->add_option("--cbeta", cbeta, "C_beta")->required();
  constants_cmd->add_option("--creg", creg, "Maximal regularity constant C_{N/2+1}")->required();
  constants_cmd->add_option("--mu", mu, "Logistic damping; enables the q0 search");

  double gamma = 2.0, t_end = 1.0, dt = 1e-2;
  std::string grid_spec = "16x16", extent_spec;
  auto* creg_cmd = app.add_subcommand("estimate-creg", "Estimate the maximal regularity constant");
  creg_cmd->add_option("--gamma", gamma, "Exponent gamma > 1")->required();
  creg_cmd->add_option("--grid", grid_spec, "Cells per axis, e.g. 16x16");
  creg_cmd->add_option("--extent", extent_spec, "Side lengths, e.g. 1x1");
  creg_cmd->add_option("--t-end", t_end, "Final time");
  creg_cmd->add_option("--dt", dt, "Time step");
  creg_cmd->add_option("--config", cfg_path, "Take grid extents and creg_* settings from a config");

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chtx::kExitConfigError;
  }

  try {
    if (*run_cmd) {
      chtx::ScenarioConfig cfg = chtx::load_config(cfg_path, parse_sets(sets));
      if (!out_dir.empty()) cfg.outputs = out_dir;
      const auto res = chtx::run_scenario(cfg);
      std::printf("status=%s\n", chtx::to_string(res.outcome.status));
      print_kv("t_reached", res.outcome.final_state.t);
      if (res.outcome.status == chtx::RunStatus::BlowUpDetected) print_kv("t_detect", res.outcome.t_event);
      print_kv("peak_linf_u", res.peak_linf_u);
      std::printf("outputs=%s\n", cfg.outputs.c_str());
      return res.exit_code;
    }
    if (*sweep_cmd) {
      chtx::ScenarioConfig cfg = chtx::load_config(cfg_path, parse_sets(sets));
      if (!out_dir.empty()) cfg.outputs = out_dir;
      chtx::SweepSpec spec;
      spec.base = cfg;
      const std::string axis_name = axis.empty() ? cfg.sweep_axis : axis;
      if (axis_name.empty()) chtx::fail(chtx::ErrorCode::ConfigValidation, "sweep needs --axis or sweep_axis");
      spec.axis = chtx::parse_sweep_axis(axis_name);
      spec.values = values.empty() ? cfg.sweep_values : values;
      spec.parallel_width = jobs > 0 ? jobs : cfg.jobs;
      const auto rows = chtx::run_sweep(spec);
      std::fputs(chtx::sweep_csv_text(spec.axis, rows).c_str(), stdout);
      return chtx::kExitCompleted;
    }
    if (*constants_cmd) {
      std::optional<double> mu_opt;
      if (mu >= 0.0) mu_opt = mu;
      const auto report = chtx::threshold_report(dim, chi, cbeta, creg, mu_opt);
      std::printf("dimension=%d\n", report.dimension);
      print_kv("chi", report.chi);
      print_kv("c_beta", report.c_beta);
      print_kv("c_reg", report.c_reg);
      print_kv("mu_star", report.mu_star);
      if (report.mu) print_kv("mu", *report.mu);
      if (report.mu) {
        if (report.q0) {
          print_kv("q0", *report.q0);
        } else {
          std::printf("q0=none\n");
        }
      }
      return chtx::kExitCompleted;
    }
    if (*creg_cmd) {
      chtx::GridPtr grid;
      chtx::CregSettings settings{t_end, dt};
      if (!cfg_path.empty()) {
        const auto cfg = chtx::load_config(cfg_path);
        const auto& g = *cfg.params.grid;
        grid = chtx::Grid::make(std::vector<int>(g.dim(), cfg.creg_cells), g.extents_vector());
        settings = {cfg.creg_t_end, cfg.creg_dt};
      } else {
        const auto cells = chtx::detail::parse_list<int>(grid_spec, "grid");
        std::vector<double> extents(cells.size(), 1.0);
        if (!extent_spec.empty()) extents = chtx::detail::parse_list<double>(extent_spec, "extent");
        grid = chtx::Grid::make(cells, extents);
      }
      const auto est = chtx::estimate_c_reg(gamma, grid, settings);
      print_kv("gamma", gamma);
      for (const auto& [name, ratio] : est.members) print_kv("ratio." + name, ratio);
      print_kv("c_reg", est.max_ratio);
      return chtx::kExitCompleted;
    }
    std::printf("chtx %s\n", chtx::kVersion);
    return chtx::kExitCompleted;
  } catch (const chtx::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", chtx::to_string(e.code()), e.what());
    return chtx::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return chtx::kExitConfigError;
  }
}
