#pragma once

// Scenario configuration: a line-oriented `key = value` text format.
//
// Required keys: grid, t_end, chi, xi, mu, a, r.
// Lines starting with '#' and blank lines are ignored. Unknown or repeated keys
// are errors. Lists accept spaces, commas, or 'x' as separators (grid = 64x64).
//
//   key             default                    meaning
//   grid            (required)                 cells per axis, 1 to 3 entries
//   extent          1 per axis                 domain side lengths
//   t_end chi xi mu a r                        model coefficients, final time
//   dt_init         1e-3                       first step and step cap
//   dt_min          1e-10                      retry floor
//   cfl_safety      0.9
//   linf_cap        1e6 (1 + ||u0||_inf)       blow-up threshold
//   flux_scheme     upwind                     upwind | central
//   record_every    t_end / 100
//   initial         homogeneous                homogeneous | gaussian | files
//     homogeneous:  u0 = 1, v0 = 0, w0 = 0
//     gaussian:     bump_center (domain center), bump_width (0.1 min extent),
//                   bump_amplitude 1, bump_mass (overrides amplitude),
//                   u_background 0, v_background 0, w_background 0,
//                   w_modulation 0 (w0 += w_modulation prod_k cos(pi x_k / L_k))
//     files:        u0_file, v0_file, w0_file (field snapshots, relative to the config)
//   seed            0                          RNG seed for the perturbation
//   perturbation    0                          u0 *= 1 + perturbation U(-1,1)
//   outputs         out                        output directory
//   p_list          2                          exponents p for int u^p columns
//   beta            1                          beta entering the C_beta surrogate
//   c_reg           (estimated)                C_{N/2+1}; estimated when omitted
//   creg_cells      16                         per-axis cells of the estimator grid
//   creg_t_end      1
//   creg_dt         0.01
//   flux_tolerance  0.05                       w0 zero-flux check tolerance
//   sweep_axis      (none)                     mu | r | chi
//   sweep_values    (none)
//   jobs            1                          sweep parallel width

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/field_io.hpp"
#include "chtx/grid.hpp"
#include "chtx/state.hpp"

namespace chtx {

struct HomogeneousInit {
  double u0 = 1.0;
  double v0 = 0.0;
  double w0 = 0.0;
  bool operator==(const HomogeneousInit&) const = default;
};

struct GaussianBumpInit {
  std::vector<double> center;
  double width = 0.1;
  double amplitude = 1.0;
  std::optional<double> mass;
  double u_background = 0.0;
  double v_background = 0.0;
  double w_background = 0.0;
  double w_modulation = 0.0;
  bool operator==(const GaussianBumpInit&) const = default;
};

struct FileInit {
  std::string u0;
  std::string v0;
  std::string w0;
  bool operator==(const FileInit&) const = default;
};

using InitialSpec = std::variant<HomogeneousInit, GaussianBumpInit, FileInit>;

struct ScenarioConfig {
  SimParams params;
  InitialSpec initial;
  double record_every = 1.0;
  std::string outputs = "out";
  std::uint64_t seed = 0;
  double perturbation = 0.0;
  std::vector<double> p_list{2.0};
  double beta = 1.0;
  std::optional<double> c_reg;
  int creg_cells = 16;
  double creg_t_end = 1.0;
  double creg_dt = 0.01;
  double flux_tolerance = kDefaultFluxTolerance;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  int jobs = 1;

  bool operator==(const ScenarioConfig&) const = default;
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "grid", "extent", "t_end", "chi", "xi", "mu", "a", "r", "dt_init", "dt_min", "cfl_safety",
      "linf_cap", "flux_scheme", "record_every", "initial", "u0", "v0", "w0", "bump_center",
      "bump_width", "bump_amplitude", "bump_mass", "u_background", "v_background", "w_background",
      "w_modulation", "u0_file", "v0_file", "w0_file", "seed", "perturbation", "outputs", "p_list",
      "beta", "c_reg", "creg_cells", "creg_t_end", "creg_dt", "flux_tolerance", "sweep_axis",
      "sweep_values", "jobs"};
  return keys;
}

struct RawEntry {
  std::string value;
  int line = 0;  // 0 for command-line overrides
};

inline std::string where(const RawEntry& e) {
  return e.line > 0 ? "line " + std::to_string(e.line) + ": " : "override: ";
}

inline double to_double(const std::string& key, const RawEntry& e) {
  const std::string s = trim(e.value);
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail(ErrorCode::ConfigParse, where(e) + "key '" + key + "' expects a number, got '" + e.value + "'");
  }
  return x;
}

inline long long to_integer(const std::string& key, const RawEntry& e) {
  const std::string s = trim(e.value);
  char* end = nullptr;
  const long long x = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail(ErrorCode::ConfigParse, where(e) + "key '" + key + "' expects an integer, got '" + e.value + "'");
  }
  return x;
}

template <class T>
std::vector<T> to_list(const std::string& key, const RawEntry& e) {
  try {
    return parse_list<T>(e.value, key);
  } catch (const Error&) {
    fail(ErrorCode::ConfigParse, where(e) + "key '" + key + "' expects a list, got '" + e.value + "'");
  }
}

inline std::string fmt(double x) { return format_double(x); }

inline std::string fmt_list(const std::vector<double>& xs, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += fmt(xs[i]);
  }
  return s;
}

}  // namespace detail

/// Parses config text. Relative file paths resolve against base_dir; overrides
/// replace (or add) keys after the text is read.
inline ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                                   const ConfigOverrides& overrides = {}) {
  using detail::RawEntry;
  std::map<std::string, RawEntry> raw;
  {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        fail(ErrorCode::ConfigParse, "line " + std::to_string(number) + ": expected 'key = value'");
      }
      const std::string key = detail::trim(t.substr(0, eq));
      if (!detail::known_keys().count(key)) {
        fail(ErrorCode::ConfigParse, "line " + std::to_string(number) + ": unknown key '" + key + "'");
      }
      if (raw.count(key)) {
        fail(ErrorCode::ConfigParse, "line " + std::to_string(number) + ": duplicate key '" + key + "'");
      }
      raw[key] = RawEntry{detail::trim(t.substr(eq + 1)), number};
    }
  }
  for (const auto& [key, value] : overrides) {
    if (!detail::known_keys().count(key)) fail(ErrorCode::ConfigParse, "override: unknown key '" + key + "'");
    raw[key] = RawEntry{value, 0};
  }

  std::string missing;
  for (const char* key : {"grid", "t_end", "chi", "xi", "mu", "a", "r"}) {
    if (!raw.count(key)) missing += missing.empty() ? key : std::string(", ") + key;
  }
  if (!missing.empty()) fail(ErrorCode::ConfigValidation, "required keys missing: " + missing);

  std::set<std::string> used;
  auto has = [&](const std::string& key) { return raw.count(key) > 0; };
  auto num = [&](const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    used.insert(key);
    return detail::to_double(key, raw[key]);
  };
  auto str = [&](const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    used.insert(key);
    return raw[key].value;
  };

  ScenarioConfig cfg;
  SimParams& p = cfg.params;
  used.insert("grid");
  const auto cells = detail::to_list<int>("grid", raw["grid"]);
  std::vector<double> extents(cells.size(), 1.0);
  if (has("extent")) {
    used.insert("extent");
    extents = detail::to_list<double>("extent", raw["extent"]);
    if (extents.size() == 1 && cells.size() > 1) extents.assign(cells.size(), extents[0]);
  }
  try {
    p.grid = Grid::make(cells, extents);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigValidation, std::string("grid: ") + e.what());
  }
  p.t_end = num("t_end", 0.0);
  p.chi = num("chi", 0.0);
  p.xi = num("xi", 0.0);
  p.mu = num("mu", 0.0);
  p.a = num("a", 0.0);
  p.r = num("r", 0.0);
  p.dt_init = num("dt_init", 1e-3);
  p.dt_min = num("dt_min", 1e-10);
  p.cfl_safety = num("cfl_safety", 0.9);
  const std::string scheme = str("flux_scheme", "upwind");
  if (scheme != "upwind" && scheme != "central") {
    fail(ErrorCode::ConfigValidation, "flux_scheme must be 'upwind' or 'central'");
  }
  p.flux_scheme = scheme == "upwind" ? FluxScheme::Upwind : FluxScheme::Central;
  cfg.record_every = num("record_every", p.t_end / 100.0);

  const std::string initial = str("initial", "homogeneous");
  if (initial == "homogeneous") {
    HomogeneousInit h;
    h.u0 = num("u0", 1.0);
    h.v0 = num("v0", 0.0);
    h.w0 = num("w0", 0.0);
    cfg.initial = h;
  } else if (initial == "gaussian") {
    GaussianBumpInit g;
    const Grid& grid = *p.grid;
    double min_extent = grid.extent(0);
    for (int k = 0; k < grid.dim(); ++k) {
      g.center.push_back(0.5 * grid.extent(k));
      min_extent = std::min(min_extent, grid.extent(k));
    }
    if (has("bump_center")) {
      used.insert("bump_center");
      g.center = detail::to_list<double>("bump_center", raw["bump_center"]);
    }
    g.width = num("bump_width", 0.1 * min_extent);
    g.amplitude = num("bump_amplitude", 1.0);
    if (has("bump_mass")) g.mass = num("bump_mass", 0.0);
    g.u_background = num("u_background", 0.0);
    g.v_background = num("v_background", 0.0);
    g.w_background = num("w_background", 0.0);
    g.w_modulation = num("w_modulation", 0.0);
    cfg.initial = g;
  } else if (initial == "files") {
    FileInit f;
    for (auto [key, target] : {std::pair{"u0_file", &f.u0}, std::pair{"v0_file", &f.v0},
                               std::pair{"w0_file", &f.w0}}) {
      if (!has(key)) fail(ErrorCode::ConfigValidation, std::string("initial = files requires ") + key);
      std::filesystem::path path = str(key, "");
      if (path.is_relative()) path = base_dir / path;
      if (!std::filesystem::exists(path)) {
        fail(ErrorCode::ConfigValidation, std::string(key) + " does not exist: " + path.string());
      }
      *target = std::filesystem::weakly_canonical(path).string();
    }
    cfg.initial = f;
  } else {
    fail(ErrorCode::ConfigValidation, "initial must be homogeneous, gaussian or files");
  }

  cfg.seed = has("seed") ? static_cast<std::uint64_t>(detail::to_integer("seed", raw["seed"])) : 0;
  used.insert("seed");
  cfg.perturbation = num("perturbation", 0.0);
  cfg.outputs = str("outputs", "out");
  if (has("p_list")) {
    used.insert("p_list");
    cfg.p_list = detail::to_list<double>("p_list", raw["p_list"]);
  }
  cfg.beta = num("beta", 1.0);
  if (has("c_reg")) cfg.c_reg = num("c_reg", 0.0);
  cfg.creg_cells = has("creg_cells") ? static_cast<int>(detail::to_integer("creg_cells", raw["creg_cells"])) : 16;
  used.insert("creg_cells");
  cfg.creg_t_end = num("creg_t_end", 1.0);
  cfg.creg_dt = num("creg_dt", 0.01);
  cfg.flux_tolerance = num("flux_tolerance", kDefaultFluxTolerance);
  cfg.sweep_axis = str("sweep_axis", "");
  if (has("sweep_values")) {
    used.insert("sweep_values");
    cfg.sweep_values = detail::to_list<double>("sweep_values", raw["sweep_values"]);
  }
  cfg.jobs = has("jobs") ? static_cast<int>(detail::to_integer("jobs", raw["jobs"])) : 1;
  used.insert("jobs");

  // linf_cap default needs ||u0||_inf, resolved after the initial data exists.
  p.linf_cap = num("linf_cap", 0.0);

  for (const auto& [key, entry] : raw) {
    if (!used.count(key)) {
      fail(ErrorCode::ConfigValidation,
           detail::where(entry) + "key '" + key + "' does not apply with initial = " + initial);
    }
  }

  return cfg;
}

/// Validates every invariant that does not need the initial fields.
inline void validate_config(const ScenarioConfig& cfg) {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::ConfigValidation, what); };
  SimParams p = cfg.params;
  if (p.linf_cap == 0.0) p.linf_cap = 1.0;  // unresolved default
  p.validate();
  check(cfg.record_every > 0.0 && cfg.record_every <= p.t_end, "record_every must lie in (0, t_end]");
  check(cfg.perturbation >= 0.0 && cfg.perturbation < 1.0, "perturbation must lie in [0,1)");
  check(!cfg.p_list.empty(), "p_list must not be empty");
  for (double q : cfg.p_list) check(q >= 1.0, "p_list entries must be >= 1");
  check(cfg.beta > 0.0, "beta must be > 0");
  check(!cfg.c_reg || *cfg.c_reg > 0.0, "c_reg must be > 0");
  check(cfg.creg_cells >= 2, "creg_cells must be >= 2");
  check(cfg.creg_t_end > 0.0 && cfg.creg_dt > 0.0, "creg_t_end and creg_dt must be > 0");
  check(cfg.flux_tolerance > 0.0, "flux_tolerance must be > 0");
  check(cfg.jobs >= 1, "jobs must be >= 1");
  const int dim = p.grid->dim();
  if (const auto* g = std::get_if<GaussianBumpInit>(&cfg.initial)) {
    check(static_cast<int>(g->center.size()) == dim, "bump_center needs one coordinate per axis");
    check(g->width > 0.0, "bump_width must be > 0");
    check(g->amplitude >= 0.0, "bump_amplitude must be >= 0");
    check(!g->mass || *g->mass >= 0.0, "bump_mass must be >= 0");
    check(g->u_background >= 0.0 && g->v_background >= 0.0 && g->w_background >= 0.0,
          "backgrounds must be >= 0");
    check(std::abs(g->w_modulation) <= g->w_background, "|w_modulation| must not exceed w_background");
  }
  if (const auto* h = std::get_if<HomogeneousInit>(&cfg.initial)) {
    check(h->u0 >= 0.0 && h->v0 >= 0.0 && h->w0 >= 0.0, "homogeneous initial values must be >= 0");
  }
}

/// Builds and validates the initial fields described by the config.
inline InitialData build_initial_data(const ScenarioConfig& cfg) {
  const GridPtr& grid = cfg.params.grid;
  const std::size_t n = grid->size();
  ScalarField u0(grid), v0(grid), w0(grid);
  if (const auto* h = std::get_if<HomogeneousInit>(&cfg.initial)) {
    u0 = ScalarField(grid, h->u0);
    v0 = ScalarField(grid, h->v0);
    w0 = ScalarField(grid, h->w0);
  } else if (const auto* g = std::get_if<GaussianBumpInit>(&cfg.initial)) {
    std::vector<double> shape(n);
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (int k = 0; k < grid->dim(); ++k) {
        const double dx = grid->coordinate(i, k) - g->center[k];
        r2 += dx * dx;
      }
      shape[i] = std::exp(-r2 / (2.0 * g->width * g->width));
    }
    double amplitude = g->amplitude;
    if (g->mass) {
      double shape_mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) shape_mass += grid->node_volume(i) * shape[i];
      amplitude = *g->mass / shape_mass;
    }
    for (std::size_t i = 0; i < n; ++i) {
      u0[i] = g->u_background + amplitude * shape[i];
      v0[i] = g->v_background;
      double mod = 1.0;
      for (int k = 0; k < grid->dim(); ++k) {
        mod *= std::cos(std::numbers::pi * grid->coordinate(i, k) / grid->extent(k));
      }
      w0[i] = std::max(0.0, g->w_background + g->w_modulation * mod);
    }
  } else {
    const auto& f = std::get<FileInit>(cfg.initial);
    u0 = read_field(f.u0);
    v0 = read_field(f.v0);
    w0 = read_field(f.w0);
    for (const ScalarField* field : {&u0, &v0, &w0}) {
      require(field->grid() == *grid, ErrorCode::ConfigValidation,
              "initial field file grid does not match the configured grid");
    }
    u0 = ScalarField(grid, std::vector<double>(u0.values().begin(), u0.values().end()));
    v0 = ScalarField(grid, std::vector<double>(v0.values().begin(), v0.values().end()));
    w0 = ScalarField(grid, std::vector<double>(w0.values().begin(), w0.values().end()));
  }
  if (cfg.perturbation > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) u0[i] *= 1.0 + cfg.perturbation * dist(rng);
  }
  return validate_initial_data(std::move(u0), std::move(v0), std::move(w0), cfg.flux_tolerance);
}

/// Fills defaults that depend on the initial data (linf_cap) and validates.
inline void resolve_config(ScenarioConfig& cfg) {
  validate_config(cfg);
  if (cfg.params.linf_cap == 0.0) {
    const InitialData init = build_initial_data(cfg);
    cfg.params.linf_cap = 1e6 * (1.0 + init.u0.sup_norm());
  }
  cfg.params.validate();
}

inline ScenarioConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig cfg = parse_config(buffer.str(), path.parent_path(), overrides);
  resolve_config(cfg);
  return cfg;
}

/// Writes every key with its resolved value; reloading yields an identical config.
inline std::string resolved_config_text(const ScenarioConfig& cfg) {
  using detail::fmt;
  using detail::fmt_list;
  const SimParams& p = cfg.params;
  std::ostringstream out;
  std::vector<double> cells;
  for (int c : p.grid->cells_vector()) cells.push_back(c);
  out << "# resolved configuration\n";
  out << "grid = " << fmt_list(cells, "x") << "\n";
  out << "extent = " << fmt_list(p.grid->extents_vector()) << "\n";
  out << "t_end = " << fmt(p.t_end) << "\nchi = " << fmt(p.chi) << "\nxi = " << fmt(p.xi) << "\nmu = " << fmt(p.mu)
      << "\na = " << fmt(p.a) << "\nr = " << fmt(p.r) << "\ndt_init = " << fmt(p.dt_init)
      << "\ndt_min = " << fmt(p.dt_min) << "\ncfl_safety = " << fmt(p.cfl_safety)
      << "\nlinf_cap = " << fmt(p.linf_cap)
      << "\nflux_scheme = " << (p.flux_scheme == FluxScheme::Upwind ? "upwind" : "central")
      << "\nrecord_every = " << fmt(cfg.record_every) << "\n";
  if (const auto* h = std::get_if<HomogeneousInit>(&cfg.initial)) {
    out << "initial = homogeneous\nu0 = " << fmt(h->u0) << "\nv0 = " << fmt(h->v0) << "\nw0 = " << fmt(h->w0)
        << "\n";
  } else if (const auto* g = std::get_if<GaussianBumpInit>(&cfg.initial)) {
    out << "initial = gaussian\nbump_center = " << fmt_list(g->center) << "\nbump_width = " << fmt(g->width)
        << "\nbump_amplitude = " << fmt(g->amplitude) << "\n";
    if (g->mass) out << "bump_mass = " << fmt(*g->mass) << "\n";
    out << "u_background = " << fmt(g->u_background) << "\nv_background = " << fmt(g->v_background)
        << "\nw_background = " << fmt(g->w_background) << "\nw_modulation = " << fmt(g->w_modulation) << "\n";
  } else {
    const auto& f = std::get<FileInit>(cfg.initial);
    out << "initial = files\nu0_file = " << f.u0 << "\nv0_file = " << f.v0 << "\nw0_file = " << f.w0 << "\n";
  }
  out << "seed = " << cfg.seed << "\nperturbation = " << fmt(cfg.perturbation) << "\noutputs = " << cfg.outputs
      << "\np_list = " << fmt_list(cfg.p_list) << "\nbeta = " << fmt(cfg.beta) << "\n";
  if (cfg.c_reg) out << "c_reg = " << fmt(*cfg.c_reg) << "\n";
  out << "creg_cells = " << cfg.creg_cells << "\ncreg_t_end = " << fmt(cfg.creg_t_end)
      << "\ncreg_dt = " << fmt(cfg.creg_dt) << "\nflux_tolerance = " << fmt(cfg.flux_tolerance) << "\n";
  if (!cfg.sweep_axis.empty()) out << "sweep_axis = " << cfg.sweep_axis << "\n";
  if (!cfg.sweep_values.empty()) out << "sweep_values = " << fmt_list(cfg.sweep_values) << "\n";
  out << "jobs = " << cfg.jobs << "\n";
  return out.str();
}

}  // namespace chtx
