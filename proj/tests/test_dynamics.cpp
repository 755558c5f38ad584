#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "chtx/dynamics.hpp"

namespace {

using namespace chtx;
constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

SimParams params_on(GridPtr g) {
  SimParams p;
  p.grid = std::move(g);
  p.chi = 1.0;
  p.xi = 1.0;
  p.mu = 1.0;
  p.a = 1.0;
  p.r = 2.0;
  p.t_end = 1.0;
  p.dt_init = 1e-3;
  p.dt_min = 1e-12;
  p.linf_cap = 1e8;
  return p;
}

InitialData constant_data(const GridPtr& g, double u, double v, double w) {
  return validate_initial_data(ScalarField(g, u), ScalarField(g, v), ScalarField(g, w));
}

// Classical RK4 for u' = u (a - mu u^{r-1} - w), v' = u - v, w' = -v w.
std::array<double, 3> ode_oracle(std::array<double, 3> y, double a, double mu, double r, double t_end) {
  auto f = [&](const std::array<double, 3>& s) {
    return std::array<double, 3>{s[0] * (a - mu * std::pow(s[0], r - 1.0) - s[2]), s[0] - s[1], -s[1] * s[2]};
  };
  const int n = 200000;
  const double h = t_end / n;
  for (int k = 0; k < n; ++k) {
    auto add = [&](const std::array<double, 3>& b, double c) {
      return std::array<double, 3>{y[0] + c * b[0], y[1] + c * b[1], y[2] + c * b[2]};
    };
    const auto k1 = f(y), k2 = f(add(k1, h / 2)), k3 = f(add(k2, h / 2)), k4 = f(add(k3, h));
    for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return y;
}

double spread(const ScalarField& f) { return f.max() - f.min(); }

TEST(ValidateInitialData, RejectsIdenticallyZeroU) {
  const auto g = Grid::make({8}, {1.0});
  EXPECT_EQ(code_of([&] { constant_data(g, 0.0, 0.0, 1.0); }), ErrorCode::InitialZero);
}

TEST(ValidateInitialData, RejectsNegativeFields) {
  const auto g = Grid::make({8}, {1.0});
  EXPECT_EQ(code_of([&] { constant_data(g, -1.0, 0.0, 1.0); }), ErrorCode::InitialNegative);
  EXPECT_EQ(code_of([&] { constant_data(g, 1.0, -1.0, 1.0); }), ErrorCode::InitialNegative);
  EXPECT_EQ(code_of([&] { constant_data(g, 1.0, 0.0, -1.0); }), ErrorCode::InitialNegative);
}

TEST(ValidateInitialData, AcceptsBumpWithConstantW) {
  const auto g = Grid::make({32, 32}, {1.0, 1.0});
  const auto u0 = ScalarField::from_function(g, [](auto x) {
    return std::exp(-((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)) / 0.02);
  });
  EXPECT_NO_THROW(validate_initial_data(u0, ScalarField(g, 0.0), ScalarField(g, 1.0)));
}

TEST(ValidateInitialData, RejectsLinearW) {
  const auto g = Grid::make({16}, {1.0});
  const auto w0 = ScalarField::from_function(g, [](auto x) { return x[0]; });
  EXPECT_EQ(code_of([&] { validate_initial_data(ScalarField(g, 1.0), ScalarField(g, 0.0), w0); }),
            ErrorCode::InitialFluxViolation);
}

TEST(SimParams, ValidationMessages) {
  auto p = params_on(Grid::make({4}, {1.0}));
  p.r = 0.5;
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigValidation);
    EXPECT_NE(std::string(e.what()).find("r > 1"), std::string::npos);
  }
  p = params_on(Grid::make({4}, {1.0}));
  p.dt_min = 1.0;
  EXPECT_THROW(p.validate(), Error);
  p = params_on(Grid::make({4}, {1.0}));
  p.cfl_safety = 1.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Step, HomogeneousFixedPoint) {
  const auto g = Grid::make({8, 8}, {1.0, 1.0});
  for (auto [a, mu, r] : {std::array<double, 3>{2.0, 0.5, 2.0}, std::array<double, 3>{1.0, 4.0, 3.0}}) {
    auto p = params_on(g);
    p.a = a;
    p.mu = mu;
    p.r = r;
    const double c = std::pow(a / mu, 1.0 / (r - 1.0));
    SimState s = make_initial_state(constant_data(g, c, c, 0.0));
    for (int k = 0; k < 10; ++k) {
      s = step(s, 0.01, p);
      for (std::size_t i = 0; i < s.u.size(); ++i) {
        EXPECT_NEAR(s.u[i], c, 1e-12 * c);
        EXPECT_NEAR(s.v[i], c, 1e-12 * c);
      }
    }
  }
}

TEST(Step, ConstantVDecaysW) {
  const auto g = Grid::make({6}, {1.0});
  auto p = params_on(g);
  p.a = 0.0;
  p.mu = 0.0;
  SimState s = make_initial_state(constant_data(g, 1.0, 1.0, 1.0));
  s = step(s, 0.1, p);
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    EXPECT_NEAR(s.v[i], 1.0, 1e-14);
    EXPECT_NEAR(s.w[i], std::exp(-0.1), 1e-14);
  }
  EXPECT_NEAR(std::exp(-0.1), 0.904837, 1e-6);
}

TEST(Step, VMassBalance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 2.0);
  const auto g = Grid::make({20, 14}, {1.0, 0.7});
  std::vector<double> u(g->size()), v(g->size());
  for (auto& x : u) x = d(rng);
  for (auto& x : v) x = d(rng);
  const auto init = validate_initial_data(ScalarField(g, u), ScalarField(g, v), ScalarField(g, 0.5));
  SimState s = make_initial_state(init);
  const double dt = 1e-3;
  const SimState next = step(s, dt, params_on(g));
  const double lhs = (integrate(next.v) - integrate(s.v)) / dt;
  const double rhs = integrate(s.u) - integrate(next.v);
  EXPECT_NEAR(lhs, rhs, 1e-8 * (std::abs(rhs) + 1.0));
}

TEST(Step, RejectsNonPositiveDt) {
  const auto g = Grid::make({4}, {1.0});
  const SimState s = make_initial_state(constant_data(g, 1.0, 0.0, 0.0));
  EXPECT_THROW(step(s, 0.0, params_on(g)), Error);
}

TEST(Run, HomogeneousReductionMatchesOdeOracle) {
  const auto g = Grid::make({8, 8}, {1.0, 1.0});
  auto p = params_on(g);
  p.t_end = 10.0;
  p.mu = 1.0;
  const auto out = run(p, constant_data(g, 0.5, 0.5, 0.0), RunOptions{1.0, {2.0}, {}});
  ASSERT_EQ(out.status, RunStatus::Completed);
  const auto ref = ode_oracle({0.5, 0.5, 0.0}, 1.0, 1.0, 2.0, 10.0);
  EXPECT_NEAR(out.final_state.u.max(), ref[0], 1e-4 * ref[0]);
  EXPECT_NEAR(out.final_state.v.max(), ref[1], 1e-4 * ref[1]);
  EXPECT_LT(spread(out.final_state.u), 1e-11);
  EXPECT_LT(spread(out.final_state.v), 1e-11);
}

TEST(Run, HomogeneousWithEcmTracksOde) {
  // With w present the trajectory is transient; compare at t = 2.
  const auto g = Grid::make({6, 6}, {1.0, 1.0});
  auto p = params_on(g);
  p.t_end = 2.0;
  p.dt_init = 1e-4;
  const auto out = run(p, constant_data(g, 0.3, 0.2, 0.8), RunOptions{0.5, {2.0}, {}});
  const auto ref = ode_oracle({0.3, 0.2, 0.8}, 1.0, 1.0, 2.0, 2.0);
  EXPECT_NEAR(out.final_state.u.max(), ref[0], 2e-3 * ref[0]);
  EXPECT_NEAR(out.final_state.v.max(), ref[1], 2e-3 * ref[1]);
  EXPECT_NEAR(out.final_state.w.max(), ref[2], 2e-3 * ref[2]);
  EXPECT_LT(spread(out.final_state.u), 1e-11);
  EXPECT_LT(spread(out.final_state.w), 1e-11);
}

TEST(Run, InvariantsOnRoughData) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const auto g = Grid::make({24, 24}, {2.0, 2.0});
  std::vector<double> u(g->size()), v(g->size());
  for (auto& x : u) x = d(rng) < 0.3 ? 0.0 : 5.0 * d(rng);
  for (auto& x : v) x = 3.0 * d(rng);
  const auto w0 = ScalarField::from_function(
      g, [](auto x) { return 1.0 + 0.5 * std::cos(kPi * x[0] / 2.0) * std::cos(kPi * x[1] / 2.0); });
  const auto init = validate_initial_data(ScalarField(g, u), ScalarField(g, v), w0);
  auto p = params_on(g);
  p.chi = 5.0;
  p.xi = 2.0;
  p.t_end = 0.5;
  p.dt_init = 1e-2;
  const double w_sup = w0.sup_norm();
  int checked = 0;
  RunOptions opts{0.05, {2.0}, [&](const SimState& prev, const SimState& next) {
                    ++checked;
                    ASSERT_GE(next.u.min(), 0.0);
                    ASSERT_GE(next.v.min(), 0.0);
                    ASSERT_GE(next.w.min(), 0.0);
                    ASSERT_LE(next.w.max(), w_sup);
                    for (std::size_t i = 0; i < next.w.size(); ++i) {
                      ASSERT_LE(next.w[i], prev.w[i]);
                      ASSERT_GE(next.v_accum[i], prev.v_accum[i]);
                      ASSERT_LE(std::abs(next.w[i] - next.w0[i] * std::exp(-next.v_accum[i])), 1e-12);
                    }
                  }};
  const auto out = run(p, init, opts);
  EXPECT_EQ(out.status, RunStatus::Completed);
  EXPECT_GT(checked, 10);
  for (std::size_t k = 1; k < out.records.size(); ++k) EXPECT_GT(out.records[k].t, out.records[k - 1].t);
  EXPECT_EQ(out.records.back().t, 0.5);
}

TEST(Run, RecordsLandOnMultiples) {
  const auto g = Grid::make({8}, {1.0});
  auto p = params_on(g);
  p.t_end = 0.1;
  p.dt_init = 0.003;
  const auto out = run(p, constant_data(g, 1.0, 0.0, 0.0), RunOptions{0.025, {2.0}, {}});
  ASSERT_EQ(out.records.size(), 5u);
  for (std::size_t k = 0; k < out.records.size(); ++k) EXPECT_EQ(out.records[k].t, record_time(k, 0.025, 0.1));
}

TEST(Run, PureDiffusionConservesMass) {
  const auto g = Grid::make({64}, {1.0});
  auto p = params_on(g);
  p.chi = p.xi = p.mu = p.a = 0.0;
  p.dt_init = 1e-4;
  const auto u0 = ScalarField::from_function(g, [](auto x) { return 1.5 + std::cos(kPi * x[0]) + 0.3 * std::cos(3 * kPi * x[0]); });
  const auto out = run(p, validate_initial_data(u0, ScalarField(g, 0.0), ScalarField(g, 0.0)),
                       RunOptions{0.1, {1.0, 2.0}, {}});
  ASSERT_EQ(out.status, RunStatus::Completed);
  EXPECT_GE(out.final_state.step_count, 10000);
  const double m0 = out.records.front().mass_u;
  for (const auto& rec : out.records) EXPECT_NEAR(rec.mass_u, m0, 1e-10 * m0);
}

TEST(Run, ManufacturedGrowthDetected) {
  const auto g = Grid::make({4}, {1.0});
  auto p = params_on(g);
  p.chi = p.xi = p.mu = 0.0;
  p.a = 5.0;
  p.t_end = 2.0;
  p.dt_init = 1e-4;
  p.linf_cap = 10.0;
  const auto out = run(p, constant_data(g, 1.0, 0.0, 0.0), RunOptions{0.1, {2.0}, {}});
  ASSERT_EQ(out.status, RunStatus::BlowUpDetected);
  EXPECT_NEAR(out.t_event, std::log(10.0) / 5.0, 0.1 * std::log(10.0) / 5.0);
  const auto& last = out.records.back();
  EXPECT_EQ(last.t, out.t_event);
  EXPECT_GT(last.linf_u + last.w1inf_v, p.linf_cap);
  EXPECT_TRUE(blow_up_check(out.final_state, p.linf_cap));
}

TEST(Run, StepSizeUnderflowWhenPositivityCannotHold) {
  // The central flux drains empty nodes at any step size.
  const auto g = Grid::make({16}, {1.0});
  auto p = params_on(g);
  p.flux_scheme = FluxScheme::Central;
  p.chi = 10.0;
  p.xi = 0.0;
  const auto u0 = ScalarField::from_function(g, [](auto x) { return x[0] > 0.5 ? 1.0 : 0.0; });
  const auto v0 = ScalarField::from_function(g, [](auto x) { return x[0]; });
  const auto out = run(p, validate_initial_data(u0, v0, ScalarField(g, 0.0)), RunOptions{0.1, {2.0}, {}});
  EXPECT_EQ(out.status, RunStatus::StepSizeUnderflow);
  EXPECT_EQ(out.t_event, 0.0);
  EXPECT_FALSE(out.message.empty());
}

TEST(BlowUpCheck, Examples) {
  const auto g = Grid::make({4}, {1.0});
  SimState s = make_initial_state(constant_data(g, 1.0, 0.0, 0.0));
  EXPECT_FALSE(blow_up_check(s, 1e9));
  s.u[2] = 101.0;
  EXPECT_TRUE(blow_up_check(s, 100.0));
}

TEST(Run, RejectsCapBelowInitialSup) {
  const auto g = Grid::make({4}, {1.0});
  auto p = params_on(g);
  p.linf_cap = 0.5;
  EXPECT_THROW(run(p, constant_data(g, 1.0, 0.0, 0.0), RunOptions{}), Error);
}

TEST(Step, TemporalSelfConvergence) {
  const auto g = Grid::make({32}, {1.0});
  auto p = params_on(g);
  p.chi = 0.5;
  p.xi = 0.3;
  const auto init = validate_initial_data(
      ScalarField::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(kPi * x[0]); }),
      ScalarField::from_function(g, [](auto x) { return 0.5 + 0.2 * std::cos(2 * kPi * x[0]); }),
      ScalarField::from_function(g, [](auto x) { return 0.8 + 0.1 * std::cos(kPi * x[0]); }));
  const double t_end = 0.2;
  auto integrate_to = [&](int steps) {
    SimState s = make_initial_state(init);
    for (int k = 0; k < steps; ++k) s = step(s, t_end / steps, p);
    return s;
  };
  const SimState ref = integrate_to(8 * 64);
  std::vector<double> errors;
  for (int steps : {16, 32, 64}) {
    const SimState s = integrate_to(steps);
    double e = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) e = std::max(e, std::abs(s.u[i] - ref.u[i]));
    errors.push_back(e);
  }
  for (std::size_t j = 1; j < errors.size(); ++j) EXPECT_GE(std::log2(errors[j - 1] / errors[j]), 0.9);
}

TEST(Checkpoint, ResumeIsBitExact) {
  const auto g = Grid::make({16, 12}, {1.0, 0.8});
  auto p = params_on(g);
  p.chi = 2.0;
  p.t_end = 0.4;
  p.dt_init = 1e-2;
  const auto init = validate_initial_data(
      ScalarField::from_function(g, [](auto x) { return std::exp(-20 * ((x[0] - 0.3) * (x[0] - 0.3) + x[1] * x[1])); }),
      ScalarField(g, 0.1), ScalarField::from_function(g, [](auto x) { return 1.0 + 0.2 * std::cos(kPi * x[0]); }));
  const RunOptions opts{0.05, {2.0, 3.5}, {}};
  const auto full = run(p, init, opts);

  RunProgress progress = start_run(p, init, opts);
  auto first_half = advance(p, progress, opts, 0.2);
  const auto path = (std::filesystem::temp_directory_path() / "chtx_resume_test.chk").string();
  save_checkpoint(path, p, progress, opts.record_every);
  Checkpoint cp = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_TRUE(cp.params == p);
  EXPECT_EQ(cp.record_every, opts.record_every);
  auto second_half = advance(cp.params, cp.progress, RunOptions{cp.record_every, opts.p_list, {}}, p.t_end);

  EXPECT_TRUE(cp.progress.state.u == full.final_state.u);
  EXPECT_TRUE(cp.progress.state.v == full.final_state.v);
  EXPECT_TRUE(cp.progress.state.w == full.final_state.w);
  EXPECT_EQ(cp.progress.state.step_count, full.final_state.step_count);
  std::vector<DiagnosticsRecord> stitched{full.records.front()};
  stitched.insert(stitched.end(), first_half.records.begin(), first_half.records.end());
  stitched.insert(stitched.end(), second_half.records.begin(), second_half.records.end());
  ASSERT_EQ(stitched.size(), full.records.size());
  for (std::size_t k = 0; k < stitched.size(); ++k) EXPECT_TRUE(stitched[k] == full.records[k]) << k;
}

}  // namespace
