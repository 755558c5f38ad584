#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "chtx/analysis_constants.hpp"
#include "chtx/diagnostics.hpp"
#include "chtx/dynamics.hpp"

namespace {

using namespace chtx;
constexpr double kPi = std::numbers::pi;

SimState state_of(ScalarField u, ScalarField v, ScalarField w) {
  return make_initial_state(InitialData{std::move(u), std::move(v), std::move(w)});
}

SimParams params_on(GridPtr g) {
  SimParams p;
  p.grid = std::move(g);
  p.r = 2.5;
  return p;
}

TEST(Snapshot, ConstantFieldsOnUnitSquare) {
  const auto g = Grid::make({10, 10}, {1.0, 1.0});
  const auto s = state_of(ScalarField(g, 1.0), ScalarField(g, 1.0), ScalarField(g, 0.0));
  const std::vector<double> ps{1.0, 3.0};
  const auto rec = snapshot(s, params_on(g), ps);
  EXPECT_NEAR(rec.mass_u, 1.0, 1e-14);
  EXPECT_NEAR(rec.l2_v_sq, 1.0, 1e-14);
  EXPECT_EQ(rec.h1_v_seminorm_sq, 0.0);
  EXPECT_EQ(rec.linf_u, 1.0);
  EXPECT_EQ(rec.w1inf_v, 1.0);
  EXPECT_EQ(rec.st_grad_v_sq, 0.0);
}

TEST(Snapshot, GradientEnergyOfCosine) {
  std::vector<double> errors;
  for (int n : {32, 64, 128}) {
    const auto g = Grid::make({n}, {1.0});
    const auto v = ScalarField::from_function(g, [](auto x) { return std::cos(kPi * x[0]); });
    const std::vector<double> ps{2.0};
    const auto rec = snapshot(state_of(ScalarField(g, 1.0), v, ScalarField(g, 0.0)), params_on(g), ps);
    errors.push_back(std::abs(rec.h1_v_seminorm_sq - kPi * kPi / 2.0));
  }
  EXPECT_LT(errors.back(), 1e-3);
  EXPECT_GE(std::log2(errors[1] / errors[2]), 1.8);
}

TEST(Snapshot, FirstPowerEqualsMassExactly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(0.0, 3.0);
  const auto g = Grid::make({9, 11}, {1.3, 0.4});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> u(g->size());
    for (auto& x : u) x = d(rng);
    const std::vector<double> ps{1.0, 2.0};
    const auto rec = snapshot(state_of(ScalarField(g, u), ScalarField(g, 0.0), ScalarField(g, 0.0)), params_on(g), ps);
    EXPECT_EQ(rec.lp_u[0].second, rec.mass_u);
  }
}

TEST(SpaceTime, OnlineMatchesPostHoc) {
  const auto g = Grid::make({24, 24}, {1.0, 1.0});
  SimParams p = params_on(g);
  p.chi = 1.0;
  p.xi = 0.5;
  p.mu = 1.0;
  p.a = 1.0;
  p.t_end = 1.0;
  p.dt_init = 5e-3;
  p.linf_cap = 1e6;
  const auto u0 = ScalarField::from_function(g, [](auto x) { return 1.0 + std::exp(-30 * (x[0] * x[0] + x[1] * x[1])); });
  const auto init = validate_initial_data(u0, ScalarField(g, 0.2), ScalarField(g, 1.0));
  const auto out = run(p, init, RunOptions{0.05, {2.0}, {}});
  const auto totals = accumulate_space_time(out.records);
  const auto& last = out.records.back();
  EXPECT_NEAR(totals.grad_v_sq, last.st_grad_v_sq, 1e-10 * last.st_grad_v_sq);
  EXPECT_NEAR(totals.u_r, last.st_u_r, 1e-10 * last.st_u_r);
  EXPECT_NEAR(totals.lap_v_sq, last.st_lap_v_sq, 1e-10 * last.st_lap_v_sq);
  for (std::size_t k = 1; k < out.records.size(); ++k) {
    EXPECT_GE(out.records[k].st_grad_v_sq, out.records[k - 1].st_grad_v_sq);
    EXPECT_GE(out.records[k].st_u_r, out.records[k - 1].st_u_r);
    EXPECT_GE(out.records[k].st_lap_v_sq, out.records[k - 1].st_lap_v_sq);
  }
}

TEST(AprioriViolation, Examples) {
  std::vector<DiagnosticsRecord> zeros(3);
  for (int k = 0; k < 3; ++k) zeros[k].t = k;
  EXPECT_TRUE(apriori_violation(zeros, 1.0).empty());
  DiagnosticsRecord rec;
  rec.t = 0.7;
  rec.mass_u = 2.0;
  const std::vector<DiagnosticsRecord> one{rec};
  const auto times = apriori_violation(one, 1.0);
  ASSERT_EQ(times.size(), 1u);
  EXPECT_EQ(times[0], 0.7);
}

TEST(Csv, HeaderAndRowFormat) {
  const std::vector<double> ps{2.0, 3.5};
  EXPECT_EQ(diagnostics_csv_header(ps),
            "t,mass_u,l2_v_sq,h1_v_sq,linf_u,w1inf_v,st_grad_v_sq,st_u_r,st_lap_v_sq,lp_u@2,lp_u@3.5");
  DiagnosticsRecord rec;
  rec.t = 0.5;
  rec.mass_u = 1.0;
  rec.lp_u = {{2.0, 4.0}, {3.5, 8.0}};
  EXPECT_EQ(diagnostics_csv_row(rec),
            "5.000000000000e-01,1.000000000000e+00,0.000000000000e+00,0.000000000000e+00,0.000000000000e+00,"
            "0.000000000000e+00,0.000000000000e+00,0.000000000000e+00,0.000000000000e+00,4.000000000000e+00,"
            "8.000000000000e+00");
  std::ostringstream out;
  const std::vector<DiagnosticsRecord> recs{rec};
  write_diagnostics_csv(out, recs, ps);
  EXPECT_EQ(out.str(), diagnostics_csv_header(ps) + "\n" + diagnostics_csv_row(rec) + "\n");
}

TEST(CBeta, Examples) {
  EXPECT_EQ(c_beta_estimate(1.0, 0.0, 0.0, 0.0, 1.0), 1.0);
  EXPECT_EQ(c_beta_estimate(1.0, 1.0, 1.0, 1.0, 1.0), 3.0);
  // xi -> 0 leaves the Laplacian term.
  EXPECT_NEAR(c_beta_estimate(1e-12, 5.0, 2.0, 0.7, 1.0), 1.4, 1e-10);
  const auto g = Grid::make({8}, {1.0});
  EXPECT_EQ(c_beta_estimate(2.0, ScalarField(g, 0.0), 1.5), 3.0);
}

TEST(CBeta, MonotoneInEachArgument) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.01, 5.0);
  for (int k = 0; k < 500; ++k) {
    double a[5] = {d(rng), d(rng), d(rng), d(rng), d(rng)};
    const double base = c_beta_estimate(a[0], a[1], a[2], a[3], a[4]);
    for (int j = 0; j < 5; ++j) {
      double b[5] = {a[0], a[1], a[2], a[3], a[4]};
      b[j] += d(rng);
      EXPECT_GE(c_beta_estimate(b[0], b[1], b[2], b[3], b[4]), base);
    }
  }
}

// int_0^T e^{2s} (1 - e^{-s})^2 ds / int_0^T e^{2s} ds
double constant_forcing_ratio_gamma2(double t) {
  const double num = (std::exp(2 * t) - 1) / 2 - 2 * (std::exp(t) - 1) + t;
  return num / ((std::exp(2 * t) - 1) / 2);
}

TEST(MaximalRegularity, ConstantForcingClosedForm) {
  const auto g = Grid::make({16}, {1.0});
  const ForcingSpec constant{"constant", 1.0, {0, 0, 0}, 0.0, 0.0};
  for (double t_end : {1.0, 3.0}) {
    const auto est = maximal_regularity_estimate(2.0, constant, g, CregSettings{t_end, 1e-2});
    EXPECT_NEAR(est.ratio, constant_forcing_ratio_gamma2(t_end), 1e-3);
  }
}

TEST(MaximalRegularity, ZeroForcingGuarded) {
  const auto g = Grid::make({8}, {1.0});
  const ForcingSpec zero{"zero", 0.0, {0, 0, 0}, 0.0, 0.0};
  const auto est = maximal_regularity_estimate(2.0, zero, g);
  EXPECT_TRUE(est.zero_forcing);
  EXPECT_EQ(est.ratio, 0.0);
}

TEST(MaximalRegularity, OscillatoryStableUnderRefinement) {
  const ForcingSpec osc{"cos1_sin1t", 1.0, {1, 0, 0}, 0.0, 1.0};
  const auto coarse = maximal_regularity_estimate(2.0, osc, Grid::make({32}, {1.0}), CregSettings{1.0, 1e-2});
  const auto fine = maximal_regularity_estimate(2.0, osc, Grid::make({64}, {1.0}), CregSettings{1.0, 5e-3});
  EXPECT_GT(fine.ratio, 0.0);
  EXPECT_TRUE(std::isfinite(fine.ratio));
  EXPECT_LT(std::abs(coarse.ratio - fine.ratio), 0.1 * fine.ratio);
}

TEST(MaximalRegularity, InvariantUnderForcingScaling) {
  const auto g = Grid::make({16, 16}, {1.0, 2.0});
  for (double gamma : {1.5, 2.0, 3.0}) {
    ForcingSpec f{"cos1_all_axes", 1.0, {1, 1, 0}, 0.3, 2.0};
    const double base = maximal_regularity_estimate(gamma, f, g).ratio;
    f.amplitude = 7.5;
    EXPECT_NEAR(maximal_regularity_estimate(gamma, f, g).ratio, base, 1e-6 * base);
  }
}

TEST(MaximalRegularity, RejectsGammaAtMostOne) {
  const auto g = Grid::make({8}, {1.0});
  EXPECT_THROW(maximal_regularity_estimate(1.0, ForcingSpec{}, g), Error);
}

TEST(MaximalRegularity, FamilyHasEightMembersAndFeedsMuStar) {
  const auto g = Grid::make({12, 12}, {1.0, 1.0});
  const auto est = estimate_c_reg(2.0, g);
  EXPECT_EQ(est.members.size(), 8u);
  EXPECT_GT(est.max_ratio, 0.0);
  for (const auto& [name, ratio] : est.members) EXPECT_LE(ratio, est.max_ratio);
  EXPECT_EQ(mu_star(2, 1.0, 1.0, est.max_ratio), 0.0);
}

}  // namespace
