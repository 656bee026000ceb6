#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace ven;
using namespace fixture;

namespace {

LossMinProblem grid_problem(std::uint64_t seed, double target, FlowSpec flow = FlowSpec::constant(0.1)) {
  GridSpec g;
  g.seed = seed;
  g.flow = flow;
  const auto in = prepare(generate_grid(g));
  const auto set = full_path_set(in, 1'000'000);
  return make_problem(in.network, in.routes, set, in.params, target);
}

}  // namespace

TEST(BuildLp, OnePathOneSegment) {
  const auto p = synthetic({{1800.0, 1, {0.1}, {0}}}, {0.1}, 5.0);
  const auto lp = build_lp(p);
  EXPECT_EQ(lp.variable_count(), 2u);
  ASSERT_EQ(lp.row_count(), 4u);
  EXPECT_EQ(lp.rows[0].name, "cap_0");
  EXPECT_EQ(lp.rows[1].name, "rate_0_0");
  EXPECT_EQ(lp.rows[2].name, "arc_0");
  EXPECT_EQ(lp.rows[3].name, "target");
  EXPECT_NEAR(lp.rows[0].terms[1].coef, -16200.0 * 0.9, 1e-9);
  EXPECT_NEAR(lp.rows[1].rhs, 0.1, 1e-15);
}

TEST(BuildLp, SharedArcCouplesRates) {
  EnergyParams prm;
  prm.w_kwh = 2.0;
  const auto p = synthetic({{600, 1, {0.1}, {0}}, {1200, 2, {0.2, 0.3}, {0, 1}}}, {0.3, 0.3, 0.0}, 1.0, prm);
  const auto lp = build_lp(p);
  const LpRow* row = nullptr;
  for (const auto& r : lp.rows) {
    if (r.name == "arc_0") row = &r;
  }
  ASSERT_NE(row, nullptr);
  ASSERT_EQ(row->terms.size(), 2u);
  EXPECT_EQ(row->terms[0].var, 1u);
  EXPECT_EQ(row->terms[1].var, 3u);
  EXPECT_DOUBLE_EQ(row->terms[0].coef, 0.5);
  EXPECT_DOUBLE_EQ(row->rhs, 0.3);
  // Arc 2 is unused: no row.
  for (const auto& r : lp.rows) EXPECT_NE(r.name, "arc_2");
}

TEST(BuildLp, LatePathFixedAtZero) {
  const auto p = synthetic({{20000.0, 1, {0.1}, {0}}}, {0.1}, 0.0);
  const auto lp = build_lp(p);
  EXPECT_EQ(lp.upper[0], 0.0);
}

TEST(SolveMinLoss, EmptyPathSet) {
  const auto p = synthetic({}, {}, 0.0);
  const auto s = solve_min_loss(p);
  EXPECT_TRUE(s.optimal());
  EXPECT_EQ(s.objective, 0.0);
  EXPECT_EQ(solve_min_loss(synthetic({}, {}, 1.0)).status, LpStatus::infeasible);
}

TEST(SolveMinLoss, TwoPathsByHand) {
  const auto p = synthetic({{delay_for_cap(100, 2, 0.1), 2, {0.1}, {0}},
                            {delay_for_cap(500, 3, 0.1), 3, {0.1}, {1}}},
                           {0.1, 0.1}, 300.0);
  const auto s = solve_min_loss(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.energy[0], 100.0, 1e-6);
  EXPECT_NEAR(s.energy[1], 200.0, 1e-6);
  EXPECT_NEAR(s.objective, 97.80, 0.01);
  EXPECT_LE(s.max_residual, 1e-9);
  const auto exact = oracle::vertex_minimum(build_lp(p));
  ASSERT_TRUE(exact);
  EXPECT_NEAR(s.objective, *exact, 1e-6);
}

TEST(SolveMinLoss, TargetAboveCapacityAndZeroTarget) {
  const auto over = synthetic({{delay_for_cap(100, 2, 0.1), 2, {0.1}, {0}},
                               {delay_for_cap(500, 3, 0.1), 3, {0.1}, {1}}},
                              {0.1, 0.1}, 600.5);
  EXPECT_EQ(solve_min_loss(over).status, LpStatus::infeasible);
  auto zero = over;
  zero.target_kwh = 0.0;
  const auto s = solve_min_loss(zero);
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s.objective, 0.0);
  for (double x : s.energy) EXPECT_EQ(x, 0.0);
}

TEST(SolveMinLoss, SmallInstancesMatchOracles) {
  Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    const std::size_t arcs = 2 + rng.below(3);
    std::vector<PathSpec> specs;
    for (std::size_t j = 0; j < n; ++j) {
      PathSpec s;
      s.cycles = 1 + static_cast<std::uint32_t>(rng.below(4));
      s.delay_s = rng.below(8) == 0 ? 19000.0 : rng.uniform(600.0, 12000.0);
      for (std::uint32_t k = 0; k < s.cycles; ++k) s.flows.push_back(rng.uniform(0.05, 0.3));
      for (std::uint32_t a = 0; a < arcs; ++a) {
        if (rng.below(2)) s.arcs.push_back(a);
      }
      if (s.arcs.empty()) s.arcs.push_back(0);
      specs.push_back(s);
    }
    std::vector<double> h;
    for (std::size_t a = 0; a < arcs; ++a) h.push_back(rng.uniform(0.05, 0.5));
    EnergyParams prm;
    prm.zc = rng.below(6) == 0 ? 1.0 : rng.uniform(0.7, 0.99);
    const double target = rng.uniform(0.0, 2500.0);
    const auto p = synthetic(specs, h, target, prm);

    const auto s = solve_min_loss(p);
    const auto full = oracle::vertex_minimum(build_lp(p));
    const auto red = oracle::vertex_minimum(reduced_oracle(p));
    ASSERT_EQ(full.has_value(), red.has_value()) << trial;
    if (!full) {
      EXPECT_EQ(s.status, LpStatus::infeasible) << trial;
      continue;
    }
    ASSERT_TRUE(s.optimal()) << trial;
    EXPECT_NEAR(s.objective, *full, 1e-4) << trial;
    EXPECT_NEAR(*red, *full, 1e-6) << trial;
    EXPECT_LE(s.max_residual, 1e-9) << trial;
    EXPECT_NEAR(plan_totals(s.plan, p.params).loss, s.objective, 1e-6) << trial;

    // Coarse grid over x: never below the optimum, and close to it.
    std::vector<double> ub;
    const auto rl = reduced_oracle(p);
    for (std::size_t j = 0; j < n; ++j) ub.push_back(rl.upper[j]);
    const double step = std::max(1.0, *std::max_element(ub.begin(), ub.end()) / 40.0);
    if (const auto grid = oracle::grid_minimum(rl, step, ub)) {
      EXPECT_GE(*grid, s.objective - 1e-6) << trial;
    }
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(SolveMinLoss, ExactGridOracleOnIntegerInstances) {
  // Caps are whole kWh and targets whole numbers, so the optimum lies on the
  // unit grid and dense grid search is exact.
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    std::vector<PathSpec> specs;
    for (std::size_t j = 0; j < n; ++j) {
      const auto cycles = 1 + static_cast<std::uint32_t>(rng.below(3));
      const double cap = static_cast<double>(10 + rng.below(60));
      specs.push_back({delay_for_cap(cap, cycles, 0.1), cycles, {0.1}, {static_cast<std::uint32_t>(j)}});
    }
    const auto p = synthetic(specs, std::vector<double>(n, 0.1), static_cast<double>(rng.below(150)));
    const auto rl = reduced_oracle(p);
    std::vector<double> ub(rl.upper.begin(), rl.upper.end());
    for (auto& u : ub) u = std::round(u);
    const auto grid = oracle::grid_minimum(rl, 1.0, ub);
    const auto s = solve_min_loss(p);
    ASSERT_EQ(grid.has_value(), s.optimal()) << trial;
    if (grid) {
      EXPECT_NEAR(s.objective, *grid, 1e-4) << trial;
    }
  }
}

TEST(SolveMinLoss, MonotoneConvexSweepAndTightTarget) {
  const auto base = grid_problem(3, 0.0, FlowSpec::uniform(0.1, 0.3));
  ASSERT_GT(base.size(), 0u);
  std::vector<double> losses;
  double last_feasible = -1.0;
  for (int k = 0; k < 20; ++k) {
    auto p = base;
    p.target_kwh = 150.0 * k;
    const auto s = solve_min_loss(p);
    if (!s.optimal()) {
      break;
    }
    EXPECT_LE(s.max_residual, 1e-9);
    double sum = 0.0;
    for (double x : s.energy) sum += x;
    EXPECT_NEAR(sum, p.target_kwh, 1e-6 * std::max(1.0, p.target_kwh));
    losses.push_back(s.objective);
    last_feasible = p.target_kwh;
  }
  ASSERT_GE(losses.size(), 5u) << last_feasible;
  for (std::size_t k = 1; k < losses.size(); ++k) EXPECT_GE(losses[k], losses[k - 1] - 1e-9);
  for (std::size_t k = 2; k < losses.size(); ++k) {
    EXPECT_GE(losses[k] - 2 * losses[k - 1] + losses[k - 2], -1e-6) << k;
  }
}

TEST(SolveMinLoss, LosslessTieBreakPrefersEarlierPaths) {
  EnergyParams prm;
  prm.zc = 1.0;
  const auto p = synthetic({{delay_for_cap(100, 2, 0.1, prm), 2, {0.1}, {0}},
                            {delay_for_cap(100, 1, 0.1, prm), 1, {0.1}, {1}},
                            {delay_for_cap(100, 3, 0.1, prm), 3, {0.1}, {2}}},
                           {0.1, 0.1, 0.1}, 150.0, prm);
  const auto s = solve_min_loss(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s.objective, 0.0);
  EXPECT_NEAR(s.energy[0], 100.0, 1e-9);
  EXPECT_NEAR(s.energy[1], 50.0, 1e-9);
  EXPECT_NEAR(s.energy[2], 0.0, 1e-9);
}

TEST(SolveMinLoss, SubsetNeverBeatsFullSet) {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GridSpec g;
    g.seed = seed;
    g.flow = FlowSpec::uniform(0.1, 0.3);
    const auto in = prepare(generate_grid(g));
    PathSet full;
    try {
      full = full_path_set(in, 200'000);
    } catch (const SizeOverflowError&) {
      continue;
    }
    if (full.paths.empty()) continue;
    for (double target : {100.0, 800.0, 2000.0}) {
      const auto sf = solve_min_loss(make_problem(in.network, in.routes, full, in.params, target));
      for (std::uint64_t s = 1; s <= 3; ++s) {
        BoundedOptions b;
        b.limit = 10;
        b.seed = s;
        const auto sub = sampled_path_set(in, b);
        const auto ss = solve_min_loss(make_problem(in.network, in.routes, sub, in.params, target));
        if (ss.optimal()) {
          ASSERT_TRUE(sf.optimal());
          EXPECT_GE(ss.objective, sf.objective - 1e-6);
          ++compared;
        }
      }
    }
  }
  EXPECT_GT(compared, 10);
}

TEST(SolveMinLoss, ReplayAgainstModel) {
  const auto p = grid_problem(6, 900.0, FlowSpec::uniform(0.1, 0.3));
  const auto s = solve_min_loss(p);
  ASSERT_TRUE(s.optimal());
  const auto tot = plan_totals(s.plan, p.params);
  EXPECT_NEAR(tot.loss, s.objective, 1e-6);
  EXPECT_NEAR(tot.delivered, 900.0, 1e-6);
  // Rates and amounts satisfy every row of the full program.
  EXPECT_LE(max_scaled_violation(build_lp(p), full_point(s.energy, s.rate)), 1e-9);
}

TEST(MakeProblem, Validation) {
  GridSpec g;
  g.seed = 2;
  const auto in = prepare(generate_grid(g));
  const auto set = full_path_set(in, 1'000'000);
  EXPECT_THROW(make_problem(in.network, in.routes, set, in.params, -1.0), DomainError);
  PathSet bogus = set;
  bogus.paths.push_back({in.source, in.destination, {{RouteId(999), 0, 0}}});
  EXPECT_THROW(make_problem(in.network, in.routes, bogus, in.params, 1.0), ConsistencyError);
  const auto p = make_problem(in.network, in.routes, set, in.params, 1.0);
  EXPECT_EQ(p.arc_flows, arc_flows(in.network, in.routes));
}
