/**
 * @file rate_opt.hpp
 * @brief Loss-minimising rate assignment over a given set of energy paths.
 *
 * The full program has an energy amount x_j and a rate g_j per path:
 *
 *   minimise   sum_j (1/z^|p_j| - 1) x_j
 *   subject to 0 <= x_j <= (T - d(p_j)) z^|p_j| g_j
 *              0 <= g_j <= w f_i^j            for every segment i of p_j
 *              sum_{j : a in p_j} g_j / w <= h_a   for every road arc a
 *              sum_j x_j >= target
 *
 * build_lp() emits exactly these rows. solve_min_loss() solves an
 * equivalent program in x alone: since g_j only appears in upper-bounding
 * rows besides the capacity row, g_j = x_j / ((T - d) z^|p_j|) is always the
 * best choice, which turns the rate rows into box bounds and the arc rows
 * into rows over x. Arc rows that cannot bind are dropped.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ven/core.hpp"
#include "ven/energy.hpp"
#include "ven/lp.hpp"
#include "ven/network.hpp"
#include "ven/path_enum.hpp"

namespace ven {

struct LossMinProblem {
  std::vector<EnergyPath> paths;
  std::vector<PathMetrics> metrics;
  std::vector<std::vector<double>> segment_flows;  // f_i^j
  std::vector<std::vector<ArcId>> path_arcs;
  std::vector<double> arc_flows;  // h_a by arc id
  EnergyParams params;
  double target_kwh{0.0};

  std::size_t size() const noexcept { return paths.size(); }
};

inline LossMinProblem make_problem(const VehicularNetwork& network,
                                   std::span<const VehicularRoute> routes,
                                   std::span<const EnergyPath> paths, const EnergyParams& params,
                                   double target_kwh) {
  params.validate();
  if (!(target_kwh >= 0.0) || !std::isfinite(target_kwh)) {
    throw DomainError("energy target must be a finite non-negative number");
  }
  LossMinProblem p;
  p.params = params;
  p.target_kwh = target_kwh;
  p.arc_flows = arc_flows(network, routes);
  p.paths.assign(paths.begin(), paths.end());
  for (const auto& path : p.paths) {
    for (const auto& s : path.segments) {
      if (s.route.value >= routes.size()) {
        throw ConsistencyError("path references unknown route " + std::to_string(s.route.value));
      }
    }
    p.metrics.push_back(measure(path, network, routes));
    p.segment_flows.push_back(segment_flows(path, routes));
    p.path_arcs.push_back(ven::path_arcs(path, routes));
  }
  return p;
}

inline LossMinProblem make_problem(const VehicularNetwork& network,
                                   std::span<const VehicularRoute> routes, const PathSet& set,
                                   const EnergyParams& params, double target_kwh) {
  return make_problem(network, routes, std::span<const EnergyPath>(set.paths), params, target_kwh);
}

/// Loss per delivered kWh on a path; zero when the path cannot carry energy.
inline double loss_coefficient(const PathMetrics& m, const EnergyParams& params) {
  if (energy_per_rate(m.delay_s, m.cycles, params) <= 0.0) return 0.0;
  return path_loss(1.0, m.cycles, params.z());
}

/**
 * @brief The full program with variables x_j (index 2j) and g_j (index 2j+1).
 *
 * Arc rows are emitted, in arc-id order, for every arc used by at least one
 * path. Paths whose delay reaches the window get x_j fixed at zero.
 */
inline LinearProgram build_lp(const LossMinProblem& problem) {
  LinearProgram lp;
  const auto& prm = problem.params;
  const std::size_t n = problem.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& m = problem.metrics[j];
    const bool usable = energy_per_rate(m.delay_s, m.cycles, prm) > 0.0;
    lp.add_variable("x_" + std::to_string(j), loss_coefficient(m, prm), 0.0,
                    usable ? kInfinity : 0.0);
    lp.add_variable("g_" + std::to_string(j), 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto& m = problem.metrics[j];
    const double c = energy_per_rate(m.delay_s, m.cycles, prm);
    const auto x = static_cast<std::uint32_t>(2 * j);
    lp.add_row("cap_" + std::to_string(j), {{x, 1.0}, {x + 1, -c}}, RowSense::less_equal, 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto g = static_cast<std::uint32_t>(2 * j + 1);
    for (std::size_t i = 0; i < problem.segment_flows[j].size(); ++i) {
      lp.add_row("rate_" + std::to_string(j) + "_" + std::to_string(i), {{g, 1.0}},
                 RowSense::less_equal, prm.w_kwh * problem.segment_flows[j][i]);
    }
  }
  std::vector<std::vector<LpTerm>> by_arc(problem.arc_flows.size());
  for (std::size_t j = 0; j < n; ++j) {
    for (ArcId a : problem.path_arcs[j]) {
      by_arc.at(a.value).push_back({static_cast<std::uint32_t>(2 * j + 1), 1.0 / prm.w_kwh});
    }
  }
  for (std::size_t a = 0; a < by_arc.size(); ++a) {
    if (by_arc[a].empty()) continue;
    lp.add_row("arc_" + std::to_string(a), std::move(by_arc[a]), RowSense::less_equal,
               problem.arc_flows[a]);
  }
  std::vector<LpTerm> target;
  for (std::size_t j = 0; j < n; ++j) target.push_back({static_cast<std::uint32_t>(2 * j), 1.0});
  lp.add_row("target", std::move(target), RowSense::greater_equal, problem.target_kwh);
  return lp;
}

/// Interleaves amounts and rates in the variable order used by build_lp().
inline std::vector<double> full_point(std::span<const double> energy, std::span<const double> rate) {
  std::vector<double> v(2 * energy.size());
  for (std::size_t j = 0; j < energy.size(); ++j) {
    v[2 * j] = energy[j];
    v[2 * j + 1] = rate[j];
  }
  return v;
}

struct LpSolution {
  LpStatus status{LpStatus::infeasible};
  TransmissionPlan plan;       // entries with positive energy
  std::vector<double> energy;  // x_j for every path
  std::vector<double> rate;    // g_j for every path
  double objective{0.0};       // total loss, kWh
  std::size_t iterations{0};
  double max_residual{0.0};    // worst scaled violation of the full program

  bool optimal() const noexcept { return status == LpStatus::optimal; }
};

struct SolveOptions {
  /// Check the answer against every row of the full program.
  bool verify{true};
};

/**
 * @brief Solves the loss-minimisation program.
 *
 * Among optimal plans the one minimising sum_j (j+1) x_j is returned, so
 * energy goes to earlier paths first and the target row is tight.
 */
inline LpSolution solve_min_loss(const LossMinProblem& problem, const SolveOptions& options = {}) {
  const auto& prm = problem.params;
  const std::size_t n = problem.size();
  LpSolution sol;
  sol.energy.assign(n, 0.0);
  sol.rate.assign(n, 0.0);

  if (problem.target_kwh == 0.0) {
    sol.status = LpStatus::optimal;
    return sol;
  }

  LinearProgram reduced;
  std::vector<double> coef(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& m = problem.metrics[j];
    coef[j] = energy_per_rate(m.delay_s, m.cycles, prm);
    const double bottleneck = problem.segment_flows[j].empty()
                                  ? 0.0
                                  : *std::min_element(problem.segment_flows[j].begin(),
                                                      problem.segment_flows[j].end());
    const double upper = coef[j] > 0.0 ? coef[j] * prm.w_kwh * bottleneck : 0.0;
    reduced.add_variable("x_" + std::to_string(j), loss_coefficient(m, prm), 0.0, upper);
  }

  // Arc rows over x: sum_j x_j / (c_j w) <= h_a, kept only when they can bind.
  // On consistent input that needs two or more paths on the arc.
  std::vector<std::vector<LpTerm>> by_arc(problem.arc_flows.size());
  std::vector<double> demand(problem.arc_flows.size(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (coef[j] <= 0.0 || reduced.upper[j] <= 0.0) continue;
    const double per_kwh = 1.0 / (coef[j] * prm.w_kwh);
    for (ArcId a : problem.path_arcs[j]) {
      by_arc[a.value].push_back({static_cast<std::uint32_t>(j), per_kwh});
      demand[a.value] += reduced.upper[j] * per_kwh;
    }
  }
  for (std::size_t a = 0; a < by_arc.size(); ++a) {
    if (by_arc[a].empty()) continue;
    if (demand[a] <= problem.arc_flows[a] * (1.0 + 1e-12)) continue;
    reduced.add_row("arc_" + std::to_string(a), std::move(by_arc[a]), RowSense::less_equal,
                    problem.arc_flows[a]);
  }
  std::vector<LpTerm> target;
  for (std::size_t j = 0; j < n; ++j) target.push_back({static_cast<std::uint32_t>(j), 1.0});
  reduced.add_row("target", std::move(target), RowSense::greater_equal, problem.target_kwh);

  SimplexOptions sopt;
  sopt.secondary_cost.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    sopt.secondary_cost[j] = static_cast<double>(j + 1) / static_cast<double>(n);
  }
  const LpResult r = solve_lp(reduced, sopt);
  sol.iterations = r.iterations;
  if (r.status != LpStatus::optimal) {
    sol.status = LpStatus::infeasible;
    return sol;
  }
  sol.status = LpStatus::optimal;
  for (std::size_t j = 0; j < n; ++j) {
    sol.energy[j] = r.x[j];
    sol.rate[j] = coef[j] > 0.0 ? r.x[j] / coef[j] : 0.0;
    if (sol.energy[j] > 0.0) {
      sol.plan.entries.push_back({problem.paths[j], problem.metrics[j], sol.rate[j], sol.energy[j]});
      sol.objective += loss_coefficient(problem.metrics[j], prm) * sol.energy[j];
    }
  }
  if (options.verify) {
    const LinearProgram full = build_lp(problem);
    sol.max_residual = max_scaled_violation(full, full_point(sol.energy, sol.rate));
  } else {
    sol.max_residual = r.max_residual;
  }
  return sol;
}

/**
 * @brief Worst scaled violation of the full program by an arbitrary plan.
 *
 * Used to replay plans from any method against the original flows.
 */
inline double replay_violation(const VehicularNetwork& network,
                               std::span<const VehicularRoute> routes, const EnergyParams& params,
                               const TransmissionPlan& plan, double target_kwh) {
  std::vector<EnergyPath> paths;
  std::vector<double> energy, rate;
  for (const auto& e : plan.entries) {
    paths.push_back(e.path);
    energy.push_back(e.energy);
    rate.push_back(e.rate);
  }
  const auto problem = make_problem(network, routes, paths, params, target_kwh);
  return max_scaled_violation(build_lp(problem), full_point(energy, rate));
}

}  // namespace ven
