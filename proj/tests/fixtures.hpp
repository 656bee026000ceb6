// Shared instance builders for the unit tests and the acceptance run.

#pragma once

#include "oracles.hpp"

namespace fixture {

using namespace ven;

// Complete road digraph on n junctions with one single-arc route per arc, so
// the accessibility graph is complete too.
inline Instance complete(std::uint32_t n) {
  Scenario sc;
  sc.junction_count = n;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sc.routes.push_back({{ArcId(static_cast<std::uint32_t>(sc.arcs.size()))}, 0.1});
      sc.arcs.push_back({JunctionId(i), JunctionId(j), 600.0, 0, 0});
    }
  }
  sc.source = JunctionId(0);
  sc.destination = JunctionId(n - 1);
  return prepare(sc);
}

inline AccessibilityGraph pruned_of(const Instance& in) {
  return prune_unreachable(in.network, build_accessibility_graph(in.network, in.routes),
                           in.destination)
      .graph;
}

inline Instance random_instance(std::uint64_t seed, std::uint32_t max_n) {
  RandomSpec spec;
  spec.junctions = 3 + static_cast<std::uint32_t>(seed % (max_n - 2));
  spec.road_density = 0.25 + 0.1 * static_cast<double>(seed % 6);
  spec.route_count = 2 + static_cast<std::uint32_t>(seed % 7);
  spec.route_length_cap = spec.junctions - 1;
  spec.seed = seed;
  return prepare(generate_random(spec));
}

inline std::set<oracle::Key> as_keys(const std::vector<JunctionSequence>& seqs) {
  std::set<oracle::Key> out;
  for (const auto& k : seqs) {
    oracle::Key key;
    for (auto j : k) key.push_back(j.value);
    out.insert(key);
  }
  return out;
}

inline std::set<oracle::Key> as_keys(const PathSet& set) {
  std::set<oracle::Key> out;
  for (const auto& p : set.paths) out.insert(oracle::path_key(p));
  return out;
}

// Problem over synthetic paths: each path has its own delay, cycle count,
// segment flows and road arcs. Path objects themselves are placeholders.
struct PathSpec {
  double delay_s;
  std::uint32_t cycles;
  std::vector<double> flows;
  std::vector<std::uint32_t> arcs;
};

inline LossMinProblem synthetic(const std::vector<PathSpec>& specs, std::vector<double> h,
                         double target, EnergyParams params = {}) {
  LossMinProblem p;
  p.params = params;
  p.target_kwh = target;
  p.arc_flows = std::move(h);
  for (const auto& s : specs) {
    EnergyPath path{JunctionId(0), JunctionId(1), {}};
    for (std::uint32_t k = 0; k < s.cycles; ++k) path.segments.push_back({RouteId(k), 0, 0});
    p.paths.push_back(path);
    p.metrics.push_back({s.delay_s, s.cycles, *std::min_element(s.flows.begin(), s.flows.end())});
    p.segment_flows.push_back(s.flows);
    std::vector<ArcId> arcs;
    for (auto a : s.arcs) arcs.emplace_back(a);
    p.path_arcs.push_back(arcs);
  }
  return p;
}

// Delay that makes a path's full capacity equal `cap` kWh.
inline double delay_for_cap(double cap, std::uint32_t cycles, double flow, const EnergyParams& p = {}) {
  return p.horizon_s - cap / (std::pow(p.z(), cycles) * p.w_kwh * flow);
}

// The reduced program written out independently: x_j only, caps as bounds.
inline LinearProgram reduced_oracle(const LossMinProblem& p) {
  LinearProgram lp;
  const auto n = p.size();
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& m = p.metrics[j];
    c[j] = m.delay_s < p.params.horizon_s
               ? (p.params.horizon_s - m.delay_s) * std::pow(p.params.z(), m.cycles)
               : 0.0;
    const double fmin = *std::min_element(p.segment_flows[j].begin(), p.segment_flows[j].end());
    lp.add_variable("x", c[j] > 0 ? 1.0 / std::pow(p.params.z(), m.cycles) - 1.0 : 0.0, 0.0,
                    c[j] * p.params.w_kwh * fmin);
  }
  for (std::size_t a = 0; a < p.arc_flows.size(); ++a) {
    std::vector<LpTerm> terms;
    for (std::size_t j = 0; j < n; ++j) {
      if (c[j] <= 0) continue;
      for (auto arc : p.path_arcs[j]) {
        if (arc.value == a) terms.push_back({static_cast<std::uint32_t>(j), 1.0 / (c[j] * p.params.w_kwh)});
      }
    }
    if (!terms.empty()) lp.add_row("arc", terms, RowSense::less_equal, p.arc_flows[a]);
  }
  std::vector<LpTerm> all;
  for (std::size_t j = 0; j < n; ++j) all.push_back({static_cast<std::uint32_t>(j), 1.0});
  lp.add_row("target", all, RowSense::greater_equal, p.target_kwh);
  return lp;
}

}  // namespace fixture
