/**
 * @file heuristic.hpp
 * @brief Greedy loss minimisation (Method III).
 *
 * Each round picks a fewest-hop energy path on the accessibility graph of the
 * routes that still carry flow, saturates it at rate w·δ (δ its bottleneck
 * flow) and takes δ off every route it uses. Routes that reach zero flow are
 * cut back to the prefix before their used segment and leave the graph. The
 * last path only carries what is still missing from the target.
 */

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ven/core.hpp"
#include "ven/energy.hpp"
#include "ven/network.hpp"
#include "ven/path_enum.hpp"

namespace ven {

struct MinHopChoice {
  JunctionSequence sequence;
  EnergyPath path;
  double bottleneck{0.0};  // δ, EVs per second
};

namespace detail {

inline std::vector<std::uint32_t> hops_from(const AccessibilityGraph& g, JunctionId s) {
  constexpr auto inf = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist(g.junction_count(), inf);
  std::deque<std::uint32_t> queue{s.value};
  dist[s.value] = 0;
  while (!queue.empty()) {
    const std::uint32_t i = queue.front();
    queue.pop_front();
    for (const AccessArc& a : g.out_arcs(JunctionId(i))) {
      if (dist[a.head.value] == inf) {
        dist[a.head.value] = dist[i] + 1;
        queue.push_back(a.head.value);
      }
    }
  }
  return dist;
}

class MinHopSearch {
 public:
  MinHopSearch(const AccessibilityGraph& g, std::span<const VehicularRoute> routes, JunctionId s,
               JunctionId t)
      : g_(g), routes_(routes), s_(s), t_(t), from_(hops_from(g, s)), to_(hops_to(g, t)),
        ub_(g.junction_count(), -1.0), builder_(routes, g.junction_count(), s) {}

  std::optional<MinHopChoice> run() {
    constexpr auto inf = std::numeric_limits<std::uint32_t>::max();
    if (to_[s_.value] == inf) return std::nullopt;
    hops_ = to_[s_.value];
    sequence_ = {s_};
    outer(s_, kUnbounded);
    if (best_ <= 0.0) return std::nullopt;
    return MinHopChoice{best_sequence_, EnergyPath{s_, t_, best_segments_}, best_};
  }

 private:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  bool on_dag(const AccessArc& a) const {
    constexpr auto inf = std::numeric_limits<std::uint32_t>::max();
    const auto di = from_[a.tail.value];
    const auto dj = to_[a.head.value];
    return di != inf && dj != inf && di + 1 + dj == hops_;
  }

  double widest(const AccessArc& a) const {
    double m = 0.0;
    for (const SubRoute& sub : a.routes) m = std::max(m, routes_[sub.route.value].flow);
    return m;
  }

  // Best bottleneck any fewest-hop continuation from j could reach, ignoring
  // route reuse and road loops.
  double upper(JunctionId j) {
    if (j == t_) return kUnbounded;
    double& u = ub_[j.value];
    if (u >= 0.0) return u;
    u = 0.0;
    for (const AccessArc& a : g_.out_arcs(j)) {
      if (on_dag(a)) u = std::max(u, std::min(widest(a), upper(a.head)));
    }
    return u;
  }

  void outer(JunctionId i, double bound) {
    for (const AccessArc& a : g_.out_arcs(i)) {
      if (!on_dag(a)) continue;
      const double b = std::min(bound, widest(a));
      if (std::min(b, upper(a.head)) <= best_) continue;
      sequence_.push_back(a.head);
      sets_.push_back(&a);
      if (a.head == t_) {
        inner(0, kUnbounded);
      } else {
        outer(a.head, b);
      }
      sets_.pop_back();
      sequence_.pop_back();
    }
  }

  // Route combinations along the current sequence, smallest route ids first.
  void inner(std::size_t depth, double delta) {
    if (depth == sets_.size()) {
      best_ = delta;
      best_sequence_ = sequence_;
      best_segments_ = builder_.segments();
      return;
    }
    for (const SubRoute& sub : sets_[depth]->routes) {
      const double d = std::min(delta, routes_[sub.route.value].flow);
      if (d <= best_) continue;
      if (!builder_.push(sub)) continue;
      inner(depth + 1, d);
      builder_.pop();
    }
  }

  const AccessibilityGraph& g_;
  std::span<const VehicularRoute> routes_;
  JunctionId s_, t_;
  std::vector<std::uint32_t> from_, to_;
  std::vector<double> ub_;
  PathBuilder builder_;
  std::uint32_t hops_{0};
  JunctionSequence sequence_;
  std::vector<const AccessArc*> sets_;
  double best_{0.0};
  JunctionSequence best_sequence_;
  std::vector<SubRoute> best_segments_;
};

}  // namespace detail

/**
 * @brief Fewest-hop s-t energy path with positive bottleneck flow.
 *
 * Among fewest-hop paths the largest bottleneck δ wins, then the smaller
 * junction sequence, then the smaller route ids. Paths never reuse a route or
 * revisit a junction on the road.
 */
inline std::optional<MinHopChoice> min_hop_path(const AccessibilityGraph& g,
                                                std::span<const VehicularRoute> routes,
                                                JunctionId s, JunctionId t) {
  detail::check_endpoints(g, s, t);
  return detail::MinHopSearch(g, routes, s, t).run();
}

enum class HeuristicStatus { success, infeasible };

struct HeuristicOptions {
  /// Patch the accessibility graph in place instead of rebuilding it each round.
  bool incremental{true};
};

struct HeuristicResult {
  HeuristicStatus status{HeuristicStatus::infeasible};
  TransmissionPlan plan;
  double delivered{0.0};  // ψ, kWh
  std::size_t iterations{0};
  std::vector<VehicularRoute> working_routes;  // flows and truncations after the last round

  bool success() const noexcept { return status == HeuristicStatus::success; }
};

inline HeuristicResult heuristic_min_loss(const VehicularNetwork& network,
                                          std::span<const VehicularRoute> routes,
                                          const EnergyParams& params, JunctionId s, JunctionId t,
                                          double target_kwh, const HeuristicOptions& options = {}) {
  params.validate();
  if (!(target_kwh >= 0.0) || !std::isfinite(target_kwh)) {
    throw DomainError("energy target must be a finite non-negative number");
  }
  if (!network.contains(s) || !network.contains(t)) {
    throw DomainError("source or destination is not a junction");
  }
  if (s == t) throw DomainError("source and destination must differ");

  HeuristicResult res;
  res.working_routes.assign(routes.begin(), routes.end());
  auto& work = res.working_routes;
  if (target_kwh == 0.0) {
    res.status = HeuristicStatus::success;
    return res;
  }

  AccessibilityGraph g = build_accessibility_graph(network, work, true);
  while (true) {
    auto choice = min_hop_path(g, work, s, t);
    if (!choice) {
      res.status = HeuristicStatus::infeasible;
      return res;
    }
    ++res.iterations;
    const double delta = choice->bottleneck;
    PathMetrics m = measure(choice->path, network, work);
    const double coef = energy_per_rate(m.delay_s, m.cycles, params);
    const double full_rate = params.w_kwh * delta;
    const double full_energy = coef * full_rate;

    if (res.delivered + full_energy >= target_kwh) {
      const double x = target_kwh - res.delivered;
      const double rate = coef > 0.0 ? x / coef : 0.0;
      assert(rate <= full_rate * (1.0 + 1e-12));
      res.plan.entries.push_back({std::move(choice->path), m, rate, x});
      res.delivered = target_kwh;
      res.status = HeuristicStatus::success;
      return res;
    }

    for (const SubRoute& sub : choice->path.segments) {
      VehicularRoute& r = work[sub.route.value];
      r.flow -= delta;
      if (r.flow <= 1e-12) {
        r.flow = 0.0;
        if (options.incremental) g.remove_route(r);
        r.truncate(sub.first_arc);
      }
    }
    if (!options.incremental) g = build_accessibility_graph(network, work, true);
    res.plan.entries.push_back({std::move(choice->path), m, full_rate, full_energy});
    res.delivered += full_energy;
  }
}

}  // namespace ven
