/**
 * @file energy.hpp
 * @brief Energy paths and the closed-form quantities attached to them:
 * propagation delay, rate bound, transferable energy, delivered energy and
 * loss.
 *
 * Units are fixed throughout: kWh for energy, seconds for time, kWh/s for
 * rates and EVs per second for flows.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ven/core.hpp"
#include "ven/network.hpp"

namespace ven {

struct EnergyParams {
  double w_kwh{1.0};        // packet size per charge-discharge cycle
  double zc{0.9};           // charging efficiency
  double zd{1.0};           // discharging efficiency
  double horizon_s{18000};  // transfer window T

  double z() const noexcept { return zc * zd; }

  void validate() const {
    if (!(zc >= 0.0 && zc <= 1.0) || !(zd >= 0.0 && zd <= 1.0)) {
      throw DomainError("efficiencies must lie in [0, 1]");
    }
    if (!(w_kwh > 0.0) || !std::isfinite(w_kwh)) throw DomainError("packet size must be positive");
    if (!(horizon_s > 0.0) || !std::isfinite(horizon_s)) {
      throw DomainError("transfer window must be positive");
    }
  }

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

/**
 * @brief Chain of route segments from a source to a destination.
 *
 * Each segment boundary is one charge-discharge cycle, so the cycle count
 * |p| is the number of segments.
 */
struct EnergyPath {
  JunctionId source;
  JunctionId destination;
  std::vector<SubRoute> segments;

  std::uint32_t cycles() const noexcept { return static_cast<std::uint32_t>(segments.size()); }

  friend bool operator==(const EnergyPath&, const EnergyPath&) = default;
};

/// Segment endpoints k_1..k_{|p|+1}.
inline std::vector<JunctionId> junction_sequence(const EnergyPath& path,
                                                 std::span<const VehicularRoute> routes) {
  std::vector<JunctionId> seq;
  seq.reserve(path.segments.size() + 1);
  for (const auto& s : path.segments) {
    const auto& r = routes[s.route.value];
    if (seq.empty()) seq.push_back(r.junctions[s.first_arc]);
    seq.push_back(r.junctions[s.last_arc + 1]);
  }
  return seq;
}

/// Concatenated road arcs of every segment.
inline std::vector<ArcId> path_arcs(const EnergyPath& path, std::span<const VehicularRoute> routes) {
  std::vector<ArcId> arcs;
  for (const auto& s : path.segments) {
    const auto& r = routes[s.route.value];
    arcs.insert(arcs.end(), r.arcs.begin() + s.first_arc, r.arcs.begin() + s.last_arc + 1);
  }
  return arcs;
}

/**
 * @brief Throws StructuralError unless `path` starts at its source, chains
 * head-to-tail, ends at its destination, never revisits a junction and never
 * reuses a route.
 */
inline void validate_path(const EnergyPath& path, std::span<const VehicularRoute> routes) {
  if (path.segments.empty()) throw StructuralError("energy path has no segments");
  std::vector<std::uint32_t> used_routes;
  std::vector<std::uint32_t> visited;
  JunctionId at = path.source;
  visited.push_back(at.value);
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const SubRoute& s = path.segments[k];
    if (s.route.value >= routes.size()) {
      throw StructuralError("segment " + std::to_string(k) + " references unknown route");
    }
    const auto& r = routes[s.route.value];
    if (s.first_arc > s.last_arc || s.last_arc >= r.arcs.size()) {
      throw StructuralError("segment " + std::to_string(k) + " has invalid arc indices");
    }
    if (r.junctions[s.first_arc] != at) {
      throw StructuralError("segment " + std::to_string(k) + " does not start where the previous ended");
    }
    if (std::find(used_routes.begin(), used_routes.end(), s.route.value) != used_routes.end()) {
      throw StructuralError("route " + std::to_string(s.route.value) + " used twice in one path");
    }
    used_routes.push_back(s.route.value);
    for (std::uint32_t q = s.first_arc + 1; q <= s.last_arc + 1; ++q) {
      const std::uint32_t j = r.junctions[q].value;
      if (std::find(visited.begin(), visited.end(), j) != visited.end()) {
        throw StructuralError("energy path revisits junction " + std::to_string(j));
      }
      visited.push_back(j);
    }
    at = r.junctions[s.last_arc + 1];
  }
  if (at != path.destination) throw StructuralError("energy path does not end at its destination");
}

/// Derived quantities of one path.
struct PathMetrics {
  double delay_s{0.0};
  std::uint32_t cycles{0};
  double bottleneck_flow{0.0};  // min segment flow

  friend bool operator==(const PathMetrics&, const PathMetrics&) = default;
};

/// d(p): summed delay of every arc on every segment.
inline double propagation_delay(const EnergyPath& path, const VehicularNetwork& network,
                                std::span<const VehicularRoute> routes) {
  double d = 0.0;
  for (const auto& s : path.segments) {
    const auto& r = routes[s.route.value];
    for (std::uint32_t k = s.first_arc; k <= s.last_arc; ++k) d += network.arc(r.arcs[k]).delay_s;
  }
  return d;
}

inline std::vector<double> segment_flows(const EnergyPath& path,
                                         std::span<const VehicularRoute> routes) {
  std::vector<double> f;
  f.reserve(path.segments.size());
  for (const auto& s : path.segments) f.push_back(routes[s.route.value].flow);
  return f;
}

inline PathMetrics measure(const EnergyPath& path, const VehicularNetwork& network,
                           std::span<const VehicularRoute> routes) {
  PathMetrics m;
  m.delay_s = propagation_delay(path, network, routes);
  m.cycles = path.cycles();
  m.bottleneck_flow = std::numeric_limits<double>::infinity();
  for (const auto& s : path.segments) {
    m.bottleneck_flow = std::min(m.bottleneck_flow, routes[s.route.value].flow);
  }
  if (path.segments.empty()) m.bottleneck_flow = 0.0;
  return m;
}

/// Largest rate g with g <= w f_i for every segment flow f_i.
inline double rate_cap(double w_kwh, std::span<const double> flows) {
  if (flows.empty()) return 0.0;
  return w_kwh * *std::min_element(flows.begin(), flows.end());
}

/// Energy delivered per unit rate: (T - d) z^|p|, or zero once d >= T.
inline double energy_per_rate(double delay_s, std::uint32_t cycles, const EnergyParams& params) {
  if (params.horizon_s <= delay_s) return 0.0;
  return (params.horizon_s - delay_s) * std::pow(params.z(), static_cast<double>(cycles));
}

/// Transferable energy at rate g: (T - d) z^|p| g.
inline double transferable_energy(const PathMetrics& m, const EnergyParams& params, double rate) {
  return energy_per_rate(m.delay_s, m.cycles, params) * rate;
}

/// Loss (1/z^|p| - 1) x of delivering x kWh over |p| cycles.
inline double path_loss(double energy, std::uint32_t cycles, double z) {
  if (!(z > 0.0)) throw DomainError("efficiency z = 0 makes every loss infinite");
  return (1.0 / std::pow(z, static_cast<double>(cycles)) - 1.0) * energy;
}

/// Energy that must be injected at the source so that `energy` arrives.
inline double injected_energy(double energy, std::uint32_t cycles, double z) {
  if (!(z > 0.0)) throw DomainError("efficiency z = 0 makes injection infinite");
  return energy / std::pow(z, static_cast<double>(cycles));
}

/**
 * @brief Rates and delivered energy per path.
 *
 * Each entry carries the metrics it was planned with so the plan can be
 * evaluated without the network.
 */
struct TransmissionPlan {
  struct Entry {
    EnergyPath path;
    PathMetrics metrics;
    double rate{0.0};    // g_j, kWh/s
    double energy{0.0};  // x_j, kWh
  };
  std::vector<Entry> entries;
};

struct PlanTotals {
  double delivered{0.0};  // x(s,t)
  double loss{0.0};       // L(s,t)
  std::vector<double> fractions;  // nu_j, empty when nothing is delivered
};

/**
 * @brief Sums delivered energy and loss over a plan.
 *
 * Throws ConsistencyError when an entry is negative or carries more energy
 * than its rate allows within the window.
 */
inline PlanTotals plan_totals(const TransmissionPlan& plan, const EnergyParams& params) {
  PlanTotals t;
  const double z = params.z();
  for (std::size_t k = 0; k < plan.entries.size(); ++k) {
    const auto& e = plan.entries[k];
    if (e.energy < 0.0 || e.rate < 0.0) {
      throw ConsistencyError("plan entry " + std::to_string(k) + " has a negative amount");
    }
    const double cap = transferable_energy(e.metrics, params, e.rate);
    if (e.energy > cap + 1e-9 * std::max(1.0, cap)) {
      throw ConsistencyError("plan entry " + std::to_string(k) + " delivers " +
                             std::to_string(e.energy) + " kWh above its cap " + std::to_string(cap));
    }
    t.delivered += e.energy;
    if (e.energy > 0.0) t.loss += path_loss(e.energy, e.metrics.cycles, z);
  }
  if (t.delivered > 0.0) {
    t.fractions.reserve(plan.entries.size());
    for (const auto& e : plan.entries) t.fractions.push_back(e.energy / t.delivered);
  }
  return t;
}

}  // namespace ven
