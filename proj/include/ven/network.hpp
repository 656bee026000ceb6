/**
 * @file network.hpp
 * @brief Road network, vehicular routes, and the junction accessibility graph.
 *
 * The road network is a directed graph whose arcs carry traversal delays in
 * seconds. Vehicular routes are loop-free arc sequences with an EV flow. The
 * accessibility graph links junction i to junction j whenever some route
 * visits i strictly before j, and records which routes (and which of their
 * sub-routes) realise that link.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ven/core.hpp"

namespace ven {

struct Arc {
  ArcId id;
  JunctionId tail;
  JunctionId head;
  double delay_s{0.0};
};

/**
 * @brief Immutable directed road graph G(N, A).
 *
 * Junctions are the dense range [0, junction_count). Arc ids must equal their
 * position in the arc list.
 */
class VehicularNetwork {
 public:
  VehicularNetwork() = default;

  VehicularNetwork(std::uint32_t junction_count, std::vector<Arc> arcs)
      : junction_count_(junction_count), arcs_(std::move(arcs)),
        out_(junction_count), in_(junction_count) {
    for (std::size_t k = 0; k < arcs_.size(); ++k) {
      const Arc& a = arcs_[k];
      if (a.id.value != k) {
        throw StructuralError("arc at position " + std::to_string(k) + " has id " +
                              std::to_string(a.id.value) + "; arc ids must be consecutive from 0");
      }
      if (a.tail.value >= junction_count_ || a.head.value >= junction_count_) {
        throw StructuralError("arc " + std::to_string(k) + " references an undeclared junction");
      }
      if (a.tail == a.head) {
        throw StructuralError("arc " + std::to_string(k) + " is a self-loop");
      }
      if (!(a.delay_s > 0.0) || !std::isfinite(a.delay_s)) {
        throw StructuralError("arc " + std::to_string(k) + " has non-positive or non-finite delay");
      }
      const auto key = pair_key(a.tail, a.head);
      if (!by_endpoints_.emplace(key, a.id).second) {
        throw StructuralError("duplicate road arc " + std::to_string(a.tail.value) + "->" +
                              std::to_string(a.head.value) + " (arc " + std::to_string(k) + ")");
      }
      out_[a.tail.value].push_back(a.id);
      in_[a.head.value].push_back(a.id);
    }
  }

  std::uint32_t junction_count() const noexcept { return junction_count_; }
  std::size_t arc_count() const noexcept { return arcs_.size(); }
  std::span<const Arc> arcs() const noexcept { return arcs_; }

  bool contains(JunctionId j) const noexcept { return j.value < junction_count_; }

  const Arc& arc(ArcId id) const {
    if (id.value >= arcs_.size()) {
      throw DomainError("unknown arc id " + std::to_string(id.value));
    }
    return arcs_[id.value];
  }

  std::optional<ArcId> find_arc(JunctionId tail, JunctionId head) const {
    auto it = by_endpoints_.find(pair_key(tail, head));
    if (it == by_endpoints_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const ArcId> out_arcs(JunctionId j) const { return out_.at(j.value); }
  std::span<const ArcId> in_arcs(JunctionId j) const { return in_.at(j.value); }

 private:
  static std::uint64_t pair_key(JunctionId a, JunctionId b) {
    return (std::uint64_t{a.value} << 32) | b.value;
  }

  std::uint32_t junction_count_{0};
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> out_;
  std::vector<std::vector<ArcId>> in_;
  std::unordered_map<std::uint64_t, ArcId> by_endpoints_;
};

/// A route as supplied by the user, before loop splitting.
struct RawRoute {
  std::vector<ArcId> arcs;
  double flow{0.0};  // EVs per second

  friend bool operator==(const RawRoute&, const RawRoute&) = default;
};

/**
 * @brief Loop-free route r_i with its flow f_i.
 *
 * `junctions` has one more entry than `arcs`: junctions[k] is the tail of
 * arcs[k] and junctions.back() the head of the last arc.
 */
struct VehicularRoute {
  RouteId id;
  std::vector<ArcId> arcs;
  std::vector<JunctionId> junctions;
  double flow{0.0};
  std::uint32_t origin{0};  // index of the raw route this piece came from

  std::size_t size() const noexcept { return arcs.size(); }

  /// Keeps only the first `arc_count` arcs.
  void truncate(std::size_t arc_count) {
    if (arc_count >= arcs.size()) return;
    arcs.resize(arc_count);
    junctions.resize(arc_count == 0 ? 0 : arc_count + 1);
  }

  friend bool operator==(const VehicularRoute&, const VehicularRoute&) = default;
};

namespace detail {

inline void append_piece(const VehicularNetwork& network, std::span<const ArcId> arcs, double flow,
                         std::uint32_t origin, std::vector<VehicularRoute>& out) {
  if (arcs.empty()) return;
  VehicularRoute r;
  r.id = RouteId(static_cast<std::uint32_t>(out.size()));
  r.arcs.assign(arcs.begin(), arcs.end());
  r.flow = flow;
  r.origin = origin;
  r.junctions.reserve(arcs.size() + 1);
  r.junctions.push_back(network.arc(arcs.front()).tail);
  for (ArcId a : arcs) r.junctions.push_back(network.arc(a).head);
  out.push_back(std::move(r));
}

// Splits one connected arc sequence at its first loop, recursing on the suffix.
inline void split_loops(const VehicularNetwork& network, std::span<const ArcId> arcs, double flow,
                        std::uint32_t origin, std::vector<VehicularRoute>& out) {
  while (!arcs.empty()) {
    std::unordered_map<std::uint32_t, std::size_t> seen;
    seen.emplace(network.arc(arcs.front()).tail.value, 0);
    std::optional<std::pair<std::size_t, std::size_t>> loop;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const std::uint32_t head = network.arc(arcs[k]).head.value;
      auto [it, fresh] = seen.emplace(head, k + 1);
      if (!fresh) {
        loop.emplace(it->second, k + 1);
        break;
      }
    }
    if (!loop) {
      append_piece(network, arcs, flow, origin, out);
      return;
    }
    // Junction positions p < q coincide: keep arcs before p, drop the loop
    // arcs [p, q), continue with the arcs from q on.
    const auto [p, q] = *loop;
    append_piece(network, arcs.first(p), flow, origin, out);
    arcs = arcs.subspan(q);
  }
}

}  // namespace detail

/**
 * @brief Splits looped routes into loop-free pieces.
 *
 * A route that revisits a junction is cut at the loop: the prefix before the
 * loop entry and the suffix after the loop exit become separate routes with
 * the original flow. Output keeps input order with split pieces adjacent, and
 * route ids are reassigned 0..k-1.
 */
inline std::vector<VehicularRoute> normalize_routes(const VehicularNetwork& network,
                                                    std::span<const RawRoute> raw) {
  std::vector<VehicularRoute> out;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const RawRoute& route = raw[r];
    if (route.arcs.empty()) {
      throw StructuralError("route " + std::to_string(r) + " has no arcs");
    }
    if (!(route.flow >= 0.0) || !std::isfinite(route.flow)) {
      throw DomainError("route " + std::to_string(r) + " has a negative or non-finite flow");
    }
    for (ArcId a : route.arcs) {
      if (a.value >= network.arc_count()) {
        throw StructuralError("route " + std::to_string(r) + " references unknown arc " +
                              std::to_string(a.value));
      }
    }
    for (std::size_t k = 0; k + 1 < route.arcs.size(); ++k) {
      const Arc& a = network.arc(route.arcs[k]);
      const Arc& b = network.arc(route.arcs[k + 1]);
      if (a.head != b.tail) {
        throw StructuralError("route " + std::to_string(r) + " is disconnected between arcs " +
                              std::to_string(a.id.value) + " and " + std::to_string(b.id.value));
      }
    }
    detail::split_loops(network, route.arcs, route.flow, static_cast<std::uint32_t>(r), out);
  }
  return out;
}

inline std::vector<RawRoute> to_raw(std::span<const VehicularRoute> routes) {
  std::vector<RawRoute> raw;
  raw.reserve(routes.size());
  for (const auto& r : routes) raw.push_back({r.arcs, r.flow});
  return raw;
}

/// Vehicular flow h_a of one road arc: the summed flow of all routes using it.
inline double arc_flow(const VehicularNetwork& network, std::span<const VehicularRoute> routes,
                       ArcId a) {
  network.arc(a);  // validates the id
  double h = 0.0;
  for (const auto& r : routes) {
    if (std::find(r.arcs.begin(), r.arcs.end(), a) != r.arcs.end()) h += r.flow;
  }
  return h;
}

/// h_a for every arc, indexed by arc id.
inline std::vector<double> arc_flows(const VehicularNetwork& network,
                                     std::span<const VehicularRoute> routes) {
  std::vector<double> h(network.arc_count(), 0.0);
  for (const auto& r : routes) {
    for (ArcId a : r.arcs) h[a.value] += r.flow;
  }
  return h;
}

/**
 * @brief Sub-route r(first_arc, last_arc) of one route; arc indices are
 * 0-based and inclusive.
 */
struct SubRoute {
  RouteId route;
  std::uint32_t first_arc{0};
  std::uint32_t last_arc{0};

  friend auto operator<=>(const SubRoute&, const SubRoute&) = default;
};

/// Accessibility arc (tail, head) together with its index set.
struct AccessArc {
  JunctionId tail;
  JunctionId head;
  std::vector<SubRoute> routes;  // sorted by route id, never empty

  friend bool operator==(const AccessArc&, const AccessArc&) = default;
};

class AccessibilityGraph {
 public:
  AccessibilityGraph() = default;
  explicit AccessibilityGraph(std::uint32_t junction_count) : out_(junction_count) {}

  std::uint32_t junction_count() const noexcept { return static_cast<std::uint32_t>(out_.size()); }
  std::size_t arc_count() const noexcept { return arc_count_; }

  /// |Ã| / (|N|(|N|-1)), zero for graphs with fewer than two junctions.
  double density() const noexcept {
    const double n = junction_count();
    return n < 2 ? 0.0 : static_cast<double>(arc_count_) / (n * (n - 1));
  }

  /// Outgoing arcs of i, sorted by head.
  std::span<const AccessArc> out_arcs(JunctionId i) const { return out_.at(i.value); }

  const AccessArc* find(JunctionId i, JunctionId j) const {
    const auto& arcs = out_.at(i.value);
    auto it = std::lower_bound(arcs.begin(), arcs.end(), j,
                               [](const AccessArc& a, JunctionId h) { return a.head < h; });
    if (it == arcs.end() || it->head != j) return nullptr;
    return &*it;
  }

  template <typename F>
  void for_each_arc(F&& f) const {
    for (const auto& arcs : out_) {
      for (const auto& a : arcs) f(a);
    }
  }

  /// Copy keeping only arcs whose head satisfies `keep`.
  template <typename Pred>
  AccessibilityGraph filter_heads(Pred&& keep) const {
    AccessibilityGraph g(junction_count());
    for (std::size_t i = 0; i < out_.size(); ++i) {
      for (const auto& a : out_[i]) {
        if (keep(a.head)) {
          g.out_[i].push_back(a);
          ++g.arc_count_;
        }
      }
    }
    return g;
  }

  /**
   * @brief Drops every index-set entry of `route`, removing arcs that become
   * empty. `route.junctions` must still describe the arcs it was built from.
   */
  void remove_route(const VehicularRoute& route) {
    const auto& js = route.junctions;
    for (std::size_t p = 0; p + 1 < js.size(); ++p) {
      auto& arcs = out_.at(js[p].value);
      for (std::size_t q = p + 1; q < js.size(); ++q) {
        auto it = std::lower_bound(arcs.begin(), arcs.end(), js[q],
                                   [](const AccessArc& a, JunctionId h) { return a.head < h; });
        if (it == arcs.end() || it->head != js[q]) continue;
        auto& set = it->routes;
        auto e = std::lower_bound(set.begin(), set.end(), route.id,
                                  [](const SubRoute& s, RouteId r) { return s.route < r; });
        if (e != set.end() && e->route == route.id) set.erase(e);
        if (set.empty()) {
          arcs.erase(it);
          --arc_count_;
        }
      }
    }
  }

  friend bool operator==(const AccessibilityGraph&, const AccessibilityGraph&) = default;

 private:
  friend AccessibilityGraph build_accessibility_graph(const VehicularNetwork&,
                                                      std::span<const VehicularRoute>, bool);

  std::vector<std::vector<AccessArc>> out_;
  std::size_t arc_count_{0};
};

/**
 * @brief Builds Ã and its index sets from normalized routes.
 *
 * Every ordered pair (i, j) that a route visits with i strictly before j
 * becomes an arc, and the route's sub-route from i to j joins I_(i,j). With
 * `skip_idle_routes`, routes with zero flow contribute nothing.
 */
inline AccessibilityGraph build_accessibility_graph(const VehicularNetwork& network,
                                                    std::span<const VehicularRoute> routes,
                                                    bool skip_idle_routes = false) {
  struct Entry {
    std::uint32_t tail, head;
    SubRoute sub;
  };
  std::vector<Entry> entries;
  std::size_t total = 0;
  for (const auto& r : routes) {
    const std::size_t L = r.junctions.size();
    total += L * (L > 0 ? L - 1 : 0) / 2;
  }
  entries.reserve(total);

  for (const auto& r : routes) {
    if (r.arcs.empty() || (skip_idle_routes && !(r.flow > 0.0))) continue;
    if (r.junctions.size() != r.arcs.size() + 1) {
      throw StructuralError("route " + std::to_string(r.id.value) + " has inconsistent junctions");
    }
    const auto& js = r.junctions;
    for (std::size_t p = 0; p + 1 < js.size(); ++p) {
      for (std::size_t q = p + 1; q < js.size(); ++q) {
        entries.push_back({js[p].value, js[q].value,
                           SubRoute{r.id, static_cast<std::uint32_t>(p),
                                    static_cast<std::uint32_t>(q - 1)}});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.tail, a.head, a.sub) < std::tie(b.tail, b.head, b.sub);
  });

  AccessibilityGraph g(network.junction_count());
  for (std::size_t k = 0; k < entries.size();) {
    const Entry& e = entries[k];
    AccessArc arc{JunctionId(e.tail), JunctionId(e.head), {}};
    for (; k < entries.size() && entries[k].tail == e.tail && entries[k].head == e.head; ++k) {
      if (!arc.routes.empty() && arc.routes.back().route == entries[k].sub.route) {
        throw StructuralError("route " + std::to_string(entries[k].sub.route.value) +
                              " passes junction pair " + std::to_string(e.tail) + "->" +
                              std::to_string(e.head) + " twice; normalize routes first");
      }
      arc.routes.push_back(entries[k].sub);
    }
    if (e.tail >= g.out_.size() || e.head >= g.out_.size()) {
      throw StructuralError("route references a junction outside the network");
    }
    g.out_[e.tail].push_back(std::move(arc));
    ++g.arc_count_;
  }
  return g;
}

/// Ã′ together with N̄, the junctions that cannot reach the destination.
struct PrunedAccessibility {
  AccessibilityGraph graph;
  std::vector<JunctionId> unreachable;
};

/// Road-network hop reachability to `t`, computed by reverse breadth-first search.
inline std::vector<bool> reaches(const VehicularNetwork& network, JunctionId t) {
  if (!network.contains(t)) {
    throw DomainError("destination " + std::to_string(t.value) + " is not a junction");
  }
  std::vector<bool> seen(network.junction_count(), false);
  std::deque<JunctionId> queue{t};
  seen[t.value] = true;
  while (!queue.empty()) {
    const JunctionId j = queue.front();
    queue.pop_front();
    for (ArcId a : network.in_arcs(j)) {
      const JunctionId i = network.arc(a).tail;
      if (!seen[i.value]) {
        seen[i.value] = true;
        queue.push_back(i);
      }
    }
  }
  return seen;
}

/// Removes accessibility arcs whose head cannot reach `t` on the road network.
inline PrunedAccessibility prune_unreachable(const VehicularNetwork& network,
                                             const AccessibilityGraph& accessibility,
                                             JunctionId t) {
  const auto ok = reaches(network, t);
  PrunedAccessibility out;
  for (std::uint32_t j = 0; j < network.junction_count(); ++j) {
    if (!ok[j]) out.unreachable.emplace_back(j);
  }
  out.graph = accessibility.filter_heads([&](JunctionId h) { return ok[h.value]; });
  return out;
}

}  // namespace ven
