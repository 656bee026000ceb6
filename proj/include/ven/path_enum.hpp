/**
 * @file path_enum.hpp
 * @brief Construction of the energy-path set P(s,t).
 *
 * enumerate_sequences() grows junction sequences from s over the pruned
 * accessibility graph until they reach t; expand_to_paths() turns every
 * sequence into concrete energy paths by walking the Cartesian product of
 * its index sets. enumerate_paths() performs both stages in one depth-first
 * pass and yields the same set, which keeps the intermediate sequence list
 * out of memory on networks where it is large. enumerate_bounded() samples a
 * seeded subset.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ven/core.hpp"
#include "ven/energy.hpp"
#include "ven/network.hpp"
#include "ven/random.hpp"

namespace ven {

using JunctionSequence = std::vector<JunctionId>;

struct EnumerationOptions {
  /// Full enumeration aborts with SizeOverflowError beyond this many paths.
  std::size_t max_paths{1'000'000};
};

/// Energy paths between one source and destination.
struct PathSet {
  JunctionId source;
  JunctionId destination;
  std::vector<EnergyPath> paths;
  bool complete{true};  // false for a bounded subset
};

/**
 * @brief Number of loop-free s-t sequences on a complete accessibility graph
 * with n + 1 junctions: f(n) = 1 + (n-1) f(n-1), f(1) = 1, otherwise 0.
 *
 * Saturates at the largest uint64 value.
 */
inline std::uint64_t f_bound(std::uint32_t n) {
  if (n == 0) return 0;
  std::uint64_t f = 1;
  constexpr auto max = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t k = 2; k <= n; ++k) {
    if (f > (max - 1) / (k - 1)) return max;
    f = 1 + (k - 1) * f;
  }
  return f;
}

/// (n-1)! e, the closed-form upper bound on f(n).
inline double f_closed_bound(std::uint32_t n) {
  if (n == 0) return 0.0;
  return std::tgamma(static_cast<double>(n)) * std::numbers::e;
}

namespace detail {

inline void check_endpoints(const AccessibilityGraph& g, JunctionId s, JunctionId t) {
  if (s.value >= g.junction_count() || t.value >= g.junction_count()) {
    throw DomainError("source or destination is not a junction");
  }
  if (s == t) throw DomainError("source and destination must differ");
}

/// Junction and route bookkeeping for one partial path.
class PathBuilder {
 public:
  PathBuilder(std::span<const VehicularRoute> routes, std::uint32_t junction_count, JunctionId s)
      : routes_(routes), visited_(junction_count, 0), used_(routes.size(), 0) {
    visited_[s.value] = 1;
  }

  bool route_used(RouteId r) const { return used_[r.value] != 0; }
  bool visited(JunctionId j) const { return visited_[j.value] != 0; }

  /// Appends `sub` when it neither reuses a route nor revisits a junction.
  bool push(const SubRoute& sub) {
    if (used_[sub.route.value]) return false;
    const auto& js = routes_[sub.route.value].junctions;
    for (std::uint32_t q = sub.first_arc + 1; q <= sub.last_arc + 1; ++q) {
      if (visited_[js[q].value]) return false;
    }
    for (std::uint32_t q = sub.first_arc + 1; q <= sub.last_arc + 1; ++q) visited_[js[q].value] = 1;
    used_[sub.route.value] = 1;
    segments_.push_back(sub);
    return true;
  }

  void pop() {
    const SubRoute sub = segments_.back();
    segments_.pop_back();
    const auto& js = routes_[sub.route.value].junctions;
    for (std::uint32_t q = sub.first_arc + 1; q <= sub.last_arc + 1; ++q) visited_[js[q].value] = 0;
    used_[sub.route.value] = 0;
  }

  const std::vector<SubRoute>& segments() const { return segments_; }

 private:
  std::span<const VehicularRoute> routes_;
  std::vector<char> visited_;
  std::vector<char> used_;
  std::vector<SubRoute> segments_;
};

inline bool canonical_less(const EnergyPath& a, const EnergyPath& b,
                           std::span<const VehicularRoute> routes) {
  const auto ka = junction_sequence(a, routes);
  const auto kb = junction_sequence(b, routes);
  if (ka != kb) return ka < kb;
  return std::lexicographical_compare(
      a.segments.begin(), a.segments.end(), b.segments.begin(), b.segments.end(),
      [](const SubRoute& x, const SubRoute& y) { return x.route < y.route; });
}

inline void sort_canonical(std::vector<EnergyPath>& paths, std::span<const VehicularRoute> routes) {
  struct Keyed {
    std::vector<std::uint32_t> key;
    EnergyPath path;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(paths.size());
  for (auto& p : paths) {
    Keyed k;
    for (JunctionId j : junction_sequence(p, routes)) k.key.push_back(j.value);
    k.key.push_back(std::numeric_limits<std::uint32_t>::max());
    for (const auto& s : p.segments) k.key.push_back(s.route.value);
    k.path = std::move(p);
    keyed.push_back(std::move(k));
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
  paths.clear();
  for (auto& k : keyed) paths.push_back(std::move(k.path));
}

inline std::vector<std::uint32_t> path_key(std::span<const SubRoute> segments) {
  std::vector<std::uint32_t> key;
  key.reserve(3 * segments.size());
  for (const auto& s : segments) {
    key.push_back(s.route.value);
    key.push_back(s.first_arc);
    key.push_back(s.last_arc);
  }
  return key;
}

/// Hop distance to t over the accessibility graph, max() when unreachable.
inline std::vector<std::uint32_t> hops_to(const AccessibilityGraph& g, JunctionId t) {
  constexpr auto inf = std::numeric_limits<std::uint32_t>::max();
  const std::uint32_t n = g.junction_count();
  std::vector<std::vector<std::uint32_t>> in(n);
  g.for_each_arc([&](const AccessArc& a) { in[a.head.value].push_back(a.tail.value); });
  std::vector<std::uint32_t> dist(n, inf);
  std::deque<std::uint32_t> queue{t.value};
  dist[t.value] = 0;
  while (!queue.empty()) {
    const std::uint32_t j = queue.front();
    queue.pop_front();
    for (std::uint32_t i : in[j]) {
      if (dist[i] == inf) {
        dist[i] = dist[j] + 1;
        queue.push_back(i);
      }
    }
  }
  return dist;
}

/// Depth-first enumeration of every energy path. Branches whose head cannot
/// reach t in the accessibility graph are skipped.
class FullEnumerator {
 public:
  enum class Outcome { complete, too_many_paths, out_of_budget };

  FullEnumerator(const AccessibilityGraph& g, std::span<const VehicularRoute> routes, JunctionId s,
                 JunctionId t, std::size_t max_paths,
                 std::size_t max_expansions = std::numeric_limits<std::size_t>::max())
      : g_(g), routes_(routes), s_(s), t_(t), max_paths_(max_paths), max_expansions_(max_expansions),
        dist_(hops_to(g, t)), builder_(routes, g.junction_count(), s) {}

  Outcome run() {
    if (dist_[s_.value] != kUnreachable) visit(s_);
    return outcome_;
  }

  std::vector<EnergyPath> take() { return std::move(paths_); }

 private:
  static constexpr auto kUnreachable = std::numeric_limits<std::uint32_t>::max();

  bool visit(JunctionId i) {
    if (++expansions_ > max_expansions_) {
      outcome_ = Outcome::out_of_budget;
      return false;
    }
    for (const AccessArc& arc : g_.out_arcs(i)) {
      if (dist_[arc.head.value] == kUnreachable || builder_.visited(arc.head)) continue;
      for (const SubRoute& sub : arc.routes) {
        if (!builder_.push(sub)) continue;
        bool ok = true;
        if (arc.head == t_) {
          paths_.push_back(EnergyPath{s_, t_, builder_.segments()});
          ok = paths_.size() <= max_paths_;
          if (!ok) outcome_ = Outcome::too_many_paths;
        } else {
          ok = visit(arc.head);
        }
        builder_.pop();
        if (!ok) return false;
      }
    }
    return true;
  }

  const AccessibilityGraph& g_;
  std::span<const VehicularRoute> routes_;
  JunctionId s_, t_;
  std::size_t max_paths_;
  std::size_t max_expansions_;
  std::size_t expansions_{0};
  std::vector<std::uint32_t> dist_;
  PathBuilder builder_;
  std::vector<EnergyPath> paths_;
  Outcome outcome_{Outcome::complete};
};

}  // namespace detail

/**
 * @brief All loop-free junction sequences from s to t over Ã′, sorted
 * lexicographically.
 *
 * The frontier of developing sequences is extended one arc at a time; a
 * sequence that reaches t is moved to the result and never extended again.
 */
inline std::vector<JunctionSequence> enumerate_sequences(const AccessibilityGraph& pruned,
                                                         JunctionId s, JunctionId t,
                                                         const EnumerationOptions& options = {}) {
  detail::check_endpoints(pruned, s, t);
  std::vector<JunctionSequence> done;
  std::vector<JunctionSequence> frontier{{s}};
  while (!frontier.empty()) {
    std::vector<JunctionSequence> next;
    for (const auto& k : frontier) {
      for (const AccessArc& arc : pruned.out_arcs(k.back())) {
        if (std::find(k.begin(), k.end(), arc.head) != k.end()) continue;
        JunctionSequence grown = k;
        grown.push_back(arc.head);
        if (arc.head == t) {
          done.push_back(std::move(grown));
        } else {
          next.push_back(std::move(grown));
        }
      }
      if (done.size() > options.max_paths || next.size() > options.max_paths) {
        throw SizeOverflowError("sequence enumeration exceeded the safety cap of " +
                                    std::to_string(options.max_paths),
                                options.max_paths);
      }
    }
    frontier = std::move(next);
  }
  std::sort(done.begin(), done.end());
  return done;
}

/**
 * @brief Expands each sequence into energy paths.
 *
 * Every combination of one index-set entry per consecutive junction pair is
 * tried; combinations that reuse a route or pass a junction twice on the
 * road are discarded. Output follows sequence order, then route order.
 */
inline PathSet expand_to_paths(std::span<const JunctionSequence> sequences,
                               const AccessibilityGraph& accessibility,
                               std::span<const VehicularRoute> routes, JunctionId s, JunctionId t,
                               const EnumerationOptions& options = {}) {
  detail::check_endpoints(accessibility, s, t);
  PathSet out{s, t, {}, true};
  for (const auto& k : sequences) {
    if (k.size() < 2 || k.front() != s || k.back() != t) {
      throw ConsistencyError("sequence does not run from source to destination");
    }
    std::vector<const AccessArc*> sets;
    sets.reserve(k.size() - 1);
    for (std::size_t p = 0; p + 1 < k.size(); ++p) {
      const AccessArc* a = accessibility.find(k[p], k[p + 1]);
      if (a == nullptr) {
        throw ConsistencyError("no index set for junction pair " + std::to_string(k[p].value) +
                               "->" + std::to_string(k[p + 1].value));
      }
      sets.push_back(a);
    }
    detail::PathBuilder builder(routes, accessibility.junction_count(), s);
    auto expand = [&](auto&& self, std::size_t depth) -> void {
      if (depth == sets.size()) {
        out.paths.push_back(EnergyPath{s, t, builder.segments()});
        if (out.paths.size() > options.max_paths) {
          throw SizeOverflowError("path expansion exceeded the safety cap of " +
                                      std::to_string(options.max_paths),
                                  options.max_paths);
        }
        return;
      }
      for (const SubRoute& sub : sets[depth]->routes) {
        if (!builder.push(sub)) continue;
        self(self, depth + 1);
        builder.pop();
      }
    };
    expand(expand, 0);
  }
#ifndef NDEBUG
  std::set<std::vector<std::uint32_t>> keys;
  for (const auto& p : out.paths) {
    if (!keys.insert(detail::path_key(p.segments)).second) {
      throw ConsistencyError("duplicate energy path in expansion");
    }
  }
#endif
  return out;
}

/**
 * @brief Full P(s,t) in canonical order (junction sequence, then route ids).
 *
 * Produces the same set as expand_to_paths(enumerate_sequences(...)) while
 * pruning partial paths that already revisit a junction.
 */
inline PathSet enumerate_paths(const AccessibilityGraph& pruned,
                               std::span<const VehicularRoute> routes, JunctionId s, JunctionId t,
                               const EnumerationOptions& options = {}) {
  detail::check_endpoints(pruned, s, t);
  detail::FullEnumerator e(pruned, routes, s, t, options.max_paths);
  if (e.run() != detail::FullEnumerator::Outcome::complete) {
    throw SizeOverflowError(
        "path enumeration exceeded the safety cap of " + std::to_string(options.max_paths),
        options.max_paths);
  }
  PathSet out{s, t, e.take(), true};
  detail::sort_canonical(out.paths, routes);
  return out;
}

struct BoundedOptions {
  std::size_t limit{100};
  std::uint64_t seed{1};
  /// Restricts sampled paths to at most (fewest hops + extra) segments.
  std::optional<std::uint32_t> max_extra_hops{};
  /// Node expansions allowed per randomized probe.
  std::size_t probe_budget{200'000};
  /// Probes allowed per requested path.
  std::size_t probes_per_path{20};
};

/**
 * @brief Seeded subset P′ of P(s,t) with at most `limit` paths.
 *
 * Without a hop restriction the full set is tried first; when it fits within
 * the limit and one probe budget it is returned as is and flagged complete. Otherwise paths are
 * drawn by repeated randomized depth-first probes, each stopping at the first
 * path not yet collected.
 */
inline PathSet enumerate_bounded(const AccessibilityGraph& pruned,
                                 std::span<const VehicularRoute> routes, JunctionId s, JunctionId t,
                                 const BoundedOptions& options) {
  detail::check_endpoints(pruned, s, t);
  if (options.limit == 0) throw DomainError("subset limit must be at least 1");

  if (!options.max_extra_hops) {
    // One probe's worth of work decides whether the whole set is small.
    detail::FullEnumerator e(pruned, routes, s, t, options.limit, options.probe_budget);
    if (e.run() == detail::FullEnumerator::Outcome::complete) {
      PathSet out{s, t, e.take(), true};
      detail::sort_canonical(out.paths, routes);
      return out;
    }
  }

  PathSet out{s, t, {}, false};
  const auto dist = detail::hops_to(pruned, t);
  constexpr auto inf = std::numeric_limits<std::uint32_t>::max();
  if (dist[s.value] == inf) return out;
  const std::uint32_t n = pruned.junction_count();
  const std::uint32_t hop_budget =
      options.max_extra_hops ? std::min(n - 1, dist[s.value] + *options.max_extra_hops) : n - 1;

  Rng rng(options.seed);
  std::set<std::vector<std::uint32_t>> found;
  const std::size_t max_probes = options.limit * options.probes_per_path;

  struct Candidate {
    JunctionId head;
    SubRoute sub;
  };

  // A junction whose subtree gave nothing new is skipped for the rest of the
  // probe. That can hide paths, so an empty memoized probe is retried once
  // without it before the set is declared exhausted.
  bool memo = true;
  std::vector<char> dead(n, 0);
  for (std::size_t probe = 0; probe < max_probes && out.paths.size() < options.limit; ++probe) {
    detail::PathBuilder builder(routes, n, s);
    std::fill(dead.begin(), dead.end(), 0);
    std::size_t expansions = 0;
    bool over_budget = false;
    bool skipped = false;
    auto visit = [&](auto&& self, JunctionId i, std::uint32_t hops) -> bool {
      if (++expansions > options.probe_budget) {
        over_budget = true;
        return false;
      }
      std::vector<Candidate> cands;
      for (const AccessArc& arc : pruned.out_arcs(i)) {
        const std::uint32_t dj = dist[arc.head.value];
        if (dj == inf || hops + 1 + dj > hop_budget || builder.visited(arc.head)) continue;
        if (dead[arc.head.value]) {
          skipped = true;
          continue;
        }
        for (const SubRoute& sub : arc.routes) {
          if (!builder.route_used(sub.route)) cands.push_back({arc.head, sub});
        }
      }
      rng.shuffle(cands);
      for (const auto& c : cands) {
        if (!builder.push(c.sub)) continue;
        if (c.head == t) {
          if (found.insert(detail::path_key(builder.segments())).second) {
            out.paths.push_back(EnergyPath{s, t, builder.segments()});
            return true;
          }
        } else if (self(self, c.head, hops + 1)) {
          return true;
        }
        builder.pop();
        if (over_budget) return false;
      }
      if (memo && i != t) dead[i.value] = 1;
      return false;
    };
    const bool hit = visit(visit, s, 0);
    if (hit) {
      memo = true;
    } else if (!over_budget) {
      if (memo && skipped) {
        memo = false;
      } else {
        break;  // nothing new left to find
      }
    }
  }
  detail::sort_canonical(out.paths, routes);
  return out;
}

}  // namespace ven
