#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace ven;

namespace {

Arc arc(std::uint32_t id, std::uint32_t a, std::uint32_t b, double d = 600.0) {
  return {ArcId(id), JunctionId(a), JunctionId(b), d};
}

std::vector<ArcId> ids(std::initializer_list<std::uint32_t> v) {
  std::vector<ArcId> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

// 0 -a0-> 1 -a1-> 2 -a2-> 1 ... a small network with a loop back to 1.
VehicularNetwork loop_net() {
  return VehicularNetwork(5, {arc(0, 0, 1), arc(1, 1, 2), arc(2, 2, 1), arc(3, 1, 3), arc(4, 3, 4)});
}

}  // namespace

TEST(Network, RejectsMalformedArcs) {
  EXPECT_THROW(VehicularNetwork(3, {arc(1, 0, 1)}), StructuralError);
  EXPECT_THROW(VehicularNetwork(3, {arc(0, 0, 3)}), StructuralError);
  EXPECT_THROW(VehicularNetwork(3, {arc(0, 1, 1)}), StructuralError);
  EXPECT_THROW(VehicularNetwork(3, {arc(0, 0, 1, 0.0)}), StructuralError);
  EXPECT_THROW(VehicularNetwork(3, {arc(0, 0, 1, -1.0)}), StructuralError);
  EXPECT_THROW(VehicularNetwork(3, {arc(0, 0, 1, std::numeric_limits<double>::infinity())}),
               StructuralError);
  EXPECT_THROW(VehicularNetwork(3, {arc(0, 0, 1), arc(1, 0, 1)}), StructuralError);
}

TEST(Network, Lookup) {
  const auto net = loop_net();
  EXPECT_EQ(net.junction_count(), 5u);
  EXPECT_EQ(net.arc_count(), 5u);
  EXPECT_EQ(net.find_arc(JunctionId(1), JunctionId(3)), ArcId(3));
  EXPECT_FALSE(net.find_arc(JunctionId(3), JunctionId(1)));
  EXPECT_EQ(net.out_arcs(JunctionId(1)).size(), 2u);
  EXPECT_EQ(net.in_arcs(JunctionId(1)).size(), 2u);
  EXPECT_THROW(net.arc(ArcId(9)), DomainError);
}

TEST(Normalize, SplitsLoopIntoPrefixAndSuffix) {
  // a0 a1 a2 a3: a1,a2 form a loop 1->2->1, giving <a0> and <a3>.
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1, 2, 3}), 0.2}};
  const auto r = normalize_routes(net, raw);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].arcs, ids({0}));
  EXPECT_EQ(r[1].arcs, ids({3}));
  EXPECT_EQ(r[0].flow, 0.2);
  EXPECT_EQ(r[1].flow, 0.2);
  EXPECT_EQ(r[0].origin, 0u);
  EXPECT_EQ(r[1].id, RouteId(1));
  EXPECT_EQ(r[1].junctions, (std::vector<JunctionId>{JunctionId(1), JunctionId(3)}));
}

TEST(Normalize, LoopFreeRouteUnchanged) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1}), 0.1}};
  const auto r = normalize_routes(net, raw);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].arcs, ids({0, 1}));
}

TEST(Normalize, LoopAtTailLeavesOnlyPrefix) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1, 2}), 0.1}};
  const auto r = normalize_routes(net, raw);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].arcs, ids({0}));
}

TEST(Normalize, LoopAtStartLeavesOnlySuffix) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({1, 2, 3, 4}), 0.1}};
  const auto r = normalize_routes(net, raw);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].arcs, ids({3, 4}));
}

TEST(Normalize, Errors) {
  const auto net = loop_net();
  std::vector<RawRoute> empty{{{}, 0.1}};
  EXPECT_THROW(normalize_routes(net, empty), StructuralError);
  std::vector<RawRoute> neg{{ids({0}), -0.1}};
  EXPECT_THROW(normalize_routes(net, neg), DomainError);
  std::vector<RawRoute> unknown{{ids({7}), 0.1}};
  EXPECT_THROW(normalize_routes(net, unknown), StructuralError);
  std::vector<RawRoute> gap{{ids({0, 4}), 0.1}};
  try {
    normalize_routes(net, gap);
    FAIL();
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("arcs 0 and 4"), std::string::npos);
  }
}

TEST(Normalize, IdempotentOnRandomRoutes) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    // Dense random network with random (possibly looping) walks.
    RandomSpec spec;
    spec.junctions = 6;
    spec.road_density = 0.6;
    spec.seed = seed;
    const Scenario sc = generate_random(spec);
    const auto net = build_network(sc);
    Rng rng(seed);
    std::vector<RawRoute> raw;
    for (int k = 0; k < 5; ++k) {
      if (net.arc_count() == 0) break;
      RawRoute r;
      ArcId a(static_cast<std::uint32_t>(rng.below(net.arc_count())));
      r.arcs.push_back(a);
      for (int step = 0; step < 8; ++step) {
        const auto outs = net.out_arcs(net.arc(r.arcs.back()).head);
        if (outs.empty()) break;
        r.arcs.push_back(outs[rng.below(outs.size())]);
      }
      r.flow = 0.1;
      raw.push_back(r);
    }
    const auto once = normalize_routes(net, raw);
    for (const auto& r : once) {
      std::set<std::uint32_t> seen;
      for (auto j : r.junctions) EXPECT_TRUE(seen.insert(j.value).second);
    }
    const auto raw2 = to_raw(once);
    auto twice = normalize_routes(net, raw2);
    ASSERT_EQ(twice.size(), once.size());
    for (std::size_t k = 0; k < once.size(); ++k) {
      EXPECT_EQ(twice[k].arcs, once[k].arcs);
      EXPECT_EQ(twice[k].flow, once[k].flow);
    }
  }
}

TEST(ArcFlow, SumsRouteFlows) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1}), 0.1}, {ids({1}), 0.2}};
  const auto r = normalize_routes(net, raw);
  EXPECT_DOUBLE_EQ(arc_flow(net, r, ArcId(1)), 0.30000000000000004);
  EXPECT_NEAR(arc_flow(net, r, ArcId(1)), 0.3, 1e-15);
  EXPECT_EQ(arc_flow(net, r, ArcId(4)), 0.0);
  EXPECT_THROW(arc_flow(net, r, ArcId(99)), DomainError);
  const auto h = arc_flows(net, r);
  EXPECT_NEAR(h[0], 0.1, 1e-15);
  EXPECT_NEAR(h[1], 0.3, 1e-15);
}

TEST(ArcFlow, GridCaseOneIsTenthPerRoute) {
  GridSpec g;
  g.seed = 4;
  const Instance in = prepare(generate_grid(g));
  const auto h = arc_flows(in.network, in.routes);
  for (std::size_t a = 0; a < h.size(); ++a) {
    int users = 0;
    for (const auto& r : in.routes) users += std::count(r.arcs.begin(), r.arcs.end(), ArcId(a));
    EXPECT_NEAR(h[a], 0.1 * users, 1e-12);
  }
}

TEST(Accessibility, SingleRoute) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1}), 0.1}};
  const auto r = normalize_routes(net, raw);
  const auto g = build_accessibility_graph(net, r);
  EXPECT_EQ(g.arc_count(), 3u);
  const auto* a02 = g.find(JunctionId(0), JunctionId(2));
  ASSERT_NE(a02, nullptr);
  ASSERT_EQ(a02->routes.size(), 1u);
  EXPECT_EQ(a02->routes[0], (SubRoute{RouteId(0), 0, 1}));
  const auto* a12 = g.find(JunctionId(1), JunctionId(2));
  ASSERT_NE(a12, nullptr);
  EXPECT_EQ(a12->routes[0], (SubRoute{RouteId(0), 1, 1}));
  EXPECT_EQ(g.find(JunctionId(2), JunctionId(0)), nullptr);
  EXPECT_DOUBLE_EQ(g.density(), 3.0 / 20.0);
}

TEST(Accessibility, SharedPairCollectsBothRoutes) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1}), 0.1}, {ids({1}), 0.2}};
  const auto r = normalize_routes(net, raw);
  const auto g = build_accessibility_graph(net, r);
  const auto* a = g.find(JunctionId(1), JunctionId(2));
  ASSERT_NE(a, nullptr);
  ASSERT_EQ(a->routes.size(), 2u);
  EXPECT_EQ(a->routes[0].route, RouteId(0));
  EXPECT_EQ(a->routes[1].route, RouteId(1));
}

TEST(Accessibility, EmptyRouteSet) {
  const auto net = loop_net();
  const auto g = build_accessibility_graph(net, std::vector<VehicularRoute>{});
  EXPECT_EQ(g.arc_count(), 0u);
}

TEST(Accessibility, LoopedRouteIsStructuralError) {
  const auto net = loop_net();
  VehicularRoute bad;
  bad.id = RouteId(0);
  bad.arcs = ids({0, 1, 2, 3});
  bad.junctions = {JunctionId(0), JunctionId(1), JunctionId(2), JunctionId(1), JunctionId(3)};
  bad.flow = 0.1;
  EXPECT_THROW(build_accessibility_graph(net, std::vector<VehicularRoute>{bad}), StructuralError);
}

TEST(Accessibility, FigureFiveTwoRoutesGiveThreePaths) {
  // s=0 a=1 b=2 c=3 t=4; r1 = s a b c, r2 = a b c t.
  const VehicularNetwork net(5, {arc(0, 0, 1), arc(1, 1, 2), arc(2, 2, 3), arc(3, 3, 4)});
  std::vector<RawRoute> raw{{ids({0, 1, 2}), 0.1}, {ids({1, 2, 3}), 0.1}};
  const auto r = normalize_routes(net, raw);
  const auto acc = build_accessibility_graph(net, r);
  const auto pr = prune_unreachable(net, acc, JunctionId(4));
  const auto set = enumerate_paths(pr.graph, r, JunctionId(0), JunctionId(4));
  ASSERT_EQ(set.paths.size(), 3u);
  // <r1(1), r2(1,3)>, <r1(1,2), r2(2,3)>, <r1(1,3), r2(3)>
  std::set<oracle::Key> keys;
  for (const auto& p : set.paths) keys.insert(oracle::path_key(p));
  EXPECT_EQ(keys, (std::set<oracle::Key>{{0, 0, 0, 1, 0, 2}, {0, 0, 1, 1, 1, 2}, {0, 0, 2, 1, 2, 2}}));
}

TEST(Accessibility, MatchesBruteForceScan) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    RandomSpec spec;
    spec.junctions = 3 + seed % 5;
    spec.road_density = 0.2 + 0.1 * static_cast<double>(seed % 7);
    spec.route_count = 2 + seed % 6;
    spec.route_length_cap = spec.junctions - 1;
    spec.seed = seed;
    const Instance in = prepare(generate_random(spec));
    const auto g = build_accessibility_graph(in.network, in.routes);
    std::set<std::pair<std::uint32_t, std::uint32_t>> got;
    g.for_each_arc([&](const AccessArc& a) {
      got.insert({a.tail.value, a.head.value});
      EXPECT_FALSE(a.routes.empty());
      for (const auto& sub : a.routes) {
        const auto& js = in.routes[sub.route.value].junctions;
        EXPECT_EQ(js[sub.first_arc], a.tail);
        EXPECT_EQ(js[sub.last_arc + 1], a.head);
      }
    });
    EXPECT_EQ(got, oracle::access_pairs(in.network, in.routes));
    const double n = in.network.junction_count();
    EXPECT_LE(static_cast<double>(g.arc_count()), n * (n - 1));
  }
}

TEST(Accessibility, SkipIdleRoutes) {
  const auto net = loop_net();
  std::vector<RawRoute> raw{{ids({0, 1}), 0.0}, {ids({3, 4}), 0.1}};
  const auto r = normalize_routes(net, raw);
  EXPECT_EQ(build_accessibility_graph(net, r).arc_count(), 6u);
  EXPECT_EQ(build_accessibility_graph(net, r, true).arc_count(), 3u);
}

TEST(Accessibility, RemoveRouteMatchesRebuild) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    RandomSpec spec;
    spec.junctions = 7;
    spec.road_density = 0.5;
    spec.route_count = 8;
    spec.route_length_cap = 5;
    spec.seed = seed;
    const Instance in = prepare(generate_random(spec));
    auto routes = in.routes;
    auto g = build_accessibility_graph(in.network, routes, true);
    Rng rng(seed);
    for (std::size_t k = 0; k < routes.size(); ++k) {
      auto& victim = routes[rng.below(routes.size())];
      if (victim.flow == 0.0) continue;
      g.remove_route(victim);
      victim.flow = 0.0;
      victim.truncate(rng.below(victim.arcs.size() + 1));
      EXPECT_EQ(g, build_accessibility_graph(in.network, routes, true));
    }
  }
}

TEST(Prune, ChainWithSink) {
  // u=0 -> v=1 -> t=2, w=3 has only incoming arcs.
  const VehicularNetwork net(4, {arc(0, 0, 1), arc(1, 1, 2), arc(2, 0, 3), arc(3, 1, 3)});
  std::vector<RawRoute> raw{{ids({0, 1}), 0.1}, {ids({0, 3}), 0.1}};
  const auto r = normalize_routes(net, raw);
  const auto acc = build_accessibility_graph(net, r);
  const auto pr = prune_unreachable(net, acc, JunctionId(2));
  EXPECT_EQ(pr.unreachable, std::vector<JunctionId>{JunctionId(3)});
  pr.graph.for_each_arc([](const AccessArc& a) { EXPECT_NE(a.head, JunctionId(3)); });
  EXPECT_EQ(pr.graph.arc_count(), 3u);
  EXPECT_EQ(acc.arc_count(), 5u);
}

TEST(Prune, FullReachabilityKeepsEverything) {
  const VehicularNetwork net(3, {arc(0, 0, 2), arc(1, 1, 2), arc(2, 0, 1)});
  std::vector<RawRoute> raw{{ids({2, 1}), 0.1}};
  const auto r = normalize_routes(net, raw);
  const auto acc = build_accessibility_graph(net, r);
  const auto pr = prune_unreachable(net, acc, JunctionId(2));
  EXPECT_TRUE(pr.unreachable.empty());
  EXPECT_EQ(pr.graph, acc);
}

TEST(Prune, IsolatedJunctionAndUnknownTarget) {
  const VehicularNetwork net(3, {arc(0, 0, 1)});
  const auto acc = build_accessibility_graph(net, std::vector<VehicularRoute>{});
  const auto pr = prune_unreachable(net, acc, JunctionId(1));
  EXPECT_EQ(pr.unreachable, std::vector<JunctionId>{JunctionId(2)});
  EXPECT_THROW(prune_unreachable(net, acc, JunctionId(5)), DomainError);
}

TEST(Prune, KeepsEverySimplePath) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    RandomSpec spec;
    spec.junctions = 6;
    spec.road_density = 0.35;
    spec.route_count = 6;
    spec.route_length_cap = 4;
    spec.seed = seed;
    const Instance in = prepare(generate_random(spec));
    const auto full = oracle::access_pairs(in.network, in.routes);
    const auto pruned = oracle::access_pairs(in.network, in.routes, in.destination.value);
    EXPECT_EQ(oracle::simple_paths(full, in.source.value, in.destination.value),
              oracle::simple_paths(pruned, in.source.value, in.destination.value));
  }
}
