// Command-line front end: scenario generation, path enumeration, solving,
// method comparison and the growth study.
//
// Exit codes: 0 success, 2 when every requested solve was infeasible or
// refused, 1 on any error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ven/ven.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInfeasible = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ven::Error("cannot write '" + out_path + "'");
  f << text;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s;
  for (std::size_t k = 0; k < count; ++k) s.push_back(first + k);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy path routing for vehicular energy networks"};
  app.require_subcommand(1);
  std::string out;

  // gen-grid
  auto* grid = app.add_subcommand("gen-grid", "Generate a grid scenario");
  ven::GridSpec gs;
  double flow = 0.1, flow_lo = -1, flow_hi = -1;
  std::optional<std::uint32_t> gs_s, gs_t;
  std::optional<double> grid_target;
  grid->add_option("--rows", gs.rows, "Grid rows")->capture_default_str();
  grid->add_option("--cols", gs.cols, "Grid columns")->capture_default_str();
  grid->add_option("--length-km", gs.arc_length_km, "Road length per arc")->capture_default_str();
  grid->add_option("--speed-kmh", gs.speed_kmh, "Travel speed")->capture_default_str();
  grid->add_option("--routes", gs.route_count, "Number of vehicular routes")->capture_default_str();
  grid->add_option("--flow", flow, "Constant route flow, EV/s")->capture_default_str();
  grid->add_option("--flow-lo", flow_lo, "Lower end of a uniform flow range");
  grid->add_option("--flow-hi", flow_hi, "Upper end of a uniform flow range");
  grid->add_option("--seed", gs.seed, "Random seed")->capture_default_str();
  grid->add_option("--source", gs_s, "Source junction (default: first)");
  grid->add_option("--dest", gs_t, "Destination junction (default: last)");
  grid->add_option("--target-kwh", grid_target, "Energy target stored in the scenario");
  grid->add_option("-o,--out", out, "Output file (default: stdout)");

  // gen-random
  auto* rnd = app.add_subcommand("gen-random", "Generate a random or regional scenario");
  ven::RandomSpec rs;
  bool regional = false;
  std::optional<std::uint64_t> rnd_seed;
  std::optional<double> rnd_target;
  rnd->add_option("--junctions", rs.junctions, "Number of junctions")->capture_default_str();
  rnd->add_option("--density", rs.road_density, "Probability of each ordered road link")
      ->capture_default_str();
  rnd->add_option("--route-cap", rs.route_length_cap, "Maximum arcs per route")->capture_default_str();
  rnd->add_option("--routes", rs.route_count, "Number of vehicular routes")->capture_default_str();
  rnd->add_option("--seed", rnd_seed, "Random seed");
  rnd->add_flag("--regional", regional, "Large synthetic regional network (other shape flags ignored)");
  rnd->add_option("--target-kwh", rnd_target, "Energy target stored in the scenario");
  rnd->add_option("-o,--out", out, "Output file (default: stdout)");

  // enumerate
  auto* en = app.add_subcommand("enumerate", "List energy paths of a scenario");
  std::string scenario_path;
  std::size_t cap = 1'000'000;
  std::optional<std::size_t> en_limit;
  std::uint64_t seed = 1;
  en->add_option("scenario", scenario_path, "Scenario file")->required();
  en->add_option("--cap", cap, "Enumeration safety cap")->capture_default_str();
  en->add_option("--limit", en_limit, "Sample at most this many paths");
  en->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  en->add_option("-o,--out", out, "Output CSV (default: stdout)");

  // solve
  auto* so = app.add_subcommand("solve", "Solve one scenario with one method");
  std::string method_name = "I";
  std::optional<double> target;
  std::size_t limit = 100;
  so->add_option("scenario", scenario_path, "Scenario file")->required();
  so->add_option("--method", method_name, "I, II or III")->capture_default_str();
  so->add_option("--target-kwh", target, "Energy target (default: from scenario)");
  so->add_option("--limit", limit, "Subset size for method II")->capture_default_str();
  so->add_option("--seed", seed, "Subset seed for method II")->capture_default_str();
  so->add_option("--cap", cap, "Enumeration safety cap")->capture_default_str();
  so->add_option("-o,--out", out, "Plan CSV (default: stdout)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Sweep energy targets over several methods");
  std::vector<double> targets;
  std::vector<std::string> methods{"I", "II", "III"};
  std::size_t seeds = 20;
  bool timing = false;
  std::optional<std::uint32_t> extra_hops;
  cmp->add_option("scenario", scenario_path, "Scenario file")->required();
  cmp->add_option("--targets", targets, "Energy targets, kWh")->required()->delimiter(',');
  cmp->add_option("--methods", methods, "Methods to run")->delimiter(',')->capture_default_str();
  cmp->add_option("--limit", limit, "Subset size for method II")->capture_default_str();
  cmp->add_option("--seed", seed, "First subset seed")->capture_default_str();
  cmp->add_option("--seeds", seeds, "Number of subsets averaged for method II")->capture_default_str();
  cmp->add_option("--extra-hops", extra_hops, "Restrict sampled paths to fewest hops plus this");
  cmp->add_option("--cap", cap, "Enumeration safety cap")->capture_default_str();
  cmp->add_flag("--timing", timing, "Add a wall_ms column (not reproducible)");
  cmp->add_option("-o,--out", out, "Output CSV (default: stdout)");

  // growth
  auto* gr = app.add_subcommand("growth", "Path count growth over random networks");
  ven::GrowthOptions go;
  gr->add_option("--n", go.n_values, "Network sizes")->delimiter(',')->capture_default_str();
  gr->add_option("--densities", go.road_densities, "Road densities")->delimiter(',');
  gr->add_option("--instances", go.instances_per_cell, "Instances per (n, density)")
      ->capture_default_str();
  gr->add_option("--seed", go.seed, "Base seed")->capture_default_str();
  gr->add_option("--cap", go.enumeration_cap, "Enumeration safety cap")->capture_default_str();
  gr->add_option("--buckets", go.density_buckets, "Accessibility density buckets")
      ->capture_default_str();
  gr->add_option("-o,--out", out, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (grid->parsed()) {
      gs.flow = flow_lo >= 0 && flow_hi >= 0 ? ven::FlowSpec::uniform(flow_lo, flow_hi)
                                             : ven::FlowSpec::constant(flow);
      if (gs_s) gs.source = ven::JunctionId(*gs_s);
      if (gs_t) gs.destination = ven::JunctionId(*gs_t);
      auto sc = ven::generate_grid(gs);
      sc.target_kwh = grid_target;
      emit(ven::format_scenario(sc), out);
      return kOk;
    }
    if (rnd->parsed()) {
      ven::Scenario sc;
      if (regional) {
        ven::RegionalSpec spec;
        if (rnd_seed) spec.seed = *rnd_seed;
        sc = ven::generate_regional(spec);
      } else {
        if (rnd_seed) rs.seed = *rnd_seed;
        sc = ven::generate_random(rs);
      }
      sc.target_kwh = rnd_target;
      emit(ven::format_scenario(sc), out);
      return kOk;
    }

    if (gr->parsed()) {
      const auto rep = ven::run_growth(go);
      emit(ven::growth_csv(rep), out);
      return kOk;
    }

    const ven::Scenario scenario = ven::load_scenario(scenario_path);
    const ven::Instance in = ven::prepare(scenario);

    if (en->parsed()) {
      ven::PathSet set;
      if (en_limit) {
        ven::BoundedOptions b;
        b.limit = *en_limit;
        b.seed = seed;
        set = ven::sampled_path_set(in, b);
      } else {
        set = ven::full_path_set(in, cap);
      }
      emit(ven::paths_csv(set, in.network, in.routes), out);
      std::cerr << "paths=" << set.paths.size() << " complete=" << (set.complete ? "yes" : "no")
                << '\n';
      return kOk;
    }

    if (so->parsed()) {
      const double x = target ? *target : scenario.target_kwh.value_or(-1.0);
      if (x < 0.0) throw ven::DomainError("no energy target given and none in the scenario");
      const ven::Method m = ven::parse_method(method_name);
      ven::TransmissionPlan plan;
      bool ok = false;
      if (m == ven::Method::III) {
        auto h = ven::heuristic_min_loss(in.network, in.routes, in.params, in.source,
                                         in.destination, x);
        ok = h.success();
        plan = std::move(h.plan);
      } else {
        ven::PathSet set;
        if (m == ven::Method::I) {
          set = ven::full_path_set(in, cap);
        } else {
          ven::BoundedOptions b;
          b.limit = limit;
          b.seed = seed;
          set = ven::sampled_path_set(in, b);
        }
        const auto sol = ven::solve_min_loss(ven::make_problem(in.network, in.routes, set, in.params, x));
        ok = sol.optimal();
        plan = sol.plan;
      }
      if (!ok) {
        std::cerr << "status=infeasible\n";
        return kInfeasible;
      }
      const auto tot = ven::plan_totals(plan, in.params);
      emit(ven::plan_csv(plan, in.params, in.routes), out);
      std::cerr << "status=ok loss_kwh=" << ven::format_number(tot.loss)
                << " delivered_kwh=" << ven::format_number(tot.delivered) << '\n';
      return kOk;
    }

    if (cmp->parsed()) {
      ven::CompareOptions co;
      co.targets = targets;
      co.methods.clear();
      for (const auto& s : methods) co.methods.push_back(ven::parse_method(s));
      co.subset_limit = limit;
      co.subset_seeds = seed_range(seed, seeds);
      co.max_extra_hops = extra_hops;
      co.enumeration_cap = cap;
      co.timing = timing;
      const auto table = ven::run_compare(in, co);
      emit(ven::compare_csv(table, timing), out);
      bool any_ok = false;
      for (const auto& r : table.rows) {
        if (r.status == ven::CellStatus::error) return kError;
        any_ok = any_ok || r.status == ven::CellStatus::ok;
      }
      return any_ok ? kOk : kInfeasible;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
