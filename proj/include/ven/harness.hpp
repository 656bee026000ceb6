/**
 * @file harness.hpp
 * @brief Method comparison sweeps, the path-growth study, and CSV output.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ven/core.hpp"
#include "ven/energy.hpp"
#include "ven/heuristic.hpp"
#include "ven/network.hpp"
#include "ven/path_enum.hpp"
#include "ven/rate_opt.hpp"
#include "ven/scenario.hpp"

namespace ven {

/// I: LP over every path. II: LP over sampled subsets. III: greedy heuristic.
enum class Method { I, II, III };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::I: return "I";
    case Method::II: return "II";
    case Method::III: return "III";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "I" || s == "1") return Method::I;
  if (s == "II" || s == "2") return Method::II;
  if (s == "III" || s == "3") return Method::III;
  throw DomainError("unknown method '" + std::string(s) + "'; expected I, II or III");
}

enum class CellStatus { ok, infeasible, refused, error };

inline std::string to_string(CellStatus s) {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::infeasible: return "infeasible";
    case CellStatus::refused: return "refused";
    case CellStatus::error: return "error";
  }
  return "?";
}

struct ResultRow {
  double target_kwh{0.0};
  Method method{Method::I};
  CellStatus status{CellStatus::error};
  std::optional<double> loss_kwh;   // only when status is ok
  double delivered_kwh{0.0};
  double paths_used{0.0};           // averaged over feasible runs for Method II
  std::size_t candidate_paths{0};   // |P| or |P'|, the latter averaged and rounded down
  std::size_t feasible_runs{0};
  std::size_t runs{0};
  std::optional<double> wall_ms;    // mean per run
  std::string note;
};

struct ResultTable {
  std::vector<ResultRow> rows;  // sorted by (target, method)

  const ResultRow* find(double target, Method m) const {
    for (const auto& r : rows) {
      if (r.target_kwh == target && r.method == m) return &r;
    }
    return nullptr;
  }
};

struct CompareOptions {
  std::vector<double> targets;
  std::vector<Method> methods{Method::I, Method::II, Method::III};
  std::size_t subset_limit{100};
  std::vector<std::uint64_t> subset_seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                                          11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::optional<std::uint32_t> max_extra_hops{};
  std::size_t enumeration_cap{1'000'000};
  bool timing{false};
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct RunOutcome {
  CellStatus status{CellStatus::error};
  double loss{0.0};
  double delivered{0.0};
  std::size_t paths_used{0};
  std::string note;
};

inline std::size_t used_paths(const TransmissionPlan& plan) {
  return static_cast<std::size_t>(std::count_if(plan.entries.begin(), plan.entries.end(),
                                                [](const auto& e) { return e.energy > 0.0; }));
}

// Checks a plan from any method against the energy model and the full program.
inline RunOutcome cross_check(const Instance& in, const TransmissionPlan& plan, double target,
                              double reported_loss) {
  RunOutcome out;
  try {
    const PlanTotals tot = plan_totals(plan, in.params);
    const double viol = replay_violation(in.network, in.routes, in.params, plan, target);
    if (std::abs(tot.loss - reported_loss) > 1e-6 * std::max(1.0, std::abs(reported_loss))) {
      out.note = "loss replay mismatch";
      return out;
    }
    if (viol > 1e-9) {
      out.note = "constraint replay violation " + format_number(viol);
      return out;
    }
    out.status = CellStatus::ok;
    out.loss = tot.loss;
    out.delivered = tot.delivered;
    out.paths_used = used_paths(plan);
  } catch (const Error& e) {
    out.note = e.what();
  }
  return out;
}

inline RunOutcome solve_over(const Instance& in, const LossMinProblem& base, double target) {
  LossMinProblem p = base;
  p.target_kwh = target;
  const LpSolution sol = solve_min_loss(p);
  if (!sol.optimal()) return {CellStatus::infeasible, 0.0, 0.0, 0, {}};
  return cross_check(in, sol.plan, target, sol.objective);
}

}  // namespace detail

inline PathSet full_path_set(const Instance& in, std::size_t cap) {
  const auto acc = build_accessibility_graph(in.network, in.routes);
  const auto pruned = prune_unreachable(in.network, acc, in.destination);
  return enumerate_paths(pruned.graph, in.routes, in.source, in.destination,
                         EnumerationOptions{cap});
}

inline PathSet sampled_path_set(const Instance& in, const BoundedOptions& opts) {
  const auto acc = build_accessibility_graph(in.network, in.routes);
  const auto pruned = prune_unreachable(in.network, acc, in.destination);
  return enumerate_bounded(pruned.graph, in.routes, in.source, in.destination, opts);
}

/**
 * @brief Runs every requested method at every target.
 *
 * Path sets are built once per method (and per seed for Method II) and their
 * construction time is charged to every cell that uses them. Failures are
 * recorded in the row and never stop the sweep.
 */
inline ResultTable run_compare(const Instance& in, const CompareOptions& opt) {
  using detail::Clock;
  ResultTable table;
  std::vector<double> targets = opt.targets;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  std::vector<Method> methods = opt.methods;
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

  auto want = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

  // Method I path set.
  std::optional<LossMinProblem> full;
  std::string full_note;
  double full_ms = 0.0;
  if (want(Method::I)) {
    const auto t0 = Clock::now();
    try {
      const PathSet set = full_path_set(in, opt.enumeration_cap);
      full = make_problem(in.network, in.routes, set, in.params, 0.0);
    } catch (const SizeOverflowError& e) {
      full_note = e.what();
    }
    full_ms = detail::ms_since(t0);
  }

  // Method II subsets, one per seed.
  struct Subset {
    LossMinProblem problem;
    double ms{0.0};
  };
  std::vector<Subset> subsets;
  if (want(Method::II)) {
    for (std::uint64_t seed : opt.subset_seeds) {
      const auto t0 = Clock::now();
      BoundedOptions b;
      b.limit = opt.subset_limit;
      b.seed = seed;
      b.max_extra_hops = opt.max_extra_hops;
      const PathSet set = sampled_path_set(in, b);
      Subset s{make_problem(in.network, in.routes, set, in.params, 0.0), 0.0};
      s.ms = detail::ms_since(t0);
      subsets.push_back(std::move(s));
    }
  }

  for (double target : targets) {
    for (Method m : methods) {
      ResultRow row;
      row.target_kwh = target;
      row.method = m;
      if (m == Method::I) {
        row.runs = 1;
        if (!full) {
          row.status = CellStatus::refused;
          row.note = full_note;
        } else {
          const auto t0 = Clock::now();
          const auto r = detail::solve_over(in, *full, target);
          const double ms = full_ms + detail::ms_since(t0);
          row.status = r.status;
          row.note = r.note;
          row.candidate_paths = full->size();
          if (r.status == CellStatus::ok) {
            row.loss_kwh = r.loss;
            row.delivered_kwh = r.delivered;
            row.paths_used = static_cast<double>(r.paths_used);
            row.feasible_runs = 1;
          }
          if (opt.timing) row.wall_ms = ms;
        }
      } else if (m == Method::II) {
        row.runs = subsets.size();
        double loss = 0.0, delivered = 0.0, used = 0.0, ms = 0.0;
        std::size_t cand = 0;
        for (const auto& s : subsets) {
          const auto t0 = Clock::now();
          const auto r = detail::solve_over(in, s.problem, target);
          ms += s.ms + detail::ms_since(t0);
          cand += s.problem.size();
          if (r.status == CellStatus::ok) {
            ++row.feasible_runs;
            loss += r.loss;
            delivered += r.delivered;
            used += static_cast<double>(r.paths_used);
          } else if (r.status == CellStatus::error) {
            row.note = r.note;
          }
        }
        if (!row.note.empty()) {
          row.status = CellStatus::error;
        } else if (row.feasible_runs > 0) {
          const double k = static_cast<double>(row.feasible_runs);
          row.status = CellStatus::ok;
          row.loss_kwh = loss / k;
          row.delivered_kwh = delivered / k;
          row.paths_used = used / k;
        } else {
          row.status = CellStatus::infeasible;
        }
        if (!subsets.empty()) {
          row.candidate_paths = cand / subsets.size();
          if (opt.timing) row.wall_ms = ms / static_cast<double>(subsets.size());
        }
      } else {
        row.runs = 1;
        const auto t0 = Clock::now();
        const auto h = heuristic_min_loss(in.network, in.routes, in.params, in.source,
                                          in.destination, target);
        const double ms = detail::ms_since(t0);
        if (h.success()) {
          const auto r = detail::cross_check(in, h.plan, target, plan_totals(h.plan, in.params).loss);
          row.status = r.status;
          row.note = r.note;
          if (r.status == CellStatus::ok) {
            row.loss_kwh = r.loss;
            row.delivered_kwh = r.delivered;
            row.paths_used = static_cast<double>(r.paths_used);
            row.feasible_runs = 1;
          }
        } else {
          row.status = CellStatus::infeasible;
          row.delivered_kwh = h.delivered;
        }
        row.candidate_paths = h.plan.entries.size();
        if (opt.timing) row.wall_ms = ms;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Growth study

struct GrowthOptions {
  std::vector<std::uint32_t> n_values{4, 6, 8, 10};
  // Weighted toward sparse roads, where path counts are small and noisy.
  std::vector<double> road_densities{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.7, 1.0};
  std::uint32_t instances_per_cell{50};
  std::uint64_t seed{1};
  std::size_t enumeration_cap{2'000'000};
  std::uint32_t density_buckets{4};  // equal-width buckets over accessibility density
};

struct GrowthRecord {
  std::uint32_t n{0};
  double road_density{0.0};
  std::uint64_t instance_seed{0};
  double access_density{0.0};
  std::size_t path_count{0};
  bool capped{false};
};

struct GrowthBucket {
  std::uint32_t n{0};
  double lo{0.0};
  double hi{0.0};
  std::size_t instances{0};
  double mean_paths{0.0};
};

struct GrowthReport {
  std::vector<GrowthRecord> records;
  std::vector<GrowthBucket> buckets;
  bool increasing_with_density{false};
  bool increasing_with_n{false};
};

/// Seed of one growth instance, derived so that cells never share a stream.
inline std::uint64_t growth_seed(std::uint64_t base, std::uint32_t n, std::size_t density_index,
                                 std::uint32_t instance) {
  return base * 1'000'003ull + n * 10'007ull + density_index * 101ull + instance;
}

/**
 * @brief Counts |P| on random networks of each size across road densities.
 *
 * Every instance routes 2n random walks of up to n-1 arcs, so denser roads
 * give denser accessibility graphs. Records are grouped into equal-width
 * buckets of measured accessibility density; the trend flags require the
 * bucket means to rise strictly along density for every n, and along n for
 * every bucket populated at all sizes. Capped instances are left out of the
 * means.
 */
inline GrowthReport run_growth(const GrowthOptions& opt) {
  GrowthReport rep;
  for (std::uint32_t n : opt.n_values) {
    if (n < 2) throw DomainError("growth study needs n >= 2");
    for (std::size_t di = 0; di < opt.road_densities.size(); ++di) {
      for (std::uint32_t k = 0; k < opt.instances_per_cell; ++k) {
        RandomSpec spec;
        spec.junctions = n;
        spec.road_density = opt.road_densities[di];
        spec.route_count = 2 * n;
        spec.route_length_cap = n - 1;
        spec.seed = growth_seed(opt.seed, n, di, k);
        const Instance in = prepare(generate_random(spec));
        const auto acc = build_accessibility_graph(in.network, in.routes);
        GrowthRecord rec;
        rec.n = n;
        rec.road_density = spec.road_density;
        rec.instance_seed = spec.seed;
        rec.access_density = acc.density();
        try {
          const auto pruned = prune_unreachable(in.network, acc, in.destination);
          rec.path_count = enumerate_paths(pruned.graph, in.routes, in.source, in.destination,
                                           EnumerationOptions{opt.enumeration_cap})
                               .paths.size();
        } catch (const SizeOverflowError&) {
          rec.capped = true;
          rec.path_count = opt.enumeration_cap;
        }
        rep.records.push_back(rec);
      }
    }
  }

  const std::uint32_t B = std::max<std::uint32_t>(1, opt.density_buckets);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<std::size_t, double>> acc;
  for (const auto& r : rep.records) {
    if (r.capped) continue;
    const auto b = std::min<std::uint32_t>(B - 1, static_cast<std::uint32_t>(r.access_density * B));
    auto& cell = acc[{r.n, b}];
    ++cell.first;
    cell.second += static_cast<double>(r.path_count);
  }
  for (const auto& [key, cell] : acc) {
    const double w = 1.0 / B;
    rep.buckets.push_back({key.first, key.second * w, (key.second + 1) * w, cell.first,
                           cell.second / static_cast<double>(cell.first)});
  }

  rep.increasing_with_density = true;
  for (std::uint32_t n : opt.n_values) {
    std::optional<double> prev;
    for (const auto& b : rep.buckets) {
      if (b.n != n) continue;
      if (prev && !(b.mean_paths > *prev)) rep.increasing_with_density = false;
      prev = b.mean_paths;
    }
  }
  rep.increasing_with_n = true;
  bool compared = false;
  for (std::uint32_t b = 0; b < B; ++b) {
    std::vector<double> means;
    for (std::uint32_t n : opt.n_values) {
      auto it = acc.find({n, b});
      if (it == acc.end()) {
        means.clear();
        break;
      }
      means.push_back(it->second.second / static_cast<double>(it->second.first));
    }
    if (means.size() != opt.n_values.size()) continue;
    compared = true;
    for (std::size_t k = 1; k < means.size(); ++k) {
      if (!(means[k] > means[k - 1])) rep.increasing_with_n = false;
    }
  }
  if (!compared) rep.increasing_with_n = false;
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline std::string compare_csv(const ResultTable& t, bool timing) {
  std::string out =
      "target_kwh,method,status,loss_kwh,delivered_kwh,paths_used,candidate_paths,feasible_runs,runs";
  if (timing) out += ",wall_ms";
  out += ",note\n";
  for (const auto& r : t.rows) {
    out += format_number(r.target_kwh) + "," + to_string(r.method) + "," + to_string(r.status) + ",";
    out += (r.loss_kwh ? format_number(*r.loss_kwh) : "") + ",";
    out += format_number(r.delivered_kwh) + "," + format_number(r.paths_used) + ",";
    out += std::to_string(r.candidate_paths) + "," + std::to_string(r.feasible_runs) + "," +
           std::to_string(r.runs);
    if (timing) {
      out += ",";
      if (r.wall_ms) out += format_number(std::round(*r.wall_ms * 1000.0) / 1000.0);
    }
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    out += "," + note + "\n";
  }
  return out;
}

inline std::string growth_csv(const GrowthReport& rep) {
  std::string out =
      "kind,n,road_density,instance_seed,access_density,paths,capped,density_lo,density_hi,"
      "instances,mean_paths\n";
  for (const auto& r : rep.records) {
    out += "record," + std::to_string(r.n) + "," + format_number(r.road_density) + "," +
           std::to_string(r.instance_seed) + "," + format_number(r.access_density) + "," +
           std::to_string(r.path_count) + "," + yes_no(r.capped) + ",,,,\n";
  }
  for (const auto& b : rep.buckets) {
    out += "bucket," + std::to_string(b.n) + ",,,,,," + format_number(b.lo) + "," +
           format_number(b.hi) + "," + std::to_string(b.instances) + "," +
           format_number(b.mean_paths) + "\n";
  }
  out += "trend,,,,,,,,,,increasing_with_density=" + yes_no(rep.increasing_with_density) +
         ";increasing_with_n=" + yes_no(rep.increasing_with_n) + "\n";
  return out;
}

/// One line per path with its junction chain and route ids.
inline std::string paths_csv(const PathSet& set, const VehicularNetwork& network,
                             std::span<const VehicularRoute> routes) {
  std::string out = "index,cycles,delay_s,bottleneck_ev_per_s,junctions,routes\n";
  for (std::size_t k = 0; k < set.paths.size(); ++k) {
    const auto& p = set.paths[k];
    const auto m = measure(p, network, routes);
    out += std::to_string(k) + "," + std::to_string(m.cycles) + "," + format_number(m.delay_s) + "," +
           format_number(m.bottleneck_flow) + ",";
    const auto seq = junction_sequence(p, routes);
    for (std::size_t i = 0; i < seq.size(); ++i) out += (i ? " " : "") + std::to_string(seq[i].value);
    out += ",";
    for (std::size_t i = 0; i < p.segments.size(); ++i) {
      out += (i ? " " : "") + std::to_string(p.segments[i].route.value);
    }
    out += "\n";
  }
  return out;
}

inline std::string plan_csv(const TransmissionPlan& plan, const EnergyParams& params,
                            std::span<const VehicularRoute> routes) {
  std::string out = "index,cycles,delay_s,rate_kwh_per_s,energy_kwh,loss_kwh,junctions,routes\n";
  const double z = params.z();
  for (std::size_t k = 0; k < plan.entries.size(); ++k) {
    const auto& e = plan.entries[k];
    const double loss = e.energy > 0.0 ? path_loss(e.energy, e.metrics.cycles, z) : 0.0;
    out += std::to_string(k) + "," + std::to_string(e.metrics.cycles) + "," +
           format_number(e.metrics.delay_s) + "," + format_number(e.rate) + "," +
           format_number(e.energy) + "," + format_number(loss) + ",";
    const auto seq = junction_sequence(e.path, routes);
    for (std::size_t i = 0; i < seq.size(); ++i) out += (i ? " " : "") + std::to_string(seq[i].value);
    out += ",";
    for (std::size_t i = 0; i < e.path.segments.size(); ++i) {
      out += (i ? " " : "") + std::to_string(e.path.segments[i].route.value);
    }
    out += "\n";
  }
  return out;
}

}  // namespace ven
