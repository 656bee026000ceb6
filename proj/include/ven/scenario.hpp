/**
 * @file scenario.hpp
 * @brief Scenario description, its text format, and seeded generators.
 *
 * A scenario file is a sectioned text document:
 *
 *     [meta]
 *     name = grid-4x4
 *     seed = 7
 *     [junctions]
 *     count = 16
 *     [arcs]
 *     0 0 1 length_km=10 speed_kmh=60
 *     1 1 0 delay_s=600
 *     [routes]
 *     0 flow_ev_per_s=0.1 arcs=0,2,5
 *     [params]
 *     w_kwh = 1
 *     zc = 0.9
 *     zd = 1
 *     T_s = 18000
 *     [endpoints]
 *     s = 0
 *     t = 15
 *     target_kwh = 200
 *
 * Blank lines and lines starting with '#' are ignored. Numbers are written in
 * shortest round-trip form, so saving a loaded file reproduces it byte for
 * byte.
 */

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "ven/core.hpp"
#include "ven/energy.hpp"
#include "ven/network.hpp"
#include "ven/random.hpp"

namespace ven {

struct ArcSpec {
  JunctionId tail;
  JunctionId head;
  // Either a direct delay or a length travelled at a speed.
  std::optional<double> delay_s;
  double length_km{0.0};
  double speed_kmh{0.0};

  double delay() const { return delay_s ? *delay_s : length_km / speed_kmh * 3600.0; }

  friend bool operator==(const ArcSpec&, const ArcSpec&) = default;
};

struct Scenario {
  std::string name{"scenario"};
  std::uint64_t seed{0};
  std::uint32_t junction_count{0};
  std::vector<ArcSpec> arcs;
  std::vector<RawRoute> routes;
  EnergyParams params;
  JunctionId source;
  JunctionId destination;
  std::optional<double> target_kwh;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Network and normalized routes ready for the algorithms.
struct Instance {
  VehicularNetwork network;
  std::vector<VehicularRoute> routes;
  EnergyParams params;
  JunctionId source;
  JunctionId destination;
};

inline VehicularNetwork build_network(const Scenario& sc) {
  std::vector<Arc> arcs;
  arcs.reserve(sc.arcs.size());
  for (std::size_t k = 0; k < sc.arcs.size(); ++k) {
    const auto& a = sc.arcs[k];
    arcs.push_back({ArcId(static_cast<std::uint32_t>(k)), a.tail, a.head, a.delay()});
  }
  return VehicularNetwork(sc.junction_count, std::move(arcs));
}

inline Instance prepare(const Scenario& sc) {
  sc.params.validate();
  if (sc.source.value >= sc.junction_count || sc.destination.value >= sc.junction_count) {
    throw DomainError("endpoint is not a junction of the scenario");
  }
  if (sc.source == sc.destination) throw DomainError("source and destination must differ");
  Instance in;
  in.network = build_network(sc);
  in.routes = normalize_routes(in.network, sc.routes);
  in.params = sc.params;
  in.source = sc.source;
  in.destination = sc.destination;
  return in;
}

// ---------------------------------------------------------------------------
// Text format

inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_scenario(const Scenario& sc) {
  std::string out;
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  line("[meta]");
  line("name = " + sc.name);
  line("seed = " + std::to_string(sc.seed));
  line("[junctions]");
  line("count = " + std::to_string(sc.junction_count));
  line("[arcs]");
  for (std::size_t k = 0; k < sc.arcs.size(); ++k) {
    const auto& a = sc.arcs[k];
    std::string s = std::to_string(k) + " " + std::to_string(a.tail.value) + " " +
                    std::to_string(a.head.value);
    if (a.delay_s) {
      s += " delay_s=" + format_number(*a.delay_s);
    } else {
      s += " length_km=" + format_number(a.length_km) + " speed_kmh=" + format_number(a.speed_kmh);
    }
    line(s);
  }
  line("[routes]");
  for (std::size_t k = 0; k < sc.routes.size(); ++k) {
    const auto& r = sc.routes[k];
    std::string s = std::to_string(k) + " flow_ev_per_s=" + format_number(r.flow) + " arcs=";
    for (std::size_t i = 0; i < r.arcs.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(r.arcs[i].value);
    }
    line(s);
  }
  line("[params]");
  line("w_kwh = " + format_number(sc.params.w_kwh));
  line("zc = " + format_number(sc.params.zc));
  line("zd = " + format_number(sc.params.zd));
  line("T_s = " + format_number(sc.params.horizon_s));
  line("[endpoints]");
  line("s = " + std::to_string(sc.source.value));
  line("t = " + std::to_string(sc.destination.value));
  if (sc.target_kwh) line("target_kwh = " + format_number(*sc.target_kwh));
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, std::string_view field) {
  T v{};
  const auto* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) {
    throw ParseError(line, "field '" + std::string(field) + "': cannot parse '" + std::string(s) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ParseError(line, "field '" + std::string(field) + "' is not finite");
  }
  return v;
}

inline std::pair<std::string_view, std::string_view> split_kv(std::string_view s, char sep,
                                                              std::size_t line) {
  const auto p = s.find(sep);
  if (p == std::string_view::npos) {
    throw ParseError(line, "expected key" + std::string(1, sep) + "value, got '" + std::string(s) + "'");
  }
  return {trim(s.substr(0, p)), trim(s.substr(p + 1))};
}

}  // namespace detail

/**
 * @brief Parses the text format. Throws ParseError with the offending line
 * for syntax errors, unknown keys, missing sections and dangling references.
 */
inline Scenario parse_scenario(std::string_view text) {
  using detail::parse_number;
  Scenario sc;
  std::string section;
  std::set<std::string> seen_sections;
  bool have_count = false, have_s = false, have_t = false;
  std::size_t line_no = 0;
  std::vector<std::size_t> route_lines;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto ln = detail::trim(raw);
    if (ln.empty() || ln.front() == '#') {
      if (nl == text.size()) break;
      continue;
    }
    if (ln.front() == '[') {
      if (ln.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(ln.substr(1, ln.size() - 2));
      static const std::set<std::string> known{"meta", "junctions", "arcs", "routes", "params",
                                               "endpoints"};
      if (!known.count(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) {
        throw ParseError(line_no, "duplicate section [" + section + "]");
      }
      continue;
    }
    if (section.empty()) throw ParseError(line_no, "content before the first section");

    if (section == "arcs") {
      const auto tok = detail::split_ws(ln);
      if (tok.size() < 4) throw ParseError(line_no, "arc needs: id tail head attributes");
      const auto id = parse_number<std::uint32_t>(tok[0], line_no, "arc id");
      if (id != sc.arcs.size()) {
        throw ParseError(line_no, "arc ids must run 0,1,2,...; got " + std::to_string(id));
      }
      ArcSpec a;
      a.tail = JunctionId(parse_number<std::uint32_t>(tok[1], line_no, "tail"));
      a.head = JunctionId(parse_number<std::uint32_t>(tok[2], line_no, "head"));
      std::optional<double> len, speed;
      for (std::size_t k = 3; k < tok.size(); ++k) {
        const auto [key, val] = detail::split_kv(tok[k], '=', line_no);
        const double v = parse_number<double>(val, line_no, key);
        if (key == "delay_s") a.delay_s = v;
        else if (key == "length_km") len = v;
        else if (key == "speed_kmh") speed = v;
        else throw ParseError(line_no, "unknown arc attribute '" + std::string(key) + "'");
      }
      if (a.delay_s.has_value() == (len.has_value() || speed.has_value()) ||
          (!a.delay_s && !(len && speed))) {
        throw ParseError(line_no, "arc needs either delay_s or both length_km and speed_kmh");
      }
      if (len) {
        a.length_km = *len;
        a.speed_kmh = *speed;
        if (!(a.length_km > 0.0) || !(a.speed_kmh > 0.0)) {
          throw ParseError(line_no, "arc length and speed must be positive");
        }
      } else if (!(*a.delay_s > 0.0)) {
        throw ParseError(line_no, "arc delay must be positive");
      }
      sc.arcs.push_back(a);
    } else if (section == "routes") {
      const auto tok = detail::split_ws(ln);
      if (tok.size() != 3) throw ParseError(line_no, "route needs: id flow_ev_per_s=F arcs=A,B,...");
      const auto id = parse_number<std::uint32_t>(tok[0], line_no, "route id");
      if (id != sc.routes.size()) {
        throw ParseError(line_no, "route ids must run 0,1,2,...; got " + std::to_string(id));
      }
      RawRoute r;
      bool have_flow = false, have_arcs = false;
      for (std::size_t k = 1; k < 3; ++k) {
        const auto [key, val] = detail::split_kv(tok[k], '=', line_no);
        if (key == "flow_ev_per_s") {
          r.flow = parse_number<double>(val, line_no, key);
          if (r.flow < 0.0) throw ParseError(line_no, "route flow must be non-negative");
          have_flow = true;
        } else if (key == "arcs") {
          std::size_t b = 0;
          while (b <= val.size()) {
            auto c = val.find(',', b);
            if (c == std::string_view::npos) c = val.size();
            r.arcs.emplace_back(parse_number<std::uint32_t>(val.substr(b, c - b), line_no, "arcs"));
            b = c + 1;
          }
          have_arcs = true;
        } else {
          throw ParseError(line_no, "unknown route attribute '" + std::string(key) + "'");
        }
      }
      if (!have_flow || !have_arcs) throw ParseError(line_no, "route needs flow_ev_per_s and arcs");
      sc.routes.push_back(std::move(r));
      route_lines.push_back(line_no);
    } else {
      const auto [key, val] = detail::split_kv(ln, '=', line_no);
      if (section == "meta") {
        if (key == "name") sc.name = std::string(val);
        else if (key == "seed") sc.seed = parse_number<std::uint64_t>(val, line_no, key);
        else throw ParseError(line_no, "unknown meta key '" + std::string(key) + "'");
      } else if (section == "junctions") {
        if (key != "count") throw ParseError(line_no, "unknown junctions key '" + std::string(key) + "'");
        sc.junction_count = parse_number<std::uint32_t>(val, line_no, key);
        have_count = true;
      } else if (section == "params") {
        const double v = parse_number<double>(val, line_no, key);
        if (key == "w_kwh") sc.params.w_kwh = v;
        else if (key == "zc") sc.params.zc = v;
        else if (key == "zd") sc.params.zd = v;
        else if (key == "T_s") sc.params.horizon_s = v;
        else throw ParseError(line_no, "unknown params key '" + std::string(key) + "'");
      } else if (section == "endpoints") {
        if (key == "s") {
          sc.source = JunctionId(parse_number<std::uint32_t>(val, line_no, key));
          have_s = true;
        } else if (key == "t") {
          sc.destination = JunctionId(parse_number<std::uint32_t>(val, line_no, key));
          have_t = true;
        } else if (key == "target_kwh") {
          sc.target_kwh = parse_number<double>(val, line_no, key);
        } else {
          throw ParseError(line_no, "unknown endpoints key '" + std::string(key) + "'");
        }
      }
    }
    if (nl == text.size()) break;
  }

  if (!have_count) throw ParseError(0, "missing [junctions] count");
  if (!have_s || !have_t) throw ParseError(0, "missing [endpoints] s and t");
  for (std::size_t k = 0; k < sc.arcs.size(); ++k) {
    const auto& a = sc.arcs[k];
    if (a.tail.value >= sc.junction_count || a.head.value >= sc.junction_count) {
      throw ParseError(0, "arc " + std::to_string(k) + " references an undeclared junction");
    }
  }
  for (std::size_t k = 0; k < sc.routes.size(); ++k) {
    for (ArcId a : sc.routes[k].arcs) {
      if (a.value >= sc.arcs.size()) {
        throw ParseError(route_lines[k], "route " + std::to_string(k) + " references unknown arc " +
                                             std::to_string(a.value));
      }
    }
  }
  if (sc.source.value >= sc.junction_count || sc.destination.value >= sc.junction_count) {
    throw ParseError(0, "endpoint is not a declared junction");
  }
  try {
    sc.params.validate();
  } catch (const DomainError& e) {
    throw ParseError(0, e.what());
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write scenario file '" + path + "'");
  out << format_scenario(sc);
}

// ---------------------------------------------------------------------------
// Generators

/// Constant flow, or flows drawn uniformly from [lo, hi].
struct FlowSpec {
  double lo{0.1};
  double hi{0.1};

  static FlowSpec constant(double c) { return {c, c}; }
  static FlowSpec uniform(double lo, double hi) { return {lo, hi}; }

  double draw(Rng& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

struct GridSpec {
  std::uint32_t rows{4};
  std::uint32_t cols{4};
  double arc_length_km{10.0};
  double speed_kmh{60.0};
  std::uint32_t route_count{20};
  FlowSpec flow{};
  std::uint64_t seed{1};
  EnergyParams params{};
  /// Defaults to the top-left and bottom-right corners.
  std::optional<JunctionId> source{};
  std::optional<JunctionId> destination{};
};

/**
 * @brief Bidirectional 4-neighbour grid with random shortest routes.
 *
 * Junction r*cols + c sits at row r, column c. Arcs are listed per junction
 * in the order right, down, left, up. Each route joins two distinct random
 * junctions by a random monotone staircase, so it is a shortest path.
 */
inline Scenario generate_grid(const GridSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) throw DomainError("grid needs at least 2 rows and 2 columns");
  if (!(spec.arc_length_km > 0.0) || !(spec.speed_kmh > 0.0)) {
    throw DomainError("arc length and speed must be positive");
  }
  if (!(spec.flow.lo >= 0.0) || spec.flow.hi < spec.flow.lo) throw DomainError("invalid flow range");
  Scenario sc;
  sc.name = "grid-" + std::to_string(spec.rows) + "x" + std::to_string(spec.cols);
  sc.seed = spec.seed;
  sc.params = spec.params;
  const std::uint32_t R = spec.rows, C = spec.cols;
  sc.junction_count = R * C;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> arc_of;
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    arc_of[{a, b}] = static_cast<std::uint32_t>(sc.arcs.size());
    sc.arcs.push_back({JunctionId(a), JunctionId(b), std::nullopt, spec.arc_length_km, spec.speed_kmh});
  };
  for (std::uint32_t r = 0; r < R; ++r) {
    for (std::uint32_t c = 0; c < C; ++c) {
      const std::uint32_t j = r * C + c;
      if (c + 1 < C) add(j, j + 1);
      if (r + 1 < R) add(j, j + C);
      if (c > 0) add(j, j - 1);
      if (r > 0) add(j, j - C);
    }
  }
  Rng rng(spec.seed);
  for (std::uint32_t k = 0; k < spec.route_count; ++k) {
    const auto a = static_cast<std::uint32_t>(rng.below(sc.junction_count));
    auto b = static_cast<std::uint32_t>(rng.below(sc.junction_count - 1));
    if (b >= a) ++b;
    std::int64_t r = a / C, c = a % C;
    const std::int64_t rb = b / C, cb = b % C;
    std::vector<char> moves;  // 'h' or 'v'
    moves.insert(moves.end(), static_cast<std::size_t>(std::abs(cb - c)), 'h');
    moves.insert(moves.end(), static_cast<std::size_t>(std::abs(rb - r)), 'v');
    rng.shuffle(moves);
    RawRoute route;
    for (char m : moves) {
      const auto from = static_cast<std::uint32_t>(r * C + c);
      if (m == 'h') c += cb > c ? 1 : -1;
      else r += rb > r ? 1 : -1;
      const auto to = static_cast<std::uint32_t>(r * C + c);
      route.arcs.emplace_back(arc_of.at({from, to}));
    }
    route.flow = spec.flow.draw(rng);
    sc.routes.push_back(std::move(route));
  }
  sc.source = spec.source.value_or(JunctionId(0));
  sc.destination = spec.destination.value_or(JunctionId(sc.junction_count - 1));
  if (sc.source.value >= sc.junction_count || sc.destination.value >= sc.junction_count ||
      sc.source == sc.destination) {
    throw DomainError("grid endpoints must be two distinct junctions");
  }
  return sc;
}

struct RandomSpec {
  std::uint32_t junctions{6};
  double road_density{0.3};       // probability of each ordered junction pair
  std::uint32_t route_length_cap{4};  // arcs
  std::uint32_t route_count{6};
  FlowSpec flow{FlowSpec::uniform(0.1, 0.3)};
  double arc_delay_s{600.0};
  std::uint64_t seed{1};
  EnergyParams params{};
};

/**
 * @brief Random directed road graph with random self-avoiding routes.
 *
 * Every ordered junction pair becomes an arc with probability road_density.
 * Each route starts at a random junction with an outgoing arc and walks up
 * to a random length in [1, route_length_cap], stopping early when every
 * neighbour is already on the route. Source and destination are a random
 * distinct pair.
 */
inline Scenario generate_random(const RandomSpec& spec) {
  if (spec.junctions < 2) throw DomainError("random network needs at least 2 junctions");
  if (!(spec.road_density > 0.0) || spec.road_density > 1.0) {
    throw DomainError("road density must lie in (0, 1]");
  }
  if (spec.route_length_cap < 1) throw DomainError("route length cap must be at least 1");
  if (!(spec.arc_delay_s > 0.0)) throw DomainError("arc delay must be positive");
  Scenario sc;
  sc.name = "random-" + std::to_string(spec.junctions);
  sc.seed = spec.seed;
  sc.params = spec.params;
  sc.junction_count = spec.junctions;
  Rng rng(spec.seed);
  const std::uint32_t n = spec.junctions;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> out(n);  // (head, arc)
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i == j || rng.unit() >= spec.road_density) continue;
      out[i].push_back({j, static_cast<std::uint32_t>(sc.arcs.size())});
      sc.arcs.push_back({JunctionId(i), JunctionId(j), spec.arc_delay_s, 0.0, 0.0});
    }
  }
  std::vector<std::uint32_t> starts;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!out[i].empty()) starts.push_back(i);
  }
  for (std::uint32_t k = 0; k < spec.route_count && !starts.empty(); ++k) {
    std::uint32_t at = starts[rng.below(starts.size())];
    const auto len = 1 + static_cast<std::uint32_t>(rng.below(spec.route_length_cap));
    std::vector<char> on(n, 0);
    on[at] = 1;
    RawRoute route;
    for (std::uint32_t step = 0; step < len; ++step) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> next;
      for (const auto& e : out[at]) {
        if (!on[e.first]) next.push_back(e);
      }
      if (next.empty()) break;
      const auto& e = next[rng.below(next.size())];
      route.arcs.emplace_back(e.second);
      at = e.first;
      on[at] = 1;
    }
    route.flow = spec.flow.draw(rng);
    sc.routes.push_back(std::move(route));
  }
  const auto s = static_cast<std::uint32_t>(rng.below(n));
  auto t = static_cast<std::uint32_t>(rng.below(n - 1));
  if (t >= s) ++t;
  sc.source = JunctionId(s);
  sc.destination = JunctionId(t);
  return sc;
}

struct RegionalSpec {
  std::uint32_t junctions{1000};
  double extent_km{300.0};
  std::uint32_t extra_links{235};  // bidirectional links added beyond the spanning tree
  double detour_factor{1.2};       // road length over straight-line distance
  double speed_kmh{80.0};
  std::uint32_t route_count{4788};
  double route_length_cap_km{200.0};
  double min_route_km{20.0};
  FlowSpec flow{FlowSpec::uniform(0.005, 0.05)};
  double endpoint_min_km{150.0};
  double endpoint_max_km{200.0};
  std::uint64_t seed{2024};
  EnergyParams params{};
};

/**
 * @brief Large synthetic road network standing in for a regional one.
 *
 * Junctions are scattered uniformly over a square. Roads form the Euclidean
 * minimum spanning tree plus the shortest remaining links, all two-way.
 * Routes follow fastest paths between random junction pairs, cut off at the
 * length cap. The endpoints are the first random pair whose fastest road
 * distance lies in the requested band.
 */
inline Scenario generate_regional(const RegionalSpec& spec) {
  if (spec.junctions < 2) throw DomainError("regional network needs at least 2 junctions");
  Scenario sc;
  sc.name = "regional-" + std::to_string(spec.junctions);
  sc.seed = spec.seed;
  sc.params = spec.params;
  sc.junction_count = spec.junctions;
  const std::uint32_t n = spec.junctions;
  Rng rng(spec.seed);
  std::vector<double> x(n), y(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(0.0, spec.extent_km);
    y[i] = rng.uniform(0.0, spec.extent_km);
  }
  auto dist = [&](std::uint32_t a, std::uint32_t b) { return std::hypot(x[a] - x[b], y[a] - y[b]); };

  // Prim's algorithm on the complete Euclidean graph.
  std::set<std::pair<std::uint32_t, std::uint32_t>> links;
  {
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> parent(n, 0);
    std::vector<char> in_tree(n, 0);
    best[0] = 0.0;
    for (std::uint32_t it = 0; it < n; ++it) {
      std::uint32_t u = n;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!in_tree[v] && (u == n || best[v] < best[u])) u = v;
      }
      in_tree[u] = 1;
      if (u != 0) links.insert({std::min(u, parent[u]), std::max(u, parent[u])});
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!in_tree[v] && dist(u, v) < best[v]) {
          best[v] = dist(u, v);
          parent[v] = u;
        }
      }
    }
  }
  // Shortest non-tree links, taken from each junction's few nearest neighbours.
  {
    std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> cand;
    for (std::uint32_t i = 0; i < n; ++i) {
      std::vector<std::pair<double, std::uint32_t>> near;
      for (std::uint32_t j = 0; j < n; ++j) {
        if (j != i) near.push_back({dist(i, j), j});
      }
      const std::size_t k = std::min<std::size_t>(6, near.size());
      std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
      for (std::size_t q = 0; q < k; ++q) {
        const auto a = std::min(i, near[q].second), b = std::max(i, near[q].second);
        if (!links.count({a, b})) cand.push_back({near[q].first, a, b});
      }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (std::size_t q = 0; q < cand.size() && q < spec.extra_links; ++q) {
      links.insert({std::get<1>(cand[q]), std::get<2>(cand[q])});
    }
  }
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> out(n);  // (head, arc)
  std::vector<double> len_km;
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    const double l = std::round(dist(a, b) * spec.detour_factor * 1000.0) / 1000.0;
    const double length = std::max(l, 0.001);
    out[a].push_back({b, static_cast<std::uint32_t>(sc.arcs.size())});
    len_km.push_back(length);
    sc.arcs.push_back({JunctionId(a), JunctionId(b), std::nullopt, length, spec.speed_kmh});
  };
  for (const auto& [a, b] : links) {
    add(a, b);
    add(b, a);
  }

  // Dijkstra by length; returns predecessor arcs.
  auto shortest = [&](std::uint32_t src, std::vector<double>& d, std::vector<std::int64_t>& pred) {
    d.assign(n, std::numeric_limits<double>::infinity());
    pred.assign(n, -1);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (const auto& [v, a] : out[u]) {
        const double nd = du + len_km[a];
        if (nd < d[v]) {
          d[v] = nd;
          pred[v] = a;
          pq.push({nd, v});
        }
      }
    }
  };

  std::vector<double> d;
  std::vector<std::int64_t> pred;
  std::uint32_t made = 0;
  for (std::size_t guard = 0; made < spec.route_count && guard < 100ull * spec.route_count; ++guard) {
    const auto a = static_cast<std::uint32_t>(rng.below(n));
    auto b = static_cast<std::uint32_t>(rng.below(n - 1));
    if (b >= a) ++b;
    shortest(a, d, pred);
    if (!std::isfinite(d[b]) || d[b] < spec.min_route_km) continue;
    std::vector<std::uint32_t> arcs;
    for (std::uint32_t v = b; v != a;) {
      const auto arc = static_cast<std::uint32_t>(pred[v]);
      arcs.push_back(arc);
      v = sc.arcs[arc].tail.value;
    }
    std::reverse(arcs.begin(), arcs.end());
    RawRoute route;
    double km = 0.0;
    for (std::uint32_t arc : arcs) {
      if (km + len_km[arc] > spec.route_length_cap_km) break;
      km += len_km[arc];
      route.arcs.emplace_back(arc);
    }
    if (route.arcs.empty()) continue;
    route.flow = spec.flow.draw(rng);
    sc.routes.push_back(std::move(route));
    ++made;
  }

  for (std::size_t guard = 0;; ++guard) {
    if (guard > 100000) throw DomainError("no endpoint pair in the requested distance band");
    const auto s = static_cast<std::uint32_t>(rng.below(n));
    auto t = static_cast<std::uint32_t>(rng.below(n - 1));
    if (t >= s) ++t;
    shortest(s, d, pred);
    if (d[t] >= spec.endpoint_min_km && d[t] <= spec.endpoint_max_km) {
      sc.source = JunctionId(s);
      sc.destination = JunctionId(t);
      break;
    }
  }
  return sc;
}

}  // namespace ven
