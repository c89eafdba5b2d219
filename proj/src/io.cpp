#include "wayfind/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "wayfind/error.hpp"

namespace wayfind::io {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Validation, where + ": " + what);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Locate the failing byte for a line/column diagnostic.
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, column = 1, line_start = 0;
    for (std::size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
        line_start = i + 1;
      } else {
        ++column;
      }
    }
    const std::size_t line_end = text.find('\n', line_start);
    std::string context(text.substr(line_start, line_end == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : line_end - line_start));
    if (context.size() > 120) context = context.substr(0, 120) + "...";
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": malformed JSON near: " + context);
  }
}

void allow_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!obj.is_object()) invalid(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      invalid(where, "unknown key '" + item.key() + "'");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(where, "missing key '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) invalid(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(where, "expected a finite number");
  return x;
}

std::size_t count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) invalid(where, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string id_of(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  invalid(where, "expected a string or integer id");
}

const json& array(const json& v, const std::string& where) {
  if (!v.is_array()) invalid(where, "expected an array");
  return v;
}

std::string dump(const ordered& doc) { return doc.dump(2) + "\n"; }

void read_number(const json& obj, const char* key, double& out, const std::string& where) {
  if (auto it = obj.find(key); it != obj.end()) out = number(*it, where + "/" + key);
}

void read_count(const json& obj, const char* key, std::size_t& out, const std::string& where) {
  if (auto it = obj.find(key); it != obj.end()) out = count(*it, where + "/" + key);
}

void read_schedule(const json& obj, AnnealSchedule& s, const std::string& where) {
  allow_keys(obj, {"t_initial", "cooling", "t_min", "stop_window", "stop_rel_change", "max_iters"}, where);
  read_number(obj, "t_initial", s.t_initial, where);
  read_number(obj, "cooling", s.cooling, where);
  read_number(obj, "t_min", s.t_min, where);
  read_count(obj, "stop_window", s.stop_window, where);
  read_number(obj, "stop_rel_change", s.stop_rel_change, where);
  read_count(obj, "max_iters", s.max_iters, where);
}

ordered schedule_json(const AnnealSchedule& s) {
  ordered o;
  o["t_initial"] = s.t_initial;
  o["cooling"] = s.cooling;
  o["t_min"] = s.t_min;
  o["stop_window"] = s.stop_window;
  o["stop_rel_change"] = s.stop_rel_change;
  o["max_iters"] = s.max_iters;
  return o;
}

}  // namespace

Layout parse_layout(std::string_view text) {
  const json doc = parse_json(text);
  allow_keys(doc, {"nodes", "edges", "scenarios", "obstacles"}, "layout");

  std::vector<Node> nodes;
  const json& jnodes = array(require(doc, "nodes", "layout"), "/nodes");
  if (jnodes.empty()) invalid("/nodes", "layout has no nodes");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string where = "/nodes/" + std::to_string(i);
    const json& jn = jnodes[i];
    allow_keys(jn, {"id", "x", "y", "kind", "label"}, where);
    Node n;
    n.id = id_of(require(jn, "id", where), where + "/id");
    n.position = {number(require(jn, "x", where), where + "/x"),
                  number(require(jn, "y", where), where + "/y")};
    if (auto it = jn.find("kind"); it != jn.end()) {
      if (!it->is_string()) invalid(where + "/kind", "expected a string");
      auto kind = parse_node_kind(it->get<std::string>());
      if (!kind) invalid(where + "/kind", "unknown node kind '" + it->get<std::string>() + "'");
      n.kind = *kind;
    }
    if (auto it = jn.find("label"); it != jn.end()) {
      if (!it->is_string()) invalid(where + "/label", "expected a string");
      n.label = it->get<std::string>();
    }
    nodes.push_back(std::move(n));
  }

  std::vector<EdgeSpec> edges;
  if (auto it = doc.find("edges"); it != doc.end()) {
    const json& jedges = array(*it, "/edges");
    for (std::size_t i = 0; i < jedges.size(); ++i) {
      const std::string where = "/edges/" + std::to_string(i);
      const json& je = jedges[i];
      allow_keys(je, {"a", "b", "length"}, where);
      EdgeSpec e;
      e.a = id_of(require(je, "a", where), where + "/a");
      e.b = id_of(require(je, "b", where), where + "/b");
      if (auto len = je.find("length"); len != je.end()) e.length = number(*len, where + "/length");
      edges.push_back(std::move(e));
    }
  }

  std::vector<Obstacle> obstacles;
  if (auto it = doc.find("obstacles"); it != doc.end()) {
    const json& jobs = array(*it, "/obstacles");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const std::string where = "/obstacles/" + std::to_string(i);
      Obstacle poly;
      for (const auto& v : array(jobs[i], where)) {
        if (!v.is_array() || v.size() != 2) invalid(where, "vertices must be [x, y] pairs");
        poly.vertices.push_back({number(v[0], where), number(v[1], where)});
      }
      if (poly.vertices.size() < 3) invalid(where, "an obstacle needs at least 3 vertices");
      obstacles.push_back(std::move(poly));
    }
  }

  Layout layout;
  try {
    layout.graph = build_graph(std::move(nodes), edges).with_obstacles(std::move(obstacles));
  } catch (const Error& e) {
    throw Error(e.code(), std::string("layout: ") + e.what());
  }

  std::vector<std::optional<double>> importance;
  if (auto it = doc.find("scenarios"); it != doc.end()) {
    const json& jsc = array(*it, "/scenarios");
    for (std::size_t i = 0; i < jsc.size(); ++i) {
      const std::string where = "/scenarios/" + std::to_string(i);
      const json& js = jsc[i];
      allow_keys(js, {"source", "destination", "importance"}, where);
      NavScenario z;
      z.source = id_of(require(js, "source", where), where + "/source");
      z.destination = id_of(require(js, "destination", where), where + "/destination");
      std::optional<double> k;
      if (auto imp = js.find("importance"); imp != js.end()) k = number(*imp, where + "/importance");
      importance.push_back(k);
      layout.scenarios.push_back(std::move(z));
    }
  }
  if (layout.scenarios.empty()) {
    layout.scenarios = default_scenarios(layout.graph);
    layout.default_scenarios = true;
  } else {
    const double share = 1.0 / static_cast<double>(layout.scenarios.size());
    for (std::size_t i = 0; i < layout.scenarios.size(); ++i)
      layout.scenarios[i].importance = importance[i].value_or(share);
  }
  return layout;
}

std::string serialize_layout(const Layout& layout) {
  const LayoutGraph& g = layout.graph;
  ordered doc;
  doc["nodes"] = ordered::array();
  for (const auto& n : g.nodes()) {
    ordered jn;
    jn["id"] = n.id;
    jn["x"] = n.position.x;
    jn["y"] = n.position.y;
    jn["kind"] = to_string(n.kind);
    if (!n.label.empty()) jn["label"] = n.label;
    doc["nodes"].push_back(std::move(jn));
  }
  doc["edges"] = ordered::array();
  for (const auto& e : g.edges()) {
    doc["edges"].push_back({{"a", g.node(e.a).id}, {"b", g.node(e.b).id}, {"length", e.length}});
  }
  if (!layout.default_scenarios) {
    doc["scenarios"] = ordered::array();
    for (const auto& z : layout.scenarios) {
      doc["scenarios"].push_back(
          {{"source", z.source}, {"destination", z.destination}, {"importance", z.importance}});
    }
  }
  if (!g.obstacles().empty()) {
    doc["obstacles"] = ordered::array();
    for (const auto& poly : g.obstacles()) {
      ordered verts = ordered::array();
      for (const auto& v : poly.vertices) verts.push_back({v.x, v.y});
      doc["obstacles"].push_back(std::move(verts));
    }
  }
  return dump(doc);
}

ProjectConfig parse_config(std::string_view text) {
  const json doc = parse_json(text);
  allow_keys(doc, {"seed", "scheme", "signs", "agents", "heatmap"}, "config");
  ProjectConfig c;
  if (auto it = doc.find("seed"); it != doc.end()) c.seed = count(*it, "/seed");

  if (auto it = doc.find("scheme"); it != doc.end()) {
    const json& js = *it;
    allow_keys(js, {"weights", "stretch", "k_cap", "anneal"}, "/scheme");
    if (auto w = js.find("weights"); w != js.end()) {
      allow_keys(*w, {"local_length", "local_node", "local_angle", "global_length", "global_node"},
                 "/scheme/weights");
      read_number(*w, "local_length", c.scheme_weights.local_length, "/scheme/weights");
      read_number(*w, "local_node", c.scheme_weights.local_node, "/scheme/weights");
      read_number(*w, "local_angle", c.scheme_weights.local_angle, "/scheme/weights");
      read_number(*w, "global_length", c.scheme_weights.global_length, "/scheme/weights");
      read_number(*w, "global_node", c.scheme_weights.global_node, "/scheme/weights");
    }
    read_number(js, "stretch", c.stretch, "/scheme");
    read_count(js, "k_cap", c.k_cap, "/scheme");
    if (auto a = js.find("anneal"); a != js.end()) read_schedule(*a, c.scheme_schedule, "/scheme/anneal");
  }

  if (auto it = doc.find("signs"); it != doc.end()) {
    const json& js = *it;
    allow_keys(js, {"weights", "tolerance", "subdivision", "anneal"}, "/signs");
    if (auto w = js.find("weights"); w != js.end()) {
      allow_keys(*w, {"count", "distribution", "failure"}, "/signs/weights");
      read_number(*w, "count", c.sign_weights.count, "/signs/weights");
      read_number(*w, "distribution", c.sign_weights.distribution, "/signs/weights");
      read_number(*w, "failure", c.sign_weights.failure, "/signs/weights");
    }
    read_number(js, "tolerance", c.sign_weights.tolerance, "/signs");
    read_number(js, "subdivision", c.subdivision, "/signs");
    if (auto a = js.find("anneal"); a != js.end()) read_schedule(*a, c.sign_schedule, "/signs/anneal");
  }

  if (auto it = doc.find("agents"); it != doc.end()) {
    const json& ja = *it;
    allow_keys(ja, {"visibility", "miss_prob", "stretch_factor", "agents_per_scenario"}, "/agents");
    read_number(ja, "visibility", c.agents.visibility, "/agents");
    read_number(ja, "miss_prob", c.agents.miss_prob, "/agents");
    read_number(ja, "stretch_factor", c.agents.stretch_factor, "/agents");
    read_count(ja, "agents_per_scenario", c.agents.agents_per_scenario, "/agents");
  }

  if (auto it = doc.find("heatmap"); it != doc.end()) {
    allow_keys(*it, {"interval"}, "/heatmap");
    if (auto iv = it->find("interval"); iv != it->end()) c.heatmap_interval = number(*iv, "/heatmap/interval");
  }

  c = c.with_seed(c.seed);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("config: ") + e.what());
  }
  return c;
}

std::string serialize_config(const ProjectConfig& c) {
  ordered doc;
  doc["seed"] = c.seed;
  ordered scheme;
  scheme["weights"] = {{"local_length", c.scheme_weights.local_length},
                       {"local_node", c.scheme_weights.local_node},
                       {"local_angle", c.scheme_weights.local_angle},
                       {"global_length", c.scheme_weights.global_length},
                       {"global_node", c.scheme_weights.global_node}};
  scheme["stretch"] = c.stretch;
  scheme["k_cap"] = c.k_cap;
  scheme["anneal"] = schedule_json(c.scheme_schedule);
  doc["scheme"] = std::move(scheme);
  ordered signs;
  signs["weights"] = {{"count", c.sign_weights.count},
                      {"distribution", c.sign_weights.distribution},
                      {"failure", c.sign_weights.failure}};
  signs["tolerance"] = c.sign_weights.tolerance;
  signs["subdivision"] = c.subdivision;
  signs["anneal"] = schedule_json(c.sign_schedule);
  doc["signs"] = std::move(signs);
  doc["agents"] = {{"visibility", c.agents.visibility},
                   {"miss_prob", c.agents.miss_prob},
                   {"stretch_factor", c.agents.stretch_factor},
                   {"agents_per_scenario", c.agents.agents_per_scenario}};
  doc["heatmap"] = {{"interval", c.interval()}};
  return dump(doc);
}

std::string serialize_scheme(const LayoutGraph& g, const WayfindingScheme& scheme,
                             const SchemeCosts* costs, const SchemeWeights* weights) {
  ordered doc;
  doc["scenarios"] = ordered::array();
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const auto& z = scheme.scenarios[i];
    const Path& p = scheme.path(i);
    ordered path = ordered::array();
    for (NodeIndex n : p.nodes) path.push_back(g.node(n).id);
    ordered js;
    js["source"] = z.source;
    js["destination"] = z.destination;
    js["importance"] = z.importance;
    js["path"] = std::move(path);
    js["length"] = p.length;
    js["candidates"] = scheme.candidates[i].size();
    doc["scenarios"].push_back(std::move(js));
  }
  if (costs) {
    ordered jc;
    jc["local_length"] = costs->local_length;
    jc["local_node"] = costs->local_node;
    jc["local_angle"] = costs->local_angle;
    jc["global_length"] = costs->global_length;
    jc["global_node"] = costs->global_node;
    if (weights) jc["total"] = costs->total(*weights);
    doc["cost"] = std::move(jc);
  }
  return dump(doc);
}

WayfindingScheme parse_scheme(const LayoutGraph& g, std::string_view text) {
  const json doc = parse_json(text);
  allow_keys(doc, {"scenarios", "cost"}, "scheme");
  std::vector<NavScenario> scenarios;
  std::vector<Path> paths;
  const json& js = array(require(doc, "scenarios", "scheme"), "/scenarios");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string where = "/scenarios/" + std::to_string(i);
    allow_keys(js[i], {"source", "destination", "importance", "path", "length", "candidates"}, where);
    NavScenario z;
    z.source = id_of(require(js[i], "source", where), where + "/source");
    z.destination = id_of(require(js[i], "destination", where), where + "/destination");
    z.importance = number(require(js[i], "importance", where), where + "/importance");
    Path p;
    for (const auto& id : array(require(js[i], "path", where), where + "/path")) {
      auto n = g.find(id_of(id, where + "/path"));
      if (!n) invalid(where + "/path", "unknown node id '" + id_of(id, where) + "'");
      p.nodes.push_back(*n);
    }
    if (p.nodes.empty() || g.node(p.nodes.front()).id != z.source ||
        g.node(p.nodes.back()).id != z.destination)
      invalid(where + "/path", "path must run from source to destination");
    try {
      p.length = walk_length(g, p.nodes);
    } catch (const Error& e) {
      invalid(where + "/path", e.what());
    }
    scenarios.push_back(std::move(z));
    paths.push_back(std::move(p));
  }
  validate_scenarios(g, scenarios);
  return WayfindingScheme::from_paths(std::move(scenarios), std::move(paths));
}

double bearing_degrees(Point from, Point to) {
  double deg = std::atan2(to.x - from.x, to.y - from.y) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  return std::round(deg * 1e6) / 1e6;
}

std::string serialize_placement(const LayoutGraph& g, const SignPlacement& signs) {
  ordered doc;
  doc["signs"] = ordered::array();
  doc["boards"] = ordered::array();
  const auto entries = signs.entries();
  for (const auto& s : entries) {
    doc["signs"].push_back({{"node", g.node(s.node).id},
                            {"destination", g.node(s.destination).id},
                            {"next_node", g.node(s.next_node).id}});
  }
  for (std::size_t i = 0; i < entries.size();) {
    const NodeIndex at = entries[i].node;
    ordered board;
    board["node"] = g.node(at).id;
    board["x"] = g.node(at).position.x;
    board["y"] = g.node(at).position.y;
    board["entries"] = ordered::array();
    for (; i < entries.size() && entries[i].node == at; ++i) {
      board["entries"].push_back(
          {{"destination", g.node(entries[i].destination).id},
           {"bearing", bearing_degrees(g.node(at).position, g.node(entries[i].next_node).position)}});
    }
    doc["boards"].push_back(std::move(board));
  }
  return dump(doc);
}

SignPlacement parse_placement(const LayoutGraph& g, std::string_view text) {
  const json doc = parse_json(text);
  allow_keys(doc, {"signs", "boards"}, "placement");
  SignPlacement out;
  const json& js = array(require(doc, "signs", "placement"), "/signs");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string where = "/signs/" + std::to_string(i);
    allow_keys(js[i], {"node", "destination", "next_node"}, where);
    auto lookup = [&](const char* key) {
      const std::string id = id_of(require(js[i], key, where), where + "/" + key);
      auto n = g.find(id);
      if (!n) invalid(where + "/" + key, "unknown node id '" + id + "'");
      return *n;
    };
    Sign s{lookup("node"), lookup("destination"), lookup("next_node")};
    if (!g.edge_between(s.node, s.next_node)) invalid(where, "next_node is not adjacent to node");
    if (!out.insert(s)) invalid(where, "duplicate (node, destination) entry");
  }
  return out;
}

std::string serialize_field(const AccessibilityField& field) {
  ordered doc;
  doc["destination"] = field.destination;
  doc["interval"] = field.interval;
  doc["samples"] = ordered::array();
  for (const auto& s : field.samples) {
    doc["samples"].push_back({{"x", s.position.x}, {"y", s.position.y}, {"node", s.node}, {"rate", s.rate}});
  }
  doc["segments"] = ordered::array();
  for (const auto& [a, b] : field.segments) doc["segments"].push_back({a, b});
  return dump(doc);
}

AccessibilityField parse_field(std::string_view text) {
  const json doc = parse_json(text);
  allow_keys(doc, {"destination", "interval", "samples", "segments"}, "field");
  AccessibilityField f;
  f.destination = id_of(require(doc, "destination", "field"), "/destination");
  f.interval = number(require(doc, "interval", "field"), "/interval");
  const json& js = array(require(doc, "samples", "field"), "/samples");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string where = "/samples/" + std::to_string(i);
    allow_keys(js[i], {"x", "y", "node", "rate"}, where);
    AccessibilitySample s;
    s.position = {number(require(js[i], "x", where), where), number(require(js[i], "y", where), where)};
    s.node = id_of(require(js[i], "node", where), where + "/node");
    s.rate = number(require(js[i], "rate", where), where + "/rate");
    f.samples.push_back(std::move(s));
  }
  if (auto it = doc.find("segments"); it != doc.end()) {
    for (const auto& seg : array(*it, "/segments")) {
      if (!seg.is_array() || seg.size() != 2) invalid("/segments", "expected [i, j] pairs");
      const auto a = count(seg[0], "/segments");
      const auto b = count(seg[1], "/segments");
      if (a >= f.samples.size() || b >= f.samples.size()) invalid("/segments", "sample index out of range");
      f.segments.emplace_back(a, b);
    }
  }
  return f;
}

std::string trace_csv(std::span<const TraceRow> trace) {
  std::string out = "iteration,temperature,current_cost,best_cost\n";
  char line[160];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", r.iteration, r.temperature, r.current, r.best);
    out += line;
  }
  return out;
}

std::string trajectories_csv(const LayoutGraph& g, std::span<const AgentRecord> records) {
  std::string out = "agent,scenario,nodes,distance,outcome\n";
  char number[64];
  for (const auto& r : records) {
    out += std::to_string(r.agent) + "," + std::to_string(r.scenario) + ",";
    for (std::size_t i = 0; i < r.trajectory.nodes.size(); ++i) {
      if (i) out += ' ';
      out += g.node(r.trajectory.nodes[i]).id;
    }
    std::snprintf(number, sizeof number, ",%.17g,", r.trajectory.distance);
    out += number;
    out += r.trajectory.outcome == Outcome::Success ? "success\n" : "failure\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace wayfind::io
