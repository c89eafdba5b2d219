#include "wayfind.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "wayfind/accessibility.hpp"
#include "wayfind/config.hpp"
#include "wayfind/error.hpp"
#include "wayfind/io.hpp"
#include "wayfind/signs.hpp"

using namespace wayfind;
using ordered = nlohmann::ordered_json;

struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct wf_project {
  io::Layout layout;
  ProjectConfig config;
  std::unique_ptr<Subdivision> sub;  // placement graph for config.subdivision
  std::optional<WayfindingScheme> scheme;
  std::optional<SignPlacement> placement;
  std::string scheme_trace;
  std::string sign_trace;
  wf_progress_fn progress = nullptr;
  void* progress_user = nullptr;

  // Analyzer and last field per destination, reused by blind-zone repair.
  std::unique_ptr<AccessibilityAnalyzer> analyzer;
  std::map<NodeIndex, AccessibilityField> fields;

  void reset_placement_graph() {
    sub = std::make_unique<Subdivision>(subdivide(layout.graph, config.subdivision));
    analyzer.reset();
    fields.clear();
  }

  const LayoutGraph& placement_graph() const { return sub->graph; }

  std::vector<RoutedScenario> routed() const {
    if (!scheme) throw StateError("no wayfinding scheme; optimize or load one first");
    return route_scheme(layout.graph, *sub, *scheme);
  }

  const SignPlacement& signs() const {
    if (!placement) throw StateError("no sign placement; refine or load one first");
    return *placement;
  }

  ProgressFn progress_fn() const {
    if (!progress) return {};
    return [fn = progress, user = progress_user](std::size_t it, double best) {
      fn(user, static_cast<uint64_t>(it), best);
    };
  }

  AccessibilityAnalyzer& field_analyzer() {
    if (!analyzer)
      analyzer = std::make_unique<AccessibilityAnalyzer>(placement_graph(), config.agents, config.interval());
    return *analyzer;
  }
};

namespace {

thread_local std::string last_error;

wf_status fail(wf_status status, const std::string& message) {
  last_error = message;
  return status;
}

wf_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return WF_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return WF_ERR_PARSE;
    case ErrorCode::Validation: return WF_ERR_VALIDATION;
    case ErrorCode::Unreachable: return WF_ERR_UNREACHABLE;
    case ErrorCode::Infeasible: return WF_ERR_INFEASIBLE;
    case ErrorCode::NotFound: return WF_ERR_NOT_FOUND;
    case ErrorCode::Io: return WF_ERR_IO;
  }
  return WF_ERR_INTERNAL;
}

template <typename F>
wf_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return WF_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const StateError& e) {
    return fail(WF_ERR_STATE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WF_ERR_INTERNAL, "unknown error");
  }
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = copy_out(s);
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

NodeIndex node_named(const LayoutGraph& g, const char* id) {
  require(id, "destination");
  auto n = g.find(id);
  if (!n) throw Error(ErrorCode::NotFound, std::string("unknown node '") + id + "'");
  return *n;
}

ordered sign_cost_json(const SignCosts& c, const SignWeights& w) {
  ordered j;
  j["count"] = c.count;
  j["distribution"] = c.distribution;
  j["failure_rate"] = c.failure_rate;
  j["failure"] = std::isinf(c.failure) ? ordered("inf") : ordered(c.failure);
  const double total = c.total(w);
  j["total"] = std::isinf(total) ? ordered("inf") : ordered(total);
  return j;
}

}  // namespace

extern "C" {

const char* wf_version(void) { return "1.0.0"; }

const char* wf_status_name(wf_status status) {
  switch (status) {
    case WF_OK: return "ok";
    case WF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case WF_ERR_PARSE: return "parse_error";
    case WF_ERR_VALIDATION: return "validation_error";
    case WF_ERR_UNREACHABLE: return "unreachable";
    case WF_ERR_INFEASIBLE: return "infeasible";
    case WF_ERR_NOT_FOUND: return "not_found";
    case WF_ERR_IO: return "io_error";
    case WF_ERR_STATE: return "state_error";
    case WF_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* wf_last_error(void) { return last_error.c_str(); }

void wf_string_free(char* s) { std::free(s); }

wf_status wf_config_normalize(const char* config_json, char** out_json) {
  return guard([&] {
    require(config_json, "config_json");
    require(out_json, "out_json");
    put(out_json, io::serialize_config(io::parse_config(config_json)));
  });
}

wf_status wf_project_create(const char* layout_json, wf_project** out) {
  return guard([&] {
    require(layout_json, "layout_json");
    require(out, "out");
    auto p = std::make_unique<wf_project>();
    p->layout = io::parse_layout(layout_json);
    validate_scenarios(p->layout.graph, p->layout.scenarios);
    p->config = p->config.with_seed(p->config.seed);
    p->reset_placement_graph();
    *out = p.release();
  });
}

void wf_project_destroy(wf_project* project) { delete project; }

wf_status wf_project_set_config(wf_project* project, const char* config_json) {
  return guard([&] {
    require(project, "project");
    require(config_json, "config_json");
    ProjectConfig next = io::parse_config(config_json);
    const bool regraph = next.subdivision != project->config.subdivision;
    project->config = next;
    project->analyzer.reset();
    project->fields.clear();
    if (regraph) {
      project->reset_placement_graph();
      project->placement.reset();
    }
  });
}

wf_status wf_project_set_seed(wf_project* project, uint64_t seed) {
  return guard([&] {
    require(project, "project");
    project->config = project->config.with_seed(seed);
    project->fields.clear();
  });
}

wf_status wf_project_set_progress(wf_project* project, wf_progress_fn fn, void* user) {
  return guard([&] {
    require(project, "project");
    project->progress = fn;
    project->progress_user = user;
  });
}

wf_status wf_project_summary(const wf_project* project, char** out_json) {
  return guard([&] {
    require(project, "project");
    require(out_json, "out_json");
    const LayoutGraph& g = project->layout.graph;
    ordered s;
    s["nodes"] = g.node_count();
    s["edges"] = g.edge_count();
    s["default_scenarios"] = project->layout.default_scenarios;
    s["scenarios"] = ordered::array();
    for (const auto& z : project->layout.scenarios) {
      const auto p = shortest_path(g, g.index_of(z.source), g.index_of(z.destination));
      s["scenarios"].push_back({{"source", z.source},
                                {"destination", z.destination},
                                {"importance", z.importance},
                                {"shortest", p.length}});
    }
    put(out_json, s.dump(2) + "\n");
  });
}

wf_status wf_project_layout(const wf_project* project, char** out_json) {
  return guard([&] {
    require(project, "project");
    require(out_json, "out_json");
    put(out_json, io::serialize_layout(project->layout));
  });
}

wf_status wf_project_config(const wf_project* project, char** out_json) {
  return guard([&] {
    require(project, "project");
    require(out_json, "out_json");
    put(out_json, io::serialize_config(project->config));
  });
}

wf_status wf_project_set_scheme(wf_project* project, const char* scheme_json) {
  return guard([&] {
    require(project, "project");
    require(scheme_json, "scheme_json");
    project->scheme = io::parse_scheme(project->layout.graph, scheme_json);
    project->placement.reset();
    project->fields.clear();
  });
}

wf_status wf_project_scheme(const wf_project* project, char** out_json) {
  return guard([&] {
    require(project, "project");
    require(out_json, "out_json");
    if (!project->scheme) throw StateError("no wayfinding scheme; optimize or load one first");
    const auto costs = scheme_costs(project->layout.graph, *project->scheme);
    put(out_json, io::serialize_scheme(project->layout.graph, *project->scheme, &costs,
                                       &project->config.scheme_weights));
  });
}

wf_status wf_project_set_placement(wf_project* project, const char* placement_json) {
  return guard([&] {
    require(project, "project");
    require(placement_json, "placement_json");
    project->placement = io::parse_placement(project->placement_graph(), placement_json);
    project->fields.clear();
  });
}

wf_status wf_project_placement(const wf_project* project, char** out_json) {
  return guard([&] {
    require(project, "project");
    require(out_json, "out_json");
    put(out_json, io::serialize_placement(project->placement_graph(), project->signs()));
  });
}

wf_status wf_optimize_scheme(wf_project* project, char** out_report_json) {
  return guard([&] {
    require(project, "project");
    const auto& c = project->config;
    auto result = optimize_scheme(project->layout.graph, project->layout.scenarios, c.scheme_weights,
                                  c.scheme_schedule, c.stretch, c.k_cap, project->progress_fn());
    ordered report;
    report["cost"] = result.cost;
    report["initial_cost"] = result.initial_cost;
    report["terms"] = {{"local_length", result.costs.local_length},
                       {"local_node", result.costs.local_node},
                       {"local_angle", result.costs.local_angle},
                       {"global_length", result.costs.global_length},
                       {"global_node", result.costs.global_node}};
    report["iterations"] = result.trace.back().iteration;
    ordered capped = ordered::array();
    for (std::size_t i : result.capped_scenarios) capped.push_back(i);
    report["capped_scenarios"] = std::move(capped);

    project->scheme_trace = io::trace_csv(result.trace);
    project->scheme = std::move(result.scheme);
    project->placement.reset();
    project->sign_trace.clear();
    project->fields.clear();
    put(out_report_json, report.dump(2) + "\n");
  });
}

wf_status wf_refine_signs(wf_project* project, char** out_report_json) {
  return guard([&] {
    require(project, "project");
    const auto& c = project->config;
    const auto routed = project->routed();
    Simulator sim(project->placement_graph(), c.agents);
    auto result = refine_signs(sim, routed, c.sign_weights, c.sign_schedule, project->progress_fn());

    ordered report;
    report["initial_entries"] = result.initial.size();
    report["entries"] = result.placement.size();
    report["boards"] = result.placement.board_count();
    report["initial_costs"] = sign_cost_json(
        sign_costs(sim, result.initial, routed, c.sign_weights, c.sign_schedule.seed), c.sign_weights);
    report["costs"] = sign_cost_json(result.costs, c.sign_weights);
    report["tolerance"] = c.sign_weights.tolerance;
    report["iterations"] = result.trace.back().iteration;

    project->sign_trace = io::trace_csv(result.trace);
    project->placement = std::move(result.placement);
    project->fields.clear();
    put(out_report_json, report.dump(2) + "\n");
  });
}

wf_status wf_project_trace(const wf_project* project, const char* stage, char** out_csv) {
  return guard([&] {
    require(project, "project");
    require(stage, "stage");
    require(out_csv, "out_csv");
    const std::string s = stage;
    const std::string* trace = s == "scheme" ? &project->scheme_trace
                               : s == "signs" ? &project->sign_trace
                                              : nullptr;
    if (!trace) throw Error(ErrorCode::InvalidArgument, "stage must be 'scheme' or 'signs'");
    if (trace->empty()) throw StateError("stage '" + s + "' has not run in this session");
    put(out_csv, *trace);
  });
}

wf_status wf_simulate(const wf_project* project, char** out_report_json, char** out_trajectories_csv) {
  return guard([&] {
    require(project, "project");
    require(out_report_json, "out_report_json");
    const auto& c = project->config;
    const auto routed = project->routed();
    const LayoutGraph& g = project->placement_graph();
    Simulator sim(g, c.agents);
    const auto outcome = evaluate_placement(sim, project->signs(), routed, derive_seed(c.seed, 4, 0),
                                            out_trajectories_csv != nullptr);
    ordered report;
    report["failure_rate"] = outcome.failure_rate;
    report["scenarios"] = ordered::array();
    for (std::size_t i = 0; i < routed.size(); ++i) {
      const auto& z = routed[i];
      const auto& so = outcome.scenarios[i];
      ordered js;
      js["source"] = g.node(z.source).id;
      js["destination"] = g.node(z.destination).id;
      js["baseline"] = z.baseline;
      js["budget"] = c.agents.stretch_factor * z.baseline;
      js["agents"] = so.agents;
      js["successes"] = so.successes;
      js["success_rate"] = so.success_rate();
      js["mean_distance"] = so.mean_success_distance();
      js["sd_distance"] = so.sd_success_distance();
      report["scenarios"].push_back(std::move(js));
    }
    std::string csv;
    if (out_trajectories_csv) csv = io::trajectories_csv(g, outcome.trajectories);
    put(out_report_json, report.dump(2) + "\n");
    if (out_trajectories_csv) put(out_trajectories_csv, csv);
  });
}

wf_status wf_heatmap(const wf_project* project, const char* destination, char** out_field_json) {
  return guard([&] {
    require(project, "project");
    require(out_field_json, "out_field_json");
    auto* p = const_cast<wf_project*>(project);  // caches only
    const NodeIndex dest = node_named(p->placement_graph(), destination);
    auto field = p->field_analyzer().compute(p->signs(), dest, derive_seed(p->config.seed, 3, 0));
    put(out_field_json, io::serialize_field(field));
    p->fields[dest] = std::move(field);
  });
}

wf_status wf_project_field(const wf_project* project, const char* destination, char** out_field_json) {
  return guard([&] {
    require(project, "project");
    require(out_field_json, "out_field_json");
    const NodeIndex dest = node_named(project->placement_graph(), destination);
    auto it = project->fields.find(dest);
    if (it == project->fields.end()) throw StateError("no field computed for this destination");
    put(out_field_json, io::serialize_field(it->second));
  });
}

wf_status wf_fix_blind_zone(wf_project* project, const char* destination, double x, double y,
                            char** out_json) {
  return guard([&] {
    require(project, "project");
    const LayoutGraph& g = project->placement_graph();
    const NodeIndex dest = node_named(g, destination);
    const auto routed = project->routed();
    auto fix = fix_blind_zone(g, project->signs(), dest, Point{x, y}, routed);

    ordered out;
    out["snapped"] = g.node(fix.snapped).id;
    out["added"] = ordered::array();
    std::vector<NodeIndex> changed;
    for (const auto& s : fix.added) {
      out["added"].push_back(
          {{"node", g.node(s.node).id}, {"destination", g.node(s.destination).id}, {"next_node", g.node(s.next_node).id}});
      changed.push_back(s.node);
    }

    // Refresh the cached field around the new signs.
    auto& analyzer = project->field_analyzer();
    const std::uint64_t seed = derive_seed(project->config.seed, 3, 0);
    std::vector<std::size_t> recomputed;
    AccessibilityField field;
    if (auto it = project->fields.find(dest); it != project->fields.end()) {
      field = analyzer.update(it->second, fix.placement, dest, changed, seed, &recomputed);
    } else {
      field = analyzer.compute(fix.placement, dest, seed);
      for (std::size_t i = 0; i < field.samples.size(); ++i) recomputed.push_back(i);
    }
    ordered samples = ordered::array();
    for (std::size_t i : recomputed) {
      const auto& s = field.samples[i];
      samples.push_back({{"index", i}, {"x", s.position.x}, {"y", s.position.y}, {"node", s.node}, {"rate", s.rate}});
    }
    out["samples"] = std::move(samples);
    out["rate_at_point"] = interpolate(field, Point{x, y});

    project->placement = std::move(fix.placement);
    project->fields[dest] = std::move(field);
    put(out_json, out.dump(2) + "\n");
  });
}

}  // extern "C"
