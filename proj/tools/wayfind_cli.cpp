#include <csignal>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "service.hpp"
#include "wayfind.h"

namespace {

using json = nlohmann::json;

struct Failure {
  wf_status status;
  std::string message;
};

struct CString {
  char* p = nullptr;
  CString() = default;
  CString(const CString&) = delete;
  ~CString() { wf_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

void check(wf_status s, const std::string& context) {
  if (s != WF_OK) throw Failure{s, context + ": " + wf_last_error()};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{WF_ERR_IO, "cannot read " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Failure{WF_ERR_IO, "cannot write " + path};
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix;
}

struct Project {
  wf_project* handle = nullptr;
  Project() = default;
  Project(const Project&) = delete;
  ~Project() { wf_project_destroy(handle); }
  operator wf_project*() const { return handle; }
};

struct Common {
  std::string layout;
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("layout", c.layout, "Layout JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", c.config, "Configuration JSON; defaults otherwise")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Overrides the configured seed");
}

// Opens the layout and applies configuration and seed, echoing defaults
// when no configuration file was given.
void open(Project& p, const Common& c, bool echo) {
  check(wf_project_create(read_text(c.layout).c_str(), &p.handle), c.layout);
  if (!c.config.empty()) check(wf_project_set_config(p, read_text(c.config).c_str()), c.config);
  if (c.seed) check(wf_project_set_seed(p, *c.seed), "seed");
  if (echo && c.config.empty()) {
    CString cfg;
    check(wf_project_config(p, &cfg.p), "config");
    std::cout << "no --config given, using defaults:\n" << cfg.str();
  }
}

void load_scheme(Project& p, const std::string& path) {
  check(wf_project_set_scheme(p, read_text(path).c_str()), path);
}

void load_placement(Project& p, const std::string& path) {
  check(wf_project_set_placement(p, read_text(path).c_str()), path);
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

int cmd_validate(const std::string& layout) {
  Project p;
  check(wf_project_create(read_text(layout).c_str(), &p.handle), layout);
  CString summary;
  check(wf_project_summary(p, &summary.p), layout);
  const json s = json::parse(summary.str());
  std::cout << "OK, " << s["nodes"].get<int>() << " nodes, " << s["edges"].get<int>() << " edges, "
            << s["scenarios"].size() << " scenarios" << (s["default_scenarios"].get<bool>() ? " (default)" : "")
            << "\n";
  for (const auto& z : s["scenarios"]) {
    std::cout << "  " << z["source"].get<std::string>() << " -> " << z["destination"].get<std::string>()
              << ": reachable, shortest " << fmt("%.1f", z["shortest"].get<double>()) << " m, importance "
              << fmt("%.3f", z["importance"].get<double>()) << "\n";
  }
  return 0;
}

int cmd_optimize(const Common& c, const std::string& out, std::string trace) {
  Project p;
  open(p, c, true);
  CString report, scheme, csv;
  check(wf_optimize_scheme(p, &report.p), "optimize");
  check(wf_project_scheme(p, &scheme.p), "optimize");
  check(wf_project_trace(p, "scheme", &csv.p), "optimize");
  if (trace.empty()) trace = sibling(out, ".trace.csv");
  write_text(out, scheme.str());
  write_text(trace, csv.str());

  const json r = json::parse(report.str());
  std::cout << "scheme written to " << out << ", trace to " << trace << "\n";
  std::cout << "iterations " << r["iterations"].get<std::uint64_t>() << "\n";
  for (const auto& [term, value] : r["terms"].items())
    std::cout << "  " << term << std::string(16 - term.size(), ' ') << fmt("%.6f", value.get<double>()) << "\n";
  std::cout << "  total           " << fmt("%.6f", r["cost"].get<double>()) << "  (initial "
            << fmt("%.6f", r["initial_cost"].get<double>()) << ")\n";
  if (!r["capped_scenarios"].empty())
    std::cout << "note: " << r["capped_scenarios"].size() << " scenario(s) hit the candidate cap\n";
  return 0;
}

int cmd_place_signs(const Common& c, const std::string& scheme, const std::string& out, std::string trace) {
  Project p;
  open(p, c, true);
  load_scheme(p, scheme);
  CString report, placement, csv;
  check(wf_refine_signs(p, &report.p), "place-signs");
  check(wf_project_placement(p, &placement.p), "place-signs");
  check(wf_project_trace(p, "signs", &csv.p), "place-signs");
  if (trace.empty()) trace = sibling(out, ".trace.csv");
  write_text(out, placement.str());
  write_text(trace, csv.str());

  const json r = json::parse(report.str());
  const auto& costs = r["costs"];
  std::cout << "placement written to " << out << ", trace to " << trace << "\n";
  std::cout << "entries " << r["entries"].get<int>() << " (full placement " << r["initial_entries"].get<int>()
            << "), boards " << r["boards"].get<int>() << "\n";
  for (const char* term : {"count", "distribution", "failure", "total"}) {
    const auto& v = costs[term];
    std::cout << "  " << term << std::string(14 - std::strlen(term), ' ')
              << (v.is_string() ? v.get<std::string>() : fmt("%.6f", v.get<double>())) << "\n";
  }
  const double failure = costs["failure_rate"].get<double>();
  const double mu = r["tolerance"].get<double>();
  std::cout << "failure rate " << fmt("%.4f", failure) << (failure <= mu ? " <= " : " > ") << "tolerance "
            << fmt("%.4f", mu) << "\n";
  return 0;
}

int cmd_simulate(const Common& c, const std::string& scheme, const std::string& placement, const std::string& out,
                 const std::string& trajectories) {
  Project p;
  open(p, c, true);
  load_scheme(p, scheme);
  load_placement(p, placement);
  CString report, csv;
  check(wf_simulate(p, &report.p, trajectories.empty() ? nullptr : &csv.p), "simulate");
  if (!out.empty()) write_text(out, report.str());
  if (!trajectories.empty()) write_text(trajectories, csv.str());

  const json r = json::parse(report.str());
  std::printf("%-28s %8s %8s %8s %8s\n", "scenario", "mean", "sd", "success", "agents");
  for (const auto& z : r["scenarios"]) {
    const std::string name = z["source"].get<std::string>() + " -> " + z["destination"].get<std::string>();
    std::printf("%-28s %8.1f %8.1f %7.1f%% %8d\n", name.c_str(), z["mean_distance"].get<double>(),
                z["sd_distance"].get<double>(), 100.0 * z["success_rate"].get<double>(), z["agents"].get<int>());
  }
  std::printf("failure rate %.4f\n", r["failure_rate"].get<double>());
  return 0;
}

int cmd_heatmap(const Common& c, const std::string& placement, const std::string& destination,
                const std::string& out) {
  Project p;
  open(p, c, true);
  load_placement(p, placement);
  CString field;
  check(wf_heatmap(p, destination.c_str(), &field.p), "heatmap");
  if (!out.empty()) write_text(out, field.str());

  const json f = json::parse(field.str());
  double lo = 1.0, hi = 0.0, total = 0.0;
  int blind = 0;
  for (const auto& s : f["samples"]) {
    const double r = s["rate"].get<double>();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    total += r;
    if (r < 0.5) ++blind;
  }
  const auto n = f["samples"].size();
  std::printf("%zu samples toward %s at %.1f m\n", n, destination.c_str(), f["interval"].get<double>());
  if (n > 0)
    std::printf("rate min %.3f, mean %.3f, max %.3f; %d blind (< 0.5)\n", lo, total / static_cast<double>(n), hi,
                blind);
  return 0;
}

httplib::Server* active_server = nullptr;

void stop_server(int) {
  if (active_server) active_server->stop();
}

int cmd_serve(const std::string& dir, const std::string& host, int port) {
  wayfind_service::ProjectService service(dir);
  httplib::Server server;
  service.mount(server);
  active_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cout << "serving " << dir << " on http://" << host << ":" << port << "/api/v1" << std::endl;
  if (!server.listen(host, port)) throw Failure{WF_ERR_IO, "cannot listen on " + host + ":" + std::to_string(port)};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wayfinding scheme and sign placement optimizer"};
  app.set_version_flag("--version", std::string(wf_version()));
  app.require_subcommand(1);

  std::string layout_only;
  auto* validate = app.add_subcommand("validate", "Check a layout and report scenario reachability");
  validate->add_option("layout", layout_only, "Layout JSON")->required()->check(CLI::ExistingFile);

  Common opt_common;
  std::string opt_out, opt_trace;
  auto* optimize = app.add_subcommand("optimize", "Anneal the wayfinding scheme");
  add_common(optimize, opt_common);
  optimize->add_option("--out", opt_out, "Scheme JSON to write")->required();
  optimize->add_option("--trace", opt_trace, "Cost trace CSV (default: <out>.trace.csv)");

  Common sign_common;
  std::string sign_scheme, sign_out, sign_trace;
  auto* place = app.add_subcommand("place-signs", "Refine the sign placement for a scheme");
  add_common(place, sign_common);
  place->add_option("scheme", sign_scheme, "Scheme JSON")->required()->check(CLI::ExistingFile);
  place->add_option("--out", sign_out, "Placement JSON to write")->required();
  place->add_option("--trace", sign_trace, "Cost trace CSV (default: <out>.trace.csv)");

  Common sim_common;
  std::string sim_scheme, sim_placement, sim_out, sim_traj;
  auto* simulate = app.add_subcommand("simulate", "Walk agents through a placement");
  add_common(simulate, sim_common);
  simulate->add_option("scheme", sim_scheme, "Scheme JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("placement", sim_placement, "Placement JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "Report JSON to write");
  simulate->add_option("--trajectories", sim_traj, "Per-agent trajectory CSV to write");

  Common heat_common;
  std::string heat_placement, heat_dest, heat_out;
  auto* heatmap = app.add_subcommand("heatmap", "Accessibility field toward one destination");
  add_common(heatmap, heat_common);
  heatmap->add_option("placement", heat_placement, "Placement JSON")->required()->check(CLI::ExistingFile);
  heatmap->add_option("--destination", heat_dest, "Destination node id")->required();
  heatmap->add_option("--out", heat_out, "Field JSON to write");

  std::string serve_dir, serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve a project directory over HTTP");
  serve->add_option("dir", serve_dir, "Project directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_port, "Port")->capture_default_str()->check(CLI::Range(1, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(layout_only);
    if (*optimize) return cmd_optimize(opt_common, opt_out, opt_trace);
    if (*place) return cmd_place_signs(sign_common, sign_scheme, sign_out, sign_trace);
    if (*simulate) return cmd_simulate(sim_common, sim_scheme, sim_placement, sim_out, sim_traj);
    if (*heatmap) return cmd_heatmap(heat_common, heat_placement, heat_dest, heat_out);
    if (*serve) return cmd_serve(serve_dir, serve_host, serve_port);
  } catch (const Failure& f) {
    std::cerr << "error [" << wf_status_name(f.status) << "] " << f.message << "\n";
    return 1;
  } catch (const wayfind_service::ProjectError& e) {
    std::cerr << "error [" << wf_status_name(e.status()) << "] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
