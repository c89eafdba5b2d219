#include "service.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace wayfind_service {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

struct StatusError : std::runtime_error {
  StatusError(wf_status s, const std::string& m) : std::runtime_error(m), status(s) {}
  wf_status status;
};

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { wf_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

void check(wf_status s) {
  if (s != WF_OK) throw StatusError(s, wf_last_error());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StatusError(WF_ERR_IO, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* state_name(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Succeeded: return "succeeded";
    case JobState::Failed: return "failed";
  }
  return "queued";
}

std::string error_body(const std::string& code, const std::string& message) {
  return ordered{{"error", {{"code", code}, {"message", message}}}}.dump() + "\n";
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(error_body(code, message), "application/json");
}

// Node ids become file names under fields/.
bool safe_name(const std::string& id) {
  if (id.empty() || id.front() == '.' || id.size() > 200) return false;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                    c == '~' || c == '#';
    if (!ok) return false;
  }
  return true;
}

ordered job_json(const Job& j) {
  ordered o;
  o["id"] = j.id;
  o["kind"] = j.kind;
  o["state"] = state_name(j.state);
  o["iteration"] = j.iteration;
  o["best_cost"] = j.best_cost;
  if (j.state == JobState::Succeeded && !j.result.empty()) o["result"] = ordered::parse(j.result);
  if (j.state == JobState::Failed)
    o["error"] = {{"code", wf_status_name(j.status)}, {"message", j.error_message}};
  return o;
}

// Parses a request body as a JSON object; an empty body is an empty object.
json body_object(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw StatusError(WF_ERR_PARSE, std::string("request body is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw StatusError(WF_ERR_INVALID_ARGUMENT, "request body must be a JSON object");
  return doc;
}

void allow_only(const json& doc, std::initializer_list<const char*> keys) {
  for (const auto& item : doc.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; }) == keys.end())
      throw StatusError(WF_ERR_INVALID_ARGUMENT, "unknown request key '" + item.key() + "'");
  }
}

std::string destination_of(const json& doc) {
  auto it = doc.find("destination");
  if (it == doc.end() || !it->is_string())
    throw StatusError(WF_ERR_INVALID_ARGUMENT, "'destination' must be a node id string");
  const std::string dest = it->get<std::string>();
  if (!safe_name(dest)) throw StatusError(WF_ERR_INVALID_ARGUMENT, "unsupported destination id");
  return dest;
}

// Checks a request up front so malformed ones are refused before queueing.
void validate_request(const std::string& kind, const std::string& body) {
  const json doc = body_object(body);
  if (kind == "optimize" || kind == "refine") {
    allow_only(doc, {"config"});
    if (auto it = doc.find("config"); it != doc.end()) {
      CString normalized;
      check(wf_config_normalize(it->dump().c_str(), &normalized.p));
    }
  } else if (kind == "heatmap") {
    allow_only(doc, {"destination"});
    destination_of(doc);
  } else if (kind == "blindzone-fix") {
    allow_only(doc, {"x", "y", "destination"});
    destination_of(doc);
    for (const char* k : {"x", "y"}) {
      auto it = doc.find(k);
      if (it == doc.end() || !it->is_number())
        throw StatusError(WF_ERR_INVALID_ARGUMENT, std::string("'") + k + "' must be a number");
    }
  } else if (kind == "config") {
    CString normalized;
    check(wf_config_normalize(body.c_str(), &normalized.p));
  } else {
    throw StatusError(WF_ERR_INVALID_ARGUMENT, "unknown job kind '" + kind + "'");
  }
}

}  // namespace

int http_status(wf_status status) {
  switch (status) {
    case WF_OK: return 200;
    case WF_ERR_INVALID_ARGUMENT:
    case WF_ERR_PARSE: return 400;
    case WF_ERR_NOT_FOUND: return 404;
    case WF_ERR_STATE: return 409;
    case WF_ERR_VALIDATION:
    case WF_ERR_UNREACHABLE:
    case WF_ERR_INFEASIBLE: return 422;
    case WF_ERR_IO:
    case WF_ERR_INTERNAL: return 500;
  }
  return 500;
}

ProjectService::ProjectService(fs::path dir) : dir_(std::move(dir)) {
  try {
    check(wf_project_create(slurp(dir_ / "layout.json").c_str(), &project_));
    if (fs::exists(dir_ / "config.json")) check(wf_project_set_config(project_, slurp(dir_ / "config.json").c_str()));
    if (fs::exists(dir_ / "scheme.json")) check(wf_project_set_scheme(project_, slurp(dir_ / "scheme.json").c_str()));
    if (fs::exists(dir_ / "signs.json")) check(wf_project_set_placement(project_, slurp(dir_ / "signs.json").c_str()));
    check(wf_project_set_progress(project_, &ProjectService::progress_thunk, this));
  } catch (const StatusError& e) {
    wf_project_destroy(project_);
    throw ProjectError(e.status, dir_.string() + ": " + e.what());
  }
  worker_ = std::thread([this] { run(); });
}

ProjectService::~ProjectService() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
  if (worker_.joinable()) worker_.join();
  wf_project_destroy(project_);
}

std::uint64_t ProjectService::submit(const std::string& kind, const std::string& body) {
  validate_request(kind, body);
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  Job j;
  j.id = id;
  j.kind = kind;
  jobs_.emplace(id, j);
  queue_.push_back({id, kind, body});
  changed_.notify_all();
  return id;
}

bool ProjectService::job(std::uint64_t id, Job& out) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return false;
  out = it->second;
  return true;
}

Job ProjectService::wait(std::uint64_t id) {
  std::unique_lock lock(mutex_);
  changed_.wait(lock, [&] {
    auto it = jobs_.find(id);
    return it == jobs_.end() || it->second.state == JobState::Succeeded || it->second.state == JobState::Failed;
  });
  return jobs_.at(id);
}

void ProjectService::progress_thunk(void* self, std::uint64_t iteration, double best) {
  static_cast<ProjectService*>(self)->on_progress(iteration, best);
}

void ProjectService::on_progress(std::uint64_t iteration, double best) {
  std::lock_guard lock(mutex_);
  if (auto it = jobs_.find(running_); it != jobs_.end()) {
    it->second.iteration = iteration;
    it->second.best_cost = best;
  }
}

void ProjectService::run() {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
      running_ = task.id;
      jobs_[task.id].state = JobState::Running;
    }
    std::string result;
    wf_status status = WF_OK;
    std::string message;
    try {
      result = execute(task);
    } catch (const StatusError& e) {
      status = e.status;
      message = e.what();
    } catch (const std::exception& e) {
      status = WF_ERR_INTERNAL;
      message = e.what();
    }
    {
      std::lock_guard lock(mutex_);
      Job& j = jobs_[task.id];
      j.status = status;
      if (status == WF_OK) {
        j.state = JobState::Succeeded;
        j.result = std::move(result);
      } else {
        j.state = JobState::Failed;
        j.error_message = std::move(message);
      }
      running_ = 0;
    }
    changed_.notify_all();
  }
}

void ProjectService::persist(const fs::path& rel, const std::string& contents) {
  const fs::path target = dir_ / rel;
  fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StatusError(WF_ERR_IO, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw StatusError(WF_ERR_IO, "failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

void ProjectService::remove(const fs::path& rel) {
  std::error_code ec;
  fs::remove_all(dir_ / rel, ec);
}

std::string ProjectService::execute(const Task& task) {
  const json doc = body_object(task.body);

  auto apply_config = [&](const json& config) {
    const std::string text = config.dump();
    check(wf_project_set_config(project_, text.c_str()));
    CString normalized;
    check(wf_project_config(project_, &normalized.p));
    persist("config.json", normalized.str());
  };

  if (task.kind == "config") {
    apply_config(doc);
    CString cfg;
    check(wf_project_config(project_, &cfg.p));
    return cfg.str();
  }

  if (task.kind == "optimize") {
    if (auto it = doc.find("config"); it != doc.end()) apply_config(*it);
    CString report, scheme, trace;
    check(wf_optimize_scheme(project_, &report.p));
    check(wf_project_scheme(project_, &scheme.p));
    check(wf_project_trace(project_, "scheme", &trace.p));
    persist("scheme.json", scheme.str());
    persist("traces/scheme.csv", trace.str());
    remove("signs.json");
    remove("traces/signs.csv");
    remove("fields");
    return report.str();
  }

  if (task.kind == "refine") {
    if (auto it = doc.find("config"); it != doc.end()) apply_config(*it);
    CString report, placement, trace;
    check(wf_refine_signs(project_, &report.p));
    check(wf_project_placement(project_, &placement.p));
    check(wf_project_trace(project_, "signs", &trace.p));
    persist("signs.json", placement.str());
    persist("traces/signs.csv", trace.str());
    remove("fields");
    return report.str();
  }

  if (task.kind == "heatmap") {
    const std::string dest = destination_of(doc);
    CString field;
    check(wf_heatmap(project_, dest.c_str(), &field.p));
    persist(fs::path("fields") / (dest + ".json"), field.str());
    const json f = json::parse(field.str());
    double lo = 1.0, total = 0.0;
    std::size_t blind = 0;
    for (const auto& s : f["samples"]) {
      const double r = s["rate"].get<double>();
      lo = std::min(lo, r);
      total += r;
      if (r < 0.5) ++blind;
    }
    const std::size_t n = f["samples"].size();
    ordered summary{{"destination", dest},
                    {"samples", n},
                    {"min", n ? lo : 0.0},
                    {"mean", n ? total / static_cast<double>(n) : 0.0},
                    {"blind", blind}};
    return summary.dump(2) + "\n";
  }

  if (task.kind == "blindzone-fix") {
    const std::string dest = destination_of(doc);
    CString fix, placement, field;
    check(wf_fix_blind_zone(project_, dest.c_str(), doc["x"].get<double>(), doc["y"].get<double>(), &fix.p));
    check(wf_project_placement(project_, &placement.p));
    check(wf_project_field(project_, dest.c_str(), &field.p));
    persist("signs.json", placement.str());
    persist(fs::path("fields") / (dest + ".json"), field.str());
    ordered out = ordered::parse(fix.str());
    out["placement"] = ordered::parse(placement.str());
    return out.dump(2) + "\n";
  }

  throw StatusError(WF_ERR_INVALID_ARGUMENT, "unknown job kind '" + task.kind + "'");
}

void ProjectService::mount(httplib::Server& server) {
  auto serve_file = [this](const fs::path& rel, const char* what) {
    return [this, rel, what](const httplib::Request&, httplib::Response& res) {
      const fs::path path = dir_ / rel;
      if (!fs::exists(path)) return reply_error(res, 404, "not_found", std::string("no ") + what + " yet");
      try {
        res.set_content(slurp(path), "application/json");
      } catch (const StatusError& e) {
        reply_error(res, 500, wf_status_name(e.status), e.what());
      }
    };
  };

  server.Get("/api/v1/layout", serve_file("layout.json", "layout"));
  server.Get("/api/v1/scheme", serve_file("scheme.json", "scheme"));
  server.Get("/api/v1/placement", serve_file("signs.json", "placement"));

  server.Get("/api/v1/config", [this](const httplib::Request&, httplib::Response& res) {
    const std::string text = fs::exists(dir_ / "config.json") ? slurp(dir_ / "config.json") : "{}";
    CString normalized;
    const wf_status s = wf_config_normalize(text.c_str(), &normalized.p);
    if (s != WF_OK) return reply_error(res, http_status(s), wf_status_name(s), wf_last_error());
    res.set_content(normalized.str(), "application/json");
  });

  server.Get("/api/v1/field/:destination", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string dest = req.path_params.at("destination");
    if (!safe_name(dest)) return reply_error(res, 400, "invalid_argument", "unsupported destination id");
    const fs::path path = dir_ / "fields" / (dest + ".json");
    if (!fs::exists(path)) return reply_error(res, 404, "not_found", "no field for '" + dest + "'");
    res.set_content(slurp(path), "application/json");
  });

  server.Get("/api/v1/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string text = req.path_params.at("id");
    std::uint64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoull(text, &used);
      if (used != text.size()) id = 0;
    } catch (const std::exception&) {
      id = 0;
    }
    Job j;
    if (id == 0 || !job(id, j)) return reply_error(res, 404, "not_found", "unknown job '" + text + "'");
    res.set_content(job_json(j).dump(2) + "\n", "application/json");
  });

  for (const char* kind : {"optimize", "refine", "heatmap"}) {
    server.Post(std::string("/api/v1/") + kind, [this, kind](const httplib::Request& req, httplib::Response& res) {
      try {
        const std::uint64_t id = submit(kind, req.body);
        res.status = 202;
        res.set_content(ordered{{"job", id}, {"state", "queued"}}.dump() + "\n", "application/json");
      } catch (const StatusError& e) {
        reply_error(res, http_status(e.status), wf_status_name(e.status), e.what());
      }
    });
  }

  auto sync = [this](const std::string& kind) {
    return [this, kind](const httplib::Request& req, httplib::Response& res) {
      try {
        const Job j = wait(submit(kind, req.body));
        if (j.state == JobState::Failed)
          return reply_error(res, http_status(j.status), wf_status_name(j.status), j.error_message);
        res.set_content(j.result, "application/json");
      } catch (const StatusError& e) {
        reply_error(res, http_status(e.status), wf_status_name(e.status), e.what());
      }
    };
  };
  server.Post("/api/v1/blindzone-fix", sync("blindzone-fix"));
  server.Put("/api/v1/config", sync("config"));
}

}  // namespace wayfind_service
