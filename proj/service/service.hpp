#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "wayfind.h"

namespace httplib {
class Server;
}

namespace wayfind_service {

// Thrown when a project directory cannot be opened.
class ProjectError : public std::runtime_error {
 public:
  ProjectError(wf_status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  wf_status status() const noexcept { return status_; }

 private:
  wf_status status_;
};

enum class JobState { Queued, Running, Succeeded, Failed };

struct Job {
  std::uint64_t id = 0;
  std::string kind;
  JobState state = JobState::Queued;
  std::uint64_t iteration = 0;
  double best_cost = 0.0;
  std::string result;  // JSON, set on success
  wf_status status = WF_OK;
  std::string error_message;
};

// Serves one project directory. Reads go straight to the persisted files;
// every mutation runs on a single worker thread in submission order.
//
// Directory contents:
//   layout.json            required
//   config.json            optional, defaults otherwise
//   scheme.json            written by optimize
//   signs.json             written by refine and blind-zone repair
//   fields/<dest>.json     written by heatmap and blind-zone repair
//   traces/{scheme,signs}.csv
class ProjectService {
 public:
  explicit ProjectService(std::filesystem::path dir);
  ~ProjectService();

  ProjectService(const ProjectService&) = delete;
  ProjectService& operator=(const ProjectService&) = delete;

  // Registers the /api/v1 routes.
  void mount(httplib::Server& server);

  // Enqueues a mutation; `body` is the request JSON (may be empty).
  std::uint64_t submit(const std::string& kind, const std::string& body);
  bool job(std::uint64_t id, Job& out) const;
  // Blocks until job `id` has finished.
  Job wait(std::uint64_t id);

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct Task {
    std::uint64_t id;
    std::string kind;
    std::string body;
  };

  void run();
  std::string execute(const Task& task);
  void persist(const std::filesystem::path& rel, const std::string& contents);
  void remove(const std::filesystem::path& rel);
  void on_progress(std::uint64_t iteration, double best);
  static void progress_thunk(void* self, std::uint64_t iteration, double best);

  std::filesystem::path dir_;
  wf_project* project_ = nullptr;

  mutable std::mutex mutex_;
  std::condition_variable changed_;
  std::deque<Task> queue_;
  std::map<std::uint64_t, Job> jobs_;
  std::uint64_t next_id_ = 1;
  std::uint64_t running_ = 0;
  bool stopping_ = false;
  std::thread worker_;
};

// Maps a status to the HTTP code returned for it.
int http_status(wf_status status);

}  // namespace wayfind_service
