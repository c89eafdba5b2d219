#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path fresh_project(const std::string& layout_fixture) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("wayfind_service_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::copy_file(fs::path(WAYFIND_FIXTURES) / layout_fixture, dir / "layout.json");
  return dir;
}

// Runs a service on an ephemeral port for the lifetime of the object.
struct Running {
  wayfind_service::ProjectService service;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit Running(const fs::path& dir) : service(dir) {
    service.mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Running() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

json body(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

json wait_job(httplib::Client& c, std::uint64_t id) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(120);
  for (;;) {
    auto r = c.Get("/api/v1/jobs/" + std::to_string(id));
    REQUIRE(r);
    REQUIRE(r->status == 200);
    auto j = json::parse(r->body);
    if (j["state"] == "succeeded" || j["state"] == "failed") return j;
    REQUIRE(std::chrono::steady_clock::now() < deadline);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

std::uint64_t post_job(httplib::Client& c, const std::string& path, const std::string& payload = "") {
  auto r = c.Post(path, payload, "application/json");
  REQUIRE(r);
  REQUIRE_MESSAGE(r->status == 202, r->body);
  return json::parse(r->body)["job"].get<std::uint64_t>();
}

}  // namespace

TEST_SUITE("http_api") {

TEST_CASE("status mapping") {
  using wayfind_service::http_status;
  CHECK(http_status(WF_OK) == 200);
  CHECK(http_status(WF_ERR_PARSE) == 400);
  CHECK(http_status(WF_ERR_INVALID_ARGUMENT) == 400);
  CHECK(http_status(WF_ERR_NOT_FOUND) == 404);
  CHECK(http_status(WF_ERR_STATE) == 409);
  CHECK(http_status(WF_ERR_VALIDATION) == 422);
  CHECK(http_status(WF_ERR_INTERNAL) == 500);
}

TEST_CASE("a directory without a layout is refused") {
  const fs::path dir = fs::temp_directory_path() / "wayfind_service_empty";
  fs::create_directories(dir);
  CHECK_THROWS_AS(wayfind_service::ProjectService{dir}, wayfind_service::ProjectError);
}

TEST_CASE("reads, unknown jobs and malformed requests") {
  const auto dir = fresh_project("city.json");
  Running run(dir);
  auto c = run.client();

  auto layout = c.Get("/api/v1/layout");
  REQUIRE(layout);
  CHECK(layout->status == 200);
  CHECK(json::parse(layout->body)["nodes"].size() == 30);

  auto config = c.Get("/api/v1/config");
  CHECK(body(config)["agents"]["visibility"] == 125.0);

  auto scheme = c.Get("/api/v1/scheme");
  REQUIRE(scheme);
  CHECK(scheme->status == 404);
  CHECK(body(scheme)["error"]["code"] == "not_found");

  for (const char* path : {"/api/v1/jobs/999", "/api/v1/jobs/abc", "/api/v1/field/post_office"}) {
    auto r = c.Get(path);
    REQUIRE(r);
    CHECK(r->status == 404);
  }

  auto garbage = c.Post("/api/v1/blindzone-fix", "{not json", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);
  CHECK(body(garbage)["error"]["code"] == "parse_error");

  auto missing = c.Post("/api/v1/blindzone-fix", R"({"x": 1})", "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 400);
  CHECK(body(missing)["error"]["code"] == "invalid_argument");

  auto unknown_key = c.Post("/api/v1/optimize", R"({"speed": 2})", "application/json");
  REQUIRE(unknown_key);
  CHECK(unknown_key->status == 400);

  auto bad_config = c.Put("/api/v1/config", R"({"agents": {"miss_prob": 5}})", "application/json");
  REQUIRE(bad_config);
  CHECK(bad_config->status == 400);

  auto early_fix = c.Post("/api/v1/blindzone-fix", R"({"x": 0, "y": 0, "destination": "post_office"})", "application/json");
  REQUIRE(early_fix);
  CHECK(early_fix->status == 409);
  CHECK(body(early_fix)["error"]["code"] == "state_error");

  const auto refine = post_job(c, "/api/v1/refine");
  auto failed = wait_job(c, refine);
  CHECK(failed["state"] == "failed");
  CHECK(failed["error"]["code"] == "state_error");
}

TEST_CASE("concurrent optimize requests are queued and both complete") {
  const auto dir = fresh_project("city.json");
  Running run(dir);
  auto c = run.client();

  // The first job anneals slowly so the second one has to wait.
  const std::string slow = R"({"config": {"scheme": {"anneal": {"cooling": 0.999999, "max_iters": 2000000}}}})";
  std::uint64_t first = 0, second = 0;
  std::thread t1([&] {
    auto c1 = run.client();
    first = post_job(c1, "/api/v1/optimize", slow);
  });
  t1.join();
  second = post_job(c, "/api/v1/optimize", R"({"config": {}})");
  CHECK(second > first);
  auto queued = body(c.Get("/api/v1/jobs/" + std::to_string(second)));
  CHECK(queued["state"] == "queued");

  auto a = wait_job(c, first);
  auto b = wait_job(c, second);
  CHECK(a["state"] == "succeeded");
  CHECK(b["state"] == "succeeded");
  CHECK(a["iteration"].get<std::uint64_t>() > b["iteration"].get<std::uint64_t>());
  CHECK(a["result"]["iterations"] == a["iteration"]);
  CHECK(fs::exists(dir / "scheme.json"));
  CHECK(fs::exists(dir / "traces" / "scheme.csv"));
  // The second job reset the configuration to defaults.
  CHECK(body(c.Get("/api/v1/config"))["scheme"]["anneal"]["cooling"] == 0.999);
}

TEST_CASE("pipeline, heatmap and blind-zone repair persist and reload") {
  const auto dir = fresh_project("blind_zone.json");
  json before;
  json placement;
  {
    Running run(dir);
    auto c = run.client();
    CHECK(wait_job(c, post_job(c, "/api/v1/optimize"))["state"] == "succeeded");
    auto refined = wait_job(c, post_job(c, "/api/v1/refine"));
    REQUIRE(refined["state"] == "succeeded");
    CHECK(refined["result"]["entries"].get<int>() <= refined["result"]["initial_entries"].get<int>());
    CHECK(fs::exists(dir / "signs.json"));

    auto heat = wait_job(c, post_job(c, "/api/v1/heatmap", R"({"destination": "museum"})"));
    REQUIRE(heat["state"] == "succeeded");
    before = body(c.Get("/api/v1/field/museum"));
    REQUIRE(before["samples"].size() > 0);

    auto fix = c.Post("/api/v1/blindzone-fix", R"({"x": 0, "y": -500, "destination": "museum"})", "application/json");
    REQUIRE(fix);
    REQUIRE_MESSAGE(fix->status == 200, fix->body);
    auto doc = json::parse(fix->body);
    CHECK(doc["added"].size() >= 1);
    CHECK(doc["placement"]["signs"].size() > refined["result"]["entries"].get<std::size_t>());
    bool raised = false;
    for (const auto& s : doc["samples"]) {
      const double old_rate = before["samples"][s["index"].get<std::size_t>()]["rate"].get<double>();
      CHECK(s["rate"].get<double>() >= old_rate);
      raised |= s["rate"].get<double>() > old_rate;
    }
    CHECK(raised);
    CHECK(doc["rate_at_point"].get<double>() > 0.9);

    placement = body(c.Get("/api/v1/placement"));
    CHECK(placement == doc["placement"]);
    auto after = body(c.Get("/api/v1/field/museum"));
    CHECK(after != before);
  }
  // A new service on the same directory serves the same state.
  Running again(dir);
  auto c = again.client();
  CHECK(body(c.Get("/api/v1/placement")) == placement);
  auto fix = c.Post("/api/v1/blindzone-fix", R"({"x": 0, "y": -500, "destination": "museum"})", "application/json");
  REQUIRE(fix);
  CHECK(fix->status == 200);
  CHECK(body(fix)["added"].empty());
}

TEST_CASE("optimize clears artifacts derived from the old scheme") {
  const auto dir = fresh_project("blind_zone.json");
  Running run(dir);
  auto c = run.client();
  wait_job(c, post_job(c, "/api/v1/optimize"));
  wait_job(c, post_job(c, "/api/v1/refine"));
  wait_job(c, post_job(c, "/api/v1/heatmap", R"({"destination": "museum"})"));
  REQUIRE(fs::exists(dir / "fields" / "museum.json"));
  wait_job(c, post_job(c, "/api/v1/optimize"));
  CHECK_FALSE(fs::exists(dir / "signs.json"));
  CHECK_FALSE(fs::exists(dir / "fields"));
  CHECK(c.Get("/api/v1/placement")->status == 404);
}

}  // TEST_SUITE
