#include "emotrack/layout.hpp"
#include "emotrack/service.hpp"
#include "local_server.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <atomic>
#include <thread>

using namespace emotrack;
using namespace emotrack::service;
using nlohmann::json;

namespace {

struct Harness {
    testutil::TempDir dir;
    absl::Time now = parse_instant("2024-01-15T09:00:00Z");
    Service svc;

    explicit Harness(ServiceConfig config = {})
        : svc(configure(std::move(config), dir.path()), [this] { return now; }) {}

    static ServiceConfig configure(ServiceConfig c, const std::filesystem::path& dir) {
        c.data_dir = dir;
        if (c.backends.metadata_fixture.empty()) c.backends.metadata_fixture = testutil::fixture("metadata.tsv");
        return c;
    }

    Response start(const std::string& uid, const char* mood, const char* at) {
        now = parse_instant(at);
        return svc.session_start({{"uid", uid}, {"mood", mood}});
    }
    Response stop(const std::string& uid, const char* mood, const char* at) {
        now = parse_instant(at);
        return svc.session_stop({{"uid", uid}, {"mood", mood}});
    }
    std::string upload_fixture(const std::string& uid, const std::string& rel) {
        auto r = svc.upload(uid, std::filesystem::path(rel).filename().string(),
                            testutil::read_file(testutil::fixture(rel)));
        REQUIRE(r.status == 200);
        return r.body["fileName"].get<std::string>();
    }
};

std::string code_of(const Response& r) { return r.body["error"]["code"].get<std::string>(); }

}  // namespace

TEST_CASE("handle_file ingests an uploaded export") {
    Harness h;
    const auto name = h.upload_fixture("u1", "takeout/four_entries.json");
    auto r = h.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", name}});
    CHECK(r.status == 200);
    CHECK(r.body.dump() == R"({"ok":true,"ingested":3,"skipped":1})");

    const auto before = testutil::tree(h.dir.path() / "Users");
    r = h.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", name}});
    CHECK(r.status == 200);
    CHECK(testutil::tree(h.dir.path() / "Users") == before);
}

TEST_CASE("handle_file gate and errors") {
    Harness h;
    h.upload_fixture("u1", "takeout/not_array.json");
    auto r = h.svc.handle_file({{"uid", "u1"}, {"uploadOk", false}});
    CHECK(r.status == 200);
    CHECK(r.body["ingested"] == 0);
    CHECK(r.body["skipped"] == 0);

    r = h.svc.handle_file({{"uid", "ghost"}, {"uploadOk", true}, {"fileName", "x.json"}});
    CHECK(r.status == 404);
    CHECK(code_of(r) == "NOT_FOUND");
    r = h.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", "never.json"}});
    CHECK(r.status == 404);
    r = h.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", "not_array.json"}});
    CHECK(r.status == 400);
    CHECK(code_of(r) == "MALFORMED");
    r = h.svc.handle_file({{"uid", "u1"}, {"fileName", "not_array.json"}});
    CHECK(r.status == 400);
    r = h.svc.handle_file({{"uploadOk", true}});
    CHECK(r.status == 400);
    r = h.svc.handle_file({{"uid", "../etc"}, {"uploadOk", true}, {"fileName", "x"}});
    CHECK(r.status == 400);
}

TEST_CASE("uploads never overwrite") {
    Harness h;
    CHECK(h.svc.upload("u1", "history.json", "[]").body["fileName"] == "history.json");
    CHECK(h.svc.upload("u1", "history.json", "[1]").body["fileName"] == "history-1.json");
    CHECK(h.svc.upload("u1", "../../history.json", "[2]").body["fileName"] == "history-2.json");
    CHECK(testutil::read_file(h.svc.upload_dir("u1") / "history.json") == "[]");
    CHECK(h.svc.upload("u1", "", "x").status == 400);
    CHECK(h.svc.upload("", "a.json", "x").status == 400);

    ServiceConfig small;
    small.max_upload_bytes = 1024;
    Harness tiny(small);
    CHECK(tiny.svc.upload("u1", "ok.json", std::string(1024, ' ')).status == 200);
    auto r = tiny.svc.upload("u1", "big.json", std::string(1025, ' '));
    CHECK(r.status == 413);
}

TEST_CASE("session endpoints") {
    Harness h;
    auto r = h.stop("u1", "Good", "2024-01-15T09:00:00Z");
    CHECK(r.status == 409);
    CHECK(code_of(r) == "STATE_CONFLICT");
    CHECK(r.body["error"]["message"] == "You are not watching anything");

    r = h.start("u1", "Okay", "2024-01-15T09:00:00Z");
    CHECK(r.status == 200);
    CHECK(r.body["session"]["Start Watch Time"] == "2024-01-15 09:00:00");
    r = h.start("u1", "Okay", "2024-01-15T09:01:00Z");
    CHECK(r.status == 409);
    CHECK(r.body["error"]["message"] == "You are already watching");

    r = h.stop("u1", "Good", "2024-01-15T09:30:00Z");
    CHECK(r.status == 200);
    CHECK(r.body["session"]["Mood Change Status"] == "Better");
    CHECK(r.body["session"]["Stop Watch Time"] == "2024-01-15 09:30:00");

    CHECK(h.svc.session_start({{"uid", "u1"}, {"mood", "good"}}).status == 400);
    CHECK(h.svc.session_start({{"uid", "u1"}}).status == 400);
}

TEST_CASE("concurrent starts for one user yield one session") {
    Harness h;
    std::atomic<int> ok{0}, conflicts{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&] {
            const auto r = h.svc.session_start({{"uid", "u1"}, {"mood", "Okay"}});
            (r.status == 200 ? ok : conflicts)++;
        });
    for (auto& t : threads) t.join();
    CHECK(ok == 1);
    CHECK(conflicts == 7);
}

TEST_CASE("handle_data builds the four-session day") {
    Harness h;
    const auto name = h.upload_fixture("u1", "takeout/four_sessions.json");
    REQUIRE(h.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", name}}).status == 200);
    h.start("u1", "Okay", "2024-01-15T09:00:00Z");
    h.stop("u1", "Good", "2024-01-15T09:30:00Z");
    h.start("u1", "Not good", "2024-01-15T12:00:00Z");
    h.stop("u1", "Okay", "2024-01-15T12:30:00Z");
    h.start("u1", "Good", "2024-01-15T19:00:00Z");
    h.stop("u1", "Good", "2024-01-15T19:45:00Z");
    h.start("u1", "Good", "2024-01-15T23:00:00Z");
    h.stop("u1", "Okay", "2024-01-15T23:40:00Z");

    auto r = h.svc.handle_data({{"uid", "u1"}, {"start", "2024-01-15"}, {"end", "2024-01-15"}});
    REQUIRE(r.status == 200);
    const auto& day = r.body["report"]["2024-01-15"];
    CHECK(day["Better"] == 2);
    CHECK(day["Same"] == 1);
    CHECK(day["Worse"] == 1);
    CHECK(day["Watch Total Number"] == 8);
    CHECK(day["Details"].size() == 4);

    r = h.svc.handle_data({{"uid", "u1"}, {"start", "2023-01-01"}, {"end", "2023-01-31"}});
    CHECK(r.status == 200);
    CHECK(r.body["report"] == json::object());
}

TEST_CASE("handle_data errors") {
    Harness h;
    h.start("u1", "Okay", "2024-01-15T09:00:00Z");
    auto r = h.svc.handle_data({{"uid", "u1"}, {"start", "2024-05-01"}, {"end", "2024-04-01"}});
    CHECK(r.status == 400);
    r = h.svc.handle_data({{"uid", "u1"}, {"start", "2024-02-30"}, {"end", "2024-04-01"}});
    CHECK(r.status == 400);
    r = h.svc.handle_data({{"uid", "u1"}, {"start", "2024-01-01"}});
    CHECK(r.status == 400);
    r = h.svc.handle_data({{"uid", "ghost"}, {"start", "2024-01-01"}, {"end", "2024-01-02"}});
    CHECK(r.status == 404);
}

TEST_CASE("upstream failures map to 502, slow reports to 504") {
    ServiceConfig remote;
    remote.backends.metadata = pipeline::MetadataMode::Remote;
    remote.backends.retries = 2;
    {
        testutil::LocalServer closed;
        closed.start();
        remote.backends.remote.base_url = closed.base_url();
    }
    remote.backends.remote.timeout_seconds = 1;
    Harness h(remote);
    h.upload_fixture("u1", "takeout/four_sessions.json");
    h.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", "four_sessions.json"}});
    h.start("u1", "Okay", "2024-01-15T09:00:00Z");
    h.stop("u1", "Good", "2024-01-15T09:30:00Z");
    auto r = h.svc.handle_data({{"uid", "u1"}, {"start", "2024-01-15"}, {"end", "2024-01-15"}});
    CHECK(r.status == 502);
    CHECK(code_of(r) == "UPSTREAM");

    ServiceConfig hurried;
    hurried.request_timeout = std::chrono::seconds(0);
    Harness slow(hurried);
    slow.upload_fixture("u1", "takeout/four_sessions.json");
    slow.svc.handle_file({{"uid", "u1"}, {"uploadOk", true}, {"fileName", "four_sessions.json"}});
    slow.start("u1", "Okay", "2024-01-15T09:00:00Z");
    slow.stop("u1", "Good", "2024-01-15T09:30:00Z");
    r = slow.svc.handle_data({{"uid", "u1"}, {"start", "2024-01-15"}, {"end", "2024-01-15"}});
    CHECK(r.status == 504);
    CHECK(code_of(r) == "UPSTREAM");
}

TEST_CASE("http routes, envelopes and CORS") {
    ServiceConfig c;
    c.allow_origin = "http://localhost:4200";
    c.max_upload_bytes = 4096;
    Harness h(c);
    testutil::LocalServer http;
    h.svc.mount(http.server);
    http.start();
    auto cli = http.client();

    auto res = cli.Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["ok"] == true);

    httplib::Headers preflight{{"Origin", "http://localhost:4200"},
                               {"Access-Control-Request-Method", "POST"},
                               {"Access-Control-Request-Headers", "content-type"}};
    res = cli.Options("/api/handle_file", preflight);
    REQUIRE(res);
    CHECK(res->status == 204);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:4200");
    CHECK(res->get_header_value("Access-Control-Allow-Credentials") == "true");
    const auto methods = res->get_header_value("Access-Control-Allow-Methods");
    CHECK(methods.find("GET") != std::string::npos);
    CHECK(methods.find("POST") != std::string::npos);
    CHECK(res->get_header_value("Access-Control-Allow-Headers") == "content-type");

    res = cli.Options("/api/handle_file", httplib::Headers{{"Origin", "http://evil.example"}});
    REQUIRE(res);
    CHECK_FALSE(res->has_header("Access-Control-Allow-Origin"));

    res = cli.Post("/api/session/stop", httplib::Headers{{"Origin", "http://localhost:4200"}},
                   R"({"uid":"u1","mood":"Good"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:4200");
    CHECK(json::parse(res->body)["error"]["message"] == "You are not watching anything");

    res = cli.Post("/api/handle_file", "{oops", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"]["code"] == "MALFORMED");

    res = cli.Get("/nowhere");
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"]["code"] == "NOT_FOUND");

    httplib::MultipartFormDataItems form{{"file", testutil::read_file(testutil::fixture("takeout/four_entries.json")),
                                          "four_entries.json", "application/json"},
                                         {"uid", "u9", "", ""}};
    res = cli.Post("/api/upload", form);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["fileName"] == "four_entries.json");
    res = cli.Post("/api/handle_file", R"({"uid":"u9","uploadOk":true,"fileName":"four_entries.json"})",
                   "application/json");
    REQUIRE(res);
    CHECK(json::parse(res->body)["ingested"] == 3);

    httplib::MultipartFormDataItems big{{"file", std::string(8192, 'x'), "big.json", "application/json"},
                                        {"uid", "u9", "", ""}};
    res = cli.Post("/api/upload", big);
    REQUIRE(res);
    CHECK(res->status == 413);

    res = cli.Post("/api/upload", "[]", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("shared token mode") {
    ServiceConfig c;
    c.shared_token = "s3cret";
    Harness h(c);
    testutil::LocalServer http;
    h.svc.mount(http.server);
    http.start();
    auto cli = http.client();
    auto res = cli.Post("/api/session/start", R"({"uid":"u1","mood":"Good"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 401);
    res = cli.Post("/api/session/start", httplib::Headers{{"Authorization", "Bearer s3cret"}},
                   R"({"uid":"u1","mood":"Good"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(cli.Get("/healthz")->status == 200);
}
