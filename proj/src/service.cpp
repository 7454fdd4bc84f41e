#include "emotrack/service.hpp"

#include "emotrack/layout.hpp"
#include "emotrack/reportgen.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <pthread.h>

#include <csignal>
#include <fstream>
#include <ostream>
#include <thread>
#include <sstream>

namespace emotrack::service {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class DeadlineExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validated `uid` of a request body, or nullopt.
std::optional<std::string> body_uid(const json& body) {
    if (!body.is_object()) return std::nullopt;
    auto it = body.find("uid");
    if (it == body.end() || !it->is_string()) return std::nullopt;
    std::string uid = it->get<std::string>();
    if (uid.empty() || uid.size() > 256 || uid == "." || uid == ".." ||
        uid.find_first_of("/\\") != std::string::npos || uid.find('\0') != std::string::npos)
        return std::nullopt;
    return uid;
}

std::optional<std::string> string_member(const json& body, const char* name) {
    auto it = body.find(name);
    if (it == body.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

/// Strips directories from a client-supplied file name.
std::optional<std::string> safe_file_name(std::string_view name) {
    const auto slash = name.find_last_of("/\\");
    if (slash != std::string_view::npos) name = name.substr(slash + 1);
    if (name.empty() || name == "." || name == ".." || name.size() > 255 ||
        name.find('\0') != std::string_view::npos)
        return std::nullopt;
    return std::string(name);
}

void write_http(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Malformed: return "MALFORMED";
        case ErrorCode::NotFound: return "NOT_FOUND";
        case ErrorCode::StateConflict: return "STATE_CONFLICT";
        case ErrorCode::Upstream: return "UPSTREAM";
        case ErrorCode::Internal: return "INTERNAL";
    }
    return "INTERNAL";
}

Response ok(ordered_json payload) {
    ordered_json body;
    body["ok"] = true;
    for (auto& [k, v] : payload.items()) body[k] = v;
    return {200, std::move(body)};
}

Response error(int status, ErrorCode code, std::string_view message) {
    ordered_json body;
    body["ok"] = false;
    body["error"] = {{"code", to_string(code)}, {"message", message}};
    return {status, std::move(body)};
}

Service::Service(ServiceConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      zone_(Zone::load(config_.zone)),
      db_(config_.data_dir),
      sessions_(db_, zone_),
      backends_(config_.backends) {}

Service::~Service() = default;

std::mutex& Service::user_mutex(const std::string& uid) {
    std::lock_guard guard(users_mutex_);
    auto& slot = user_mutexes_[uid];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

fs::path Service::upload_dir(const std::string& uid) const {
    return config_.data_dir / "uploads" / store::encode_segment(uid);
}

Response Service::upload(const std::string& uid, const std::string& file_name, std::string_view content) {
    if (uid.empty() || uid.find_first_of("/\\") != std::string::npos)
        return error(400, ErrorCode::Malformed, "missing or invalid uid");
    auto name = safe_file_name(file_name);
    if (!name) return error(400, ErrorCode::Malformed, "missing or invalid file name");
    if (content.size() > config_.max_upload_bytes)
        return error(413, ErrorCode::Malformed, "upload exceeds the size limit");

    std::lock_guard guard(user_mutex(uid));
    const fs::path dir = upload_dir(uid);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return error(500, ErrorCode::Internal, "cannot create upload area");

    const fs::path requested(*name);
    fs::path target = dir / requested;
    for (int n = 1; fs::exists(target); ++n)
        target = dir / (requested.stem().string() + "-" + std::to_string(n) + requested.extension().string());

    std::ofstream out(target, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) return error(500, ErrorCode::Internal, "cannot store upload");
    layout::ensure_user(db_, uid);
    return ok({{"fileName", target.filename().string()}});
}

Response Service::handle_file(const json& body) {
    auto uid = body_uid(body);
    if (!uid) return error(400, ErrorCode::Malformed, "missing or invalid uid");
    auto upload_ok = body.find("uploadOk");
    if (upload_ok == body.end() || !upload_ok->is_boolean())
        return error(400, ErrorCode::Malformed, "uploadOk must be a boolean");
    if (!upload_ok->get<bool>()) return ok({{"ingested", 0}, {"skipped", 0}});

    auto file_name = string_member(body, "fileName");
    if (!file_name) return error(400, ErrorCode::Malformed, "fileName is required when uploadOk is true");
    auto name = safe_file_name(*file_name);
    if (!name) return error(400, ErrorCode::Malformed, "invalid fileName");

    std::lock_guard guard(user_mutex(*uid));
    if (!layout::user_exists(db_, *uid)) return error(404, ErrorCode::NotFound, "unknown uid");
    const fs::path file = upload_dir(*uid) / *name;
    std::ifstream in(file, std::ios::binary);
    if (!in) return error(404, ErrorCode::NotFound, "no uploaded file named " + *name);
    std::ostringstream buf;
    buf << in.rdbuf();

    try {
        const auto counts = pipeline::ingest_history(db_, *uid, buf.str(), zone_);
        return ok({{"ingested", counts.ingested}, {"skipped", counts.skipped}});
    } catch (const ingest::MalformedDocument& e) {
        return error(400, ErrorCode::Malformed, e.what());
    } catch (const ingest::MissingField& e) {
        return error(400, ErrorCode::Malformed, e.what());
    }
}

Response Service::handle_data(const json& body) {
    auto uid = body_uid(body);
    if (!uid) return error(400, ErrorCode::Malformed, "missing or invalid uid");
    auto start_text = string_member(body, "start");
    auto end_text = string_member(body, "end");
    auto start = start_text ? parse_date(*start_text) : std::nullopt;
    auto end = end_text ? parse_date(*end_text) : std::nullopt;
    if (!start || !end) return error(400, ErrorCode::Malformed, "start and end must be YYYY-MM-DD dates");
    if (*start > *end) return error(400, ErrorCode::Malformed, "start is after end");

    std::lock_guard guard(user_mutex(*uid));
    if (!layout::user_exists(db_, *uid)) return error(404, ErrorCode::NotFound, "unknown uid");

    const auto deadline = absl::Now() + absl::FromChrono(config_.request_timeout);
    pipeline::RunClassifier classify(backends_.provider(), backends_.categorizer(), backends_.retries());
    try {
        const auto range = report::resolve_range(*start, *end);
        const auto events = pipeline::load_events(db_, *uid, zone_);
        const auto records = pipeline::load_sessions(db_, *uid);
        auto result = report::build_report(range, events, records, [&](const ingest::WatchEvent& ev) {
            if (absl::Now() > deadline) throw DeadlineExceeded("report generation exceeded the request timeout");
            return classify(ev);
        });
        report::write_report(db_, *uid, result);
        return ok({{"report", report::to_json(result)}});
    } catch (const metadata::ProviderError& e) {
        return error(502, ErrorCode::Upstream, std::string("metadata provider failed: ") + e.what());
    } catch (const categorize::CategorizerError& e) {
        return error(502, ErrorCode::Upstream, std::string("categorizer failed: ") + e.what());
    } catch (const DeadlineExceeded& e) {
        return error(504, ErrorCode::Upstream, e.what());
    }
}

Response Service::session_transition(const json& body, bool starting) {
    auto uid = body_uid(body);
    if (!uid) return error(400, ErrorCode::Malformed, "missing or invalid uid");
    auto mood_text = string_member(body, "mood");
    auto mood = mood_text ? session::mood_from_wire(*mood_text) : std::nullopt;
    if (!mood) return error(400, ErrorCode::Malformed, "mood must be one of \"Good\", \"Okay\", \"Not good\"");
    try {
        const auto s = starting ? sessions_.start(*uid, *mood, clock_()) : sessions_.stop(*uid, *mood, clock_());
        return ok({{"session", session::to_json(s)}});
    } catch (const session::SessionError& e) {
        return error(409, ErrorCode::StateConflict, e.what());
    }
}

Response Service::session_start(const json& body) { return session_transition(body, true); }
Response Service::session_stop(const json& body) { return session_transition(body, false); }

void Service::mount(httplib::Server& server) {
    server.set_payload_max_length(config_.max_upload_bytes);

    const std::string origin = config_.allow_origin;
    server.set_post_routing_handler([origin](const httplib::Request& req, httplib::Response& res) {
        const std::string requested = req.get_header_value("Origin");
        if (origin.empty() || requested.empty()) return;
        if (origin != "*" && requested != origin) return;
        res.set_header("Access-Control-Allow-Origin", requested);
        res.set_header("Access-Control-Allow-Credentials", "true");
        res.set_header("Vary", "Origin");
    });

    server.Options(".*", [](const httplib::Request& req, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        const std::string headers = req.get_header_value("Access-Control-Request-Headers");
        res.set_header("Access-Control-Allow-Headers", headers.empty() ? "Content-Type, Authorization" : headers);
        res.set_header("Access-Control-Max-Age", "600");
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        ErrorCode code = ErrorCode::Internal;
        std::string message = httplib::status_message(res.status);
        if (res.status == 404) code = ErrorCode::NotFound;
        else if (res.status == 413 || (res.status >= 400 && res.status < 500)) code = ErrorCode::Malformed;
        write_http(res, error(res.status, code, message));
        return httplib::Server::HandlerResponse::Handled;
    });

    server.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
        try {
            if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
        } catch (...) {
            spdlog::error("{} {} failed with a non-standard exception", req.method, req.path);
        }
        write_http(res, error(500, ErrorCode::Internal, "internal error"));
    });

    const auto token = config_.shared_token;
    auto authorized = [token](const httplib::Request& req) {
        return !token || req.get_header_value("Authorization") == "Bearer " + *token;
    };

    auto json_route = [this, authorized](Response (Service::*handler)(const json&)) {
        return [this, authorized, handler](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req)) return write_http(res, error(401, ErrorCode::Malformed, "missing or invalid token"));
            auto body = parse_body(req);
            if (!body || !body->is_object())
                return write_http(res, error(400, ErrorCode::Malformed, "request body must be a JSON object"));
            write_http(res, (this->*handler)(*body));
        };
    };

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        write_http(res, ok({{"status", "up"}}));
    });
    server.Post("/api/handle_file", json_route(&Service::handle_file));
    server.Post("/api/handle_data", json_route(&Service::handle_data));
    server.Post("/api/session/start", json_route(&Service::session_start));
    server.Post("/api/session/stop", json_route(&Service::session_stop));
    server.Post("/api/upload", [this, authorized](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req)) return write_http(res, error(401, ErrorCode::Malformed, "missing or invalid token"));
        if (!req.is_multipart_form_data() || !req.has_file("file"))
            return write_http(res, error(400, ErrorCode::Malformed, "expected multipart/form-data with a 'file' part"));
        const auto file = req.get_file_value("file");
        std::string uid = req.has_file("uid") ? req.get_file_value("uid").content : req.get_param_value("uid");
        write_http(res, upload(uid, file.filename, file.content));
    });
}

}  // namespace emotrack::service

namespace emotrack::service {

int serve_forever(Service& service, const std::string& host, int port, std::ostream& log) {
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    sigaddset(&stop_signals, SIGUSR1);
    sigset_t previous;
    // worker threads inherit the mask, so only the watcher sees these signals
    pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);

    httplib::Server server;
    service.mount(server);
    // no SO_REUSEPORT, so a port already in use fails to bind
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) {
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
        log << "cannot bind " << host << ":" << port << "\n";
        return 2;
    }

    std::thread watcher([&server, &stop_signals] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        server.stop();
    });

    log << "listening on " << host << ":" << bound << std::endl;
    server.listen_after_bind();
    pthread_kill(watcher.native_handle(), SIGUSR1);
    watcher.join();

    // drain a wake-up signal that may still be pending
    timespec zero{0, 0};
    while (sigtimedwait(&stop_signals, nullptr, &zero) > 0) {
    }
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    log << "shut down" << std::endl;
    return 0;
}

}  // namespace emotrack::service
