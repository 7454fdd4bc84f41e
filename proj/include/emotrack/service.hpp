#pragma once

#include "emotrack/pipeline.hpp"
#include "emotrack/session.hpp"
#include "emotrack/store.hpp"
#include "emotrack/timeconv.hpp"

#include <json.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace emotrack::service {

/// Closed set of error codes carried in `{"ok":false,"error":{"code","message"}}`.
enum class ErrorCode { Malformed, NotFound, StateConflict, Upstream, Internal };
std::string_view to_string(ErrorCode code);

struct Response {
    int status = 200;
    nlohmann::ordered_json body;
};

Response ok(nlohmann::ordered_json payload = nlohmann::ordered_json::object());
Response error(int status, ErrorCode code, std::string_view message);

struct ServiceConfig {
    std::filesystem::path data_dir;
    std::string zone = std::string(kDefaultZone);
    std::string allow_origin;  // empty: no CORS headers
    pipeline::BackendConfig backends;
    std::size_t max_upload_bytes = 64u << 20;
    std::chrono::seconds request_timeout{120};
    std::optional<std::string> shared_token;  // when set, /api/* requires `Authorization: Bearer <token>`
};

using Clock = std::function<absl::Time()>;

/// Request handlers over JSON bodies, independent of the transport, plus
/// route registration on a cpp-httplib server.
class Service {
public:
    explicit Service(ServiceConfig config, Clock clock = [] { return absl::Now(); });
    ~Service();

    Response handle_file(const nlohmann::json& body);
    Response handle_data(const nlohmann::json& body);
    Response session_start(const nlohmann::json& body);
    Response session_stop(const nlohmann::json& body);
    Response upload(const std::string& uid, const std::string& file_name, std::string_view content);

    /// Registers routes, CORS handling, error and exception handlers.
    void mount(httplib::Server& server);

    store::DocumentStore& store() noexcept { return db_; }
    const ServiceConfig& config() const noexcept { return config_; }
    std::filesystem::path upload_dir(const std::string& uid) const;

private:
    Response session_transition(const nlohmann::json& body, bool starting);
    std::mutex& user_mutex(const std::string& uid);

    ServiceConfig config_;
    Clock clock_;
    Zone zone_;
    store::DocumentStore db_;
    session::SessionRecorder sessions_;
    pipeline::Backends backends_;
    std::mutex users_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> user_mutexes_;
};

/// Binds `host:port` (0 picks a free port) and serves until SIGINT or SIGTERM.
/// Returns 0 after a clean shutdown, 2 when the port cannot be bound.
int serve_forever(Service& service, const std::string& host, int port, std::ostream& log);

}  // namespace emotrack::service
