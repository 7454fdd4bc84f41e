// HTTP-backed providers: YouTube Data API metadata and chat-completion categorization.
#include "emotrack/categorize.hpp"
#include "emotrack/metadata.hpp"

#include <httplib.h>
#include <json.hpp>

namespace emotrack {

namespace {

/// Releases a semaphore slot on scope exit.
template <typename Semaphore>
class SlotGuard {
public:
    explicit SlotGuard(Semaphore& s) : s_(s) { s_.acquire(); }
    ~SlotGuard() { s_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    Semaphore& s_;
};

bool retryable_status(int status) {
    return status == 403 || status == 408 || status == 429 || status >= 500;
}

std::ptrdiff_t clamp_slots(int requested) {
    return std::clamp<std::ptrdiff_t>(requested, 1, 256);
}

}  // namespace

namespace metadata {

YouTubeDataApiProvider::YouTubeDataApiProvider(RemoteConfig config)
    : config_(std::move(config)), in_flight_(clamp_slots(config_.max_in_flight)) {}

std::string YouTubeDataApiProvider::get_json(const std::string& path_and_query) {
    SlotGuard guard(in_flight_);
    ++upstream_calls_;
    httplib::Client cli(config_.base_url);
    if (!cli.is_valid()) throw ProviderError("invalid metadata endpoint " + config_.base_url, false);
    cli.set_connection_timeout(config_.timeout_seconds);
    cli.set_read_timeout(config_.timeout_seconds);
    auto res = cli.Get(path_and_query);
    if (!res) throw ProviderError("metadata request failed: " + httplib::to_string(res.error()), true);
    if (res->status != 200)
        throw ProviderError("metadata endpoint returned HTTP " + std::to_string(res->status),
                            retryable_status(res->status), res->status);
    return res->body;
}

std::optional<std::string> YouTubeDataApiProvider::category_name(const std::string& category_id) {
    {
        std::lock_guard lock(category_mutex_);
        if (auto it = categories_.find(category_id); it != categories_.end()) return it->second;
    }
    const std::string body = get_json("/youtube/v3/videoCategories?" +
                                      httplib::detail::params_to_query_str(
                                          {{"part", "snippet"}, {"id", category_id}, {"key", config_.api_key}}));
    std::optional<std::string> name;
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& items = j.at("items");
        if (!items.empty()) name = items.at(0).at("snippet").at("title").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected videoCategories response: ") + e.what(), false);
    }
    std::lock_guard lock(category_mutex_);
    categories_[category_id] = name;
    return name;
}

std::optional<VideoMetadata> YouTubeDataApiProvider::fetch(const std::string& video_id) {
    const std::string part = config_.fetch_duration ? "snippet,contentDetails" : "snippet";
    const std::string body = get_json("/youtube/v3/videos?" +
                                      httplib::detail::params_to_query_str(
                                          {{"part", part}, {"id", video_id}, {"key", config_.api_key}}));
    VideoMetadata meta;
    meta.video_id = video_id;
    std::string category_id;
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& items = j.at("items");
        if (items.empty()) return std::nullopt;
        const auto& snippet = items.at(0).at("snippet");
        meta.title = snippet.at("title").get<std::string>();
        meta.description = snippet.value("description", std::string());
        category_id = snippet.value("categoryId", std::string());
        if (auto cd = items.at(0).find("contentDetails"); cd != items.at(0).end() && cd->contains("duration"))
            meta.duration_seconds = parse_iso_duration(cd->at("duration").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected videos response: ") + e.what(), false);
    }
    if (!category_id.empty()) meta.native_category = category_name(category_id);
    return meta;
}

}  // namespace metadata

namespace categorize {

ChatCompletionCategorizer::ChatCompletionCategorizer(ChatConfig config)
    : config_(std::move(config)), in_flight_(clamp_slots(config_.max_in_flight)) {}

std::string ChatCompletionCategorizer::raw_label(const std::string& title, const std::string& description) {
    nlohmann::json request = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", build_prompt(title, description)}}})},
    };

    SlotGuard guard(in_flight_);
    ++requests_;
    httplib::Client cli(config_.base_url);
    if (!cli.is_valid()) throw CategorizerError("invalid categorizer endpoint " + config_.base_url, false);
    cli.set_connection_timeout(config_.timeout_seconds);
    cli.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = cli.Post(config_.path, headers, request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                        "application/json");
    if (!res) throw CategorizerError("categorizer request failed: " + httplib::to_string(res.error()), true);
    if (res->status != 200)
        throw CategorizerError("categorizer returned HTTP " + std::to_string(res->status),
                               res->status == 429 || res->status >= 500);
    try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw CategorizerError(std::string("unexpected chat-completion response: ") + e.what(), false);
    }
}

}  // namespace categorize

}  // namespace emotrack
