#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emotrack::metadata {

/// Title, description and uploader-selected category for one video.
/// Availability is all-or-nothing: no title means no description or category.
struct VideoMetadata {
    std::string video_id;
    std::optional<std::string> title;
    std::optional<std::string> description;
    std::optional<std::string> native_category;
    std::optional<std::int64_t> duration_seconds;
    friend bool operator==(const VideoMetadata&, const VideoMetadata&) = default;
};

/// Network, quota or protocol failure. Distinct from "no such video",
/// which providers report as an empty optional.
class ProviderError : public std::runtime_error {
public:
    ProviderError(const std::string& what, bool retryable, int http_status = 0)
        : std::runtime_error(what), retryable_(retryable), http_status_(http_status) {}
    bool retryable() const noexcept { return retryable_; }
    int http_status() const noexcept { return http_status_; }

private:
    bool retryable_;
    int http_status_;
};

class MetadataProvider {
public:
    virtual ~MetadataProvider() = default;
    /// nullopt means Unavailable (deleted, private, never existed).
    virtual std::optional<VideoMetadata> fetch(const std::string& video_id) = 0;
};

/// `v` parameter of a www.youtube.com watch URL, or the id of a /shorts/ URL.
std::optional<std::string> extract_video_id(std::string_view url);

/// Validates the id, queries the provider and normalizes partial records to Unavailable.
std::optional<VideoMetadata> fetch_metadata(MetadataProvider& provider, const std::string& video_id);

/// Local table, one record per line:
/// `videoId<TAB>title<TAB>description<TAB>nativeCategory<TAB>durationSeconds`.
/// Trailing columns may be omitted; `\t`, `\n` and `\\` are unescaped. A line
/// holding only an id marks the video as known-unavailable.
class FixtureProvider : public MetadataProvider {
public:
    FixtureProvider() = default;
    static FixtureProvider from_stream(std::istream& in);
    static FixtureProvider from_file(const std::filesystem::path& path);

    void add(VideoMetadata meta);
    std::optional<VideoMetadata> fetch(const std::string& video_id) override;
    std::size_t size() const noexcept { return records_.size(); }

private:
    std::map<std::string, VideoMetadata> records_;
};

struct RemoteConfig {
    std::string base_url = "https://www.googleapis.com";
    std::string api_key;
    int max_in_flight = 4;
    bool fetch_duration = false;  // adds contentDetails to the request
    int timeout_seconds = 30;
};

/// Speaks the YouTube Data API v3: `videos.list?part=snippet` then
/// `videoCategories.list` to turn the categoryId into a name. Category names
/// are cached per instance.
class YouTubeDataApiProvider : public MetadataProvider {
public:
    explicit YouTubeDataApiProvider(RemoteConfig config);
    std::optional<VideoMetadata> fetch(const std::string& video_id) override;

    std::size_t upstream_calls() const noexcept { return upstream_calls_; }

private:
    std::string get_json(const std::string& path_and_query);
    std::optional<std::string> category_name(const std::string& category_id);

    RemoteConfig config_;
    std::counting_semaphore<256> in_flight_;
    std::mutex category_mutex_;
    std::map<std::string, std::optional<std::string>> categories_;
    std::atomic<std::size_t> upstream_calls_{0};
};

/// Per-run memo in front of another provider. Each id reaches the upstream at
/// most once, including under concurrent callers. Errors are not cached.
class CachingProvider : public MetadataProvider {
public:
    explicit CachingProvider(MetadataProvider& upstream) : upstream_(upstream) {}
    std::optional<VideoMetadata> fetch(const std::string& video_id) override;

private:
    struct Slot {
        std::mutex m;
        bool done = false;
        std::optional<VideoMetadata> value;
    };
    MetadataProvider& upstream_;
    std::mutex slots_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

/// Seconds in an ISO 8601 duration such as `PT1H2M3S` or `P1DT2H`.
std::optional<std::int64_t> parse_iso_duration(std::string_view text);

}  // namespace emotrack::metadata
