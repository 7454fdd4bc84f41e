#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace emotrack {

struct UrlParts {
    std::string scheme;
    std::string host;
    std::string path;
    std::string query;
};

/// Splits an absolute http(s) URL. Returns nullopt for anything else.
std::optional<UrlParts> split_url(std::string_view url);

/// Value of `key` in an `a=1&b=2` query string, percent-decoded.
std::optional<std::string> query_param(std::string_view query, std::string_view key);

/// True when `id` is a non-empty `[0-9A-Za-z_-]+` token.
bool is_valid_video_id(std::string_view id);

struct YouTubeVideoRef {
    std::string video_id;
    bool is_short = false;
};

/// Recognizes `https://www.youtube.com/watch?v=<id>` and `https://www.youtube.com/shorts/<id>`.
std::optional<YouTubeVideoRef> parse_youtube_url(std::string_view url);

}  // namespace emotrack
