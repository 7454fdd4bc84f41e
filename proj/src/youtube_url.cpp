#include "emotrack/youtube_url.hpp"

#include <algorithm>
#include <cctype>

namespace emotrack {

namespace {

constexpr std::string_view kWatchHost = "www.youtube.com";
constexpr std::string_view kShortsPrefix = "/shorts/";

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

int hex(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 && hex(s[i + 2]) >= 0) {
            out += static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2]));
            i += 2;
        } else if (s[i] == '+') {
            out += ' ';
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

std::optional<UrlParts> split_url(std::string_view url) {
    const auto sep = url.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    UrlParts parts;
    parts.scheme = lower(url.substr(0, sep));
    if (parts.scheme != "http" && parts.scheme != "https") return std::nullopt;

    std::string_view rest = url.substr(sep + 3);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    const auto host_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, host_end);
    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
    if (auto colon = authority.find(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
    if (authority.empty()) return std::nullopt;
    parts.host = lower(authority);

    if (host_end == std::string_view::npos) return parts;
    std::string_view tail = rest.substr(host_end);
    const auto q = tail.find('?');
    parts.path = std::string(tail.substr(0, q));
    if (q != std::string_view::npos) parts.query = std::string(tail.substr(q + 1));
    return parts;
}

std::optional<std::string> query_param(std::string_view query, std::string_view key) {
    while (!query.empty()) {
        const auto amp = query.find('&');
        std::string_view pair = query.substr(0, amp);
        const auto eq = pair.find('=');
        if (eq != std::string_view::npos && percent_decode(pair.substr(0, eq)) == key)
            return percent_decode(pair.substr(eq + 1));
        if (amp == std::string_view::npos) break;
        query = query.substr(amp + 1);
    }
    return std::nullopt;
}

bool is_valid_video_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-';
    });
}

std::optional<YouTubeVideoRef> parse_youtube_url(std::string_view url) {
    auto parts = split_url(url);
    if (!parts || parts->host != kWatchHost) return std::nullopt;

    if (parts->path.rfind(kShortsPrefix, 0) == 0) {
        std::string id = parts->path.substr(kShortsPrefix.size());
        if (auto slash = id.find('/'); slash != std::string::npos) id.resize(slash);
        if (!is_valid_video_id(id)) return std::nullopt;
        return YouTubeVideoRef{std::move(id), true};
    }

    auto v = query_param(parts->query, "v");
    if (!v || !is_valid_video_id(*v)) return std::nullopt;
    return YouTubeVideoRef{std::move(*v), false};
}

}  // namespace emotrack
