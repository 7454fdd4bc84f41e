#include "emotrack/ingest.hpp"

#include "emotrack/youtube_url.hpp"

#include <json.hpp>

#include <set>
#include <utility>

namespace emotrack::ingest {

using nlohmann::json;

namespace {

std::string string_field(const json& obj, std::size_t index, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string())
        throw MalformedDocument("entry " + std::to_string(index) + ": field '" + name + "' is not a string",
                                std::nullopt);
    return it->get<std::string>();
}

}  // namespace

std::vector<RawTakeoutEntry> parse_takeout(std::string_view content) {
    json doc;
    try {
        doc = json::parse(content.begin(), content.end());
    } catch (const json::parse_error& e) {
        throw MalformedDocument(e.what(), e.byte);
    } catch (const json::exception& e) {
        throw MalformedDocument(e.what(), std::nullopt);
    }
    if (!doc.is_array()) throw MalformedDocument("top level of a watch-history export must be an array", 0);

    std::vector<RawTakeoutEntry> entries;
    entries.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& item = doc[i];
        if (!item.is_object())
            throw MalformedDocument("entry " + std::to_string(i) + " is not an object", std::nullopt);

        auto time_it = item.find("time");
        if (time_it == item.end() || time_it->is_null()) throw MissingField(i, "time");

        RawTakeoutEntry entry;
        entry.time = string_field(item, i, "time");
        entry.header = string_field(item, i, "header");
        entry.title = string_field(item, i, "title");
        if (auto url = item.find("titleUrl"); url != item.end() && !url->is_null())
            entry.title_url = string_field(item, i, "titleUrl");

        if (auto subs = item.find("subtitles"); subs != item.end() && subs->is_array()) {
            for (const auto& s : *subs) {
                if (!s.is_object()) continue;
                entry.subtitles.push_back({string_field(s, i, "name"), string_field(s, i, "url")});
            }
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::string convert_time(std::string_view iso, std::string_view zone) {
    const Zone z = Zone::load(zone);
    return format_local(parse_instant(iso), z);
}

std::variant<WatchEvent, Skipped> to_watch_event(const RawTakeoutEntry& entry, const Zone& zone,
                                                 std::size_t index) {
    if (!entry.title_url || entry.title_url->empty()) return Skipped{index, "no url"};

    auto parts = split_url(*entry.title_url);
    if (!parts) return Skipped{index, "not an absolute http(s) url"};
    auto ref = parse_youtube_url(*entry.title_url);
    if (!ref) {
        if (parts->host != "www.youtube.com") return Skipped{index, "non-youtube host " + parts->host};
        return Skipped{index, "no video id"};
    }

    absl::Time at;
    try {
        at = parse_instant(entry.time);
    } catch (const InvalidTimestamp&) {
        return Skipped{index, "invalid time"};
    }

    WatchEvent ev;
    ev.video_id = std::move(ref->video_id);
    ev.url = *entry.title_url;
    ev.watched_at_utc = at;
    ev.watched_at_local = format_local(at, zone);
    ev.is_short = ref->is_short;
    ev.source_index = index;
    return ev;
}

void refine_short_flag(WatchEvent& event, std::optional<std::int64_t> duration_seconds) {
    if (event.is_short) return;
    if (duration_seconds && *duration_seconds < 60) event.is_short = true;
}

IngestResult ingest_takeout(std::string_view content, const Zone& zone) {
    const auto entries = parse_takeout(content);
    IngestResult result;
    std::set<std::pair<std::string, absl::Time>> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto converted = to_watch_event(entries[i], zone, i);
        if (auto* skipped = std::get_if<Skipped>(&converted)) {
            result.skipped.push_back(std::move(*skipped));
            continue;
        }
        auto& ev = std::get<WatchEvent>(converted);
        if (!seen.emplace(ev.video_id, ev.watched_at_utc).second) {
            result.skipped.push_back({i, "duplicate"});
            continue;
        }
        result.events.push_back(std::move(ev));
    }
    return result;
}

}  // namespace emotrack::ingest
