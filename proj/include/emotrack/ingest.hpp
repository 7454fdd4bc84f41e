#pragma once

#include "emotrack/timeconv.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace emotrack::ingest {

/// The top level is not an array, or the bytes are not JSON at all.
class MalformedDocument : public std::runtime_error {
public:
    MalformedDocument(const std::string& what, std::optional<std::size_t> byte_offset)
        : std::runtime_error(what), byte_offset_(byte_offset) {}
    std::optional<std::size_t> byte_offset() const noexcept { return byte_offset_; }

private:
    std::optional<std::size_t> byte_offset_;
};

class MissingField : public std::runtime_error {
public:
    MissingField(std::size_t index, std::string field)
        : std::runtime_error("entry " + std::to_string(index) + " is missing field '" + field + "'"),
          index_(index), field_(std::move(field)) {}
    std::size_t index() const noexcept { return index_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t index_;
    std::string field_;
};

struct Subtitle {
    std::string name;
    std::string url;
    friend bool operator==(const Subtitle&, const Subtitle&) = default;
};

/// One element of a Takeout `watch-history.json` array.
struct RawTakeoutEntry {
    std::string header;
    std::string title;
    std::optional<std::string> title_url;  // absent for removed videos
    std::string time;
    std::vector<Subtitle> subtitles;
    friend bool operator==(const RawTakeoutEntry&, const RawTakeoutEntry&) = default;
};

struct WatchEvent {
    std::string video_id;
    std::string url;
    absl::Time watched_at_utc;
    std::string watched_at_local;  // "YYYY-MM-DD HH:MM:SS" in the configured zone
    bool is_short = false;
    std::size_t source_index = 0;
    friend bool operator==(const WatchEvent&, const WatchEvent&) = default;
};

struct Skipped {
    std::size_t source_index = 0;
    std::string reason;
    friend bool operator==(const Skipped&, const Skipped&) = default;
};

/// Parses the export. Entries are returned in file order; entries without
/// `titleUrl` are kept (removed videos) and skipped later.
std::vector<RawTakeoutEntry> parse_takeout(std::string_view content);

/// ISO 8601 instant -> "YYYY-MM-DD HH:MM:SS" wall clock in `zone`.
/// Throws InvalidTimestamp or UnknownZone.
std::string convert_time(std::string_view iso, std::string_view zone = kDefaultZone);

std::variant<WatchEvent, Skipped> to_watch_event(const RawTakeoutEntry& entry, const Zone& zone,
                                                 std::size_t index);

/// Applies the duration fallback for Shorts: a `/shorts/` URL always wins,
/// otherwise a known duration under 60 s marks the event short.
void refine_short_flag(WatchEvent& event, std::optional<std::int64_t> duration_seconds);

struct IngestResult {
    std::vector<WatchEvent> events;
    std::vector<Skipped> skipped;
};

/// parse_takeout + to_watch_event over the whole export. Repeated
/// (videoId, instant) pairs keep the first occurrence; later ones are
/// reported as skipped duplicates.
IngestResult ingest_takeout(std::string_view content, const Zone& zone);

}  // namespace emotrack::ingest
