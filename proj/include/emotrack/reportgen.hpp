#pragma once

#include "emotrack/categorize.hpp"
#include "emotrack/ingest.hpp"
#include "emotrack/session.hpp"
#include "emotrack/store.hpp"
#include "emotrack/timeconv.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emotrack::report {

class InvalidRange : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inclusive on both ends.
struct TimeRange {
    Date start;
    Date end;
    bool contains(Date d) const noexcept { return start <= d && d <= end; }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

enum class Preset { LastWeek, LastMonth, LastThreeMonths, LastHalfYear };

/// CLI words: lastweek, lastmonth, last3months, halfyear.
std::optional<Preset> preset_from_word(std::string_view word);

/// Days covered by a preset, today included: 7, 30, 90, 182.
int preset_days(Preset preset);

TimeRange resolve_range(Preset preset, Date today);
/// Throws InvalidRange when start > end.
TimeRange resolve_range(Date start, Date end);

struct SessionDetail {
    std::string session_id;
    session::ChangeStatus status = session::ChangeStatus::Same;
    std::int64_t video_count = 0;
    std::map<std::string, std::int64_t> category_counts;
    friend bool operator==(const SessionDetail&, const SessionDetail&) = default;
};

struct DailySummary {
    Date date;
    std::int64_t better = 0;
    std::int64_t same = 0;
    std::int64_t worse = 0;
    std::int64_t total_videos = 0;
    friend bool operator==(const DailySummary&, const DailySummary&) = default;
};

struct DayReport {
    DailySummary summary;
    std::vector<SessionDetail> details;
    friend bool operator==(const DayReport&, const DayReport&) = default;
};

using Report = std::map<Date, DayReport>;

/// Category for one watched video.
using Classifier = std::function<categorize::CategoryLabel(const ingest::WatchEvent&)>;

/// Events whose local time lies in [start, stop], input order kept.
/// Requires a complete session.
std::vector<ingest::WatchEvent> videos_in_session(const session::MoodSession& s,
                                                  std::span<const ingest::WatchEvent> events);

SessionDetail build_detail(const session::MoodSession& s, std::span<const ingest::WatchEvent> events,
                           const Classifier& classify);

DailySummary build_summary(Date date, std::span<const SessionDetail> details);

/// Completed, non-abandoned sessions starting inside `range`, grouped by start
/// date. Dates without such sessions are absent.
Report build_report(const TimeRange& range, std::span<const ingest::WatchEvent> events,
                    std::span<const session::MoodSession> sessions, const Classifier& classify);

/// Writes each date's Summary and Details documents under `Users/{uid}/Analysis Report`.
void write_report(store::DocumentStore& db, const std::string& uid, const Report& report);

/// Export shape: one object per date with "Better", "Same", "Worse",
/// "Watch Total Number" and a "Details" list.
nlohmann::ordered_json to_json(const Report& report);

/// Fixed-width text rendering.
std::string to_table(const Report& report);

// Field names in the Analysis Report documents.
inline constexpr const char* kBetter = "Better";
inline constexpr const char* kSame = "Same";
inline constexpr const char* kWorse = "Worse";
inline constexpr const char* kWatchTotal = "Watch Total Number";
inline constexpr const char* kVideoCount = "Number of watched videos";
inline constexpr const char* kVideoCategory = "Video Category";

}  // namespace emotrack::report
