#pragma once

#include "emotrack/ingest.hpp"
#include "emotrack/reportgen.hpp"
#include "emotrack/session.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emotrack::analytics {

class EmptyInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidResponse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FrequencyClass { EveryDay, SeveralTimesAWeek, EveryWeek };
std::string_view to_string(FrequencyClass c);

/// Days watched in one week -> class. >=5 every day, <=2 every week, 3-4 in between.
/// Throws std::out_of_range outside 0..7.
FrequencyClass frequency_class(int days_watched);

enum class Period { Night, Morning, Afternoon, Evening };
std::string_view to_string(Period p);

/// Night [00,06), Morning [06,12), Afternoon [12,18), Evening [18,24) by local hour.
Period period_of(std::string_view local_stamp);

/// All four periods are present as keys.
std::map<Period, std::int64_t> period_histogram(std::span<const ingest::WatchEvent> events);

struct ShortLongSplit {
    std::int64_t short_count = 0;
    std::int64_t long_count = 0;
    friend bool operator==(const ShortLongSplit&, const ShortLongSplit&) = default;
};

ShortLongSplit long_short_split(std::span<const ingest::WatchEvent> events);

/// Fractions of Better/Same/Worse over completed sessions. Throws EmptyInput.
std::map<session::ChangeStatus, double> mood_change_distribution(std::span<const session::MoodSession> sessions);

/// Fractions of each starting mood over completed sessions. Throws EmptyInput.
std::map<session::Mood, double> start_mood_distribution(std::span<const session::MoodSession> sessions);

/// Ten answers in questionnaire order, each 1..5.
using SusResponse = std::array<int, 10>;

struct SusResult {
    std::vector<double> per_respondent;
    double mean = 0.0;
};

/// Odd items contribute (answer - 1), even items (5 - answer); the sum is
/// scaled by 2.5 onto [0, 100]. Throws InvalidResponse.
SusResult sus_score(std::span<const SusResponse> responses);

/// One respondent per row, ten integer columns, optional header row.
/// Throws InvalidResponse naming the offending line.
std::vector<SusResponse> parse_sus_csv(std::string_view text);

enum class UsageLevel { Light, Moderate, Heavy };
std::string_view to_string(UsageLevel level);

/// Light < 60 min/day, Moderate [60, 180], Heavy > 180.
UsageLevel usage_level(double minutes_per_day);

/// Total completed-session minutes divided by the number of distinct start dates.
/// nullopt without completed sessions.
std::optional<double> daily_watch_minutes(std::span<const session::MoodSession> sessions);

struct UsageStats {
    int days_watched = 0;
    std::optional<FrequencyClass> frequency;  // only for ranges of at most seven days
    std::map<Period, std::int64_t> period_histogram;
    ShortLongSplit split;
    std::optional<double> minutes_per_day;
    std::optional<UsageLevel> usage;
    std::map<session::ChangeStatus, double> mood_change;  // empty without completed sessions
    std::map<session::Mood, double> start_mood;
    std::int64_t total_events = 0;
    std::int64_t completed_sessions = 0;
};

/// Events are selected by local date, sessions by start date, both within `range`.
UsageStats compute_usage(const report::TimeRange& range, std::span<const ingest::WatchEvent> events,
                         std::span<const session::MoodSession> sessions);

nlohmann::ordered_json to_json(const UsageStats& stats);
std::string to_table(const UsageStats& stats);

}  // namespace emotrack::analytics
