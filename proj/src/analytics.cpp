#include "emotrack/analytics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>
#include <sstream>

namespace emotrack::analytics {

using session::ChangeStatus;
using session::Mood;
using session::MoodSession;

std::string_view to_string(FrequencyClass c) {
    switch (c) {
        case FrequencyClass::EveryDay: return "Every Day";
        case FrequencyClass::SeveralTimesAWeek: return "Several Times a Week";
        case FrequencyClass::EveryWeek: return "Every Week";
    }
    return "";
}

FrequencyClass frequency_class(int days_watched) {
    if (days_watched < 0 || days_watched > 7)
        throw std::out_of_range("days watched must be within 0..7, got " + std::to_string(days_watched));
    if (days_watched >= 5) return FrequencyClass::EveryDay;
    if (days_watched <= 2) return FrequencyClass::EveryWeek;
    return FrequencyClass::SeveralTimesAWeek;
}

std::string_view to_string(Period p) {
    switch (p) {
        case Period::Night: return "Night";
        case Period::Morning: return "Morning";
        case Period::Afternoon: return "Afternoon";
        case Period::Evening: return "Evening";
    }
    return "";
}

Period period_of(std::string_view local_stamp) {
    auto cs = parse_local_stamp(local_stamp);
    if (!cs) throw InvalidTimestamp("invalid local timestamp: " + std::string(local_stamp));
    const int hour = cs->hour();
    if (hour < 6) return Period::Night;
    if (hour < 12) return Period::Morning;
    if (hour < 18) return Period::Afternoon;
    return Period::Evening;
}

std::map<Period, std::int64_t> period_histogram(std::span<const ingest::WatchEvent> events) {
    std::map<Period, std::int64_t> hist{
        {Period::Night, 0}, {Period::Morning, 0}, {Period::Afternoon, 0}, {Period::Evening, 0}};
    for (const auto& ev : events) ++hist[period_of(ev.watched_at_local)];
    return hist;
}

ShortLongSplit long_short_split(std::span<const ingest::WatchEvent> events) {
    ShortLongSplit split;
    for (const auto& ev : events) (ev.is_short ? split.short_count : split.long_count)++;
    return split;
}

std::map<ChangeStatus, double> mood_change_distribution(std::span<const MoodSession> sessions) {
    std::map<ChangeStatus, double> counts{{ChangeStatus::Better, 0}, {ChangeStatus::Same, 0}, {ChangeStatus::Worse, 0}};
    std::int64_t n = 0;
    for (const auto& s : sessions) {
        if (!s.complete()) continue;
        counts[*s.status] += 1;
        ++n;
    }
    if (n == 0) throw EmptyInput("mood change distribution needs at least one completed session");
    for (auto& [status, c] : counts) c /= static_cast<double>(n);
    return counts;
}

std::map<Mood, double> start_mood_distribution(std::span<const MoodSession> sessions) {
    std::map<Mood, double> counts{{Mood::Good, 0}, {Mood::Okay, 0}, {Mood::NotGood, 0}};
    std::int64_t n = 0;
    for (const auto& s : sessions) {
        if (!s.complete()) continue;
        counts[s.before] += 1;
        ++n;
    }
    if (n == 0) throw EmptyInput("start mood distribution needs at least one completed session");
    for (auto& [mood, c] : counts) c /= static_cast<double>(n);
    return counts;
}

SusResult sus_score(std::span<const SusResponse> responses) {
    if (responses.empty()) throw InvalidResponse("no SUS responses");
    SusResult result;
    double sum = 0.0;
    for (std::size_t r = 0; r < responses.size(); ++r) {
        int contribution = 0;
        for (std::size_t item = 0; item < 10; ++item) {
            const int answer = responses[r][item];
            if (answer < 1 || answer > 5)
                throw InvalidResponse(fmt::format("respondent {} item {}: answer {} outside 1..5", r + 1,
                                                  item + 1, answer));
            // item numbers are 1-based: index 0 is item 1 (odd)
            contribution += (item % 2 == 0) ? answer - 1 : 5 - answer;
        }
        const double score = contribution * 2.5;
        result.per_respondent.push_back(score);
        sum += score;
    }
    result.mean = sum / static_cast<double>(responses.size());
    return result;
}

std::vector<SusResponse> parse_sus_csv(std::string_view text) {
    std::vector<SusResponse> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        std::vector<std::string> cells;
        std::string cell;
        std::istringstream cells_in(line);
        while (std::getline(cells_in, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();

        auto parse_cell = [](std::string c) -> std::optional<int> {
            const auto b = c.find_first_not_of(" \t\"");
            const auto e = c.find_last_not_of(" \t\"");
            if (b == std::string::npos) return std::nullopt;
            c = c.substr(b, e - b + 1);
            if (c.empty() || c.find_first_not_of("0123456789") != std::string::npos || c.size() > 3)
                return std::nullopt;
            return std::stoi(c);
        };

        std::vector<std::optional<int>> values;
        for (auto& c : cells) values.push_back(parse_cell(c));
        const bool numeric = std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
        if (first && !numeric) {
            first = false;
            continue;  // header
        }
        first = false;
        if (cells.size() != 10 || !numeric)
            throw InvalidResponse(fmt::format("line {}: expected 10 integer answers", line_no));
        SusResponse row{};
        for (std::size_t i = 0; i < 10; ++i) {
            row[i] = *values[i];
            if (row[i] < 1 || row[i] > 5)
                throw InvalidResponse(fmt::format("line {}: answer {} outside 1..5", line_no, row[i]));
        }
        rows.push_back(row);
    }
    return rows;
}

std::string_view to_string(UsageLevel level) {
    switch (level) {
        case UsageLevel::Light: return "Light";
        case UsageLevel::Moderate: return "Moderate";
        case UsageLevel::Heavy: return "Heavy";
    }
    return "";
}

UsageLevel usage_level(double minutes_per_day) {
    if (minutes_per_day < 60.0) return UsageLevel::Light;
    if (minutes_per_day <= 180.0) return UsageLevel::Moderate;
    return UsageLevel::Heavy;
}

std::optional<double> daily_watch_minutes(std::span<const MoodSession> sessions) {
    std::set<Date> days;
    double minutes = 0.0;
    for (const auto& s : sessions) {
        if (!s.complete()) continue;
        auto start = parse_local_stamp(s.start_local);
        auto stop = parse_local_stamp(*s.stop_local);
        if (!start || !stop) continue;
        minutes += static_cast<double>(*stop - *start) / 60.0;
        days.insert(Date(*start));
    }
    if (days.empty()) return std::nullopt;
    return minutes / static_cast<double>(days.size());
}

UsageStats compute_usage(const report::TimeRange& range, std::span<const ingest::WatchEvent> events,
                         std::span<const MoodSession> sessions) {
    std::vector<ingest::WatchEvent> in_range;
    std::set<Date> days;
    for (const auto& ev : events) {
        auto cs = parse_local_stamp(ev.watched_at_local);
        if (!cs || !range.contains(Date(*cs))) continue;
        in_range.push_back(ev);
        days.insert(Date(*cs));
    }
    std::vector<MoodSession> range_sessions;
    for (const auto& s : sessions) {
        auto cs = parse_local_stamp(s.start_local);
        if (!cs || !range.contains(Date(*cs)) || !s.complete() || s.abandoned) continue;
        range_sessions.push_back(s);
    }

    UsageStats stats;
    stats.days_watched = static_cast<int>(days.size());
    if (range.end - range.start < 7) stats.frequency = frequency_class(stats.days_watched);
    stats.period_histogram = period_histogram(in_range);
    stats.split = long_short_split(in_range);
    stats.total_events = static_cast<std::int64_t>(in_range.size());
    stats.completed_sessions = static_cast<std::int64_t>(range_sessions.size());
    stats.minutes_per_day = daily_watch_minutes(range_sessions);
    if (stats.minutes_per_day) stats.usage = usage_level(*stats.minutes_per_day);
    if (!range_sessions.empty()) {
        stats.mood_change = mood_change_distribution(range_sessions);
        stats.start_mood = start_mood_distribution(range_sessions);
    }
    return stats;
}

nlohmann::ordered_json to_json(const UsageStats& stats) {
    nlohmann::ordered_json j;
    j["daysWatched"] = stats.days_watched;
    j["frequencyClass"] = stats.frequency ? nlohmann::ordered_json(to_string(*stats.frequency)) : nullptr;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [p, n] : stats.period_histogram) hist[std::string(to_string(p))] = n;
    j["periodHistogram"] = hist;
    j["shortCount"] = stats.split.short_count;
    j["longCount"] = stats.split.long_count;
    j["totalEvents"] = stats.total_events;
    j["completedSessions"] = stats.completed_sessions;
    j["minutesPerDay"] = stats.minutes_per_day ? nlohmann::ordered_json(*stats.minutes_per_day) : nullptr;
    j["usageLevel"] = stats.usage ? nlohmann::ordered_json(to_string(*stats.usage)) : nullptr;
    nlohmann::ordered_json change = nlohmann::ordered_json::object();
    for (const auto& [s, f] : stats.mood_change) change[std::string(session::to_wire(s))] = f;
    j["moodChangeDist"] = change;
    nlohmann::ordered_json start = nlohmann::ordered_json::object();
    for (const auto& [m, f] : stats.start_mood) start[std::string(session::to_wire(m))] = f;
    j["startMoodDist"] = start;
    return j;
}

std::string to_table(const UsageStats& stats) {
    auto pct = [](double f) { return fmt::format("{:.0f}%", std::round(f * 100.0)); };
    std::string out;
    auto row = [&out](std::string_view label, const std::string& value) {
        out += fmt::format("{:<22}{:>12}\n", label, value);
    };
    row("Days watched", std::to_string(stats.days_watched));
    row("Frequency", stats.frequency ? std::string(to_string(*stats.frequency)) : "-");
    for (const auto& [p, n] : stats.period_histogram) row(to_string(p), std::to_string(n));
    row("Short videos", std::to_string(stats.split.short_count));
    row("Long videos", std::to_string(stats.split.long_count));
    row("Minutes per day", stats.minutes_per_day ? fmt::format("{:.1f}", *stats.minutes_per_day) : "-");
    row("Usage level", stats.usage ? std::string(to_string(*stats.usage)) : "-");
    for (const auto& [s, f] : stats.mood_change) row(fmt::format("Felt {}", session::to_wire(s)), pct(f));
    for (const auto& [m, f] : stats.start_mood) row(fmt::format("Started {}", session::to_wire(m)), pct(f));
    return out;
}

}  // namespace emotrack::analytics
