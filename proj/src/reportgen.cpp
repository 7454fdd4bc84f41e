#include "emotrack/reportgen.hpp"

#include "emotrack/layout.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace emotrack::report {

using session::ChangeStatus;
using session::MoodSession;

std::optional<Preset> preset_from_word(std::string_view word) {
    if (word == "lastweek") return Preset::LastWeek;
    if (word == "lastmonth") return Preset::LastMonth;
    if (word == "last3months") return Preset::LastThreeMonths;
    if (word == "halfyear") return Preset::LastHalfYear;
    return std::nullopt;
}

int preset_days(Preset preset) {
    switch (preset) {
        case Preset::LastWeek: return 7;
        case Preset::LastMonth: return 30;
        case Preset::LastThreeMonths: return 90;
        case Preset::LastHalfYear: return 182;
    }
    return 7;
}

TimeRange resolve_range(Preset preset, Date today) {
    return TimeRange{today - (preset_days(preset) - 1), today};
}

TimeRange resolve_range(Date start, Date end) {
    if (start > end)
        throw InvalidRange("range start " + format_date(start) + " is after end " + format_date(end));
    return TimeRange{start, end};
}

std::vector<ingest::WatchEvent> videos_in_session(const MoodSession& s,
                                                  std::span<const ingest::WatchEvent> events) {
    if (!s.complete()) throw std::invalid_argument("videos_in_session: session " + s.id + " is not complete");
    std::vector<ingest::WatchEvent> out;
    const std::string& start = s.start_local;
    const std::string& stop = *s.stop_local;
    for (const auto& ev : events) {
        // fixed-width "YYYY-MM-DD HH:MM:SS" compares chronologically as text
        if (start <= ev.watched_at_local && ev.watched_at_local <= stop) out.push_back(ev);
    }
    return out;
}

SessionDetail build_detail(const MoodSession& s, std::span<const ingest::WatchEvent> events,
                           const Classifier& classify) {
    SessionDetail detail;
    detail.session_id = s.id;
    detail.status = *s.status;
    for (const auto& ev : videos_in_session(s, events)) {
        ++detail.category_counts[classify(ev).str()];
        ++detail.video_count;
    }
    return detail;
}

DailySummary build_summary(Date date, std::span<const SessionDetail> details) {
    DailySummary summary;
    summary.date = date;
    for (const auto& d : details) {
        switch (d.status) {
            case ChangeStatus::Better: ++summary.better; break;
            case ChangeStatus::Same: ++summary.same; break;
            case ChangeStatus::Worse: ++summary.worse; break;
        }
        summary.total_videos += d.video_count;
    }
    return summary;
}

Report build_report(const TimeRange& range, std::span<const ingest::WatchEvent> events,
                    std::span<const MoodSession> sessions, const Classifier& classify) {
    std::map<Date, std::vector<const MoodSession*>> by_date;
    for (const auto& s : sessions) {
        if (!s.complete() || s.abandoned) continue;
        auto cs = parse_local_stamp(s.start_local);
        if (!cs) continue;
        const Date day(*cs);
        if (range.contains(day)) by_date[day].push_back(&s);
    }

    Report report;
    for (auto& [day, day_sessions] : by_date) {
        std::sort(day_sessions.begin(), day_sessions.end(),
                  [](const MoodSession* a, const MoodSession* b) { return a->id < b->id; });
        DayReport entry;
        for (const MoodSession* s : day_sessions) entry.details.push_back(build_detail(*s, events, classify));
        entry.summary = build_summary(day, entry.details);
        report.emplace(day, std::move(entry));
    }
    return report;
}

void write_report(store::DocumentStore& db, const std::string& uid, const Report& report) {
    for (const auto& [day, entry] : report) {
        const std::string date = format_date(day);
        db.put_document(layout::report_date(uid, date), {{"Date", date}});
        for (const auto& d : entry.details) {
            store::Document doc{
                {session::kStartTime, d.session_id},
                {session::kChangeStatus, std::string(session::to_wire(d.status))},
                {kVideoCount, d.video_count},
            };
            for (const auto& [category, count] : d.category_counts)
                doc[std::string(kVideoCategory) + ": " + category] = count;
            db.put_document(layout::details(uid, date).child(d.session_id), doc);
        }
        db.put_document(layout::summary(uid, date).child(date), {
                                                                    {kBetter, entry.summary.better},
                                                                    {kSame, entry.summary.same},
                                                                    {kWorse, entry.summary.worse},
                                                                    {kWatchTotal, entry.summary.total_videos},
                                                                });
    }
}

nlohmann::ordered_json to_json(const Report& report) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [day, entry] : report) {
        nlohmann::ordered_json details = nlohmann::ordered_json::array();
        for (const auto& d : entry.details) {
            nlohmann::ordered_json categories = nlohmann::ordered_json::object();
            for (const auto& [category, count] : d.category_counts) categories[category] = count;
            details.push_back({
                {session::kStartTime, d.session_id},
                {session::kChangeStatus, session::to_wire(d.status)},
                {kVideoCount, d.video_count},
                {kVideoCategory, std::move(categories)},
            });
        }
        out[format_date(day)] = {
            {kBetter, entry.summary.better},
            {kSame, entry.summary.same},
            {kWorse, entry.summary.worse},
            {kWatchTotal, entry.summary.total_videos},
            {"Details", std::move(details)},
        };
    }
    return out;
}

std::string to_table(const Report& report) {
    if (report.empty()) return "no data for the selected range\n";
    std::string out = fmt::format("{:<10}  {:<32}  {:>6}\n", "Date", "Mood change", "Videos");
    for (const auto& [day, entry] : report) {
        const auto& s = entry.summary;
        out += fmt::format("{:<10}  {:<32}  {:>6}\n", format_date(day),
                           fmt::format("Better {} / Same {} / Worse {}", s.better, s.same, s.worse),
                           s.total_videos);
        for (const auto& d : entry.details) {
            std::string categories;
            for (const auto& [category, count] : d.category_counts) {
                if (!categories.empty()) categories += ' ';
                categories += fmt::format("{}:{}", category, count);
            }
            out += fmt::format("  {:<19}  {:<6}  {:>4}  {}\n", d.session_id, session::to_wire(d.status),
                               d.video_count, categories);
        }
    }
    return out;
}

}  // namespace emotrack::report
