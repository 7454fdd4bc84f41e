#pragma once

// Reference implementations written without the library, used to check it.

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Days since 1970-01-01 -> (y, m, d). Hinnant's civil_from_days.
inline std::tuple<int, int, int> civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

// 1970-01-01 was a Thursday; 0 = Sunday.
inline int weekday(std::int64_t days) { return static_cast<int>(((days % 7) + 11) % 7); }

inline std::int64_t last_sunday(int y, int m) {
    const int dim = (m == 3 || m == 10) ? 31 : 30;
    std::int64_t day = days_from_civil(y, m, dim);
    while (weekday(day) != 0) --day;
    return day;
}

// UK civil time: GMT, plus one hour from 01:00 UTC on the last Sunday of
// March until 01:00 UTC on the last Sunday of October.
inline std::string london_wall_clock(std::int64_t unix_seconds) {
    const std::int64_t days = unix_seconds >= 0 ? unix_seconds / 86400 : (unix_seconds - 86399) / 86400;
    const int year = std::get<0>(civil_from_days(days));
    const std::int64_t bst_start = last_sunday(year, 3) * 86400 + 3600;
    const std::int64_t bst_end = last_sunday(year, 10) * 86400 + 3600;
    const std::int64_t local = unix_seconds + ((unix_seconds >= bst_start && unix_seconds < bst_end) ? 3600 : 0);
    const std::int64_t ld = local >= 0 ? local / 86400 : (local - 86399) / 86400;
    const std::int64_t sod = local - ld * 86400;
    auto [y, m, d] = civil_from_days(ld);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", y, m, d, static_cast<int>(sod / 3600),
                  static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
    return buf;
}

inline std::int64_t unix_of(int y, int mo, int d, int h, int mi, int s) {
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

// SUS: items 1,3,5,7,9 score (a - 1), items 2,4,6,8,10 score (5 - a), total x 2.5.
inline double sus(const std::array<int, 10>& answers) {
    double total = 0;
    for (int item = 1; item <= 10; ++item) {
        const int a = answers[item - 1];
        total += (item % 2 == 1) ? (a - 1) : (5 - a);
    }
    return total * 2.5;
}

struct Session {
    std::string start;  // local "YYYY-MM-DD HH:MM:SS"
    std::string stop;   // empty when still open
    std::string before;
    std::string after;
    bool abandoned = false;
};

struct Event {
    std::string video_id;
    std::string local;
};

struct Detail {
    std::string id;
    std::string status;
    long count = 0;
    std::map<std::string, long> categories;
    bool operator==(const Detail&) const = default;
};

struct Day {
    long better = 0, same = 0, worse = 0, total = 0;
    std::vector<Detail> details;
    bool operator==(const Day&) const = default;
};

inline int mood_rank(const std::string& m) {
    if (m == "Not good") return 0;
    if (m == "Okay") return 1;
    return 2;
}

// Brute force: every date in [from, to], every session, every event.
inline std::map<std::string, Day> report(const std::string& from, const std::string& to,
                                         const std::vector<Event>& events, const std::vector<Session>& sessions,
                                         const std::map<std::string, std::string>& label_of) {
    std::map<std::string, Day> out;
    for (const auto& s : sessions) {
        if (s.stop.empty() || s.abandoned) continue;
        const std::string date = s.start.substr(0, 10);
        if (date < from || date > to) continue;
        Detail d;
        d.id = s.start;
        const int diff = mood_rank(s.after) - mood_rank(s.before);
        d.status = diff > 0 ? "Better" : diff < 0 ? "Worse" : "Same";
        for (const auto& e : events) {
            if (e.local < s.start || e.local > s.stop) continue;
            ++d.count;
            ++d.categories[label_of.at(e.video_id)];
        }
        Day& day = out[date];
        if (d.status == "Better") ++day.better;
        if (d.status == "Same") ++day.same;
        if (d.status == "Worse") ++day.worse;
        day.total += d.count;
        day.details.push_back(d);
    }
    for (auto& [date, day] : out) {
        for (std::size_t i = 0; i < day.details.size(); ++i)
            for (std::size_t j = i + 1; j < day.details.size(); ++j)
                if (day.details[j].id < day.details[i].id) std::swap(day.details[i], day.details[j]);
    }
    return out;
}

}  // namespace oracle
