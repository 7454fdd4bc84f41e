#include "emotrack/timeconv.hpp"

#include <absl/strings/string_view.h>

namespace emotrack {

namespace {

bool digits_at(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) return false;
    for (std::size_t i = pos; i < pos + n; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

int number_at(std::string_view s, std::size_t pos, std::size_t n) {
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

}  // namespace

Zone Zone::load(std::string_view id) {
    absl::TimeZone tz;
    if (id.empty() || !absl::LoadTimeZone(absl::string_view(id.data(), id.size()), &tz))
        throw UnknownZone("unknown time zone: " + std::string(id));
    return Zone(std::string(id), tz);
}

absl::Time parse_instant(std::string_view iso) {
    absl::Time t;
    std::string err;
    if (!absl::ParseTime(absl::RFC3339_full, absl::string_view(iso.data(), iso.size()), &t, &err))
        throw InvalidTimestamp("invalid ISO 8601 instant '" + std::string(iso) + "': " + err);
    return t;
}

std::string format_local(absl::Time t, const Zone& zone) {
    return absl::FormatTime("%Y-%m-%d %H:%M:%S", t, zone.tz());
}

std::string format_utc(absl::Time t) {
    return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", t, absl::UTCTimeZone());
}

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || !digits_at(text, 0, 4) || text[4] != '-' || !digits_at(text, 5, 2) ||
        text[7] != '-' || !digits_at(text, 8, 2))
        return std::nullopt;
    const int y = number_at(text, 0, 4);
    const int m = number_at(text, 5, 2);
    const int d = number_at(text, 8, 2);
    Date date(y, m, d);
    // CivilDay normalizes out-of-range fields; reject those instead
    if (date.year() != y || date.month() != m || date.day() != d) return std::nullopt;
    return date;
}

std::string format_date(Date d) {
    return absl::FormatCivilTime(d);
}

std::optional<absl::CivilSecond> parse_local_stamp(std::string_view stamp) {
    if (stamp.size() != 19 || stamp[10] != ' ' || !digits_at(stamp, 11, 2) || stamp[13] != ':' ||
        !digits_at(stamp, 14, 2) || stamp[16] != ':' || !digits_at(stamp, 17, 2))
        return std::nullopt;
    auto date = parse_date(stamp.substr(0, 10));
    if (!date) return std::nullopt;
    const int hh = number_at(stamp, 11, 2);
    const int mm = number_at(stamp, 14, 2);
    const int ss = number_at(stamp, 17, 2);
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    return absl::CivilSecond(date->year(), date->month(), date->day(), hh, mm, ss);
}

Date date_of_local_stamp(std::string_view stamp) {
    auto cs = parse_local_stamp(stamp);
    if (!cs) throw InvalidTimestamp("invalid local timestamp: " + std::string(stamp));
    return Date(*cs);
}

}  // namespace emotrack
