#pragma once

#include <absl/time/civil_time.h>
#include <absl/time/clock.h>
#include <absl/time/time.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emotrack {

inline constexpr std::string_view kDefaultZone = "Europe/London";

class InvalidTimestamp : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownZone : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An IANA zone loaded from the system zoneinfo database.
class Zone {
public:
    /// Throws UnknownZone.
    static Zone load(std::string_view id);

    const std::string& name() const noexcept { return name_; }
    const absl::TimeZone& tz() const noexcept { return tz_; }

private:
    Zone(std::string name, absl::TimeZone tz) : name_(std::move(name)), tz_(tz) {}
    std::string name_;
    absl::TimeZone tz_;
};

using Date = absl::CivilDay;

/// Parses an RFC 3339 / ISO 8601 instant such as `2024-01-15T12:00:00.5Z`.
/// Throws InvalidTimestamp.
absl::Time parse_instant(std::string_view iso);

/// Wall clock in `zone` as "YYYY-MM-DD HH:MM:SS". Sub-second parts are truncated.
std::string format_local(absl::Time t, const Zone& zone);

/// Instant as "YYYY-MM-DDTHH:MM:SSZ" (UTC, second precision).
std::string format_utc(absl::Time t);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses a "YYYY-MM-DD HH:MM:SS" local key.
std::optional<absl::CivilSecond> parse_local_stamp(std::string_view stamp);

/// Date part of a local key. Throws InvalidTimestamp when the key is malformed.
Date date_of_local_stamp(std::string_view stamp);

}  // namespace emotrack
