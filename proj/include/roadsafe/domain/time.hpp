#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace roadsafe {

/// UTC instant with millisecond resolution (milliseconds since the Unix epoch).
struct Timestamp {
    std::int64_t ms = 0;

    [[nodiscard]] static constexpr Timestamp from_seconds(std::int64_t s) noexcept { return {s * 1000}; }
    [[nodiscard]] constexpr Timestamp plus_ms(std::int64_t d) const noexcept { return {ms + d}; }

    friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
[[nodiscard]] std::string to_iso8601(Timestamp ts);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z". Throws ValidationError otherwise.
[[nodiscard]] Timestamp parse_iso8601(std::string_view text);

/// Calendar date without time of day.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend constexpr bool operator==(const Date&, const Date&) = default;
};

[[nodiscard]] std::string to_string(const Date& d);
[[nodiscard]] Date parse_date(std::string_view text);

} // namespace roadsafe
