#include "roadsafe/domain/time.hpp"

#include "roadsafe/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace roadsafe {

namespace {

using namespace std::chrono;

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole)
{
    int value = 0;
    if (pos + len > text.size()) {
        throw ValidationError("malformed timestamp: " + std::string(whole));
    }
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ValidationError("malformed timestamp: " + std::string(whole));
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c)
{
    if (pos >= text.size() || text[pos] != c) {
        throw ValidationError("malformed timestamp: " + std::string(text));
    }
}

Date checked_date(int y, int m, int d, std::string_view whole)
{
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw ValidationError("invalid calendar date: " + std::string(whole));
    }
    return {y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
}

} // namespace

std::string to_iso8601(Timestamp ts)
{
    const sys_time<milliseconds> tp{milliseconds{ts.ms}};
    const auto day_point = floor<days>(tp);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{tp - day_point};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()), static_cast<int>(hms.subseconds().count()));
    return buf;
}

Timestamp parse_iso8601(std::string_view text)
{
    // YYYY-MM-DDTHH:MM:SS
    const Date date = parse_date(text.substr(0, 10));
    expect_char(text, 10, 'T');
    const int hh = parse_int(text, 11, 2, text);
    expect_char(text, 13, ':');
    const int mi = parse_int(text, 14, 2, text);
    expect_char(text, 16, ':');
    const int ss = parse_int(text, 17, 2, text);
    if (hh > 23 || mi > 59 || ss > 59) {
        throw ValidationError("time of day out of range: " + std::string(text));
    }
    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (digits < 3) {
                millis = millis * 10 + (text[pos] - '0');
            }
            ++digits;
            ++pos;
        }
        if (digits == 0) {
            throw ValidationError("malformed timestamp: " + std::string(text));
        }
        for (int i = digits; i < 3; ++i) {
            millis *= 10;
        }
    }
    expect_char(text, pos, 'Z');
    if (pos + 1 != text.size()) {
        throw ValidationError("trailing characters in timestamp: " + std::string(text));
    }
    const sys_days day_point{year{date.year} / month{date.month} / day{date.day}};
    const auto tp = day_point + hours{hh} + minutes{mi} + seconds{ss} + milliseconds{millis};
    return {duration_cast<milliseconds>(tp.time_since_epoch()).count()};
}

std::string to_string(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

Date parse_date(std::string_view text)
{
    if (text.size() < 10) {
        throw ValidationError("malformed date: " + std::string(text));
    }
    const int y = parse_int(text, 0, 4, text);
    expect_char(text, 4, '-');
    const int m = parse_int(text, 5, 2, text);
    expect_char(text, 7, '-');
    const int d = parse_int(text, 8, 2, text);
    if (text.size() != 10) {
        throw ValidationError("malformed date: " + std::string(text));
    }
    return checked_date(y, m, d, text);
}

} // namespace roadsafe
