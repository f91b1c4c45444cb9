#include "crescent/utc_time.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace crescent {

namespace {

// Days since 1970-01-01 of a proleptic Gregorian date (H. Hinnant).
long long days_from_civil(long long y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, long long& y, unsigned& m, unsigned& d)
{
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

int read_int(std::string_view text, std::size_t pos, std::size_t len)
{
    if (pos + len > text.size()) {
        throw std::invalid_argument("truncated timestamp: " + std::string(text));
    }
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc() || ptr != text.data() + pos + len) {
        throw std::invalid_argument("bad timestamp: " + std::string(text));
    }
    return value;
}

void expect(std::string_view text, std::size_t pos, char c)
{
    if (pos >= text.size() || text[pos] != c) {
        throw std::invalid_argument("bad timestamp: " + std::string(text));
    }
}

} // namespace

TimePoint parse_utc(std::string_view text)
{
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
        text.remove_suffix(1);
    }
    const int year = read_int(text, 0, 4);
    expect(text, 4, '-');
    const int month = read_int(text, 5, 2);
    expect(text, 7, '-');
    const int day = read_int(text, 8, 2);
    if (text.size() <= 10 || (text[10] != 'T' && text[10] != ' ')) {
        throw std::invalid_argument("bad timestamp: " + std::string(text));
    }
    const int hour = read_int(text, 11, 2);
    expect(text, 13, ':');
    const int minute = read_int(text, 14, 2);
    int second = 0;
    if (text.size() > 16) {
        expect(text, 16, ':');
        second = read_int(text, 17, 2);
        if (text.size() != 19) {
            throw std::invalid_argument("bad timestamp: " + std::string(text));
        }
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
        minute > 59 || second > 60) {
        throw std::invalid_argument("timestamp out of range: " +
                                    std::string(text));
    }
    const long long days = days_from_civil(year, static_cast<unsigned>(month),
                                           static_cast<unsigned>(day));
    return TimePoint{std::chrono::seconds{days * 86400LL + hour * 3600LL +
                                          minute * 60LL + second}};
}

std::string format_utc(TimePoint t)
{
    const long long secs = t.time_since_epoch().count();
    long long days = secs / 86400;
    long long rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    long long y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", y, m, d,
                       rem / 3600, (rem % 3600) / 60, rem % 60);
}

int utc_hour(TimePoint t)
{
    long long rem = t.time_since_epoch().count() % 86400;
    if (rem < 0) {
        rem += 86400;
    }
    return static_cast<int>(rem / 3600);
}

Horizon Horizon::between(TimePoint start, TimePoint end,
                         std::chrono::minutes step)
{
    if (step.count() <= 0) {
        throw std::invalid_argument("horizon step must be positive");
    }
    if (end < start) {
        throw std::invalid_argument("horizon end precedes start");
    }
    const auto span = std::chrono::duration_cast<std::chrono::minutes>(end - start);
    Horizon h;
    h.start = start;
    h.step = step;
    h.steps = static_cast<int>(span / step) + 1;
    return h;
}

} // namespace crescent
