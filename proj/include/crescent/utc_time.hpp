#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace crescent {

using TimePoint = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace the 'T').
/// Throws std::invalid_argument on malformed input.
TimePoint parse_utc(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(TimePoint t);

/// Hour of day in UTC, [0, 24).
int utc_hour(TimePoint t);

/// Discrete simulation horizon: `steps` instants spaced `step` apart.
struct Horizon
{
    TimePoint start{};
    std::chrono::minutes step{10};
    int steps = 0;

    TimePoint time_at(int k) const { return start + step * k; }
    TimePoint end() const { return time_at(steps - 1); }

    /// Builds the horizon covering [start, end] inclusive.
    static Horizon between(TimePoint start, TimePoint end,
                           std::chrono::minutes step);

    bool operator==(const Horizon&) const = default;
};

} // namespace crescent
