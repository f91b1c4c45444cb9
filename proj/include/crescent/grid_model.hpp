#pragma once

#include "crescent/geo.hpp"
#include "crescent/utc_time.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crescent {

enum class GeneratorKind { thermal, hydro, utility_solar, wind, btm_solar };

std::string_view to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(std::string_view text);

/// Synchronous machines contribute rotating inertia.
constexpr bool is_synchronous(GeneratorKind k)
{
    return k == GeneratorKind::thermal || k == GeneratorKind::hydro;
}

constexpr bool is_renewable(GeneratorKind k)
{
    return k == GeneratorKind::utility_solar || k == GeneratorKind::wind ||
           k == GeneratorKind::btm_solar;
}

struct Bus
{
    std::string id;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
    double voltage_kv = 0.0;
    std::string region;

    LatLon location() const { return {lat, lon}; }
    bool operator==(const Bus&) const = default;
};

struct Line
{
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double reactance_pu = 0.0;
    double rating_mw = 0.0;
    double emergency_mw = 0.0;
    std::vector<LatLon> route;

    bool operator==(const Line&) const = default;
};

struct Generator
{
    std::string id;
    std::string bus;
    GeneratorKind kind = GeneratorKind::thermal;
    double p_max = 0.0;
    double p_min = 0.0;
    double ramp_mw_per_min = 0.0;
    double inertia_s = 0.0;
    double marginal_cost = 0.0;
    bool available = true;

    bool operator==(const Generator&) const = default;
};

/// A distribution feeder hanging off a substation bus. Its rooftop (BTM)
/// solar is one aggregate MPPT unit netted against the feeder's demand.
struct Feeder
{
    std::string id;
    std::string substation_bus;
    double peak_mw = 0.0;
    double customers = 0.0;
    double btm_solar_mw = 0.0;
    std::vector<LatLon> route;
    std::string shape_id;
    std::vector<double> demand_shape; // empty means constant 1.0

    /// Demand multiplier at horizon step k; the last value holds past the end.
    double shape_at(int k) const;
    double demand_at(int k) const { return peak_mw * shape_at(k); }

    bool operator==(const Feeder&) const = default;
};

/// Resolved integer cross-references, rebuilt by validate().
struct GridIndex
{
    std::unordered_map<std::string, int> bus;
    std::vector<int> line_from;
    std::vector<int> line_to;
    std::vector<int> generator_bus;
    std::vector<int> feeder_bus;
};

struct GridModel
{
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<Feeder> feeders;
    double system_base_mva = 100.0;
    double rated_frequency_hz = 60.0;

    /// Checks every invariant and rebuilds `index`. Throws
    /// DanglingReference or InvariantViolation.
    void validate();

    const GridIndex& idx() const { return index; }

    double total_customers() const;

    bool operator==(const GridModel& o) const
    {
        return buses == o.buses && lines == o.lines &&
               generators == o.generators && feeders == o.feeders &&
               system_base_mva == o.system_base_mva &&
               rated_frequency_hz == o.rated_frequency_hz;
    }

    GridIndex index;
};

/// Clear-sky diurnal multiplier by UTC hour.
struct DiurnalShape
{
    std::array<double, 24> hourly{};

    double at(TimePoint t) const { return hourly[static_cast<std::size_t>(utc_hour(t))]; }

    /// Zero before 10:00 and from 22:00 UTC, 1.0 in between.
    static DiurnalShape daylight_plateau();

    bool operator==(const DiurnalShape&) const = default;
};

struct GridPaths
{
    std::filesystem::path buses;
    std::filesystem::path lines;
    std::filesystem::path generators;
    std::filesystem::path feeders;
    std::optional<std::filesystem::path> shapes;

    /// buses.csv, lines.csv, ... inside `dir`; shapes.csv only if present.
    static GridPaths in_directory(const std::filesystem::path& dir);
};

/// Customers per MW of peak demand used when no feeder in the table lists a
/// customer count.
inline constexpr double kDefaultCustomersPerMw = 400.0;

GridModel load_grid(const GridPaths& paths, double system_base_mva = 100.0,
                    double rated_frequency_hz = 60.0);

/// Writes the five tables into `dir` (created if needed).
void write_grid(const GridModel& grid, const std::filesystem::path& dir);

/// Solar energy share of demand energy over the horizon, clear-sky, counting
/// utility-scale and rooftop solar.
double renewable_integration_level(const GridModel& grid, const Horizon& horizon,
                                   const DiurnalShape& clear_sky);

/// Returns a copy whose rooftop capacities make the integration level equal
/// `target_level`, distributed proportionally to feeder demand energy.
/// Throws InfeasibleTarget outside [0.05, 0.95] or when utility solar alone
/// already exceeds the target.
GridModel scale_renewable_integration(const GridModel& grid, double target_level,
                                      const Horizon& horizon,
                                      const DiurnalShape& clear_sky);

} // namespace crescent
