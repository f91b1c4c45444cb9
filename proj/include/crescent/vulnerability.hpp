#pragma once

#include "crescent/grid_model.hpp"
#include "crescent/hazard_wind.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crescent {

enum class ComponentClass {
    transmission_line,
    transmission_tower,
    distribution_feeder,
    utility_solar,
    rooftop_solar,
};

std::string_view to_string(ComponentClass c);
ComponentClass component_class_from_string(std::string_view text);

/// Lognormal fragility: P(fail | w) = Phi(ln(w / median) / beta).
struct FragilityCurve
{
    ComponentClass component_class = ComponentClass::transmission_line;
    double median_ms = 0.0;
    double beta = 0.0;

    double failure_probability(double wind_ms) const;

    /// Inverse of the fragility: the wind speed at which a component whose
    /// uniform draw is u fails, median * exp(beta * Phi^-1(u)).
    double resistance_at(double u) const;

    bool operator==(const FragilityCurve&) const = default;
};

class FragilitySet
{
public:
    /// Throws InvariantViolation unless median > 0 and beta > 0.
    void set(const FragilityCurve& curve);
    bool has(ComponentClass c) const { return curves_.count(c) != 0; }
    /// Throws MissingCurve.
    const FragilityCurve& at(ComponentClass c) const;
    const std::map<ComponentClass, FragilityCurve>& curves() const { return curves_; }

    /// Synthetic placeholder curves used when no table is supplied.
    static FragilitySet defaults();

private:
    std::map<ComponentClass, FragilityCurve> curves_;
};

/// fragility.csv: class,median_ms,beta
FragilitySet load_fragility(const std::filesystem::path& path);

/// Classes the grid needs a curve for. Towers are optional: without a tower
/// curve a line's resistance is its own.
std::vector<ComponentClass> required_classes(const GridModel& grid);

/// Throws MissingCurve for the first required class without a curve.
void check_curves(const GridModel& grid, const FragilitySet& curves);

enum class ComponentType { line, feeder, solar_plant, rooftop };

/// A hazard-exposed component. Rooftop indices address feeders.
struct ComponentRef
{
    ComponentType type = ComponentType::line;
    int index = 0;

    bool operator==(const ComponentRef&) const = default;
};

/// "line:<id>", "feeder:<id>", "gen:<id>" or "btm:<feeder id>".
std::string component_key(const GridModel& grid, ComponentRef ref);

/// Inverse of component_key; throws UnknownComponent.
ComponentRef resolve_component(const GridModel& grid, std::string_view key);

inline constexpr double kNoResistance = std::numeric_limits<double>::infinity();

/// Per-realization, time-invariant wind resistances (m/s). Components not
/// exposed to wind damage hold kNoResistance.
struct ResistanceAssignment
{
    std::vector<double> line;
    std::vector<double> feeder;
    std::vector<double> generator;
    std::vector<double> rooftop;

    double at(ComponentRef ref) const;
    double& at(ComponentRef ref);

    bool operator==(const ResistanceAssignment&) const = default;
};

/// Draws every resistance from the substream keyed by (seed, component key).
/// A line's resistance is the minimum of its own draw and those of the
/// towers along its route (one per `tower_spacing_km`, when a tower curve
/// is present).
ResistanceAssignment sample_resistances(const GridModel& grid,
                                        const FragilitySet& curves,
                                        std::uint64_t seed,
                                        double tower_spacing_km = 1.0);

/// Replaces one component's uniform draw with `rank` before inversion.
/// Throws UnknownComponent or InvariantViolation (rank outside [0, 1]).
ResistanceAssignment preset_resistance_rank(const ResistanceAssignment& assignment,
                                            const GridModel& grid,
                                            const FragilitySet& curves,
                                            std::string_view component_key,
                                            double rank);

inline constexpr int kIntact = -1;

/// Failure step per component (kIntact while intact). Failure is absorbing.
struct DamageState
{
    std::vector<int> line;
    std::vector<int> feeder;
    std::vector<int> generator;
    std::vector<int> rooftop;

    static DamageState intact(const GridModel& grid);

    bool failed(ComponentRef ref) const { return step_of(ref) != kIntact; }
    int step_of(ComponentRef ref) const;
    int& step_of(ComponentRef ref);

    bool operator==(const DamageState&) const = default;
};

/// Wind exposure of every component at one step, m/s.
/// Generators are sampled at their bus; rooftop units share the feeder wind.
struct ComponentWinds
{
    std::vector<double> line;
    std::vector<double> feeder;
    std::vector<double> generator;
};

struct NewFailure
{
    ComponentRef ref;
    double wind_ms = 0.0;
    double resistance_ms = 0.0;
};

/// Fails every intact component whose wind strictly exceeds its resistance.
/// Returns the new failures in (type, index) order.
std::vector<NewFailure> update_damage(DamageState& state,
                                      const ResistanceAssignment& assignment,
                                      const ComponentWinds& winds, int step);

struct SolarReductionParams
{
    /// Distance (in multiples of rmax) at or below which irradiance is minimal.
    double inner_radius_factor = 3.0;
    /// Distance (in multiples of rmax) at or beyond which there is no reduction.
    double outer_radius_factor = 12.0;
    /// Irradiance fraction left under the storm core.
    double min_fraction = 0.25;
    DiurnalShape diurnal = DiurnalShape::daylight_plateau();

    void validate() const;
};

/// Cloud-shield multiplier in [min_fraction, 1] at normalised distance r/rmax.
double cloud_factor(double normalized_distance, const SolarReductionParams& params);

double solar_fraction(const StormState& storm, TimePoint t, const LatLon& site,
                      const SolarReductionParams& params);

/// Clear-sky-relative solar output fraction; throws OutOfRange.
double solar_fraction(const StormTrack& track, TimePoint t, const LatLon& site,
                      const SolarReductionParams& params);

/// Wind speed above which turbines shut down, m/s.
inline constexpr double kTurbineCutoutMs = 25.0;

struct Availability
{
    std::vector<double> generator_mw;
    std::vector<double> rooftop_mw; // per feeder
};

/// Exposure of generators and rooftop units at one step.
struct SiteConditions
{
    std::span<const double> generator_wind;
    std::span<const double> generator_solar_fraction;
    std::span<const double> feeder_solar_fraction;
};

/// Upper output limit of every generator and rooftop unit at one step.
/// `bus_energized` may be empty (all energized).
Availability available_generation(const GridModel& grid, const DamageState& damage,
                                  const SiteConditions& site,
                                  std::span<const char> bus_energized = {},
                                  double cutout_ms = kTurbineCutoutMs);

} // namespace crescent
