#pragma once

#include "crescent/dispatch.hpp"
#include "crescent/grid_model.hpp"
#include "crescent/hazard_wind.hpp"
#include "crescent/powerflow.hpp"
#include "crescent/vulnerability.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crescent {

/// A component failure imposed at a given step regardless of wind.
struct ForcedFailure
{
    int step = 0;
    std::string component; ///< key such as "line:L7"
};

/// Everything a realization needs besides the grid, track and curves.
struct SimulationSettings
{
    Horizon horizon;
    WindProfileParams wind;
    SolarReductionParams solar;
    double rocof_limit = kDefaultRocofLimit;
    bool probabilistic_trip = false;
    double trip_probability = 0.0;
    CostWeights weights;
    /// Per generator, $/MWh; empty means the grid's own costs.
    std::vector<double> generation_cost;
    DispatchOptions dispatch;
    double tower_spacing_km = 1.0;
    double turbine_cutout_ms = kTurbineCutoutMs;
    std::vector<ForcedFailure> forced_failures;
};

/// Wind and solar conditions per step, shared by every realization of a run.
struct HazardTable
{
    std::vector<ComponentWinds> winds;                  ///< per step
    std::vector<std::vector<double>> generator_solar;   ///< per step, per generator
    std::vector<std::vector<double>> feeder_solar;      ///< per step, per feeder

    int steps() const { return static_cast<int>(winds.size()); }

    /// Steps outside the track's span see no wind and clear-sky solar.
    static HazardTable compute(const GridModel& grid, const StormTrack& track,
                               const RoughnessMap& roughness,
                               const SimulationSettings& settings);
};

enum class EventKind {
    component_failed,
    line_tripped_overload,
    subgrid_removed_rocof,
    shed_change,
    island_deenergized,
};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view text);

struct Event
{
    int step = 0;
    EventKind kind = EventKind::component_failed;
    std::string component;
    double magnitude = 0.0;

    bool operator==(const Event&) const = default;
};

struct LargestFailure
{
    int step = 0;
    double drop = 0.0;

    bool operator==(const LargestFailure&) const = default;
};

struct RealizationResult
{
    int index = 0;
    std::uint64_t seed = 0;
    std::vector<double> performance; ///< fraction of customers with power, per step
    std::vector<double> served_mw;
    std::vector<double> shed_mw;
    std::vector<Event> events;
    std::optional<int> blackout_step;
    LargestFailure largest;

    bool operator==(const RealizationResult&) const = default;
};

/// Largest drop between consecutive steps; the earliest wins ties and a
/// trajectory without decreases gives (0, 0).
LargestFailure largest_failure(const std::vector<double>& performance);

/// First step at which performance reaches zero.
std::optional<int> blackout_step(const std::vector<double>& performance);

/// Memoises dispatch solutions by problem content. Results are a pure
/// function of the problem, so sharing across realizations and threads does
/// not affect output.
class DispatchCache
{
public:
    explicit DispatchCache(std::size_t capacity = 200000) : capacity_(capacity) {}

    DispatchSolution solve(const DispatchProblem& problem, const DispatchOptions& options);

    std::size_t size() const;

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, DispatchSolution> map_;
};

struct RealizationInputs
{
    const GridModel& grid;
    const FragilitySet& curves;
    const HazardTable& hazard;
    const SimulationSettings& settings;
    DispatchCache* cache = nullptr;
};

/// One seeded realization with resistances sampled from `seed`.
RealizationResult run_realization(const RealizationInputs& in, std::uint64_t seed,
                                  int index = 0);

/// Same, with a given resistance assignment.
RealizationResult run_realization(const RealizationInputs& in,
                                  const ResistanceAssignment& resistances,
                                  std::uint64_t seed, int index = 0);

} // namespace crescent
