#pragma once

#include "crescent/ensemble.hpp"
#include "crescent/grid_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crescent {

/// Percentage of customers with power over time, per region.
struct ObservedTrajectory
{
    std::vector<TimePoint> times; ///< strictly increasing
    /// Region -> value per entry of `times` (NaN where not reported).
    std::map<std::string, std::vector<double>> pct_with_power;
};

/// observed.csv: time_iso8601,region,pct_with_power. Values in [0, 100].
ObservedTrajectory load_observed(const std::filesystem::path& path);

/// Island-wide percentage per time: the "all" region when present,
/// otherwise regions weighted by the grid's customers in each region.
std::vector<double> aggregate_observed(const ObservedTrajectory& obs, const GridModel* grid);

struct ComparisonPoint
{
    int step = 0;
    double observed = 0.0;  ///< fraction
    double simulated = 0.0; ///< ensemble median or the single trajectory
    double deviation = 0.0; ///< observed - simulated
    bool in_band_90 = false; ///< within p05..p95
    bool in_band_50 = false; ///< within p25..p75
};

struct ComparisonReport
{
    std::vector<ComparisonPoint> points;
    double coverage_90 = 0.0;
    double coverage_50 = 0.0;
    double max_abs_deviation = 0.0;
    std::optional<int> observed_blackout_step;
    /// Share of simulated blackouts at or before the observed one.
    std::optional<double> blackout_percentile;
    /// Observed blackout step lies between the earliest and latest simulated ones.
    bool blackout_in_support = false;
};

/// Throws MisalignedTimeGrid when the observed series is empty or any of its
/// times is not a horizon step.
ComparisonReport compare_observed(const EnsembleSummary& summary, const Horizon& horizon,
                                  const std::vector<TimePoint>& times,
                                  const std::vector<double>& observed_pct);

ComparisonReport compare_observed(const RealizationResult& result, const Horizon& horizon,
                                  const std::vector<TimePoint>& times,
                                  const std::vector<double>& observed_pct);

nlohmann::json comparison_to_json(const ComparisonReport& report, const Horizon& horizon);

} // namespace crescent
