#pragma once

#include "crescent/simulation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace crescent {

/// Changes a realization's sampled resistances before it runs.
using ResistanceHook = std::function<void(ResistanceAssignment&, int index)>;

struct EnsembleOptions
{
    int n = 1;
    std::uint64_t master_seed = 0;
    int workers = 1;
    ResistanceHook hook;
};

struct FailedRealization
{
    int index = 0;
    std::string message;
};

struct EnsembleRun
{
    /// Successful realizations in index order.
    std::vector<RealizationResult> results;
    std::vector<FailedRealization> failures;
    int requested = 0;
};

/// Realization i uses seed stable_mix(master_seed, i). Output does not
/// depend on the worker count.
EnsembleRun run_ensemble(const RealizationInputs& in, const EnsembleOptions& options);

/// Step at which each line first went out (damage or overload trip), or -1.
std::vector<int> line_outage_steps(const RealizationResult& result,
                                   std::span<const std::string> line_ids);

/// Fraction of realizations in which the line went out at the blackout step.
std::vector<double> critical_index(std::span<const RealizationResult> results,
                                   std::span<const std::string> line_ids);

struct FailurePoint
{
    int index = 0;
    int step = 0;
    double performance = 0.0;
    double drop = 0.0;
};

struct Partition
{
    std::vector<FailurePoint> resilient;
    std::vector<FailurePoint> vulnerable;
};

/// Splits by presence of a blackout; each point is the realization's
/// largest failure.
Partition partition_resilient_vulnerable(std::span<const RealizationResult> results);

struct QuantileBand
{
    std::vector<double> p05, p25, p50, p75, p95;
};

/// Linear interpolation between order statistics at (n - 1) * q.
double quantile(std::vector<double> values, double q);

struct EnsembleSummary
{
    int n = 0;
    int failed_count = 0;
    double blackout_probability = 0.0;
    std::vector<int> blackout_histogram; ///< per step
    std::optional<double> median_blackout_step;
    double mean_final_performance = 0.0;
    Partition partition;
    std::vector<std::string> line_ids;
    std::vector<double> critical_index;
    QuantileBand quantiles;
};

EnsembleSummary summarize(std::span<const RealizationResult> results, int steps,
                          std::span<const std::string> line_ids, int failed_count = 0);

std::vector<std::string> line_ids(const GridModel& grid);

struct SweepRow
{
    double level = 0.0;
    EnsembleSummary summary;
};

/// Scales rooftop solar to each level and runs a paired-seed ensemble; the
/// hazard table is shared because it does not depend on rooftop capacity.
std::vector<SweepRow> sensitivity_sweep(const GridModel& grid, const FragilitySet& curves,
                                        const HazardTable& hazard,
                                        const SimulationSettings& settings,
                                        std::span<const double> levels,
                                        const EnsembleOptions& options);

/// `start:stop:step`, inclusive of stop within rounding.
std::vector<double> parse_levels(std::string_view text);

struct PresetOutcome
{
    double rank = 0.0;
    double blackout_probability = 0.0;
    double delta = 0.0; ///< versus the unconstrained baseline
    int n = 0;
};

struct PresetExperiment
{
    std::string component;
    double baseline_probability = 0.0;
    int baseline_n = 0;
    std::vector<PresetOutcome> outcomes;
};

/// Runs the baseline ensemble, then reruns it with `component`'s resistance
/// preset to each rank of its class distribution. An empty component selects
/// the line with the highest baseline critical index.
PresetExperiment preset_experiment(const RealizationInputs& in, const EnsembleOptions& options,
                                   std::string component, std::span<const double> ranks);

} // namespace crescent
