#include "crescent/ensemble.hpp"

#include "crescent/errors.hpp"
#include "crescent/rng.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace crescent {

EnsembleRun run_ensemble(const RealizationInputs& in, const EnsembleOptions& options)
{
    if (options.n < 1) {
        throw ConfigError("ensemble size must be at least 1");
    }
    const int n = options.n;
    std::vector<std::optional<RealizationResult>> slots(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};

    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            const auto ii = static_cast<std::size_t>(i);
            const std::uint64_t seed = rng::realization_seed(options.master_seed,
                                                             static_cast<std::uint64_t>(i));
            try {
                ResistanceAssignment r =
                    sample_resistances(in.grid, in.curves, seed, in.settings.tower_spacing_km);
                if (options.hook) {
                    options.hook(r, i);
                }
                slots[ii] = run_realization(in, r, seed, i);
            } catch (const std::exception& e) {
                errors[ii] = e.what();
                if (errors[ii].empty()) {
                    errors[ii] = "unknown error";
                }
            }
        }
    };

    const int workers = std::clamp(options.workers, 1, n);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    EnsembleRun run;
    run.requested = n;
    for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (slots[ii]) {
            run.results.push_back(std::move(*slots[ii]));
        } else {
            spdlog::error("realization {} failed: {}", i, errors[ii]);
            run.failures.push_back({i, errors[ii]});
        }
    }
    return run;
}

std::vector<int> line_outage_steps(const RealizationResult& result,
                                   std::span<const std::string> line_ids)
{
    std::unordered_map<std::string_view, std::size_t> pos;
    for (std::size_t i = 0; i < line_ids.size(); ++i) {
        pos.emplace(line_ids[i], i);
    }
    std::vector<int> steps(line_ids.size(), -1);
    for (const Event& e : result.events) {
        if (e.kind != EventKind::component_failed && e.kind != EventKind::line_tripped_overload) {
            continue;
        }
        const std::string_view c = e.component;
        if (!c.starts_with("line:")) {
            continue;
        }
        auto it = pos.find(c.substr(5));
        if (it != pos.end() && steps[it->second] < 0) {
            steps[it->second] = e.step;
        }
    }
    return steps;
}

std::vector<double> critical_index(std::span<const RealizationResult> results,
                                   std::span<const std::string> line_ids)
{
    std::vector<double> index(line_ids.size(), 0.0);
    if (results.empty()) {
        return index;
    }
    std::vector<int> count(line_ids.size(), 0);
    for (const auto& r : results) {
        if (!r.blackout_step) {
            continue;
        }
        const std::vector<int> steps = line_outage_steps(r, line_ids);
        for (std::size_t l = 0; l < steps.size(); ++l) {
            if (steps[l] == *r.blackout_step) {
                ++count[l];
            }
        }
    }
    for (std::size_t l = 0; l < index.size(); ++l) {
        index[l] = static_cast<double>(count[l]) / static_cast<double>(results.size());
    }
    return index;
}

Partition partition_resilient_vulnerable(std::span<const RealizationResult> results)
{
    Partition p;
    for (const auto& r : results) {
        const auto step = static_cast<std::size_t>(r.largest.step);
        const double perf = step < r.performance.size() ? r.performance[step] : 0.0;
        FailurePoint pt{r.index, r.largest.step, perf, r.largest.drop};
        (r.blackout_step ? p.vulnerable : p.resilient).push_back(pt);
    }
    return p;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw InvariantViolation("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnsembleSummary summarize(std::span<const RealizationResult> results, int steps,
                          std::span<const std::string> line_ids, int failed_count)
{
    EnsembleSummary s;
    s.n = static_cast<int>(results.size());
    s.failed_count = failed_count;
    s.line_ids.assign(line_ids.begin(), line_ids.end());
    s.blackout_histogram.assign(static_cast<std::size_t>(steps), 0);
    s.critical_index = critical_index(results, line_ids);
    s.partition = partition_resilient_vulnerable(results);
    if (results.empty()) {
        return s;
    }
    std::vector<double> bsteps;
    double final_sum = 0.0;
    for (const auto& r : results) {
        if (r.blackout_step) {
            bsteps.push_back(*r.blackout_step);
            if (*r.blackout_step < steps) {
                ++s.blackout_histogram[static_cast<std::size_t>(*r.blackout_step)];
            }
        }
        final_sum += r.performance.empty() ? 0.0 : r.performance.back();
    }
    s.blackout_probability = static_cast<double>(bsteps.size()) / static_cast<double>(s.n);
    s.mean_final_performance = final_sum / static_cast<double>(s.n);
    if (!bsteps.empty()) {
        s.median_blackout_step = quantile(bsteps, 0.5);
    }
    std::vector<double> column(results.size());
    for (int t = 0; t < steps; ++t) {
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& perf = results[i].performance;
            column[i] = static_cast<std::size_t>(t) < perf.size() ? perf[static_cast<std::size_t>(t)] : 0.0;
        }
        s.quantiles.p05.push_back(quantile(column, 0.05));
        s.quantiles.p25.push_back(quantile(column, 0.25));
        s.quantiles.p50.push_back(quantile(column, 0.50));
        s.quantiles.p75.push_back(quantile(column, 0.75));
        s.quantiles.p95.push_back(quantile(column, 0.95));
    }
    return s;
}

std::vector<std::string> line_ids(const GridModel& grid)
{
    std::vector<std::string> ids;
    for (const auto& l : grid.lines) {
        ids.push_back(l.id);
    }
    return ids;
}

std::vector<SweepRow> sensitivity_sweep(const GridModel& grid, const FragilitySet& curves,
                                        const HazardTable& hazard,
                                        const SimulationSettings& settings,
                                        std::span<const double> levels,
                                        const EnsembleOptions& options)
{
    const std::vector<std::string> ids = line_ids(grid);
    std::vector<SweepRow> rows;
    for (double level : levels) {
        GridModel scaled = scale_renewable_integration(grid, level, settings.horizon,
                                                       settings.solar.diurnal);
        scaled.validate();
        check_curves(scaled, curves);
        // Separate cache per level: problems never repeat across levels.
        DispatchCache level_cache;
        const RealizationInputs in{scaled, curves, hazard, settings, &level_cache};
        const EnsembleRun run = run_ensemble(in, options);
        rows.push_back({level, summarize(run.results, hazard.steps(), ids,
                                         static_cast<int>(run.failures.size()))});
        spdlog::info("level {:.3f}: blackout probability {:.3f}", level,
                     rows.back().summary.blackout_probability);
    }
    return rows;
}

std::vector<double> parse_levels(std::string_view text)
{
    std::vector<double> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(':', start), text.size());
        const std::string_view piece = text.substr(start, end - start);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
        if (ec != std::errc{} || ptr != piece.data() + piece.size() || piece.empty()) {
            throw ConfigError(fmt::format("bad level specification '{}'", text));
        }
        parts.push_back(v);
        start = end + 1;
    }
    if (parts.size() == 1) {
        return parts;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        throw ConfigError(fmt::format("levels must be start:stop:step, got '{}'", text));
    }
    std::vector<double> levels;
    const auto count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (int k = 0; k <= count; ++k) {
        // Round to 12 decimals so 0.1:0.8:0.1 gives 0.3 rather than 0.30000000000000004.
        const double v = parts[0] + k * parts[2];
        levels.push_back(std::round(v * 1e12) / 1e12);
    }
    return levels;
}

PresetExperiment preset_experiment(const RealizationInputs& in, const EnsembleOptions& options,
                                   std::string component, std::span<const double> ranks)
{
    const std::vector<std::string> ids = line_ids(in.grid);
    const EnsembleRun base = run_ensemble(in, options);
    const EnsembleSummary bs =
        summarize(base.results, in.hazard.steps(), ids, static_cast<int>(base.failures.size()));
    if (component.empty()) {
        if (ids.empty()) {
            throw ConfigError("grid has no lines to preset");
        }
        const auto it = std::max_element(bs.critical_index.begin(), bs.critical_index.end());
        component = "line:" + ids[static_cast<std::size_t>(it - bs.critical_index.begin())];
    }
    resolve_component(in.grid, component);

    PresetExperiment ex;
    ex.component = component;
    ex.baseline_probability = bs.blackout_probability;
    ex.baseline_n = bs.n;
    for (double rank : ranks) {
        EnsembleOptions o = options;
        o.hook = [&](ResistanceAssignment& r, int) {
            r = preset_resistance_rank(r, in.grid, in.curves, component, rank);
        };
        const EnsembleRun run = run_ensemble(in, o);
        const EnsembleSummary s =
            summarize(run.results, in.hazard.steps(), ids, static_cast<int>(run.failures.size()));
        ex.outcomes.push_back({rank, s.blackout_probability,
                               s.blackout_probability - bs.blackout_probability, s.n});
    }
    return ex;
}

} // namespace crescent
