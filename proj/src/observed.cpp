#include "crescent/observed.hpp"

#include "crescent/csv.hpp"
#include "crescent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace crescent {

ObservedTrajectory load_observed(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) {
        throw MissingFile(path.string());
    }
    const std::string text = read_text_file(path);
    ObservedTrajectory obs;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        return obs;
    }
    const CsvTable t = parse_csv(text, path.string());
    t.require_columns({"time_iso8601", "region", "pct_with_power"});

    std::set<TimePoint> times;
    std::vector<std::tuple<TimePoint, std::string, double>> rows;
    for (std::size_t r = 0; r < t.size(); ++r) {
        TimePoint tp;
        try {
            tp = parse_utc(t.text(r, "time_iso8601"));
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string(), r + 1, "time_iso8601", e.what());
        }
        const double v = t.number(r, "pct_with_power");
        if (!(v >= 0.0 && v <= 100.0)) {
            throw ParseError(path.string(), r + 1, "pct_with_power",
                             "value outside [0, 100]");
        }
        times.insert(tp);
        rows.emplace_back(tp, t.text(r, "region"), v);
    }
    obs.times.assign(times.begin(), times.end());
    for (const auto& [tp, region, v] : rows) {
        auto& series = obs.pct_with_power[region];
        if (series.empty()) {
            series.assign(obs.times.size(), NAN);
        }
        const auto k = static_cast<std::size_t>(
            std::lower_bound(obs.times.begin(), obs.times.end(), tp) - obs.times.begin());
        if (!std::isnan(series[k])) {
            throw ParseError(path.string(), 0, "time_iso8601",
                             fmt::format("duplicate entry for region {} at {}", region,
                                         format_utc(tp)));
        }
        series[k] = v;
    }
    return obs;
}

std::vector<double> aggregate_observed(const ObservedTrajectory& obs, const GridModel* grid)
{
    auto all = obs.pct_with_power.find("all");
    if (all != obs.pct_with_power.end()) {
        return all->second;
    }
    std::map<std::string, double> weight;
    if (grid) {
        const auto& ix = grid->idx();
        for (std::size_t d = 0; d < grid->feeders.size(); ++d) {
            weight[grid->buses[static_cast<std::size_t>(ix.feeder_bus[d])].region] +=
                grid->feeders[d].customers;
        }
    }
    std::vector<double> out(obs.times.size(), NAN);
    for (std::size_t k = 0; k < obs.times.size(); ++k) {
        double num = 0.0;
        double den = 0.0;
        for (const auto& [region, series] : obs.pct_with_power) {
            if (std::isnan(series[k])) {
                continue;
            }
            const double w = grid ? (weight.count(region) ? weight.at(region) : 0.0) : 1.0;
            num += w * series[k];
            den += w;
        }
        if (den > 0.0) {
            out[k] = num / den;
        }
    }
    return out;
}

namespace {

std::vector<int> align(const Horizon& h, const std::vector<TimePoint>& times,
                       const std::vector<double>& pct)
{
    if (times.empty() || times.size() != pct.size()) {
        throw MisalignedTimeGrid("observed series is empty");
    }
    std::vector<int> steps;
    for (const TimePoint t : times) {
        const auto offset = t - h.start;
        if (offset.count() < 0 || offset % h.step != std::chrono::seconds(0)) {
            throw MisalignedTimeGrid(fmt::format("observed time {} is not a simulation step",
                                                 format_utc(t)));
        }
        const auto k = static_cast<int>(offset / h.step);
        if (k >= h.steps) {
            throw MisalignedTimeGrid(fmt::format("observed time {} is past the horizon",
                                                 format_utc(t)));
        }
        steps.push_back(k);
    }
    return steps;
}

std::optional<int> first_zero(const std::vector<int>& steps, const std::vector<double>& pct)
{
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!std::isnan(pct[i]) && pct[i] <= 0.0) {
            return steps[i];
        }
    }
    return std::nullopt;
}

void finish(ComparisonReport& rep)
{
    int n = 0;
    int in90 = 0;
    int in50 = 0;
    for (const auto& p : rep.points) {
        if (std::isnan(p.observed)) {
            continue;
        }
        ++n;
        in90 += p.in_band_90;
        in50 += p.in_band_50;
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(p.deviation));
    }
    if (n > 0) {
        rep.coverage_90 = static_cast<double>(in90) / n;
        rep.coverage_50 = static_cast<double>(in50) / n;
    }
}

} // namespace

ComparisonReport compare_observed(const EnsembleSummary& summary, const Horizon& horizon,
                                  const std::vector<TimePoint>& times,
                                  const std::vector<double>& observed_pct)
{
    const std::vector<int> steps = align(horizon, times, observed_pct);
    ComparisonReport rep;
    const auto& q = summary.quantiles;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto k = static_cast<std::size_t>(steps[i]);
        ComparisonPoint p;
        p.step = steps[i];
        p.observed = observed_pct[i] / 100.0;
        if (k < q.p50.size()) {
            p.simulated = q.p50[k];
            p.in_band_90 = p.observed >= q.p05[k] && p.observed <= q.p95[k];
            p.in_band_50 = p.observed >= q.p25[k] && p.observed <= q.p75[k];
        }
        p.deviation = p.observed - p.simulated;
        rep.points.push_back(p);
    }
    finish(rep);
    rep.observed_blackout_step = first_zero(steps, observed_pct);
    int total = 0;
    int first = -1;
    int last = -1;
    for (std::size_t k = 0; k < summary.blackout_histogram.size(); ++k) {
        const int c = summary.blackout_histogram[k];
        if (c > 0) {
            first = first < 0 ? static_cast<int>(k) : first;
            last = static_cast<int>(k);
        }
        total += c;
    }
    if (rep.observed_blackout_step && total > 0) {
        int upto = 0;
        for (int k = 0; k <= *rep.observed_blackout_step &&
                        k < static_cast<int>(summary.blackout_histogram.size());
             ++k) {
            upto += summary.blackout_histogram[static_cast<std::size_t>(k)];
        }
        rep.blackout_percentile = static_cast<double>(upto) / total;
        rep.blackout_in_support =
            *rep.observed_blackout_step >= first && *rep.observed_blackout_step <= last;
    }
    return rep;
}

ComparisonReport compare_observed(const RealizationResult& result, const Horizon& horizon,
                                  const std::vector<TimePoint>& times,
                                  const std::vector<double>& observed_pct)
{
    const std::vector<int> steps = align(horizon, times, observed_pct);
    ComparisonReport rep;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto k = static_cast<std::size_t>(steps[i]);
        ComparisonPoint p;
        p.step = steps[i];
        p.observed = observed_pct[i] / 100.0;
        p.simulated = k < result.performance.size() ? result.performance[k] : 0.0;
        p.deviation = p.observed - p.simulated;
        p.in_band_90 = p.in_band_50 = p.deviation == 0.0;
        rep.points.push_back(p);
    }
    finish(rep);
    rep.observed_blackout_step = first_zero(steps, observed_pct);
    if (rep.observed_blackout_step && result.blackout_step) {
        rep.blackout_percentile = *result.blackout_step <= *rep.observed_blackout_step ? 1.0 : 0.0;
        rep.blackout_in_support = *result.blackout_step == *rep.observed_blackout_step;
    }
    return rep;
}

nlohmann::json comparison_to_json(const ComparisonReport& report, const Horizon& horizon)
{
    using nlohmann::json;
    auto finite = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    json pts = json::array();
    for (const auto& p : report.points) {
        pts.push_back({{"step", p.step},
                       {"time_utc", format_utc(horizon.time_at(p.step))},
                       {"observed", finite(p.observed)},
                       {"simulated", p.simulated},
                       {"deviation", finite(p.deviation)},
                       {"in_band_90", p.in_band_90},
                       {"in_band_50", p.in_band_50}});
    }
    return {
        {"coverage_90", report.coverage_90},
        {"coverage_50", report.coverage_50},
        {"max_abs_deviation", report.max_abs_deviation},
        {"observed_blackout_step",
         report.observed_blackout_step ? json(*report.observed_blackout_step) : json(nullptr)},
        {"observed_blackout_time",
         report.observed_blackout_step
             ? json(format_utc(horizon.time_at(*report.observed_blackout_step)))
             : json(nullptr)},
        {"blackout_percentile",
         report.blackout_percentile ? json(*report.blackout_percentile) : json(nullptr)},
        {"blackout_in_support", report.blackout_in_support},
        {"points", pts},
    };
}

} // namespace crescent
