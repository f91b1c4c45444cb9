#include "crescent/results_io.hpp"

#include "crescent/csv.hpp"
#include "crescent/errors.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace crescent {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, std::string_view content)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error(fmt::format("cannot create {}: {}", path.parent_path().string(),
                                    ec.message()));
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(fmt::format("cannot write {}", path.string()));
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
        throw Error(fmt::format("error writing {}", path.string()));
    }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

namespace {

std::string header(const Provenance& p)
{
    return fmt::format("# schema_version={} config_hash={}\n", p.schema_version, p.config_hash);
}

// JSON has no infinities; they are spelled out so values round-trip exactly.
json num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

double get_num(const json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") {
            return INFINITY;
        }
        if (s == "-inf") {
            return -INFINITY;
        }
        if (s == "nan") {
            return NAN;
        }
        throw ConfigError(fmt::format("bad number '{}'", s));
    }
    return j.get<double>();
}

json num_array(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v) {
        a.push_back(num(x));
    }
    return a;
}

std::vector<double> get_array(const json& j)
{
    std::vector<double> v;
    for (const auto& x : j) {
        v.push_back(get_num(x));
    }
    return v;
}

} // namespace

std::string trajectory_csv(const RealizationResult& r, const Horizon& h, const Provenance& p)
{
    std::string out = header(p) + "step,time_utc,performance,served_mw,shed_mw\n";
    for (std::size_t t = 0; t < r.performance.size(); ++t) {
        out += fmt::format("{},{},{},{},{}\n", t, format_utc(h.time_at(static_cast<int>(t))),
                           r.performance[t], r.served_mw[t], r.shed_mw[t]);
    }
    return out;
}

std::string events_csv(const RealizationResult& r, const Provenance& p)
{
    std::string out = header(p) + "step,kind,component,magnitude\n";
    for (const auto& e : r.events) {
        out += fmt::format("{},{},{},{}\n", e.step, to_string(e.kind), csv_field(e.component),
                           e.magnitude);
    }
    return out;
}

void write_realization(const std::filesystem::path& dir, const RealizationResult& r,
                       const Horizon& h, const Provenance& p)
{
    write_text_file(dir / "trajectory.csv", trajectory_csv(r, h, p));
    write_text_file(dir / "events.csv", events_csv(r, p));
}

json realization_to_json(const RealizationResult& r)
{
    json events = json::array();
    for (const auto& e : r.events) {
        events.push_back({e.step, std::string(to_string(e.kind)), e.component, num(e.magnitude)});
    }
    return {
        {"index", r.index},
        {"seed", r.seed},
        {"performance", num_array(r.performance)},
        {"served_mw", num_array(r.served_mw)},
        {"shed_mw", num_array(r.shed_mw)},
        {"events", events},
        {"blackout_step", r.blackout_step ? json(*r.blackout_step) : json(nullptr)},
        {"largest_failure", {{"step", r.largest.step}, {"drop", num(r.largest.drop)}}},
    };
}

RealizationResult realization_from_json(const json& j)
{
    try {
        RealizationResult r;
        r.index = j.at("index").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.performance = get_array(j.at("performance"));
        r.served_mw = get_array(j.at("served_mw"));
        r.shed_mw = get_array(j.at("shed_mw"));
        for (const auto& e : j.at("events")) {
            r.events.push_back({e.at(0).get<int>(), event_kind_from_string(e.at(1).get<std::string>()),
                                e.at(2).get<std::string>(), get_num(e.at(3))});
        }
        if (!j.at("blackout_step").is_null()) {
            r.blackout_step = j.at("blackout_step").get<int>();
        }
        r.largest.step = j.at("largest_failure").at("step").get<int>();
        r.largest.drop = get_num(j.at("largest_failure").at("drop"));
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed realization record: {}", e.what()));
    }
}

json manifest_to_json(const Manifest& m)
{
    json failures = json::array();
    for (const auto& f : m.failures) {
        failures.push_back({{"index", f.index}, {"message", f.message}});
    }
    return {
        {"schema_version", m.schema_version},
        {"config_hash", m.config_hash},
        {"requested", m.requested},
        {"master_seed", m.master_seed},
        {"steps", m.steps},
        {"start", m.start},
        {"step_minutes", m.step_minutes},
        {"line_ids", m.line_ids},
        {"files", m.files},
        {"failures", failures},
    };
}

Manifest manifest_from_json(const json& j)
{
    try {
        Manifest m;
        m.schema_version = j.at("schema_version").get<int>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.requested = j.at("requested").get<int>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.steps = j.at("steps").get<int>();
        m.start = j.at("start").get<std::string>();
        m.step_minutes = j.at("step_minutes").get<int>();
        m.line_ids = j.at("line_ids").get<std::vector<std::string>>();
        m.files = j.at("files").get<std::vector<std::string>>();
        for (const auto& f : j.at("failures")) {
            m.failures.push_back({f.at("index").get<int>(), f.at("message").get<std::string>()});
        }
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed manifest: {}", e.what()));
    }
}

json summary_to_json(const EnsembleSummary& s, const Provenance& p)
{
    auto points = [](std::span<const FailurePoint> pts) {
        json a = json::array();
        for (const auto& pt : pts) {
            a.push_back({{"index", pt.index}, {"step", pt.step},
                         {"performance", num(pt.performance)}, {"drop", num(pt.drop)}});
        }
        return a;
    };
    json critical = json::array();
    for (std::size_t l = 0; l < s.line_ids.size(); ++l) {
        critical.push_back({{"line", s.line_ids[l]}, {"index", num(s.critical_index[l])}});
    }
    return {
        {"schema_version", p.schema_version},
        {"config_hash", p.config_hash},
        {"n", s.n},
        {"failed_count", s.failed_count},
        {"blackout_probability", num(s.blackout_probability)},
        {"blackout_histogram", s.blackout_histogram},
        {"median_blackout_step",
         s.median_blackout_step ? num(*s.median_blackout_step) : json(nullptr)},
        {"mean_final_performance", num(s.mean_final_performance)},
        {"resilient_count", s.partition.resilient.size()},
        {"vulnerable_count", s.partition.vulnerable.size()},
        {"largest_failure_points",
         {{"resilient", points(s.partition.resilient)},
          {"vulnerable", points(s.partition.vulnerable)}}},
        {"critical_index", critical},
        {"quantiles",
         {{"p05", num_array(s.quantiles.p05)},
          {"p25", num_array(s.quantiles.p25)},
          {"p50", num_array(s.quantiles.p50)},
          {"p75", num_array(s.quantiles.p75)},
          {"p95", num_array(s.quantiles.p95)}}},
    };
}

std::string points_csv(std::span<const FailurePoint> points, const Provenance& p)
{
    std::string out = header(p) + "step,performance,drop\n";
    for (const auto& pt : points) {
        out += fmt::format("{},{},{}\n", pt.step, pt.performance, pt.drop);
    }
    return out;
}

void write_summary_files(const std::filesystem::path& dir, const EnsembleSummary& summary,
                         const Provenance& p)
{
    write_text_file(dir / "summary.json", dump_json(summary_to_json(summary, p)));
    write_text_file(dir / "points_resilient.csv", points_csv(summary.partition.resilient, p));
    write_text_file(dir / "points_vulnerable.csv", points_csv(summary.partition.vulnerable, p));
}

void write_ensemble(const std::filesystem::path& dir, const EnsembleRun& run,
                    const Manifest& manifest, const EnsembleSummary& summary)
{
    Manifest m = manifest;
    m.files.clear();
    m.failures = run.failures;
    for (const auto& r : run.results) {
        const std::string name = fmt::format("realizations/realization_{:06d}.json", r.index);
        write_text_file(dir / name, realization_to_json(r).dump() + "\n");
        m.files.push_back(name);
    }
    write_text_file(dir / "manifest.json", dump_json(manifest_to_json(m)));
    write_summary_files(dir, summary, {m.config_hash, m.schema_version});
}

StoredEnsemble read_ensemble(const std::filesystem::path& dir)
{
    const auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw MissingFile(manifest_path.string());
    }
    StoredEnsemble s;
    try {
        s.manifest = manifest_from_json(json::parse(read_text_file(manifest_path)));
        for (const auto& f : s.manifest.files) {
            s.results.push_back(realization_from_json(json::parse(read_text_file(dir / f))));
        }
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", dir.string(), e.what()));
    }
    return s;
}

EnsembleSummary summarize_stored(const StoredEnsemble& stored)
{
    return summarize(stored.results, stored.manifest.steps, stored.manifest.line_ids,
                     static_cast<int>(stored.manifest.failures.size()));
}

std::string sweep_csv(std::span<const SweepRow> rows, const Provenance& p)
{
    std::string out = header(p) + "level,blackout_probability,median_blackout_step,n\n";
    for (const auto& r : rows) {
        const auto& s = r.summary;
        out += fmt::format("{},{},{},{}\n", r.level, s.blackout_probability,
                           s.median_blackout_step ? fmt::format("{}", *s.median_blackout_step)
                                                  : std::string(),
                           s.n);
    }
    return out;
}

json preset_to_json(const PresetExperiment& ex, const Provenance& p)
{
    json outcomes = json::array();
    for (const auto& o : ex.outcomes) {
        outcomes.push_back({{"rank", num(o.rank)},
                            {"blackout_probability", num(o.blackout_probability)},
                            {"delta", num(o.delta)},
                            {"n", o.n}});
    }
    return {
        {"schema_version", p.schema_version},
        {"config_hash", p.config_hash},
        {"component", ex.component},
        {"baseline_probability", num(ex.baseline_probability)},
        {"baseline_n", ex.baseline_n},
        {"outcomes", outcomes},
    };
}

} // namespace crescent
