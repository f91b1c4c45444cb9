// crescent: hurricane/grid cascade simulator command line.

#include "crescent/ensemble.hpp"
#include "crescent/errors.hpp"
#include "crescent/observed.hpp"
#include "crescent/results_io.hpp"
#include "crescent/run_config.hpp"
#include "crescent/rng.hpp"
#include "crescent/testbed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

using namespace crescent;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kInvalid = 2;

struct Common
{
    std::string config;
    std::string out;
};

Provenance provenance(const Scenario& s) { return {s.hash, kSchemaVersion}; }

std::filesystem::path out_dir(const Scenario& s, const std::string& flag)
{
    return flag.empty() ? s.config.resolve(s.config.output_dir) : std::filesystem::path(flag);
}

Manifest manifest_for(const Scenario& s, const EnsembleOptions& o)
{
    Manifest m;
    m.config_hash = s.hash;
    m.requested = o.n;
    m.master_seed = o.master_seed;
    m.steps = s.settings.horizon.steps;
    m.start = format_utc(s.settings.horizon.start);
    m.step_minutes = s.config.step_minutes;
    m.line_ids = line_ids(s.grid);
    return m;
}

int cmd_validate(const std::string& path)
{
    json report = {{"config", path}, {"errors", json::array()}};
    try {
        const RunConfig cfg = load_run_config(path);
        for (const auto& e : validate_config(cfg)) {
            report["errors"].push_back(e);
        }
        report["config_hash"] = config_hash(cfg);
    } catch (const Error& e) {
        report["errors"].push_back(e.what());
    }
    report["ok"] = report["errors"].empty();
    std::cout << report.dump(2) << "\n";
    return report["errors"].empty() ? kOk : kInvalid;
}

int cmd_simulate(const Common& c, std::optional<std::uint64_t> seed, int index)
{
    const Scenario s = load_scenario(load_run_config(c.config));
    const HazardTable hz = HazardTable::compute(s.grid, s.track, s.roughness, s.settings);
    DispatchCache cache;
    const RealizationInputs in{s.grid, s.curves, hz, s.settings, &cache};
    const std::uint64_t sd = seed ? *seed : rng::realization_seed(s.config.master_seed, index);
    const RealizationResult r = run_realization(in, sd, index);
    const auto dir = out_dir(s, c.out);
    write_realization(dir, r, s.settings.horizon, provenance(s));
    spdlog::info("realization seed {} final performance {:.4f}{}", sd, r.performance.back(),
                 r.blackout_step ? fmt::format(", blackout at step {}", *r.blackout_step) : "");
    std::cout << dir.string() << "\n";
    return kOk;
}

EnsembleOptions ensemble_options(const Scenario& s, std::optional<int> n, std::optional<int> workers)
{
    EnsembleOptions o;
    o.n = n.value_or(s.config.n);
    o.workers = workers.value_or(s.config.workers);
    o.master_seed = s.config.master_seed;
    if (o.n < 1 || o.workers < 1) {
        throw ConfigError("--n and --workers must be positive");
    }
    return o;
}

int cmd_ensemble(const Common& c, std::optional<int> n, std::optional<int> workers,
                 const std::vector<double>& preset_ranks, const std::string& preset_component)
{
    const Scenario s = load_scenario(load_run_config(c.config));
    const HazardTable hz = HazardTable::compute(s.grid, s.track, s.roughness, s.settings);
    DispatchCache cache;
    const RealizationInputs in{s.grid, s.curves, hz, s.settings, &cache};
    const EnsembleOptions o = ensemble_options(s, n, workers);
    const auto dir = out_dir(s, c.out);

    if (!preset_ranks.empty()) {
        const PresetExperiment ex = preset_experiment(in, o, preset_component, preset_ranks);
        write_text_file(dir / "preset.json", dump_json(preset_to_json(ex, provenance(s))));
        for (const auto& oc : ex.outcomes) {
            spdlog::info("{} at rank {}: blackout probability {:.3f} (delta {:+.3f})",
                         ex.component, oc.rank, oc.blackout_probability, oc.delta);
        }
        std::cout << (dir / "preset.json").string() << "\n";
        return kOk;
    }

    const EnsembleRun run = run_ensemble(in, o);
    const Manifest m = manifest_for(s, o);
    const EnsembleSummary sum =
        summarize(run.results, m.steps, m.line_ids, static_cast<int>(run.failures.size()));
    write_ensemble(dir, run, m, sum);
    if (!run.failures.empty()) {
        spdlog::warn("{} of {} realizations failed", run.failures.size(), o.n);
    }
    spdlog::info("blackout probability {:.3f} over {} realizations", sum.blackout_probability, sum.n);
    std::cout << (dir / "summary.json").string() << "\n";
    return kOk;
}

int cmd_sweep(const Common& c, const std::string& levels_text, std::optional<int> n,
              std::optional<int> workers)
{
    const Scenario s = load_scenario(load_run_config(c.config));
    const std::vector<double> levels = parse_levels(levels_text);
    const HazardTable hz = HazardTable::compute(s.grid, s.track, s.roughness, s.settings);
    const EnsembleOptions o = ensemble_options(s, n, workers);
    const auto rows = sensitivity_sweep(s.grid, s.curves, hz, s.settings, levels, o);
    const auto dir = out_dir(s, c.out);
    write_text_file(dir / "sweep.csv", sweep_csv(rows, provenance(s)));
    std::cout << (dir / "sweep.csv").string() << "\n";
    return kOk;
}

int cmd_metrics(const std::string& results_dir, const std::string& out)
{
    const StoredEnsemble stored = read_ensemble(results_dir);
    const EnsembleSummary sum = summarize_stored(stored);
    const std::filesystem::path dir = out.empty() ? std::filesystem::path(results_dir) : std::filesystem::path(out);
    write_summary_files(dir, sum, {stored.manifest.config_hash, stored.manifest.schema_version});
    std::cout << (dir / "summary.json").string() << "\n";
    return kOk;
}

int cmd_compare(const Common& c, const std::string& results_dir, const std::string& observed)
{
    const RunConfig cfg = load_run_config(c.config);
    const Scenario s = load_scenario(cfg);
    std::filesystem::path obs_path;
    if (!observed.empty()) {
        obs_path = observed;
    } else if (cfg.observed) {
        obs_path = cfg.resolve(*cfg.observed);
    } else {
        throw ConfigError("no observed data: pass --observed or set 'observed' in the config");
    }
    const ObservedTrajectory obs = load_observed(obs_path);
    const std::vector<double> pct = aggregate_observed(obs, &s.grid);
    const std::filesystem::path rdir = results_dir.empty() ? out_dir(s, c.out) : std::filesystem::path(results_dir);
    const StoredEnsemble stored = read_ensemble(rdir);
    if (stored.manifest.config_hash != s.hash) {
        spdlog::warn("results were produced with config {} but this config is {}",
                     stored.manifest.config_hash, s.hash);
    }
    const ComparisonReport rep =
        compare_observed(summarize_stored(stored), s.settings.horizon, obs.times, pct);
    json j = comparison_to_json(rep, s.settings.horizon);
    j["config_hash"] = s.hash;
    j["schema_version"] = kSchemaVersion;
    const auto dir = c.out.empty() ? rdir : std::filesystem::path(c.out);
    write_text_file(dir / "comparison.json", dump_json(j));
    std::cout << (dir / "comparison.json").string() << "\n";
    return kOk;
}

int cmd_gen_testbed(const std::string& name, const std::string& dir)
{
    testbed::write_testbed(name, dir);
    std::cout << dir << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    auto logger = spdlog::stderr_color_mt("crescent");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Hurricane wind, grid cascade and dispatch simulator.\n\n"
                 "Config defaults (JSON keys):\n" +
                 defaults_table()};
    app.require_subcommand(1);
    std::string level = "info";
    app.add_option("--log-level", level, "trace, debug, info, warn, error or off")
        ->capture_default_str();

    Common common;
    std::optional<std::uint64_t> seed;
    int index = 0;
    std::optional<int> n;
    std::optional<int> workers;
    std::string levels = "0.1:0.8:0.1";
    std::vector<double> preset_ranks;
    std::string preset_component;
    std::string results_dir;
    std::string observed;
    std::string testbed_name;
    std::string testbed_dir;

    auto* validate = app.add_subcommand("validate", "Check a config and every input it names");
    validate->add_option("config", common.config, "run config JSON")->required();

    auto* simulate = app.add_subcommand("simulate", "Run one realization");
    simulate->add_option("config", common.config, "run config JSON")->required();
    simulate->add_option("--seed", seed, "realization seed (default: derived from master_seed)");
    simulate->add_option("--index", index, "realization index used to derive the seed")
        ->capture_default_str();
    simulate->add_option("--out", common.out, "output directory (default: config output_dir)");

    auto* ensemble = app.add_subcommand("ensemble", "Run an ensemble and write its summary");
    ensemble->add_option("config", common.config, "run config JSON")->required();
    ensemble->add_option("--n", n, "realizations (default: config ensemble.n)");
    ensemble->add_option("--workers", workers, "worker threads (default: config ensemble.workers)");
    ensemble->add_option("--out", common.out, "output directory (default: config output_dir)");
    ensemble->add_option("--preset", preset_ranks,
                         "run the preset-resistance experiment at these ranks, e.g. 0.01 0.1 1");
    ensemble->add_option("--component", preset_component,
                         "component for --preset (default: highest critical index line)");

    auto* sweep = app.add_subcommand("sweep", "Blackout probability versus rooftop solar level");
    sweep->add_option("config", common.config, "run config JSON")->required();
    sweep->add_option("--levels", levels, "start:stop:step or a single level")->capture_default_str();
    sweep->add_option("--n", n, "realizations per level (default: config ensemble.n)");
    sweep->add_option("--workers", workers, "worker threads (default: config ensemble.workers)");
    sweep->add_option("--out", common.out, "output directory (default: config output_dir)");

    auto* metrics = app.add_subcommand("metrics", "Recompute summary metrics from stored results");
    metrics->add_option("results", results_dir, "results directory holding manifest.json")
        ->required();
    metrics->add_option("--out", common.out, "output directory (default: the results directory)");

    auto* compare = app.add_subcommand("compare", "Compare an ensemble with observed outage data");
    compare->add_option("config", common.config, "run config JSON")->required();
    compare->add_option("--results", results_dir, "results directory (default: config output_dir)");
    compare->add_option("--observed", observed, "observed CSV (default: config observed)");
    compare->add_option("--out", common.out, "output directory (default: the results directory)");

    auto* gen = app.add_subcommand("gen-testbed", "Write a synthetic testbed");
    gen->add_option("name", testbed_name, "testbed name")
        ->required()
        ->check(CLI::IsMember(testbed::names()));
    gen->add_option("dir", testbed_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }
    spdlog::set_level(spdlog::level::from_str(level));

    try {
        if (*validate) {
            return cmd_validate(common.config);
        }
        if (*simulate) {
            return cmd_simulate(common, seed, index);
        }
        if (*ensemble) {
            return cmd_ensemble(common, n, workers, preset_ranks, preset_component);
        }
        if (*sweep) {
            return cmd_sweep(common, levels, n, workers);
        }
        if (*metrics) {
            return cmd_metrics(results_dir, common.out);
        }
        if (*compare) {
            return cmd_compare(common, results_dir, observed);
        }
        if (*gen) {
            return cmd_gen_testbed(testbed_name, testbed_dir);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kRuntime;
    }
    return kRuntime;
}
