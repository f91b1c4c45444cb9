#include "crescent/run_config.hpp"

#include "crescent/csv.hpp"
#include "crescent/errors.hpp"
#include "crescent/rng.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

namespace crescent {

using nlohmann::json;

namespace {

/// Reads one JSON object, rejecting keys nobody asked for.
class Section
{
public:
    Section(const json& node, std::string where) : node_(node), where_(std::move(where))
    {
        if (!node_.is_object()) {
            throw ConfigError(fmt::format("{} must be an object", where_));
        }
    }

    bool has(const std::string& key)
    {
        seen_.insert(key);
        return node_.contains(key) && !node_.at(key).is_null();
    }

    template <typename T>
    void read(const std::string& key, T& out)
    {
        if (!has(key)) {
            return;
        }
        try {
            out = node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(fmt::format("{}.{} has the wrong type", where_, key));
        }
    }

    void read_path(const std::string& key, std::filesystem::path& out)
    {
        std::string s;
        read(key, s);
        if (!s.empty()) {
            out = s;
        }
    }

    void read_path(const std::string& key, std::optional<std::filesystem::path>& out)
    {
        if (has(key)) {
            std::filesystem::path p;
            read_path(key, p);
            out = p;
        }
    }

    template <typename T>
    void read(const std::string& key, std::optional<T>& out)
    {
        if (has(key)) {
            T v{};
            read(key, v);
            out = v;
        }
    }

    Section child(const std::string& key)
    {
        seen_.insert(key);
        static const json empty = json::object();
        if (!node_.contains(key) || node_.at(key).is_null()) {
            return Section(empty, where_ + "." + key);
        }
        return Section(node_.at(key), where_ + "." + key);
    }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        return node_.at(key);
    }

    void finish() const
    {
        for (const auto& [k, v] : node_.items()) {
            if (!seen_.count(k)) {
                throw ConfigError(fmt::format("unknown key {}.{}", where_, k));
            }
        }
    }

    const std::string& where() const { return where_; }

private:
    const json& node_;
    std::string where_;
    std::set<std::string> seen_;
};

json opt_path(const std::optional<std::filesystem::path>& p)
{
    return p ? json(p->generic_string()) : json(nullptr);
}

} // namespace

Horizon RunConfig::horizon() const
{
    try {
        return Horizon::between(parse_utc(start), parse_utc(end), std::chrono::minutes(step_minutes));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("horizon: {}", e.what()));
    }
}

json RunConfig::to_json() const
{
    json costs = json::object();
    for (const auto& [k, v] : generation_cost_by_kind) {
        costs[std::string(to_string(k))] = v;
    }
    json forced = json::array();
    for (const auto& f : forced_failures) {
        forced.push_back({{"step", f.step}, {"component", f.component}});
    }
    return {
        {"schema_version", schema_version},
        {"grid",
         {{"dir", grid_dir.generic_string()},
          {"system_base_mva", system_base_mva},
          {"rated_frequency_hz", rated_frequency_hz},
          {"integration_level", integration_level ? json(*integration_level) : json(nullptr)}}},
        {"hazard",
         {{"track", track.generic_string()},
          {"roughness", opt_path(roughness)},
          {"z0_ref", z0_ref},
          {"vmax_scale", vmax_scale},
          {"profile", std::string(to_string(wind.kind))},
          {"decay_exponent", wind.decay_exponent},
          {"holland_b", wind.holland_b},
          {"background_fraction", wind.background_fraction},
          {"background_rotation_deg", wind.background_rotation_deg},
          {"gust_factor", wind.gust_factor},
          {"resample_km", wind.resample_km}}},
        {"vulnerability",
         {{"fragility", opt_path(fragility)},
          {"tower_spacing_km", tower_spacing_km},
          {"turbine_cutout_ms", turbine_cutout_ms},
          {"solar",
           {{"inner_radius_factor", solar.inner_radius_factor},
            {"outer_radius_factor", solar.outer_radius_factor},
            {"min_fraction", solar.min_fraction},
            {"diurnal_hourly", solar.diurnal.hourly}}}}},
        {"horizon", {{"start", start}, {"end", end}, {"step_minutes", step_minutes}}},
        {"cascade",
         {{"rocof_limit", rocof_limit},
          {"probabilistic_trip", probabilistic_trip},
          {"trip_probability", trip_probability}}},
        {"dispatch",
         {{"voll", weights.voll},
          {"curtailment", weights.curtailment},
          {"generation_cost_by_kind", costs},
          {"exact_unit_limit", exact_unit_limit},
          {"start_margin", start_margin}}},
        {"ensemble", {{"n", n}, {"master_seed", master_seed}, {"workers", workers}}},
        {"observed", opt_path(observed)},
        {"output_dir", output_dir.generic_string()},
        {"forced_failures", forced},
    };
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir)
{
    RunConfig c;
    c.base_dir = base_dir.empty() ? std::filesystem::path(".") : base_dir;
    Section root(doc, "config");
    if (!root.has("schema_version")) {
        throw ConfigError("config.schema_version is required");
    }
    root.read("schema_version", c.schema_version);
    if (c.schema_version != kSchemaVersion) {
        throw ConfigError(fmt::format("unsupported schema_version {} (this build reads {})",
                                      c.schema_version, kSchemaVersion));
    }

    Section grid = root.child("grid");
    grid.read_path("dir", c.grid_dir);
    grid.read("system_base_mva", c.system_base_mva);
    grid.read("rated_frequency_hz", c.rated_frequency_hz);
    grid.read("integration_level", c.integration_level);
    grid.finish();
    if (c.grid_dir.empty()) {
        throw ConfigError("config.grid.dir is required");
    }

    Section hz = root.child("hazard");
    hz.read_path("track", c.track);
    hz.read_path("roughness", c.roughness);
    hz.read("z0_ref", c.z0_ref);
    hz.read("vmax_scale", c.vmax_scale);
    if (hz.has("profile")) {
        std::string kind;
        hz.read("profile", kind);
        try {
            c.wind.kind = profile_kind_from_string(kind);
        } catch (const Error& e) {
            throw ConfigError(fmt::format("config.hazard.profile: {}", e.what()));
        }
    }
    hz.read("decay_exponent", c.wind.decay_exponent);
    hz.read("holland_b", c.wind.holland_b);
    hz.read("background_fraction", c.wind.background_fraction);
    hz.read("background_rotation_deg", c.wind.background_rotation_deg);
    hz.read("gust_factor", c.wind.gust_factor);
    hz.read("resample_km", c.wind.resample_km);
    hz.finish();
    if (c.track.empty()) {
        throw ConfigError("config.hazard.track is required");
    }

    Section vul = root.child("vulnerability");
    vul.read_path("fragility", c.fragility);
    vul.read("tower_spacing_km", c.tower_spacing_km);
    vul.read("turbine_cutout_ms", c.turbine_cutout_ms);
    Section sol = vul.child("solar");
    sol.read("inner_radius_factor", c.solar.inner_radius_factor);
    sol.read("outer_radius_factor", c.solar.outer_radius_factor);
    sol.read("min_fraction", c.solar.min_fraction);
    if (sol.has("diurnal_hourly")) {
        std::vector<double> h;
        sol.read("diurnal_hourly", h);
        if (h.size() != 24) {
            throw ConfigError("config.vulnerability.solar.diurnal_hourly needs 24 values");
        }
        std::copy(h.begin(), h.end(), c.solar.diurnal.hourly.begin());
    }
    sol.finish();
    vul.finish();

    Section hor = root.child("horizon");
    hor.read("start", c.start);
    hor.read("end", c.end);
    hor.read("step_minutes", c.step_minutes);
    hor.finish();

    Section cas = root.child("cascade");
    cas.read("rocof_limit", c.rocof_limit);
    cas.read("probabilistic_trip", c.probabilistic_trip);
    cas.read("trip_probability", c.trip_probability);
    cas.finish();

    Section dis = root.child("dispatch");
    dis.read("voll", c.weights.voll);
    dis.read("curtailment", c.weights.curtailment);
    dis.read("exact_unit_limit", c.exact_unit_limit);
    dis.read("start_margin", c.start_margin);
    if (dis.has("generation_cost_by_kind")) {
        const json& costs = dis.raw("generation_cost_by_kind");
        if (!costs.is_object()) {
            throw ConfigError("config.dispatch.generation_cost_by_kind must be an object");
        }
        for (const auto& [k, v] : costs.items()) {
            if (!v.is_number()) {
                throw ConfigError(fmt::format("generation cost for {} must be a number", k));
            }
            try {
                c.generation_cost_by_kind[generator_kind_from_string(k)] = v.get<double>();
            } catch (const Error& e) {
                throw ConfigError(fmt::format("config.dispatch.generation_cost_by_kind: {}", e.what()));
            }
        }
    }
    dis.finish();

    Section ens = root.child("ensemble");
    ens.read("n", c.n);
    ens.read("master_seed", c.master_seed);
    ens.read("workers", c.workers);
    ens.finish();

    root.read_path("observed", c.observed);
    root.read_path("output_dir", c.output_dir);
    if (root.has("forced_failures")) {
        const json& arr = root.raw("forced_failures");
        if (!arr.is_array()) {
            throw ConfigError("config.forced_failures must be an array");
        }
        for (const auto& item : arr) {
            Section f(item, "config.forced_failures[]");
            ForcedFailure ff;
            f.read("step", ff.step);
            f.read("component", ff.component);
            f.finish();
            if (ff.component.empty()) {
                throw ConfigError("forced failure needs a component");
            }
            c.forced_failures.push_back(ff);
        }
    }
    root.finish();

    if (c.step_minutes <= 0) {
        throw ConfigError("config.horizon.step_minutes must be positive");
    }
    if (c.n < 1 || c.workers < 1) {
        throw ConfigError("config.ensemble n and workers must be at least 1");
    }
    if (!(c.vmax_scale >= 0.0)) {
        throw ConfigError("config.hazard.vmax_scale must be non-negative");
    }
    if (!(c.rocof_limit > 0.0)) {
        throw ConfigError("config.cascade.rocof_limit must be positive");
    }
    if (c.trip_probability < 0.0 || c.trip_probability > 1.0) {
        throw ConfigError("config.cascade.trip_probability must lie in [0, 1]");
    }
    if (!(c.weights.voll > c.weights.curtailment) || !(c.weights.curtailment > 0.0)) {
        throw ConfigError("config.dispatch requires voll > curtailment > 0");
    }
    if (!(c.start_margin >= 0.0)) {
        throw ConfigError("config.dispatch.start_margin must be non-negative");
    }
    for (const auto& [k, v] : c.generation_cost_by_kind) {
        if (!(v >= 0.0) || !(v < c.weights.curtailment)) {
            throw ConfigError(fmt::format("generation cost for {} must lie in [0, curtailment)",
                                          to_string(k)));
        }
    }
    try {
        c.wind.validate();
        c.solar.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    c.horizon();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    const std::string text = read_text_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_run_config(doc, path.parent_path());
}

std::string config_hash(const RunConfig& config)
{
    return fmt::format("{:016x}", rng::fnv1a64(config.to_json().dump()));
}

std::string defaults_table()
{
    const RunConfig d;
    std::string out = "Run-config defaults (JSON keys):\n";
    auto row = [&](std::string_view key, const json& v) {
        out += fmt::format("  {:<44} {}\n", key, v.dump());
    };
    row("schema_version", d.schema_version);
    row("grid.system_base_mva", d.system_base_mva);
    row("grid.rated_frequency_hz", d.rated_frequency_hz);
    row("grid.integration_level", nullptr);
    row("hazard.roughness", nullptr);
    row("hazard.z0_ref", d.z0_ref);
    row("hazard.vmax_scale", d.vmax_scale);
    row("hazard.profile", std::string(to_string(d.wind.kind)));
    row("hazard.decay_exponent", d.wind.decay_exponent);
    row("hazard.holland_b", d.wind.holland_b);
    row("hazard.background_fraction", d.wind.background_fraction);
    row("hazard.background_rotation_deg", d.wind.background_rotation_deg);
    row("hazard.gust_factor", d.wind.gust_factor);
    row("hazard.resample_km", d.wind.resample_km);
    row("vulnerability.fragility", "built-in curves");
    row("vulnerability.tower_spacing_km", d.tower_spacing_km);
    row("vulnerability.turbine_cutout_ms", d.turbine_cutout_ms);
    row("vulnerability.solar.inner_radius_factor", d.solar.inner_radius_factor);
    row("vulnerability.solar.outer_radius_factor", d.solar.outer_radius_factor);
    row("vulnerability.solar.min_fraction", d.solar.min_fraction);
    row("vulnerability.solar.diurnal_hourly", "0 before 10:00 and from 22:00 UTC, else 1");
    row("horizon.start", d.start);
    row("horizon.end", d.end);
    row("horizon.step_minutes", d.step_minutes);
    row("cascade.rocof_limit", d.rocof_limit);
    row("cascade.probabilistic_trip", d.probabilistic_trip);
    row("cascade.trip_probability", d.trip_probability);
    row("dispatch.voll", d.weights.voll);
    row("dispatch.curtailment", d.weights.curtailment);
    row("dispatch.generation_cost_by_kind", "generator table cost column");
    row("dispatch.exact_unit_limit", d.exact_unit_limit);
    row("dispatch.start_margin", d.start_margin);
    row("ensemble.n", d.n);
    row("ensemble.master_seed", d.master_seed);
    row("ensemble.workers", d.workers);
    row("observed", nullptr);
    row("output_dir", d.output_dir.generic_string());
    row("forced_failures", json::array());
    return out;
}

namespace {

SimulationSettings settings_for(const RunConfig& c, const GridModel& grid)
{
    SimulationSettings s;
    s.horizon = c.horizon();
    s.wind = c.wind;
    s.solar = c.solar;
    s.rocof_limit = c.rocof_limit;
    s.probabilistic_trip = c.probabilistic_trip;
    s.trip_probability = c.trip_probability;
    s.weights = c.weights;
    s.dispatch.exact_unit_limit = c.exact_unit_limit;
    s.dispatch.start_margin = c.start_margin;
    s.tower_spacing_km = c.tower_spacing_km;
    s.turbine_cutout_ms = c.turbine_cutout_ms;
    s.forced_failures = c.forced_failures;
    for (const auto& g : grid.generators) {
        auto it = c.generation_cost_by_kind.find(g.kind);
        s.generation_cost.push_back(it != c.generation_cost_by_kind.end() ? it->second
                                                                          : g.marginal_cost);
    }
    return s;
}

void check_forced(const RunConfig& c, const GridModel& grid, const Horizon& h)
{
    for (const auto& f : c.forced_failures) {
        resolve_component(grid, f.component);
        if (f.step < 0 || f.step >= h.steps) {
            throw ConfigError(fmt::format("forced failure of {} at step {} is outside the horizon",
                                          f.component, f.step));
        }
    }
}

} // namespace

Scenario load_scenario(const RunConfig& config)
{
    GridModel grid = load_grid(GridPaths::in_directory(config.resolve(config.grid_dir)),
                               config.system_base_mva, config.rated_frequency_hz);
    const Horizon horizon = config.horizon();
    if (config.integration_level) {
        grid = scale_renewable_integration(grid, *config.integration_level, horizon,
                                           config.solar.diurnal);
        grid.validate();
    }
    StormTrack track = load_track(config.resolve(config.track));
    if (config.vmax_scale != 1.0) {
        track = track.scaled_intensity(config.vmax_scale);
    }
    RoughnessMap roughness =
        config.roughness ? RoughnessMap::load_esri_ascii(config.resolve(*config.roughness), config.z0_ref)
                         : RoughnessMap(config.z0_ref);
    FragilitySet curves =
        config.fragility ? load_fragility(config.resolve(*config.fragility)) : FragilitySet::defaults();
    check_curves(grid, curves);
    check_forced(config, grid, horizon);
    SimulationSettings settings = settings_for(config, grid);
    return Scenario{config, std::move(grid), std::move(track), std::move(roughness),
                    std::move(curves), std::move(settings), config_hash(config)};
}

std::vector<std::string> validate_config(const RunConfig& config)
{
    std::vector<std::string> errors;
    auto attempt = [&](auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.emplace_back(e.what());
        }
    };
    std::optional<GridModel> grid;
    attempt([&] {
        grid = load_grid(GridPaths::in_directory(config.resolve(config.grid_dir)),
                         config.system_base_mva, config.rated_frequency_hz);
    });
    attempt([&] { load_track(config.resolve(config.track)); });
    if (config.roughness) {
        attempt([&] { RoughnessMap::load_esri_ascii(config.resolve(*config.roughness), config.z0_ref); });
    }
    std::optional<FragilitySet> curves;
    attempt([&] {
        curves = config.fragility ? load_fragility(config.resolve(*config.fragility))
                                  : FragilitySet::defaults();
    });
    if (config.observed) {
        attempt([&] {
            if (!std::filesystem::exists(config.resolve(*config.observed))) {
                throw MissingFile(config.resolve(*config.observed).string());
            }
        });
    }
    if (grid) {
        if (config.integration_level) {
            attempt([&] {
                grid = scale_renewable_integration(*grid, *config.integration_level,
                                                   config.horizon(), config.solar.diurnal);
            });
        }
        if (curves) {
            attempt([&] { check_curves(*grid, *curves); });
        }
        attempt([&] { check_forced(config, *grid, config.horizon()); });
    }
    return errors;
}

} // namespace crescent
