#pragma once

#include "crescent/ensemble.hpp"
#include "crescent/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crescent {

inline constexpr int kSchemaVersion = 1;

/// Parsed run-config document. Paths are kept as written; resolve() makes
/// relative ones relative to the directory holding the config file.
struct RunConfig
{
    int schema_version = kSchemaVersion;
    std::filesystem::path base_dir = ".";

    std::filesystem::path resolve(const std::filesystem::path& p) const
    {
        return p.is_absolute() ? p : base_dir / p;
    }

    // grid
    std::filesystem::path grid_dir;
    double system_base_mva = 100.0;
    double rated_frequency_hz = 60.0;
    /// Rescale rooftop solar to this integration level before running.
    std::optional<double> integration_level;

    // hazard
    std::filesystem::path track;
    std::optional<std::filesystem::path> roughness;
    double z0_ref = 0.0003;
    double vmax_scale = 1.0;
    WindProfileParams wind;

    // vulnerability
    std::optional<std::filesystem::path> fragility;
    double tower_spacing_km = 1.0;
    double turbine_cutout_ms = kTurbineCutoutMs;
    SolarReductionParams solar;

    // horizon
    std::string start = "2022-09-18T00:00Z";
    std::string end = "2022-09-18T23:00Z";
    int step_minutes = 10;

    // cascade
    double rocof_limit = kDefaultRocofLimit;
    bool probabilistic_trip = false;
    double trip_probability = 0.0;

    // dispatch
    CostWeights weights;
    /// Overrides the generator table's cost for every unit of the kind.
    std::map<GeneratorKind, double> generation_cost_by_kind;
    int exact_unit_limit = 12;
    double start_margin = 0.1;

    // ensemble
    int n = 1000;
    std::uint64_t master_seed = 20220918;
    int workers = 1;

    std::optional<std::filesystem::path> observed;
    std::filesystem::path output_dir = "out";
    std::vector<ForcedFailure> forced_failures;

    /// Canonical JSON with every default filled in (base_dir excluded).
    nlohmann::json to_json() const;

    /// Horizon from start/end/step.
    Horizon horizon() const;
};

/// Throws ConfigError on unknown keys, wrong types or an unsupported
/// schema_version.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

RunConfig load_run_config(const std::filesystem::path& path);

/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// The documented defaults table, one line per key.
std::string defaults_table();

/// Everything loaded from disk and ready to run.
struct Scenario
{
    RunConfig config;
    GridModel grid;
    StormTrack track;
    RoughnessMap roughness;
    FragilitySet curves;
    SimulationSettings settings;
    std::string hash;
};

/// Loads and validates all inputs; throws the first error met.
Scenario load_scenario(const RunConfig& config);

/// Loads every input and collects one message per problem found.
std::vector<std::string> validate_config(const RunConfig& config);

} // namespace crescent
