#pragma once

#include "crescent/ensemble.hpp"
#include "crescent/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crescent {

/// Stamped on every output file.
struct Provenance
{
    std::string config_hash;
    int schema_version = 1;
};

/// Writes `content`, creating parent directories. Throws Error on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Pretty JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

/// trajectory.csv: step,time_utc,performance,served_mw,shed_mw after a
/// '#' provenance line.
std::string trajectory_csv(const RealizationResult& r, const Horizon& h, const Provenance& p);

/// events.csv: step,kind,component,magnitude after a '#' provenance line.
std::string events_csv(const RealizationResult& r, const Provenance& p);

void write_realization(const std::filesystem::path& dir, const RealizationResult& r,
                       const Horizon& h, const Provenance& p);

nlohmann::json realization_to_json(const RealizationResult& r);
RealizationResult realization_from_json(const nlohmann::json& j);

struct Manifest
{
    int schema_version = 1;
    std::string config_hash;
    int requested = 0;
    std::uint64_t master_seed = 0;
    int steps = 0;
    std::string start;
    int step_minutes = 10;
    std::vector<std::string> line_ids;
    std::vector<std::string> files; ///< relative to the results directory
    std::vector<FailedRealization> failures;
};

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const EnsembleSummary& s, const Provenance& p);

/// step,performance,drop
std::string points_csv(std::span<const FailurePoint> points, const Provenance& p);

/// Writes realizations/, manifest.json, summary.json and the point clouds.
void write_ensemble(const std::filesystem::path& dir, const EnsembleRun& run,
                    const Manifest& manifest, const EnsembleSummary& summary);

/// Writes summary.json and the point clouds only.
void write_summary_files(const std::filesystem::path& dir, const EnsembleSummary& summary,
                         const Provenance& p);

struct StoredEnsemble
{
    Manifest manifest;
    std::vector<RealizationResult> results;
};

StoredEnsemble read_ensemble(const std::filesystem::path& dir);

/// Recomputes the summary from stored results alone.
EnsembleSummary summarize_stored(const StoredEnsemble& stored);

/// level,blackout_probability,median_blackout_step,n
std::string sweep_csv(std::span<const SweepRow> rows, const Provenance& p);

nlohmann::json preset_to_json(const PresetExperiment& ex, const Provenance& p);

} // namespace crescent
