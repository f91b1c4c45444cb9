#pragma once

#include "crescent/grid_model.hpp"
#include "crescent/hazard_wind.hpp"
#include "crescent/vulnerability.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crescent::testbed {

struct UnitSpec
{
    GeneratorKind kind = GeneratorKind::thermal;
    double p_max = 0.0;
    double p_min = 0.0;
    double ramp_mw_per_min = 0.0;
    double inertia_s = 0.0;
    double cost = 0.0;
    int row = 0; ///< lattice row, 0 = southernmost
    int col = 0;
};

/// A rectangular lattice of buses over an island-shaped box, with some
/// lattice edges removed and ratings sized from a peak-load base case.
struct LatticeSpec
{
    std::string prefix = "B";
    int cols = 6;
    int rows = 5;
    double lat_south = 17.98;
    double lat_north = 18.46;
    double lon_west = -67.15;
    double lon_east = -65.65;
    /// Share of lattice edges removed (connectivity is kept).
    double drop_fraction = 0.15;
    double peak_mw = 1000.0;
    /// Demand grows towards the north by this factor (row north vs south).
    double north_weight = 3.0;
    double btm_fraction = 0.05; ///< rooftop MW per MW of feeder peak
    double customers_per_mw = 400.0;
    double rating_margin = 1.35; ///< normal rating / base-case flow
    double rating_floor_mw = 40.0;
    double emergency_ratio = 1.25;
    double reactance_pu_per_km = 0.001;
    std::vector<UnitSpec> units;
    std::uint64_t seed = 7;
};

GridModel lattice_grid(const LatticeSpec& spec, const Horizon& horizon);

/// Daily demand multiplier for a UTC time (Atlantic time evening peak).
double demand_multiplier(TimePoint t);

/// Clear-sky solar by UTC hour for the Caribbean: sunrise near 10:00,
/// peak near 16:00, dark after 22:00.
DiurnalShape caribbean_clear_sky();

/// Six-hourly fixes of a storm passing south-west of the box, reaching
/// its closest approach in the afternoon of the horizon day.
StormTrack synthetic_track(TimePoint day_start, double peak_vmax_ms);

/// ~30-bus grid with a rooftop-solar-heavy demand side.
LatticeSpec solar_heavy_spec();

/// ~100 buses and ~150 lines.
LatticeSpec throughput_spec();

/// Generator bus G, load bus L1 on the tie line TIE, and load bus L2
/// behind the spur line SPUR.
GridModel toy_radial_grid(const Horizon& horizon);

/// Testbed fragility: feeders and rooftop units effectively never fail.
FragilitySet toy_fragility();

/// Names accepted by write_testbed.
std::vector<std::string> names();

/// Writes grid/, track.csv, fragility.csv, optional roughness.asc and
/// config.json for the named testbed into `dir`.
void write_testbed(std::string_view name, const std::filesystem::path& dir);

void write_track(const StormTrack& track, const std::filesystem::path& path);
void write_fragility(const FragilitySet& curves, const std::filesystem::path& path);

} // namespace crescent::testbed
