#pragma once

#include "crescent/geo.hpp"
#include "crescent/utc_time.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

namespace crescent {

struct TrackPoint
{
    TimePoint time{};
    double lat = 0.0;
    double lon = 0.0;
    double vmax_ms = 0.0;
    double rmax_km = 0.0;

    LatLon center() const { return {lat, lon}; }
    bool operator==(const TrackPoint&) const = default;
};

/// Time-ordered best-track fixes of one storm.
class StormTrack
{
public:
    /// Throws DegenerateTrack (< 2 points) or InvariantViolation.
    explicit StormTrack(std::vector<TrackPoint> points);

    std::span<const TrackPoint> points() const { return points_; }
    TimePoint start() const { return points_.front().time; }
    TimePoint end() const { return points_.back().time; }
    bool covers(TimePoint t) const { return t >= start() && t <= end(); }

    /// Storm fix at t: great-circle position, linear vmax and rmax.
    /// Throws OutOfRange.
    TrackPoint at(TimePoint t) const;

    /// Copy with every vmax multiplied by `factor`.
    StormTrack scaled_intensity(double factor) const;

    bool operator==(const StormTrack&) const = default;

private:
    std::vector<TrackPoint> points_;
};

StormTrack load_track(const std::filesystem::path& path);

/// Resamples every `dt` from the first fix. Original fixes are kept
/// verbatim, including ones that fall off the dt grid.
StormTrack interpolate_track(const StormTrack& track, std::chrono::minutes dt);

/// East/north components in m/s.
struct Velocity
{
    double east = 0.0;
    double north = 0.0;

    double speed() const;
};

/// Finite difference of the storm center over the fixes adjacent to t:
/// centred at interior fixes, forward at the first, backward at the last,
/// and the segment velocity strictly between fixes.
Velocity translation_velocity(const StormTrack& track, TimePoint t);

enum class ProfileKind { modified_rankine, holland };

std::string_view to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(std::string_view text);

struct WindProfileParams
{
    ProfileKind kind = ProfileKind::modified_rankine;
    /// Outer decay exponent of the modified Rankine vortex, in (0, 1].
    double decay_exponent = 0.5;
    /// Holland shape parameter, in [1, 2.5].
    double holland_b = 1.5;
    /// Fraction of the translation velocity added as background flow.
    double background_fraction = 0.55;
    /// Counterclockwise rotation of the background flow, degrees.
    double background_rotation_deg = 20.0;
    /// Multiplies every surface wind (1.0 = sustained wind).
    double gust_factor = 1.0;
    /// Maximum spacing of hazard sample points along routes, km.
    double resample_km = 1.0;

    /// Throws InvariantViolation outside the documented domain.
    void validate() const;
};

/// Axisymmetric tangential wind at radius r_km.
double radial_wind(double r_km, double vmax_ms, double rmax_km,
                   const WindProfileParams& params);

/// Aerodynamic roughness length raster (ESRI ASCII grid, lon/lat degrees).
class RoughnessMap
{
public:
    static constexpr double kDefaultReference = 0.0003;

    /// A map with no raster: every site uses the reference roughness.
    explicit RoughnessMap(double z0_ref = kDefaultReference);

    RoughnessMap(int ncols, int nrows, double xll_corner, double yll_corner,
                 double cell_size, std::vector<double> values_north_first,
                 double nodata, double z0_ref = kDefaultReference);

    static RoughnessMap load_esri_ascii(const std::filesystem::path& path,
                                        double z0_ref = kDefaultReference);

    double reference() const { return z0_ref_; }
    bool contains(const LatLon& site) const;

    /// z0 at the site; sites off the raster (or on NODATA cells) use the
    /// reference value and log one warning per map.
    double z0_at(const LatLon& site) const;

    /// Log-law conversion factor from reference to site roughness at 10 m.
    double factor_at(const LatLon& site) const;

private:
    int ncols_ = 0;
    int nrows_ = 0;
    double xll_ = 0.0;
    double yll_ = 0.0;
    double cell_ = 1.0;
    std::vector<double> values_;
    double nodata_ = -9999.0;
    double z0_ref_ = kDefaultReference;
    std::shared_ptr<std::once_flag> warned_ = std::make_shared<std::once_flag>();
};

/// ln(10 / z0_site) / ln(10 / z0_ref).
double roughness_factor(double z0_site, double z0_ref);

/// Everything about the storm that matters at one instant.
struct StormState
{
    LatLon center;
    double vmax_ms = 0.0;
    double rmax_km = 0.0;
    Velocity translation;
};

StormState storm_state(const StormTrack& track, TimePoint t);

double wind_at(const StormState& storm, const LatLon& site,
               const WindProfileParams& params, const RoughnessMap& roughness);

/// Surface wind speed at a site, m/s, never negative.
double wind_at(const StormTrack& track, TimePoint t, const LatLon& site,
               const WindProfileParams& params, const RoughnessMap& roughness);

/// Maximum wind over already-resampled points.
double max_wind(const StormState& storm, std::span<const LatLon> points,
                const WindProfileParams& params, const RoughnessMap& roughness);

/// Maximum wind along a route after resampling every params.resample_km.
double component_wind(const StormTrack& track, TimePoint t,
                      std::span<const LatLon> geometry,
                      const WindProfileParams& params,
                      const RoughnessMap& roughness);

} // namespace crescent
