#include "crescent/hazard_wind.hpp"

#include "crescent/csv.hpp"
#include "crescent/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace crescent {

StormTrack::StormTrack(std::vector<TrackPoint> points) : points_(std::move(points))
{
    if (points_.size() < 2) {
        throw DegenerateTrack("storm track needs at least 2 fixes");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!(p.vmax_ms >= 0.0) || !(p.rmax_km > 0.0)) {
            throw InvariantViolation(
                fmt::format("track fix {}: require vmax >= 0 and rmax > 0", i));
        }
        if (i > 0 && !(points_[i - 1].time < p.time)) {
            throw InvariantViolation(
                fmt::format("track fix {}: times must be strictly increasing", i));
        }
    }
}

TrackPoint StormTrack::at(TimePoint t) const
{
    if (!covers(t)) {
        throw OutOfRange("time " + format_utc(t) + " outside storm track span");
    }
    auto it = std::lower_bound(points_.begin(), points_.end(), t,
                               [](const TrackPoint& p, TimePoint x) { return p.time < x; });
    if (it->time == t) {
        return *it;
    }
    const TrackPoint& b = *it;
    const TrackPoint& a = *(it - 1);
    const double f = static_cast<double>((t - a.time).count()) /
                     static_cast<double>((b.time - a.time).count());
    const LatLon c = geo::intermediate(a.center(), b.center(), f);
    return {t, c.lat, c.lon, a.vmax_ms + f * (b.vmax_ms - a.vmax_ms),
            a.rmax_km + f * (b.rmax_km - a.rmax_km)};
}

StormTrack StormTrack::scaled_intensity(double factor) const
{
    auto pts = points_;
    for (auto& p : pts) {
        p.vmax_ms *= factor;
    }
    return StormTrack(std::move(pts));
}

StormTrack load_track(const std::filesystem::path& path)
{
    const CsvTable t = read_csv(path);
    t.require_columns({"time_iso8601", "lat", "lon", "vmax_ms", "rmax_km"});
    std::vector<TrackPoint> pts;
    for (std::size_t r = 0; r < t.size(); ++r) {
        TrackPoint p;
        try {
            p.time = parse_utc(t.text(r, "time_iso8601"));
        } catch (const std::invalid_argument& e) {
            throw ParseError(t.source(), r + 1, "time_iso8601", e.what());
        }
        p.lat = t.number(r, "lat");
        p.lon = t.number(r, "lon");
        p.vmax_ms = t.number(r, "vmax_ms");
        p.rmax_km = t.number(r, "rmax_km");
        pts.push_back(p);
    }
    return StormTrack(std::move(pts));
}

StormTrack interpolate_track(const StormTrack& track, std::chrono::minutes dt)
{
    if (dt.count() <= 0) {
        throw InvariantViolation("interpolation interval must be positive");
    }
    const auto fixes = track.points();
    std::vector<TrackPoint> out;
    std::size_t next_fix = 0;
    for (TimePoint t = track.start(); t <= track.end(); t += dt) {
        while (next_fix < fixes.size() && fixes[next_fix].time < t) {
            out.push_back(fixes[next_fix++]);
        }
        if (next_fix < fixes.size() && fixes[next_fix].time == t) {
            out.push_back(fixes[next_fix++]);
        } else {
            out.push_back(track.at(t));
        }
    }
    while (next_fix < fixes.size()) {
        out.push_back(fixes[next_fix++]);
    }
    return StormTrack(std::move(out));
}

double Velocity::speed() const { return std::hypot(east, north); }

namespace {

Velocity displacement_velocity(const TrackPoint& a, const TrackPoint& b)
{
    const double seconds = static_cast<double>((b.time - a.time).count());
    const double meters = geo::distance_km(a.center(), b.center()) * 1000.0;
    if (meters == 0.0) {
        return {};
    }
    const double brg = geo::deg2rad(geo::bearing_deg(a.center(), b.center()));
    return {meters * std::sin(brg) / seconds, meters * std::cos(brg) / seconds};
}

} // namespace

Velocity translation_velocity(const StormTrack& track, TimePoint t)
{
    if (!track.covers(t)) {
        throw OutOfRange("time " + format_utc(t) + " outside storm track span");
    }
    const auto pts = track.points();
    auto it = std::lower_bound(pts.begin(), pts.end(), t,
                               [](const TrackPoint& p, TimePoint x) { return p.time < x; });
    const auto i = static_cast<std::size_t>(it - pts.begin());
    if (it->time != t) {
        return displacement_velocity(pts[i - 1], pts[i]);
    }
    if (i == 0) {
        return displacement_velocity(pts[0], pts[1]);
    }
    if (i + 1 == pts.size()) {
        return displacement_velocity(pts[i - 1], pts[i]);
    }
    return displacement_velocity(pts[i - 1], pts[i + 1]);
}

std::string_view to_string(ProfileKind kind)
{
    switch (kind) {
    case ProfileKind::modified_rankine: return "modified_rankine";
    case ProfileKind::holland: return "holland";
    }
    return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view text)
{
    if (text == "modified_rankine") {
        return ProfileKind::modified_rankine;
    }
    if (text == "holland") {
        return ProfileKind::holland;
    }
    throw std::invalid_argument("unknown wind profile '" + std::string(text) + "'");
}

void WindProfileParams::validate() const
{
    if (!(decay_exponent > 0.0 && decay_exponent <= 1.0)) {
        throw InvariantViolation("decay exponent must lie in (0, 1]");
    }
    if (!(holland_b >= 1.0 && holland_b <= 2.5)) {
        throw InvariantViolation("Holland B must lie in [1, 2.5]");
    }
    if (!(background_fraction >= 0.0 && background_fraction <= 1.0)) {
        throw InvariantViolation("background flow fraction must lie in [0, 1]");
    }
    if (!std::isfinite(background_rotation_deg)) {
        throw InvariantViolation("background rotation must be finite");
    }
    if (!(gust_factor > 0.0)) {
        throw InvariantViolation("gust factor must be positive");
    }
    if (!(resample_km > 0.0)) {
        throw InvariantViolation("resample spacing must be positive");
    }
}

double radial_wind(double r_km, double vmax_ms, double rmax_km,
                   const WindProfileParams& params)
{
    if (r_km <= 0.0) {
        return 0.0;
    }
    switch (params.kind) {
    case ProfileKind::modified_rankine:
        if (r_km <= rmax_km) {
            return vmax_ms * (r_km / rmax_km);
        }
        return vmax_ms * std::pow(rmax_km / r_km, params.decay_exponent);
    case ProfileKind::holland: {
        if (r_km == rmax_km) {
            return vmax_ms;
        }
        const double x = std::pow(rmax_km / r_km, params.holland_b);
        return vmax_ms * std::sqrt(x * std::exp(1.0 - x));
    }
    }
    return 0.0;
}

RoughnessMap::RoughnessMap(double z0_ref) : z0_ref_(z0_ref)
{
    if (!(z0_ref > 0.0)) {
        throw InvariantViolation("reference roughness must be positive");
    }
}

RoughnessMap::RoughnessMap(int ncols, int nrows, double xll_corner,
                           double yll_corner, double cell_size,
                           std::vector<double> values_north_first, double nodata,
                           double z0_ref)
    : ncols_(ncols), nrows_(nrows), xll_(xll_corner), yll_(yll_corner),
      cell_(cell_size), values_(std::move(values_north_first)), nodata_(nodata),
      z0_ref_(z0_ref)
{
    if (!(z0_ref > 0.0)) {
        throw InvariantViolation("reference roughness must be positive");
    }
    if (ncols <= 0 || nrows <= 0 || !(cell_size > 0.0)) {
        throw InvariantViolation("roughness raster needs positive dimensions");
    }
    if (values_.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows)) {
        throw InvariantViolation("roughness raster value count mismatch");
    }
    for (double v : values_) {
        if (v != nodata_ && !(v > 0.0)) {
            throw InvariantViolation("roughness length must be positive");
        }
    }
}

RoughnessMap RoughnessMap::load_esri_ascii(const std::filesystem::path& path,
                                           double z0_ref)
{
    std::istringstream in(read_text_file(path));
    std::map<std::string, double> header;
    std::string key;
    const std::string source = path.filename().string();
    // Six (or five, without NODATA) "key value" header lines.
    while (in >> key) {
        std::string lower = key;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        const bool is_key = std::isalpha(static_cast<unsigned char>(lower[0]));
        if (!is_key) {
            in.seekg(-static_cast<std::streamoff>(key.size()), std::ios::cur);
            break;
        }
        double v = 0.0;
        if (!(in >> v)) {
            throw ParseError(source, header.size() + 1, lower, "bad header value");
        }
        header[lower] = v;
    }
    auto need = [&](const char* k) {
        auto it = header.find(k);
        if (it == header.end()) {
            throw ParseError(source, 0, k, "missing raster header");
        }
        return it->second;
    };
    const int ncols = static_cast<int>(need("ncols"));
    const int nrows = static_cast<int>(need("nrows"));
    const double cell = need("cellsize");
    double xll = 0.0;
    double yll = 0.0;
    if (header.count("xllcorner")) {
        xll = header["xllcorner"];
    } else {
        xll = need("xllcenter") - cell / 2.0;
    }
    if (header.count("yllcorner")) {
        yll = header["yllcorner"];
    } else {
        yll = need("yllcenter") - cell / 2.0;
    }
    const double nodata = header.count("nodata_value") ? header["nodata_value"] : -9999.0;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows));
    double v = 0.0;
    while (in >> v) {
        values.push_back(v);
    }
    if (!in.eof()) {
        throw ParseError(source, 0, "data", "non-numeric raster value");
    }
    return RoughnessMap(ncols, nrows, xll, yll, cell, std::move(values), nodata, z0_ref);
}

bool RoughnessMap::contains(const LatLon& site) const
{
    if (values_.empty()) {
        return false;
    }
    return site.lon >= xll_ && site.lon < xll_ + cell_ * ncols_ &&
           site.lat >= yll_ && site.lat < yll_ + cell_ * nrows_;
}

double RoughnessMap::z0_at(const LatLon& site) const
{
    if (values_.empty()) {
        return z0_ref_;
    }
    if (!contains(site)) {
        std::call_once(*warned_, [&] {
            spdlog::warn("site ({}, {}) outside roughness raster; using reference z0 {}",
                         site.lat, site.lon, z0_ref_);
        });
        return z0_ref_;
    }
    const int col = std::min(ncols_ - 1, static_cast<int>((site.lon - xll_) / cell_));
    const int row_from_south =
        std::min(nrows_ - 1, static_cast<int>((site.lat - yll_) / cell_));
    const int row = nrows_ - 1 - row_from_south;
    const double z0 = values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(ncols_) +
                              static_cast<std::size_t>(col)];
    return z0 == nodata_ ? z0_ref_ : z0;
}

double RoughnessMap::factor_at(const LatLon& site) const
{
    return roughness_factor(z0_at(site), z0_ref_);
}

double roughness_factor(double z0_site, double z0_ref)
{
    constexpr double kReferenceHeight = 10.0;
    if (z0_site == z0_ref) {
        return 1.0;
    }
    return std::log(kReferenceHeight / z0_site) / std::log(kReferenceHeight / z0_ref);
}

StormState storm_state(const StormTrack& track, TimePoint t)
{
    const TrackPoint p = track.at(t);
    return {p.center(), p.vmax_ms, p.rmax_km, translation_velocity(track, t)};
}

double wind_at(const StormState& storm, const LatLon& site,
               const WindProfileParams& params, const RoughnessMap& roughness)
{
    const double r = geo::distance_km(storm.center, site);
    const double v = radial_wind(r, storm.vmax_ms, storm.rmax_km, params);
    double east = 0.0;
    double north = 0.0;
    if (v != 0.0) {
        // Counterclockwise (northern hemisphere) tangent to the radial direction.
        const double phi = geo::deg2rad(geo::bearing_deg(storm.center, site));
        east = -v * std::cos(phi);
        north = v * std::sin(phi);
    }
    const double rot = geo::deg2rad(params.background_rotation_deg);
    const double beta = params.background_fraction;
    const Velocity& tr = storm.translation;
    east += beta * (tr.east * std::cos(rot) - tr.north * std::sin(rot));
    north += beta * (tr.east * std::sin(rot) + tr.north * std::cos(rot));
    const double speed =
        std::hypot(east, north) * roughness.factor_at(site) * params.gust_factor;
    return std::max(0.0, speed);
}

double wind_at(const StormTrack& track, TimePoint t, const LatLon& site,
               const WindProfileParams& params, const RoughnessMap& roughness)
{
    return wind_at(storm_state(track, t), site, params, roughness);
}

double max_wind(const StormState& storm, std::span<const LatLon> points,
                const WindProfileParams& params, const RoughnessMap& roughness)
{
    double w = 0.0;
    for (const auto& p : points) {
        w = std::max(w, wind_at(storm, p, params, roughness));
    }
    return w;
}

double component_wind(const StormTrack& track, TimePoint t,
                      std::span<const LatLon> geometry,
                      const WindProfileParams& params,
                      const RoughnessMap& roughness)
{
    if (geometry.empty()) {
        throw InvariantViolation("component geometry is empty");
    }
    const auto dense = geo::densify(geometry, params.resample_km);
    return max_wind(storm_state(track, t), dense, params, roughness);
}

} // namespace crescent
