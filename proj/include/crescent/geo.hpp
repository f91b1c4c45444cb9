#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crescent {

struct LatLon
{
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const LatLon&) const = default;
};

namespace geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double distance_km(const LatLon& a, const LatLon& b);

/// Initial bearing from a to b, degrees clockwise from north in [0, 360).
double bearing_deg(const LatLon& a, const LatLon& b);

/// Point at fraction f along the great circle from a to b.
LatLon intermediate(const LatLon& a, const LatLon& b, double f);

/// Inserts great-circle points so that no segment exceeds max_spacing_km.
/// Original vertices are kept verbatim.
std::vector<LatLon> densify(std::span<const LatLon> route, double max_spacing_km);

double route_length_km(std::span<const LatLon> route);

/// Arithmetic mean of the vertices.
LatLon centroid(std::span<const LatLon> route);

/// "LINESTRING (lon lat, lon lat, ...)"; throws std::invalid_argument.
std::vector<LatLon> parse_wkt_linestring(std::string_view wkt);
std::string format_wkt_linestring(std::span<const LatLon> route);

} // namespace geo
} // namespace crescent
