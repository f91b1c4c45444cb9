#include "crescent/geo.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace crescent::geo {

double distance_km(const LatLon& a, const LatLon& b)
{
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double bearing_deg(const LatLon& a, const LatLon& b)
{
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dlambda = deg2rad(b.lon - a.lon);
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) -
                     std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    double brg = rad2deg(std::atan2(y, x));
    if (brg < 0.0) {
        brg += 360.0;
    }
    return brg;
}

LatLon intermediate(const LatLon& a, const LatLon& b, double f)
{
    if (f <= 0.0) {
        return a;
    }
    if (f >= 1.0) {
        return b;
    }
    const double delta = distance_km(a, b) / kEarthRadiusKm;
    if (delta < 1e-12) {
        return a;
    }
    const double phi1 = deg2rad(a.lat);
    const double lam1 = deg2rad(a.lon);
    const double phi2 = deg2rad(b.lat);
    const double lam2 = deg2rad(b.lon);
    const double wa = std::sin((1.0 - f) * delta) / std::sin(delta);
    const double wb = std::sin(f * delta) / std::sin(delta);
    const double x = wa * std::cos(phi1) * std::cos(lam1) +
                     wb * std::cos(phi2) * std::cos(lam2);
    const double y = wa * std::cos(phi1) * std::sin(lam1) +
                     wb * std::cos(phi2) * std::sin(lam2);
    const double z = wa * std::sin(phi1) + wb * std::sin(phi2);
    return {rad2deg(std::atan2(z, std::hypot(x, y))), rad2deg(std::atan2(y, x))};
}

std::vector<LatLon> densify(std::span<const LatLon> route, double max_spacing_km)
{
    std::vector<LatLon> out;
    if (route.empty()) {
        return out;
    }
    out.push_back(route[0]);
    for (std::size_t i = 1; i < route.size(); ++i) {
        const double len = distance_km(route[i - 1], route[i]);
        const int pieces =
            max_spacing_km > 0.0
                ? std::max(1, static_cast<int>(std::ceil(len / max_spacing_km)))
                : 1;
        for (int k = 1; k < pieces; ++k) {
            out.push_back(intermediate(route[i - 1], route[i],
                                       static_cast<double>(k) / pieces));
        }
        out.push_back(route[i]);
    }
    return out;
}

double route_length_km(std::span<const LatLon> route)
{
    double len = 0.0;
    for (std::size_t i = 1; i < route.size(); ++i) {
        len += distance_km(route[i - 1], route[i]);
    }
    return len;
}

LatLon centroid(std::span<const LatLon> route)
{
    LatLon c;
    if (route.empty()) {
        return c;
    }
    for (const auto& p : route) {
        c.lat += p.lat;
        c.lon += p.lon;
    }
    c.lat /= static_cast<double>(route.size());
    c.lon /= static_cast<double>(route.size());
    return c;
}

namespace {

void skip_space(std::string_view s, std::size_t& i)
{
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
    }
}

double read_double(std::string_view s, std::size_t& i)
{
    skip_space(s, i);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (ec != std::errc()) {
        throw std::invalid_argument("bad WKT coordinate near: " +
                                    std::string(s.substr(i, 16)));
    }
    i = static_cast<std::size_t>(ptr - s.data());
    return v;
}

} // namespace

std::vector<LatLon> parse_wkt_linestring(std::string_view wkt)
{
    std::size_t i = 0;
    skip_space(wkt, i);
    constexpr std::string_view tag = "LINESTRING";
    if (wkt.size() < i + tag.size()) {
        throw std::invalid_argument("expected LINESTRING");
    }
    for (std::size_t k = 0; k < tag.size(); ++k) {
        if (std::toupper(static_cast<unsigned char>(wkt[i + k])) != tag[k]) {
            throw std::invalid_argument("expected LINESTRING");
        }
    }
    i += tag.size();
    skip_space(wkt, i);
    if (i >= wkt.size() || wkt[i] != '(') {
        throw std::invalid_argument("expected '(' in WKT");
    }
    ++i;
    std::vector<LatLon> pts;
    for (;;) {
        const double lon = read_double(wkt, i);
        const double lat = read_double(wkt, i);
        pts.push_back({lat, lon});
        skip_space(wkt, i);
        if (i < wkt.size() && wkt[i] == ',') {
            ++i;
            continue;
        }
        if (i < wkt.size() && wkt[i] == ')') {
            ++i;
            break;
        }
        throw std::invalid_argument("unterminated WKT LINESTRING");
    }
    skip_space(wkt, i);
    if (i != wkt.size()) {
        throw std::invalid_argument("trailing characters after WKT");
    }
    return pts;
}

std::string format_wkt_linestring(std::span<const LatLon> route)
{
    std::string out = "LINESTRING (";
    for (std::size_t i = 0; i < route.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += fmt::format("{} {}", route[i].lon, route[i].lat);
    }
    out += ")";
    return out;
}

} // namespace crescent::geo
