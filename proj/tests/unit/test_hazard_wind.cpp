#include "crescent/errors.hpp"
#include "crescent/hazard_wind.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace crescent;
using std::chrono::hours;
using std::chrono::minutes;

namespace {

const TimePoint t0 = parse_utc("2022-09-18T12:00Z");

StormTrack two_fixes(double lat1, double vmax0 = 40.0, double vmax1 = 50.0)
{
    return StormTrack({{t0, 18.0, -66.0, vmax0, 30.0}, {t0 + hours(3), lat1, -66.0, vmax1, 40.0}});
}

WindProfileParams calm_background()
{
    WindProfileParams p;
    p.background_fraction = 0.0;
    return p;
}

} // namespace

TEST_CASE("three-hourly fixes resample to ten minutes")
{
    const StormTrack fine = interpolate_track(two_fixes(19.0), minutes(10));
    CHECK(fine.points().size() == 19);
    CHECK(fine.points().front() == two_fixes(19.0).points().front());
    CHECK(fine.points().back() == two_fixes(19.0).points().back());
    CHECK(fine.points()[9].vmax_ms == doctest::Approx(45.0).epsilon(1e-12));
}

TEST_CASE("fix times return the fix and midpoints interpolate linearly")
{
    const StormTrack tr = two_fixes(19.0);
    CHECK(tr.at(t0) == tr.points()[0]);
    const TrackPoint mid = tr.at(t0 + minutes(90));
    CHECK(mid.vmax_ms == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(mid.rmax_km == doctest::Approx(35.0).epsilon(1e-12));
    CHECK(mid.lat == doctest::Approx(18.5).epsilon(1e-9));
    CHECK_THROWS_AS(tr.at(t0 - minutes(1)), OutOfRange);
}

TEST_CASE("malformed tracks are rejected")
{
    CHECK_THROWS_AS(StormTrack({{t0, 18.0, -66.0, 40.0, 30.0}}), DegenerateTrack);
    CHECK_THROWS_AS(StormTrack({{t0, 18.0, -66.0, 40.0, 30.0}, {t0, 18.5, -66.0, 40.0, 30.0}}),
                    InvariantViolation);
    CHECK_THROWS_AS(StormTrack({{t0, 18.0, -66.0, 40.0, 0.0}, {t0 + hours(1), 18.5, -66.0, 40.0, 30.0}}),
                    InvariantViolation);
}

TEST_CASE("translation velocity")
{
    const StormTrack still = two_fixes(18.0);
    const Velocity v0 = translation_velocity(still, t0 + hours(1));
    CHECK(v0.east == doctest::Approx(0.0));
    CHECK(v0.north == doctest::Approx(0.0));

    // One degree of latitude is 111.19 km; over three hours that is ~10.3 m/s.
    const StormTrack north = two_fixes(19.0);
    const Velocity v = translation_velocity(north, t0 + hours(1));
    CHECK(v.east == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(v.north == doctest::Approx(111194.9 / 10800.0).epsilon(1e-4));
    CHECK(v.north == doctest::Approx(10.3).epsilon(0.005));

    // Forward difference at the first fix, backward at the last, centred inside.
    const StormTrack three({{t0, 18.0, -66.0, 40, 30}, {t0 + hours(3), 19.0, -66.0, 40, 30},
                            {t0 + hours(6), 21.0, -66.0, 40, 30}});
    CHECK(translation_velocity(three, t0).north == doctest::Approx(v.north).epsilon(1e-9));
    CHECK(translation_velocity(three, t0 + hours(6)).north == doctest::Approx(2 * v.north).epsilon(1e-6));
    CHECK(translation_velocity(three, t0 + hours(3)).north == doctest::Approx(1.5 * v.north).epsilon(1e-6));
}

TEST_CASE("modified Rankine profile")
{
    const WindProfileParams p;
    CHECK(radial_wind(30.0, 48.0, 30.0, p) == 48.0);
    CHECK(radial_wind(0.0, 48.0, 30.0, p) == 0.0);
    CHECK(radial_wind(120.0, 48.0, 30.0, p) == doctest::Approx(24.0).epsilon(1e-15));
    CHECK(radial_wind(15.0, 48.0, 30.0, p) == doctest::Approx(24.0).epsilon(1e-15));
}

TEST_CASE("Holland profile peaks at rmax")
{
    WindProfileParams p;
    p.kind = ProfileKind::holland;
    CHECK(radial_wind(30.0, 48.0, 30.0, p) == 48.0);
    for (double r : {5.0, 20.0, 29.0, 31.0, 60.0, 200.0}) {
        CHECK(radial_wind(r, 48.0, 30.0, p) < 48.0);
    }
    CHECK(radial_wind(0.0, 48.0, 30.0, p) == 0.0);
}

TEST_CASE("profile parameters are validated")
{
    WindProfileParams p;
    p.decay_exponent = 1.5;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
    p = {};
    p.holland_b = 3.0;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
    CHECK_NOTHROW(WindProfileParams{}.validate());
}

TEST_CASE("log-law roughness factor")
{
    CHECK(roughness_factor(0.0003, 0.0003) == 1.0);
    CHECK(roughness_factor(0.3, 0.0003) == doctest::Approx(std::log(10 / 0.3) / std::log(10 / 0.0003)));
    CHECK(roughness_factor(0.3, 0.0003) == doctest::Approx(0.3367).epsilon(1e-3));
}

TEST_CASE("wind at the storm centre is the rotated background flow")
{
    const StormTrack tr = two_fixes(19.0, 45.0, 45.0);
    const StormState s = storm_state(tr, t0 + hours(1));
    const WindProfileParams p;
    const RoughnessMap flat;
    const double tr_speed = std::hypot(s.translation.east, s.translation.north);
    CHECK(wind_at(s, s.center, p, flat) == doctest::Approx(0.55 * tr_speed).epsilon(1e-12));

    const RoughnessMap rough(1, 1, -67.0, 17.0, 3.0, {0.3}, -9999.0);
    CHECK(wind_at(s, s.center, p, rough) ==
          doctest::Approx(0.55 * tr_speed * roughness_factor(0.3, 0.0003)).epsilon(1e-12));
}

TEST_CASE("northward motion strengthens the east side")
{
    const StormTrack tr = two_fixes(19.0, 45.0, 45.0);
    const StormState s = storm_state(tr, t0 + hours(1));
    const RoughnessMap flat;
    const double d = 30.0 / 111.19;
    const LatLon east{s.center.lat, s.center.lon + d / std::cos(geo::deg2rad(s.center.lat))};
    const LatLon west{s.center.lat, s.center.lon - d / std::cos(geo::deg2rad(s.center.lat))};
    CHECK(wind_at(s, east, WindProfileParams{}, flat) > wind_at(s, west, WindProfileParams{}, flat));
    // Without background flow the vortex is symmetric.
    CHECK(wind_at(s, east, calm_background(), flat) ==
          doctest::Approx(wind_at(s, west, calm_background(), flat)).epsilon(1e-9));
}

TEST_CASE("route wind is the maximum over resampled points")
{
    const StormTrack tr = two_fixes(18.0, 45.0, 45.0);
    const RoughnessMap flat;
    const WindProfileParams p = calm_background();
    const LatLon a{18.0, -65.5};
    const LatLon b{18.0, -65.9};
    const std::vector<LatLon> one{a};
    CHECK(component_wind(tr, t0, one, p, flat) == wind_at(tr, t0, a, p, flat));
    const std::vector<LatLon> two{a, b};
    const double w = component_wind(tr, t0, two, p, flat);
    CHECK(w >= std::max(wind_at(tr, t0, a, p, flat), wind_at(tr, t0, b, p, flat)));

    const std::vector<LatLon> pts{{18.0, -65.8}, {18.0, -65.4}};
    const StormState s = storm_state(tr, t0);
    CHECK(max_wind(s, pts, p, flat) ==
          std::max(wind_at(s, pts[0], p, flat), wind_at(s, pts[1], p, flat)));
}

TEST_CASE("densifying inside one raster cell does not change the wind")
{
    const StormTrack tr = two_fixes(18.0, 45.0, 45.0);
    const RoughnessMap rough(1, 1, -67.0, 17.0, 3.0, {0.05}, -9999.0);
    WindProfileParams p = calm_background();
    const std::vector<LatLon> seg{{18.0, -65.62}, {18.0, -65.60}};
    p.resample_km = 100.0;
    const double coarse = component_wind(tr, t0, seg, p, rough);
    p.resample_km = 0.2;
    const double fine = component_wind(tr, t0, seg, p, rough);
    // Wind falls off monotonically away from the centre along this segment,
    // so the nearest endpoint carries the maximum either way.
    CHECK(fine == doctest::Approx(coarse).epsilon(1e-12));
}

TEST_CASE("roughness raster lookup and NODATA fallback")
{
    const auto dir = std::filesystem::temp_directory_path() / "crescent_test_raster";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "z0.asc") << "ncols 2\nnrows 2\nxllcorner -67\nyllcorner 17\ncellsize 1\n"
                                     "NODATA_value -9999\n0.1 0.2\n0.3 -9999\n";
    const RoughnessMap m = RoughnessMap::load_esri_ascii(dir / "z0.asc");
    CHECK(m.z0_at({18.5, -66.5}) == 0.1);
    CHECK(m.z0_at({18.5, -65.5}) == 0.2);
    CHECK(m.z0_at({17.5, -66.5}) == 0.3);
    CHECK(m.z0_at({17.5, -65.5}) == m.reference());
    CHECK(m.z0_at({10.0, -60.0}) == m.reference());
    CHECK_FALSE(m.contains({10.0, -60.0}));
    CHECK(m.factor_at({10.0, -60.0}) == 1.0);
}

TEST_CASE("track CSV loading")
{
    const auto dir = std::filesystem::temp_directory_path() / "crescent_test_track";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "track.csv") << "time_iso8601,lat,lon,vmax_ms,rmax_km\n"
                                        "2022-09-18T12:00Z,18.0,-66.0,40,30\n"
                                        "2022-09-18T15:00Z,19.0,-66.0,50,40\n";
    CHECK(load_track(dir / "track.csv") == two_fixes(19.0));
    std::ofstream(dir / "bad.csv") << "time_iso8601,lat,lon,vmax_ms,rmax_km\n"
                                      "2022-09-18T12:00Z,18.0,-66.0,40,30\n";
    CHECK_THROWS_AS(load_track(dir / "bad.csv"), DegenerateTrack);
}
