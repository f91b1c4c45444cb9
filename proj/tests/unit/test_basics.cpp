#include "crescent/csv.hpp"
#include "crescent/errors.hpp"
#include "crescent/geo.hpp"
#include "crescent/rng.hpp"
#include "crescent/utc_time.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace crescent;

TEST_CASE("splitmix and FNV-1a match published vectors")
{
    CHECK(rng::splitmix64(0) == 0xE220A8397B1DCDAFULL);
    CHECK(rng::fnv1a64("") == 0xCBF29CE484222325ULL);
    CHECK(rng::fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
    CHECK(rng::stable_mix(7, 3) == rng::splitmix64(7 ^ rng::splitmix64(3)));
}

TEST_CASE("keyed uniforms lie in the open unit interval and depend on both parts")
{
    std::set<double> seen;
    for (int i = 0; i < 1000; ++i) {
        const double u = rng::keyed_uniform(42, "line:L" + std::to_string(i));
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        seen.insert(u);
    }
    CHECK(seen.size() == 1000);
    CHECK(rng::keyed_uniform(1, "x") != rng::keyed_uniform(2, "x"));
    CHECK(rng::to_open_unit(0) > 0.0);
}

TEST_CASE("UTC parsing and formatting round-trip")
{
    const TimePoint t = parse_utc("2022-09-18T18:00Z");
    CHECK(format_utc(t) == "2022-09-18T18:00:00Z");
    CHECK(utc_hour(t) == 18);
    CHECK(parse_utc("2022-09-18 18:00:30") == t + std::chrono::seconds(30));
    CHECK_THROWS_AS(parse_utc("18/09/2022"), std::invalid_argument);
    CHECK_THROWS_AS(parse_utc("2022-13-01T00:00Z"), std::invalid_argument);
}

TEST_CASE("the event day at ten minutes has 139 steps")
{
    const Horizon h = Horizon::between(parse_utc("2022-09-18T00:00Z"),
                                       parse_utc("2022-09-18T23:00Z"), std::chrono::minutes(10));
    CHECK(h.steps == 139);
    CHECK(format_utc(h.time_at(108)) == "2022-09-18T18:00:00Z");
    CHECK(h.end() == parse_utc("2022-09-18T23:00Z"));
}

TEST_CASE("great-circle helpers")
{
    // One degree of latitude on the 6371 km sphere.
    CHECK(geo::distance_km({0, 0}, {1, 0}) == doctest::Approx(111.19).epsilon(1e-4));
    CHECK(geo::bearing_deg({0, 0}, {1, 0}) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(geo::bearing_deg({0, 0}, {0, 1}) == doctest::Approx(90.0));
    const LatLon mid = geo::intermediate({0, 0}, {0, 2}, 0.5);
    CHECK(mid.lat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mid.lon == doctest::Approx(1.0));

    const std::vector<LatLon> route{{18.0, -66.0}, {18.0, -65.9}};
    const auto dense = geo::densify(route, 1.0);
    CHECK(dense.front() == route.front());
    CHECK(dense.back() == route.back());
    for (std::size_t i = 1; i < dense.size(); ++i) {
        CHECK(geo::distance_km(dense[i - 1], dense[i]) <= 1.0 + 1e-9);
    }
    CHECK(geo::route_length_km(dense) == doctest::Approx(geo::route_length_km(route)).epsilon(1e-9));
}

TEST_CASE("WKT line strings round-trip")
{
    const auto pts = geo::parse_wkt_linestring("LINESTRING (-66.1 18.2, -66.0 18.3)");
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].lat == 18.2);
    CHECK(pts[0].lon == -66.1);
    CHECK(geo::parse_wkt_linestring(geo::format_wkt_linestring(pts)) == pts);
    CHECK_THROWS(geo::parse_wkt_linestring("POINT (1 2)"));
}

TEST_CASE("CSV quoting and typed access")
{
    const CsvTable t = parse_csv("id,name,x,flag\nA,\"a, b\",1.5,true\n\nB,\"say \"\"hi\"\"\",2,0\n", "t");
    REQUIRE(t.size() == 2);
    CHECK(t.text(0, "name") == "a, b");
    CHECK(t.text(1, "name") == "say \"hi\"");
    CHECK(t.number(0, "x") == 1.5);
    CHECK(t.boolean(0, "flag"));
    CHECK_FALSE(t.boolean(1, "flag"));
    CHECK_THROWS_AS(t.number(0, "id"), ParseError);
    CHECK_THROWS_AS(t.require_columns({"missing"}), ParseError);
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), MissingFile);
}
