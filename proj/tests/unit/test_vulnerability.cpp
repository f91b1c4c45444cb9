#include "crescent/errors.hpp"
#include "crescent/rng.hpp"
#include "crescent/vulnerability.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace crescent;

namespace {

FragilitySet line_only(double median, double beta)
{
    FragilitySet s;
    s.set({ComponentClass::transmission_line, median, beta});
    s.set({ComponentClass::distribution_feeder, 30.0, 0.3});
    return s;
}

GridModel small_grid()
{
    GridModel g = fixture::buses_only(3);
    g.lines.push_back(fixture::line("A", "B0", "B1"));
    g.lines.push_back(fixture::line("B", "B1", "B2"));
    g.generators.push_back(fixture::gen("TH", "B0", GeneratorKind::thermal, 100));
    g.generators.push_back(fixture::gen("PV", "B1", GeneratorKind::utility_solar, 100));
    g.generators.push_back(fixture::gen("WT", "B2", GeneratorKind::wind, 50));
    g.feeders.push_back(fixture::feeder("F1", "B1", 40, 100, 10));
    g.feeders.push_back(fixture::feeder("F2", "B2", 20, 100, 0));
    return fixture::ready(g);
}

// Closed-form lognormal CDF via the error function.
double lognormal_cdf(double x, double median, double beta)
{
    return 0.5 * (1.0 + std::erf(std::log(x / median) / (beta * std::sqrt(2.0))));
}

} // namespace

TEST_CASE("inverse fragility")
{
    const FragilityCurve c{ComponentClass::transmission_line, 50.0, 0.2};
    CHECK(c.resistance_at(0.5) == 50.0);
    CHECK(c.resistance_at(0.975) == doctest::Approx(50.0 * std::exp(0.2 * 1.959963985)).epsilon(1e-9));
    CHECK(c.resistance_at(0.975) == doctest::Approx(73.99).epsilon(1e-4));
    CHECK(c.failure_probability(c.resistance_at(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(c.resistance_at(0.01) < c.resistance_at(0.1));
}

TEST_CASE("sampled resistances reproduce the lognormal distribution")
{
    GridModel g = fixture::buses_only(2);
    g.generators.push_back(fixture::gen("G", "B0", GeneratorKind::thermal, 10));
    for (int i = 0; i < 10000; ++i) {
        g.lines.push_back(fixture::line("L" + std::to_string(i), "B0", "B1"));
    }
    fixture::ready(g);
    const ResistanceAssignment a = sample_resistances(g, line_only(50.0, 0.2), 7);
    std::vector<double> r = a.line;
    std::sort(r.begin(), r.end());
    double ks = 0.0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double f = lognormal_cdf(r[i], 50.0, 0.2);
        ks = std::max({ks, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    CHECK(ks < 0.02);
}

TEST_CASE("sampling is deterministic and independent of component order")
{
    const GridModel g = small_grid();
    const FragilitySet curves = FragilitySet::defaults();
    const ResistanceAssignment a = sample_resistances(g, curves, 99, 2.0);
    CHECK(a == sample_resistances(g, curves, 99, 2.0));
    CHECK(a != sample_resistances(g, curves, 100, 2.0));

    GridModel r = g;
    std::reverse(r.lines.begin(), r.lines.end());
    std::reverse(r.feeders.begin(), r.feeders.end());
    r.validate();
    const ResistanceAssignment b = sample_resistances(r, curves, 99, 2.0);
    CHECK(b.line[0] == a.line[1]);
    CHECK(b.line[1] == a.line[0]);
    CHECK(b.feeder[0] == a.feeder[1]);
    CHECK(b.rooftop[1] == a.rooftop[0]);
}

TEST_CASE("line resistance is the weakest of the line and its towers")
{
    const GridModel g = small_grid();
    const FragilitySet curves = FragilitySet::defaults();
    const ResistanceAssignment a = sample_resistances(g, curves, 5, 2.0);
    const double km = geo::route_length_km(g.lines[0].route);
    const int towers = static_cast<int>(std::ceil(km / 2.0));
    double expect = curves.at(ComponentClass::transmission_line)
                        .resistance_at(rng::keyed_uniform(5, "line:A"));
    for (int k = 0; k < towers; ++k) {
        expect = std::min(expect, curves.at(ComponentClass::transmission_tower)
                                      .resistance_at(rng::keyed_uniform(5, "tower:A#" + std::to_string(k))));
    }
    CHECK(a.line[0] == expect);
    // Non-solar generators are not exposed.
    CHECK(a.generator[0] == kNoResistance);
    CHECK(a.generator[1] > 0.0);
    CHECK(a.generator[1] < kNoResistance);
}

TEST_CASE("missing curves are reported by class")
{
    const GridModel g = small_grid();
    try {
        sample_resistances(g, line_only(50, 0.2), 1);
        FAIL("expected MissingCurve");
    } catch (const MissingCurve& e) {
        CHECK(std::string(e.what()).find("utility_solar") != std::string::npos);
    }
    FragilitySet s;
    CHECK_THROWS_AS(s.set({ComponentClass::transmission_line, 0.0, 0.2}), InvariantViolation);
    CHECK_THROWS_AS(s.set({ComponentClass::transmission_line, 50.0, 0.0}), InvariantViolation);
}

TEST_CASE("preset rank replaces one draw only")
{
    const GridModel g = small_grid();
    const FragilitySet curves = FragilitySet::defaults();
    const ResistanceAssignment a = sample_resistances(g, curves, 3, 2.0);
    const ResistanceAssignment m = preset_resistance_rank(a, g, curves, "feeder:F2", 0.5);
    CHECK(m.feeder[1] == curves.at(ComponentClass::distribution_feeder).median_ms);
    ResistanceAssignment rest = m;
    rest.feeder[1] = a.feeder[1];
    CHECK(rest == a);

    const ResistanceAssignment weak = preset_resistance_rank(a, g, curves, "line:B", 0.01);
    CHECK(weak.line[1] < curves.at(ComponentClass::transmission_line).resistance_at(0.02));
    CHECK_THROWS_AS(preset_resistance_rank(a, g, curves, "line:ZZ", 0.5), UnknownComponent);
    CHECK_THROWS_AS(preset_resistance_rank(a, g, curves, "gen:TH", 0.5), UnknownComponent);
    CHECK_THROWS_AS(preset_resistance_rank(a, g, curves, "line:A", 1.5), InvariantViolation);
}

TEST_CASE("component keys round-trip")
{
    const GridModel g = small_grid();
    for (ComponentRef ref : {ComponentRef{ComponentType::line, 1}, ComponentRef{ComponentType::feeder, 0},
                             ComponentRef{ComponentType::solar_plant, 1}, ComponentRef{ComponentType::rooftop, 1}}) {
        CHECK(resolve_component(g, component_key(g, ref)) == ref);
    }
    CHECK(component_key(g, {ComponentType::rooftop, 0}) == "btm:F1");
}

TEST_CASE("damage threshold, absorption and idempotence")
{
    const GridModel g = small_grid();
    ResistanceAssignment a;
    a.line = {30.0, 55.0};
    a.feeder = {60.0, 70.0};
    a.generator = {kNoResistance, 80.0, kNoResistance};
    a.rooftop = {65.0, 90.0};

    DamageState s = DamageState::intact(g);
    ComponentWinds calm{{40.0, 40.0}, {40.0, 40.0}, {40.0, 40.0, 40.0}};
    ResistanceAssignment strong = a;
    strong.line = {51.0, 55.0};
    CHECK(update_damage(s, strong, calm, 0).empty());
    CHECK(s == DamageState::intact(g));

    ComponentWinds w{{31.0, 30.0}, {30.0, 30.0}, {0.0, 0.0, 0.0}};
    const auto fresh = update_damage(s, a, w, 4);
    REQUIRE(fresh.size() == 1);
    CHECK(fresh[0].ref == ComponentRef{ComponentType::line, 0});
    CHECK(s.line[0] == 4);
    const DamageState once = s;
    CHECK(update_damage(s, a, w, 4).empty());
    CHECK(s == once);

    // Equal wind and resistance does not fail; later steps keep the first time.
    ComponentWinds edge{{100.0, 55.0}, {30.0, 30.0}, {0.0, 0.0, 0.0}};
    update_damage(s, a, edge, 9);
    CHECK(s.line[0] == 4);
    CHECK(s.line[1] == kIntact);
}

TEST_CASE("stronger winds fail a superset")
{
    const GridModel g = small_grid();
    const ResistanceAssignment a = sample_resistances(g, FragilitySet::defaults(), 17, 2.0);
    for (double base : {20.0, 35.0, 45.0, 60.0}) {
        for (double k : {1.0, 1.1, 1.5}) {
            DamageState lo = DamageState::intact(g);
            DamageState hi = DamageState::intact(g);
            ComponentWinds w{{base, base * 0.9}, {base, base * 1.1}, {base, base, base}};
            ComponentWinds s{{k * base, k * base * 0.9}, {k * base, k * base * 1.1}, {k * base, k * base, k * base}};
            update_damage(lo, a, w, 0);
            update_damage(hi, a, s, 0);
            for (std::size_t i = 0; i < lo.line.size(); ++i) {
                CHECK((lo.line[i] == kIntact || hi.line[i] != kIntact));
            }
            for (std::size_t i = 0; i < lo.feeder.size(); ++i) {
                CHECK((lo.feeder[i] == kIntact || hi.feeder[i] != kIntact));
                CHECK((lo.rooftop[i] == kIntact || hi.rooftop[i] != kIntact));
            }
        }
    }
}

TEST_CASE("cloud shield factor")
{
    SolarReductionParams p;
    CHECK(cloud_factor(0.0, p) == p.min_fraction);
    CHECK(cloud_factor(3.0, p) == p.min_fraction);
    CHECK(cloud_factor(12.0, p) == 1.0);
    CHECK(cloud_factor(40.0, p) == 1.0);
    CHECK(cloud_factor(7.5, p) == doctest::Approx(0.625).epsilon(1e-12));
    double prev = cloud_factor(0.0, p);
    for (double d = 0.0; d < 20.0; d += 0.01) {
        const double f = cloud_factor(d, p);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f >= prev);
        CHECK(f - prev < 0.01);
        prev = f;
    }
    p.inner_radius_factor = 12.0;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
}

TEST_CASE("solar fraction includes the diurnal shape")
{
    const TimePoint noon = parse_utc("2022-09-18T16:00Z");
    const TimePoint night = parse_utc("2022-09-18T03:00Z");
    const StormTrack tr({{night, 18.0, -66.0, 40, 30}, {noon + std::chrono::hours(1), 18.0, -66.0, 40, 30}});
    const SolarReductionParams p;
    CHECK(solar_fraction(tr, noon, {18.0, -66.0}, p) == p.min_fraction);
    CHECK(solar_fraction(tr, night, {18.0, -66.0}, p) == 0.0);
    CHECK(solar_fraction(tr, noon, {25.0, -66.0}, p) == 1.0);
    CHECK_THROWS_AS(solar_fraction(tr, noon + std::chrono::hours(5), {18.0, -66.0}, p), OutOfRange);
}

TEST_CASE("available generation by kind")
{
    const GridModel g = small_grid();
    DamageState d = DamageState::intact(g);
    std::vector<double> wind{10.0, 10.0, 26.0};
    std::vector<double> frac{1.0, 0.268, 1.0};
    std::vector<double> ffrac{0.5, 0.5};
    Availability a = available_generation(g, d, {wind, frac, ffrac});
    CHECK(a.generator_mw[0] == 100.0);
    CHECK(a.generator_mw[1] == doctest::Approx(26.8).epsilon(1e-12));
    CHECK(a.generator_mw[2] == 0.0);
    CHECK(a.rooftop_mw[0] == 5.0);
    CHECK(a.rooftop_mw[1] == 0.0);

    wind[2] = 25.0;
    frac[1] = 1.0;
    a = available_generation(g, d, {wind, frac, ffrac});
    CHECK(a.generator_mw[2] == 50.0);
    CHECK(a.generator_mw[1] == 100.0);

    d.generator[1] = 3;
    d.feeder[0] = 3;
    const std::vector<char> energized{0, 1, 1};
    a = available_generation(g, d, {wind, frac, ffrac}, energized);
    CHECK(a.generator_mw[0] == 0.0);
    CHECK(a.generator_mw[1] == 0.0);
    CHECK(a.rooftop_mw[0] == 0.0);
}
