#include "crescent/run_config.hpp"
#include "crescent/simulation.hpp"

#include <doctest.h>

#include <filesystem>

using namespace crescent;

namespace {

Scenario load(const std::string& testbed, const std::string& file = "config.json")
{
    return load_scenario(load_run_config(std::filesystem::path(CRESCENT_DATA) / testbed / file));
}

RealizationResult run(const Scenario& sc, const HazardTable& h, std::uint64_t seed,
                      DispatchCache* cache = nullptr)
{
    return run_realization({sc.grid, sc.curves, h, sc.settings, cache}, seed);
}

} // namespace

TEST_CASE("largest failure picks the earliest of the biggest drops")
{
    CHECK(largest_failure({1.0, 0.9, 0.8}) == LargestFailure{1, 1.0 - 0.9});
    CHECK(largest_failure({1.0, 1.0, 1.0}) == LargestFailure{0, 0.0});
    CHECK(largest_failure({1.0, 0.7, 0.7, 0.0}) == LargestFailure{3, 0.7});
    CHECK(largest_failure({}) == LargestFailure{0, 0.0});
    CHECK(largest_failure({0.5, 0.8, 0.6}) == LargestFailure{2, 0.8 - 0.6});
}

TEST_CASE("blackout step is the first zero")
{
    CHECK_FALSE(blackout_step({1.0, 0.5, 0.1}).has_value());
    CHECK(blackout_step({1.0, 0.0, 0.0}) == 1);
    CHECK(blackout_step({0.0}) == 0);
}

TEST_CASE("a quiescent storm leaves the grid untouched")
{
    const Scenario sc = load("solar-heavy", "config_quiescent.json");
    const HazardTable h = HazardTable::compute(sc.grid, sc.track, sc.roughness, sc.settings);
    CHECK(h.steps() == 139);
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        const RealizationResult r = run(sc, h, seed);
        REQUIRE(r.performance.size() == 139);
        for (double p : r.performance) {
            CHECK(p == 1.0);
        }
        for (double s : r.shed_mw) {
            CHECK(s == 0.0);
        }
        CHECK(r.events.empty());
        CHECK_FALSE(r.blackout_step.has_value());
        CHECK(r.largest == LargestFailure{0, 0.0});
    }
}

TEST_CASE("scripted spur failure strands its load")
{
    Scenario sc = load("toy-radial");
    const StormTrack calm = sc.track.scaled_intensity(0.01);
    sc.settings.forced_failures = {{5, "line:SPUR"}};
    const HazardTable h = HazardTable::compute(sc.grid, calm, sc.roughness, sc.settings);
    const RealizationResult r = run(sc, h, 9);
    for (int k = 0; k < 139; ++k) {
        const auto i = static_cast<std::size_t>(k);
        if (k < 5) {
            CHECK(r.performance[i] == 1.0);
            CHECK(r.shed_mw[i] == 0.0);
        } else {
            CHECK(r.performance[i] == doctest::Approx(40000.0 / 48000.0).epsilon(1e-12));
            CHECK(r.shed_mw[i] == doctest::Approx(20.0).epsilon(1e-9));
            CHECK(r.served_mw[i] == doctest::Approx(100.0).epsilon(1e-9));
        }
    }
    CHECK(r.largest.step == 5);
    CHECK_FALSE(r.blackout_step.has_value());
    bool seen = false;
    for (const Event& e : r.events) {
        seen = seen || (e.step == 5 && e.kind == EventKind::component_failed && e.component == "line:SPUR");
    }
    CHECK(seen);
}

TEST_CASE("losing the tie line blacks out the toy system at once")
{
    Scenario sc = load("toy-radial");
    const StormTrack calm = sc.track.scaled_intensity(0.01);
    sc.settings.forced_failures = {{12, "line:TIE"}};
    const HazardTable h = HazardTable::compute(sc.grid, calm, sc.roughness, sc.settings);
    const RealizationResult r = run(sc, h, 9);
    CHECK(r.blackout_step == 12);
    CHECK(r.largest == LargestFailure{12, 1.0});
    for (std::size_t k = 12; k < r.performance.size(); ++k) {
        CHECK(r.performance[k] == 0.0);
    }
}

TEST_CASE("realizations are deterministic with and without the shared cache")
{
    const Scenario sc = load("solar-heavy");
    const HazardTable h = HazardTable::compute(sc.grid, sc.track, sc.roughness, sc.settings);
    DispatchCache cache;
    const RealizationResult a = run(sc, h, 77);
    const RealizationResult b = run(sc, h, 77, &cache);
    const RealizationResult c = run(sc, h, 77, &cache);
    CHECK(a == b);
    CHECK(b == c);
    CHECK(a.seed == 77);
    for (double p : a.performance) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    // No restoration once performance reaches zero.
    if (a.blackout_step) {
        for (std::size_t k = static_cast<std::size_t>(*a.blackout_step); k < a.performance.size(); ++k) {
            CHECK(a.performance[k] == 0.0);
        }
    }
}

TEST_CASE("stronger storms never fail fewer components")
{
    const Scenario sc = load("solar-heavy");
    const StormTrack strong = sc.track.scaled_intensity(1.2);
    const HazardTable h = HazardTable::compute(sc.grid, sc.track, sc.roughness, sc.settings);
    const HazardTable hs = HazardTable::compute(sc.grid, strong, sc.roughness, sc.settings);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ResistanceAssignment a = sample_resistances(sc.grid, sc.curves, seed, sc.settings.tower_spacing_km);
        DamageState lo = DamageState::intact(sc.grid);
        DamageState hi = DamageState::intact(sc.grid);
        for (int k = 0; k < h.steps(); ++k) {
            update_damage(lo, a, h.winds[static_cast<std::size_t>(k)], k);
            update_damage(hi, a, hs.winds[static_cast<std::size_t>(k)], k);
            for (std::size_t l = 0; l < lo.line.size(); ++l) {
                CHECK((lo.line[l] == kIntact || hi.line[l] != kIntact));
            }
        }
    }
}
