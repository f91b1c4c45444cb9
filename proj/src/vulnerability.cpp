#include "crescent/vulnerability.hpp"

#include "crescent/csv.hpp"
#include "crescent/errors.hpp"
#include "crescent/rng.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

namespace crescent {

std::string_view to_string(ComponentClass c)
{
    switch (c) {
    case ComponentClass::transmission_line: return "transmission_line";
    case ComponentClass::transmission_tower: return "transmission_tower";
    case ComponentClass::distribution_feeder: return "distribution_feeder";
    case ComponentClass::utility_solar: return "utility_solar";
    case ComponentClass::rooftop_solar: return "rooftop_solar";
    }
    return "unknown";
}

ComponentClass component_class_from_string(std::string_view text)
{
    for (auto c : {ComponentClass::transmission_line, ComponentClass::transmission_tower,
                   ComponentClass::distribution_feeder, ComponentClass::utility_solar,
                   ComponentClass::rooftop_solar}) {
        if (to_string(c) == text) {
            return c;
        }
    }
    throw std::invalid_argument("unknown component class '" + std::string(text) + "'");
}

double FragilityCurve::failure_probability(double wind_ms) const
{
    if (wind_ms <= 0.0) {
        return 0.0;
    }
    return 0.5 * std::erfc(-std::log(wind_ms / median_ms) / (beta * std::sqrt(2.0)));
}

double FragilityCurve::resistance_at(double u) const
{
    if (u <= 0.0) {
        return 0.0;
    }
    if (u >= 1.0) {
        return kNoResistance;
    }
    if (u == 0.5) {
        return median_ms;
    }
    const boost::math::normal_distribution<double> standard;
    return median_ms * std::exp(beta * boost::math::quantile(standard, u));
}

void FragilitySet::set(const FragilityCurve& curve)
{
    if (!(curve.median_ms > 0.0) || !(curve.beta > 0.0)) {
        throw InvariantViolation(fmt::format(
            "fragility curve {}: require median > 0 and beta > 0",
            to_string(curve.component_class)));
    }
    curves_[curve.component_class] = curve;
}

const FragilityCurve& FragilitySet::at(ComponentClass c) const
{
    auto it = curves_.find(c);
    if (it == curves_.end()) {
        throw MissingCurve(std::string(to_string(c)));
    }
    return it->second;
}

FragilitySet FragilitySet::defaults()
{
    FragilitySet s;
    s.set({ComponentClass::transmission_line, 55.0, 0.25});
    s.set({ComponentClass::transmission_tower, 62.0, 0.20});
    s.set({ComponentClass::distribution_feeder, 38.0, 0.30});
    s.set({ComponentClass::utility_solar, 45.0, 0.30});
    s.set({ComponentClass::rooftop_solar, 42.0, 0.35});
    return s;
}

FragilitySet load_fragility(const std::filesystem::path& path)
{
    const CsvTable t = read_csv(path);
    t.require_columns({"class", "median_ms", "beta"});
    FragilitySet s;
    for (std::size_t r = 0; r < t.size(); ++r) {
        ComponentClass c{};
        try {
            c = component_class_from_string(t.text(r, "class"));
        } catch (const std::invalid_argument& e) {
            throw ParseError(t.source(), r + 1, "class", e.what());
        }
        s.set({c, t.number(r, "median_ms"), t.number(r, "beta")});
    }
    return s;
}

std::vector<ComponentClass> required_classes(const GridModel& grid)
{
    std::vector<ComponentClass> out;
    if (!grid.lines.empty()) {
        out.push_back(ComponentClass::transmission_line);
    }
    if (!grid.feeders.empty()) {
        out.push_back(ComponentClass::distribution_feeder);
    }
    if (std::any_of(grid.generators.begin(), grid.generators.end(), [](const Generator& g) {
            return g.kind == GeneratorKind::utility_solar;
        })) {
        out.push_back(ComponentClass::utility_solar);
    }
    if (std::any_of(grid.feeders.begin(), grid.feeders.end(),
                    [](const Feeder& f) { return f.btm_solar_mw > 0.0; })) {
        out.push_back(ComponentClass::rooftop_solar);
    }
    return out;
}

void check_curves(const GridModel& grid, const FragilitySet& curves)
{
    for (auto c : required_classes(grid)) {
        curves.at(c);
    }
}

std::string component_key(const GridModel& grid, ComponentRef ref)
{
    const auto i = static_cast<std::size_t>(ref.index);
    switch (ref.type) {
    case ComponentType::line: return "line:" + grid.lines.at(i).id;
    case ComponentType::feeder: return "feeder:" + grid.feeders.at(i).id;
    case ComponentType::solar_plant: return "gen:" + grid.generators.at(i).id;
    case ComponentType::rooftop: return "btm:" + grid.feeders.at(i).id;
    }
    return {};
}

ComponentRef resolve_component(const GridModel& grid, std::string_view key)
{
    const auto colon = key.find(':');
    if (colon == std::string_view::npos) {
        throw UnknownComponent(std::string(key));
    }
    const auto prefix = key.substr(0, colon);
    const auto id = key.substr(colon + 1);
    auto find = [&](const auto& items, ComponentType type) -> ComponentRef {
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (items[i].id == id) {
                return {type, static_cast<int>(i)};
            }
        }
        throw UnknownComponent(std::string(key));
    };
    if (prefix == "line") {
        return find(grid.lines, ComponentType::line);
    }
    if (prefix == "feeder") {
        return find(grid.feeders, ComponentType::feeder);
    }
    if (prefix == "btm") {
        return find(grid.feeders, ComponentType::rooftop);
    }
    if (prefix == "gen") {
        ComponentRef ref = find(grid.generators, ComponentType::solar_plant);
        if (grid.generators[static_cast<std::size_t>(ref.index)].kind !=
            GeneratorKind::utility_solar) {
            throw UnknownComponent(std::string(key) + " (not a solar plant)");
        }
        return ref;
    }
    throw UnknownComponent(std::string(key));
}

double ResistanceAssignment::at(ComponentRef ref) const
{
    return const_cast<ResistanceAssignment&>(*this).at(ref);
}

double& ResistanceAssignment::at(ComponentRef ref)
{
    const auto i = static_cast<std::size_t>(ref.index);
    switch (ref.type) {
    case ComponentType::line: return line.at(i);
    case ComponentType::feeder: return feeder.at(i);
    case ComponentType::solar_plant: return generator.at(i);
    case ComponentType::rooftop: return rooftop.at(i);
    }
    throw UnknownComponent("component type");
}

namespace {

int tower_count(const Line& line, double spacing_km)
{
    const double len = geo::route_length_km(line.route);
    return std::max(1, static_cast<int>(std::ceil(len / spacing_km)));
}

ComponentClass class_of(ComponentType t)
{
    switch (t) {
    case ComponentType::line: return ComponentClass::transmission_line;
    case ComponentType::feeder: return ComponentClass::distribution_feeder;
    case ComponentType::solar_plant: return ComponentClass::utility_solar;
    case ComponentType::rooftop: return ComponentClass::rooftop_solar;
    }
    return ComponentClass::transmission_line;
}

} // namespace

ResistanceAssignment sample_resistances(const GridModel& grid,
                                        const FragilitySet& curves,
                                        std::uint64_t seed, double tower_spacing_km)
{
    check_curves(grid, curves);
    if (!(tower_spacing_km > 0.0)) {
        throw InvariantViolation("tower spacing must be positive");
    }
    ResistanceAssignment a;
    a.line.assign(grid.lines.size(), kNoResistance);
    a.feeder.assign(grid.feeders.size(), kNoResistance);
    a.generator.assign(grid.generators.size(), kNoResistance);
    a.rooftop.assign(grid.feeders.size(), kNoResistance);

    const bool towers = curves.has(ComponentClass::transmission_tower);
    const bool rooftop = curves.has(ComponentClass::rooftop_solar);
    for (std::size_t i = 0; i < grid.lines.size(); ++i) {
        const Line& l = grid.lines[i];
        double r = curves.at(ComponentClass::transmission_line)
                       .resistance_at(rng::keyed_uniform(seed, "line:" + l.id));
        if (towers) {
            const auto& tower = curves.at(ComponentClass::transmission_tower);
            const int n = tower_count(l, tower_spacing_km);
            for (int k = 0; k < n; ++k) {
                const double u =
                    rng::keyed_uniform(seed, fmt::format("tower:{}#{}", l.id, k));
                r = std::min(r, tower.resistance_at(u));
            }
        }
        a.line[i] = r;
    }
    for (std::size_t i = 0; i < grid.feeders.size(); ++i) {
        const Feeder& f = grid.feeders[i];
        a.feeder[i] = curves.at(ComponentClass::distribution_feeder)
                          .resistance_at(rng::keyed_uniform(seed, "feeder:" + f.id));
        // Drawn whatever the installed capacity so that rescaled grids share
        // their assignments.
        if (rooftop) {
            a.rooftop[i] = curves.at(ComponentClass::rooftop_solar)
                               .resistance_at(rng::keyed_uniform(seed, "btm:" + f.id));
        }
    }
    for (std::size_t i = 0; i < grid.generators.size(); ++i) {
        const Generator& g = grid.generators[i];
        if (g.kind == GeneratorKind::utility_solar) {
            a.generator[i] = curves.at(ComponentClass::utility_solar)
                                 .resistance_at(rng::keyed_uniform(seed, "gen:" + g.id));
        }
    }
    return a;
}

ResistanceAssignment preset_resistance_rank(const ResistanceAssignment& assignment,
                                            const GridModel& grid,
                                            const FragilitySet& curves,
                                            std::string_view key, double rank)
{
    if (!(rank >= 0.0 && rank <= 1.0)) {
        throw InvariantViolation(fmt::format("preset rank {} outside [0, 1]", rank));
    }
    const ComponentRef ref = resolve_component(grid, key);
    ResistanceAssignment out = assignment;
    out.at(ref) = curves.at(class_of(ref.type)).resistance_at(rank);
    return out;
}

DamageState DamageState::intact(const GridModel& grid)
{
    DamageState d;
    d.line.assign(grid.lines.size(), kIntact);
    d.feeder.assign(grid.feeders.size(), kIntact);
    d.generator.assign(grid.generators.size(), kIntact);
    d.rooftop.assign(grid.feeders.size(), kIntact);
    return d;
}

int DamageState::step_of(ComponentRef ref) const
{
    return const_cast<DamageState&>(*this).step_of(ref);
}

int& DamageState::step_of(ComponentRef ref)
{
    const auto i = static_cast<std::size_t>(ref.index);
    switch (ref.type) {
    case ComponentType::line: return line.at(i);
    case ComponentType::feeder: return feeder.at(i);
    case ComponentType::solar_plant: return generator.at(i);
    case ComponentType::rooftop: return rooftop.at(i);
    }
    throw UnknownComponent("component type");
}

std::vector<NewFailure> update_damage(DamageState& state,
                                      const ResistanceAssignment& assignment,
                                      const ComponentWinds& winds, int step)
{
    std::vector<NewFailure> fresh;
    auto sweep = [&](ComponentType type, std::vector<int>& status,
                     const std::vector<double>& resistance,
                     const std::vector<double>& wind) {
        for (std::size_t i = 0; i < status.size(); ++i) {
            if (status[i] == kIntact && wind[i] > resistance[i]) {
                status[i] = step;
                fresh.push_back({{type, static_cast<int>(i)}, wind[i], resistance[i]});
            }
        }
    };
    sweep(ComponentType::line, state.line, assignment.line, winds.line);
    sweep(ComponentType::feeder, state.feeder, assignment.feeder, winds.feeder);
    sweep(ComponentType::solar_plant, state.generator, assignment.generator,
          winds.generator);
    sweep(ComponentType::rooftop, state.rooftop, assignment.rooftop, winds.feeder);
    return fresh;
}

void SolarReductionParams::validate() const
{
    if (!(inner_radius_factor >= 0.0 && inner_radius_factor < outer_radius_factor)) {
        throw InvariantViolation("solar reduction radii must satisfy 0 <= a < b");
    }
    if (!(min_fraction >= 0.0 && min_fraction <= 1.0)) {
        throw InvariantViolation("solar minimum fraction must lie in [0, 1]");
    }
    for (double v : diurnal.hourly) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvariantViolation("diurnal multipliers must lie in [0, 1]");
        }
    }
}

double cloud_factor(double d, const SolarReductionParams& p)
{
    if (d <= p.inner_radius_factor) {
        return p.min_fraction;
    }
    if (d >= p.outer_radius_factor) {
        return 1.0;
    }
    const double ramp =
        (d - p.inner_radius_factor) / (p.outer_radius_factor - p.inner_radius_factor);
    return p.min_fraction + (1.0 - p.min_fraction) * ramp;
}

double solar_fraction(const StormState& storm, TimePoint t, const LatLon& site,
                      const SolarReductionParams& params)
{
    const double d = geo::distance_km(storm.center, site) / storm.rmax_km;
    return cloud_factor(d, params) * params.diurnal.at(t);
}

double solar_fraction(const StormTrack& track, TimePoint t, const LatLon& site,
                      const SolarReductionParams& params)
{
    const TrackPoint p = track.at(t);
    StormState s;
    s.center = p.center();
    s.rmax_km = p.rmax_km;
    s.vmax_ms = p.vmax_ms;
    return solar_fraction(s, t, site, params);
}

Availability available_generation(const GridModel& grid, const DamageState& damage,
                                  const SiteConditions& site,
                                  std::span<const char> bus_energized,
                                  double cutout_ms)
{
    Availability a;
    a.generator_mw.assign(grid.generators.size(), 0.0);
    a.rooftop_mw.assign(grid.feeders.size(), 0.0);
    const auto& ix = grid.idx();
    for (std::size_t i = 0; i < grid.generators.size(); ++i) {
        const Generator& g = grid.generators[i];
        const bool energized =
            bus_energized.empty() ||
            bus_energized[static_cast<std::size_t>(ix.generator_bus[i])] != 0;
        if (!g.available || !energized) {
            continue;
        }
        switch (g.kind) {
        case GeneratorKind::thermal:
        case GeneratorKind::hydro:
            a.generator_mw[i] = g.p_max;
            break;
        case GeneratorKind::wind:
            a.generator_mw[i] = site.generator_wind[i] > cutout_ms ? 0.0 : g.p_max;
            break;
        case GeneratorKind::utility_solar:
            if (damage.generator[i] == kIntact) {
                a.generator_mw[i] = g.p_max * site.generator_solar_fraction[i];
            }
            break;
        case GeneratorKind::btm_solar:
            break;
        }
    }
    for (std::size_t i = 0; i < grid.feeders.size(); ++i) {
        const Feeder& f = grid.feeders[i];
        if (damage.feeder[i] == kIntact && damage.rooftop[i] == kIntact) {
            a.rooftop_mw[i] = f.btm_solar_mw * site.feeder_solar_fraction[i];
        }
    }
    return a;
}

} // namespace crescent
