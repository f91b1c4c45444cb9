#include "crescent/grid_model.hpp"

#include "crescent/csv.hpp"
#include "crescent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

namespace crescent {

std::string_view to_string(GeneratorKind kind)
{
    switch (kind) {
    case GeneratorKind::thermal: return "thermal";
    case GeneratorKind::hydro: return "hydro";
    case GeneratorKind::utility_solar: return "utility_solar";
    case GeneratorKind::wind: return "wind";
    case GeneratorKind::btm_solar: return "btm_solar";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_string(std::string_view text)
{
    for (auto k : {GeneratorKind::thermal, GeneratorKind::hydro,
                   GeneratorKind::utility_solar, GeneratorKind::wind,
                   GeneratorKind::btm_solar}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw std::invalid_argument("unknown generator kind '" + std::string(text) + "'");
}

double Feeder::shape_at(int k) const
{
    if (demand_shape.empty()) {
        return 1.0;
    }
    const auto n = static_cast<int>(demand_shape.size());
    return demand_shape[static_cast<std::size_t>(std::clamp(k, 0, n - 1))];
}

DiurnalShape DiurnalShape::daylight_plateau()
{
    DiurnalShape d;
    for (std::size_t h = 10; h < 22; ++h) {
        d.hourly[h] = 1.0;
    }
    return d;
}

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw InvariantViolation(what);
    }
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

void GridModel::validate()
{
    GridIndex ix;
    require(system_base_mva > 0.0, "system base must be positive");
    require(rated_frequency_hz > 0.0, "rated frequency must be positive");

    for (std::size_t i = 0; i < buses.size(); ++i) {
        const Bus& b = buses[i];
        require(!b.id.empty(), "bus with empty id");
        require(ix.bus.emplace(b.id, static_cast<int>(i)).second,
                "duplicate bus id " + b.id);
        require(finite(b.lat) && b.lat >= -90.0 && b.lat <= 90.0,
                "bus " + b.id + ": latitude out of range");
        require(finite(b.lon) && b.lon >= -180.0 && b.lon <= 180.0,
                "bus " + b.id + ": longitude out of range");
        require(b.voltage_kv > 0.0, "bus " + b.id + ": voltage class must be positive");
    }

    auto bus_ref = [&](const std::string& id) {
        auto it = ix.bus.find(id);
        if (it == ix.bus.end()) {
            throw DanglingReference(id);
        }
        return it->second;
    };

    std::set<std::string> ids;
    for (const Line& l : lines) {
        require(!l.id.empty(), "line with empty id");
        require(ids.insert(l.id).second, "duplicate line id " + l.id);
        ix.line_from.push_back(bus_ref(l.from_bus));
        ix.line_to.push_back(bus_ref(l.to_bus));
        require(l.from_bus != l.to_bus, "line " + l.id + ": from_bus equals to_bus");
        require(l.reactance_pu > 0.0, "line " + l.id + ": reactance must be positive");
        require(l.rating_mw > 0.0 && l.rating_mw <= l.emergency_mw,
                "line " + l.id + ": require 0 < rating <= emergency rating");
        require(l.route.size() >= 2, "line " + l.id + ": route needs at least 2 points");
    }

    ids.clear();
    bool has_inertia = false;
    double total_pmax = 0.0;
    for (const Generator& g : generators) {
        require(!g.id.empty(), "generator with empty id");
        require(ids.insert(g.id).second, "duplicate generator id " + g.id);
        ix.generator_bus.push_back(bus_ref(g.bus));
        require(g.kind != GeneratorKind::btm_solar,
                "generator " + g.id +
                    ": rooftop solar is declared per feeder (feeders.btm_mw)");
        require(g.p_min >= 0.0 && g.p_min <= g.p_max,
                "generator " + g.id + ": require 0 <= p_min <= p_max");
        require(g.ramp_mw_per_min >= 0.0, "generator " + g.id + ": negative ramp rate");
        require(g.inertia_s >= 0.0, "generator " + g.id + ": negative inertia");
        require(g.inertia_s == 0.0 || is_synchronous(g.kind),
                "generator " + g.id + ": inertia only allowed for thermal/hydro");
        has_inertia = has_inertia || g.inertia_s > 0.0;
        total_pmax += g.p_max;
    }
    require(has_inertia, "grid needs at least one generator with inertia");
    require(total_pmax >= 0.0, "total generator capacity negative");

    ids.clear();
    for (const Feeder& f : feeders) {
        require(!f.id.empty(), "feeder with empty id");
        require(ids.insert(f.id).second, "duplicate feeder id " + f.id);
        ix.feeder_bus.push_back(bus_ref(f.substation_bus));
        require(f.peak_mw >= 0.0, "feeder " + f.id + ": negative peak demand");
        require(f.customers >= 0.0, "feeder " + f.id + ": negative customers");
        require(f.btm_solar_mw >= 0.0, "feeder " + f.id + ": negative rooftop capacity");
        require(!f.route.empty(), "feeder " + f.id + ": empty route");
        require(f.demand_shape.empty() || !f.shape_id.empty(),
                "feeder " + f.id + ": demand shape without shape id");
        for (double m : f.demand_shape) {
            require(finite(m) && m >= 0.0 && m <= 1.5,
                    "feeder " + f.id + ": demand multiplier outside [0, 1.5]");
        }
    }
    index = std::move(ix);
}

double GridModel::total_customers() const
{
    double n = 0.0;
    for (const auto& f : feeders) {
        n += f.customers;
    }
    return n;
}

GridPaths GridPaths::in_directory(const std::filesystem::path& dir)
{
    GridPaths p{dir / "buses.csv", dir / "lines.csv", dir / "generators.csv",
                dir / "feeders.csv", std::nullopt};
    if (std::filesystem::exists(dir / "shapes.csv")) {
        p.shapes = dir / "shapes.csv";
    }
    return p;
}

namespace {

std::vector<LatLon> route_field(const CsvTable& t, std::size_t row,
                                std::string_view column)
{
    try {
        return geo::parse_wkt_linestring(t.text(row, column));
    } catch (const std::invalid_argument& e) {
        throw ParseError(t.source(), row + 1, std::string(column), e.what());
    }
}

} // namespace

GridModel load_grid(const GridPaths& paths, double system_base_mva,
                    double rated_frequency_hz)
{
    for (const auto* p : {&paths.buses, &paths.lines, &paths.generators, &paths.feeders}) {
        if (!std::filesystem::exists(*p)) {
            throw MissingFile(p->string());
        }
    }
    if (paths.shapes && !std::filesystem::exists(*paths.shapes)) {
        throw MissingFile(paths.shapes->string());
    }

    GridModel g;
    g.system_base_mva = system_base_mva;
    g.rated_frequency_hz = rated_frequency_hz;

    const CsvTable buses = read_csv(paths.buses);
    buses.require_columns({"id", "name", "lat", "lon", "kv", "region"});
    for (std::size_t r = 0; r < buses.size(); ++r) {
        g.buses.push_back({buses.text(r, "id"), buses.text(r, "name"),
                           buses.number(r, "lat"), buses.number(r, "lon"),
                           buses.number(r, "kv"), buses.text(r, "region")});
    }

    const CsvTable lines = read_csv(paths.lines);
    lines.require_columns({"id", "from", "to", "x_pu", "rating_mw", "emergency_mw",
                           "geometry_wkt"});
    for (std::size_t r = 0; r < lines.size(); ++r) {
        g.lines.push_back({lines.text(r, "id"), lines.text(r, "from"),
                           lines.text(r, "to"), lines.number(r, "x_pu"),
                           lines.number(r, "rating_mw"),
                           lines.number(r, "emergency_mw"),
                           route_field(lines, r, "geometry_wkt")});
    }

    const CsvTable gens = read_csv(paths.generators);
    gens.require_columns({"id", "bus", "kind", "p_max_mw", "p_min_mw", "ramp_mw_min",
                          "h_s", "cost", "available"});
    for (std::size_t r = 0; r < gens.size(); ++r) {
        Generator gen;
        gen.id = gens.text(r, "id");
        gen.bus = gens.text(r, "bus");
        try {
            gen.kind = generator_kind_from_string(gens.text(r, "kind"));
        } catch (const std::invalid_argument& e) {
            throw ParseError(gens.source(), r + 1, "kind", e.what());
        }
        gen.p_max = gens.number(r, "p_max_mw");
        gen.p_min = gens.number(r, "p_min_mw");
        gen.ramp_mw_per_min = gens.number(r, "ramp_mw_min");
        gen.inertia_s = gens.number(r, "h_s");
        gen.marginal_cost = gens.number(r, "cost");
        gen.available = gens.boolean(r, "available");
        g.generators.push_back(std::move(gen));
    }

    std::map<std::string, std::vector<std::pair<long long, double>>> shape_rows;
    if (paths.shapes) {
        const CsvTable shapes = read_csv(*paths.shapes);
        shapes.require_columns({"shape_id", "step", "multiplier"});
        for (std::size_t r = 0; r < shapes.size(); ++r) {
            shape_rows[shapes.text(r, "shape_id")].emplace_back(
                shapes.integer(r, "step"), shapes.number(r, "multiplier"));
        }
    }
    std::map<std::string, std::vector<double>> shape_table;
    for (auto& [id, rows] : shape_rows) {
        std::sort(rows.begin(), rows.end());
        std::vector<double> values;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].first != static_cast<long long>(k)) {
                throw ParseError(paths.shapes->filename().string(), 0, "step",
                                 "shape " + id + " steps must be 0..n-1 without gaps");
            }
            values.push_back(rows[k].second);
        }
        shape_table.emplace(id, std::move(values));
    }

    const CsvTable feeders = read_csv(paths.feeders);
    feeders.require_columns({"id", "bus", "peak_mw", "customers", "btm_mw",
                             "geometry_wkt", "shape_id"});
    std::vector<bool> imputed;
    for (std::size_t r = 0; r < feeders.size(); ++r) {
        Feeder f;
        f.id = feeders.text(r, "id");
        f.substation_bus = feeders.text(r, "bus");
        f.peak_mw = feeders.number(r, "peak_mw");
        const auto customers = feeders.optional_number(r, "customers");
        imputed.push_back(!customers.has_value());
        f.customers = customers.value_or(0.0);
        f.btm_solar_mw = feeders.optional_number(r, "btm_mw").value_or(0.0);
        f.route = route_field(feeders, r, "geometry_wkt");
        f.shape_id = feeders.text(r, "shape_id");
        if (!f.shape_id.empty()) {
            auto it = shape_table.find(f.shape_id);
            if (it == shape_table.end()) {
                throw DanglingReference(f.shape_id);
            }
            f.demand_shape = it->second;
        }
        g.feeders.push_back(std::move(f));
    }

    // Missing customer counts scale with peak demand at the ratio observed
    // on the feeders that do report them.
    double known_customers = 0.0;
    double known_peak = 0.0;
    for (std::size_t i = 0; i < g.feeders.size(); ++i) {
        if (!imputed[i]) {
            known_customers += g.feeders[i].customers;
            known_peak += g.feeders[i].peak_mw;
        }
    }
    const double per_mw =
        known_peak > 0.0 ? known_customers / known_peak : kDefaultCustomersPerMw;
    for (std::size_t i = 0; i < g.feeders.size(); ++i) {
        if (imputed[i]) {
            g.feeders[i].customers = std::round(g.feeders[i].peak_mw * per_mw);
        }
    }

    g.validate();
    return g;
}

void write_grid(const GridModel& grid, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) {
            throw Error("cannot write " + (dir / name).string());
        }
        return out;
    };
    {
        auto out = open("buses.csv");
        out << "id,name,lat,lon,kv,region\n";
        for (const auto& b : grid.buses) {
            out << fmt::format("{},{},{},{},{},{}\n", csv_field(b.id),
                               csv_field(b.name), b.lat, b.lon, b.voltage_kv,
                               csv_field(b.region));
        }
    }
    {
        auto out = open("lines.csv");
        out << "id,from,to,x_pu,rating_mw,emergency_mw,geometry_wkt\n";
        for (const auto& l : grid.lines) {
            out << fmt::format("{},{},{},{},{},{},{}\n", csv_field(l.id),
                               csv_field(l.from_bus), csv_field(l.to_bus),
                               l.reactance_pu, l.rating_mw, l.emergency_mw,
                               csv_field(geo::format_wkt_linestring(l.route)));
        }
    }
    {
        auto out = open("generators.csv");
        out << "id,bus,kind,p_max_mw,p_min_mw,ramp_mw_min,h_s,cost,available\n";
        for (const auto& g : grid.generators) {
            out << fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(g.id),
                               csv_field(g.bus), to_string(g.kind), g.p_max,
                               g.p_min, g.ramp_mw_per_min, g.inertia_s,
                               g.marginal_cost, g.available ? 1 : 0);
        }
    }
    std::map<std::string, const std::vector<double>*> shapes;
    {
        auto out = open("feeders.csv");
        out << "id,bus,peak_mw,customers,btm_mw,geometry_wkt,shape_id\n";
        for (const auto& f : grid.feeders) {
            out << fmt::format("{},{},{},{},{},{},{}\n", csv_field(f.id),
                               csv_field(f.substation_bus), f.peak_mw,
                               f.customers, f.btm_solar_mw,
                               csv_field(geo::format_wkt_linestring(f.route)),
                               csv_field(f.shape_id));
            if (!f.shape_id.empty()) {
                auto [it, inserted] = shapes.emplace(f.shape_id, &f.demand_shape);
                if (!inserted && *it->second != f.demand_shape) {
                    throw InvariantViolation("shape id " + f.shape_id +
                                             " bound to two different shapes");
                }
            }
        }
    }
    {
        auto out = open("shapes.csv");
        out << "shape_id,step,multiplier\n";
        for (const auto& [id, values] : shapes) {
            for (std::size_t k = 0; k < values->size(); ++k) {
                out << fmt::format("{},{},{}\n", csv_field(id), k, (*values)[k]);
            }
        }
    }
}

namespace {

struct EnergyTotals
{
    double clear_sky_hours = 0.0; // sum of diurnal multipliers over steps
    double demand = 0.0;
    std::vector<double> feeder_demand;
    double utility_solar_capacity = 0.0;
};

EnergyTotals energy_totals(const GridModel& grid, const Horizon& horizon,
                           const DiurnalShape& clear_sky)
{
    EnergyTotals e;
    for (int k = 0; k < horizon.steps; ++k) {
        e.clear_sky_hours += clear_sky.at(horizon.time_at(k));
    }
    e.feeder_demand.reserve(grid.feeders.size());
    for (const auto& f : grid.feeders) {
        double d = 0.0;
        for (int k = 0; k < horizon.steps; ++k) {
            d += f.demand_at(k);
        }
        e.feeder_demand.push_back(d);
        e.demand += d;
    }
    for (const auto& g : grid.generators) {
        if (g.kind == GeneratorKind::utility_solar && g.available) {
            e.utility_solar_capacity += g.p_max;
        }
    }
    return e;
}

} // namespace

double renewable_integration_level(const GridModel& grid, const Horizon& horizon,
                                   const DiurnalShape& clear_sky)
{
    const EnergyTotals e = energy_totals(grid, horizon, clear_sky);
    if (e.demand <= 0.0) {
        return 0.0;
    }
    double rooftop = 0.0;
    for (const auto& f : grid.feeders) {
        rooftop += f.btm_solar_mw;
    }
    return (e.utility_solar_capacity + rooftop) * e.clear_sky_hours / e.demand;
}

GridModel scale_renewable_integration(const GridModel& grid, double target_level,
                                      const Horizon& horizon,
                                      const DiurnalShape& clear_sky)
{
    if (!(target_level >= 0.05 && target_level <= 0.95)) {
        throw InfeasibleTarget(
            fmt::format("integration level {} outside [0.05, 0.95]", target_level));
    }
    const EnergyTotals e = energy_totals(grid, horizon, clear_sky);
    if (e.clear_sky_hours <= 0.0 || e.demand <= 0.0) {
        throw InfeasibleTarget("horizon has no daylight or no demand");
    }
    const double rooftop_energy =
        target_level * e.demand - e.utility_solar_capacity * e.clear_sky_hours;
    if (rooftop_energy < 0.0) {
        throw InfeasibleTarget(
            fmt::format("utility solar alone exceeds integration level {}", target_level));
    }
    GridModel out = grid;
    for (std::size_t i = 0; i < out.feeders.size(); ++i) {
        const double cap =
            rooftop_energy * (e.feeder_demand[i] / e.demand) / e.clear_sky_hours;
        double& current = out.feeders[i].btm_solar_mw;
        // Keep values already at the target so that scaling to the native
        // level is an exact identity.
        if (std::abs(cap - current) > 1e-12 * std::max(std::abs(cap), 1e-300)) {
            current = cap;
        }
    }
    return out;
}

} // namespace crescent
