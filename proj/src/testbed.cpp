#include "crescent/testbed.hpp"

#include "crescent/csv.hpp"
#include "crescent/dispatch.hpp"
#include "crescent/errors.hpp"
#include "crescent/geo.hpp"
#include "crescent/lp_solver.hpp"
#include "crescent/powerflow.hpp"
#include "crescent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

namespace crescent::testbed {

using nlohmann::json;

namespace {

double uniform(std::uint64_t seed, std::string_view key) { return rng::keyed_uniform(seed, key); }

int find_root(std::vector<int>& parent, int x)
{
    while (parent[static_cast<std::size_t>(x)] != x) {
        x = parent[static_cast<std::size_t>(x)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
}

bool connected(int n, const std::vector<std::pair<int, int>>& edges)
{
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    int components = n;
    for (auto [a, b] : edges) {
        const int ra = find_root(parent, a);
        const int rb = find_root(parent, b);
        if (ra != rb) {
            parent[static_cast<std::size_t>(ra)] = rb;
            --components;
        }
    }
    return components == 1;
}

std::string kind_prefix(GeneratorKind k)
{
    switch (k) {
    case GeneratorKind::thermal: return "TH";
    case GeneratorKind::hydro: return "HY";
    case GeneratorKind::utility_solar: return "PV";
    case GeneratorKind::wind: return "WT";
    case GeneratorKind::btm_solar: return "BTM";
    }
    return "G";
}

/// Largest absolute line flow over a peak-evening and a sunny-midday base
/// case, dispatched on an unconstrained network.
std::vector<double> base_case_flows(const GridModel& grid, const Horizon& horizon)
{
    const std::size_t nl = grid.lines.size();
    std::vector<double> worst(nl, 0.0);
    const NetworkStatus status = NetworkStatus::all_in_service(grid);

    // Evening peak without solar, then midday with full solar.
    int peak_step = 0;
    int noon_step = 0;
    double peak = -1.0;
    double noon_best = -1.0;
    const DiurnalShape sun = caribbean_clear_sky();
    for (int k = 0; k < horizon.steps; ++k) {
        const double m = demand_multiplier(horizon.time_at(k));
        if (m > peak) {
            peak = m;
            peak_step = k;
        }
        if (sun.at(horizon.time_at(k)) > noon_best) {
            noon_best = sun.at(horizon.time_at(k));
            noon_step = k;
        }
    }
    for (int k : {peak_step, noon_step}) {
        const double sunf = sun.at(horizon.time_at(k));
        std::vector<double> avail;
        for (const auto& g : grid.generators) {
            avail.push_back(g.kind == GeneratorKind::utility_solar ? g.p_max * sunf
                            : g.kind == GeneratorKind::wind       ? 0.5 * g.p_max
                                                                  : g.p_max);
        }
        std::vector<double> net;
        for (const auto& f : grid.feeders) {
            net.push_back(std::max(0.0, f.demand_at(k) - f.btm_solar_mw * sunf));
        }
        const SubgridInputs in{avail, net, {}};
        const auto subs = find_subgrids(grid, status, in);
        for (const auto& sub : subs) {
            if (!sub.functional || sub.buses.size() < 2) {
                continue;
            }
            auto network = std::make_shared<const DcNetwork>(grid, sub);
            const DispatchInputs di{avail, net, {}, {}, false};
            DispatchProblem p = build_problem(grid, sub, network, di, CostWeights{}, 10.0);
            std::fill(p.line_limit.begin(), p.line_limit.end(), lp::kInfinity);
            const DispatchSolution s = solve_dispatch(p);
            std::vector<double> inj(sub.buses.size(), 0.0);
            for (std::size_t b = 0; b < inj.size(); ++b) {
                inj[b] = s.bus_shed[b] - p.bus_demand[b];
            }
            for (std::size_t i = 0; i < p.units.size(); ++i) {
                inj[static_cast<std::size_t>(p.units[i].bus)] += s.output[i];
            }
            const FlowSolution f = network->solve_local(inj);
            for (std::size_t k2 = 0; k2 < sub.lines.size(); ++k2) {
                auto& w = worst[static_cast<std::size_t>(sub.lines[k2])];
                w = std::max(w, std::abs(f.flow_mw[k2]));
            }
        }
    }
    return worst;
}

} // namespace

double demand_multiplier(TimePoint t)
{
    const auto since = t.time_since_epoch() % std::chrono::days(1);
    const double hour_utc = std::chrono::duration<double, std::ratio<3600>>(since).count();
    const double local = std::fmod(hour_utc - 4.0 + 24.0, 24.0);
    // Evening peak near 20:00, trough near 04:00 local.
    return 0.78 + 0.17 * std::cos(2.0 * geo::kPi * (local - 20.0) / 24.0) +
           0.05 * std::cos(4.0 * geo::kPi * (local - 14.0) / 24.0);
}

DiurnalShape caribbean_clear_sky()
{
    DiurnalShape d;
    for (int h = 0; h < 24; ++h) {
        const double x = (h + 0.5 - 10.0) / 12.5;
        d.hourly[static_cast<std::size_t>(h)] =
            x > 0.0 && x < 1.0 ? std::round(std::pow(std::sin(geo::kPi * x), 1.2) * 1000.0) / 1000.0
                               : 0.0;
    }
    return d;
}

StormTrack synthetic_track(TimePoint day_start, double peak_vmax_ms)
{
    using std::chrono::hours;
    struct Fix
    {
        int h;
        double lat, lon, vfrac, rmax;
    };
    const Fix fixes[] = {
        {-6, 16.20, -64.00, 0.75, 55.0}, {0, 16.50, -64.70, 0.82, 50.0},
        {6, 16.85, -65.45, 0.90, 45.0},  {12, 17.25, -66.25, 0.96, 40.0},
        {18, 17.70, -67.05, 1.00, 35.0}, {24, 18.20, -67.80, 1.00, 35.0},
        {30, 18.70, -68.50, 0.95, 38.0},
    };
    std::vector<TrackPoint> pts;
    for (const auto& f : fixes) {
        pts.push_back({day_start + hours(f.h), f.lat, f.lon, f.vfrac * peak_vmax_ms, f.rmax});
    }
    return StormTrack(std::move(pts));
}

GridModel lattice_grid(const LatticeSpec& spec, const Horizon& horizon)
{
    if (spec.cols < 2 || spec.rows < 2) {
        throw InvariantViolation("lattice needs at least 2 x 2 buses");
    }
    GridModel g;
    const int n = spec.cols * spec.rows;
    auto node = [&](int r, int c) { return r * spec.cols + c; };
    auto bus_id = [&](int i) { return fmt::format("{}{:03d}", spec.prefix, i + 1); };
    const char* ew[] = {"west", "central", "east"};
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const int i = node(r, c);
            const double jl = (uniform(spec.seed, fmt::format("lat{}", i)) - 0.5) * 0.03;
            const double jo = (uniform(spec.seed, fmt::format("lon{}", i)) - 0.5) * 0.04;
            Bus b;
            b.id = bus_id(i);
            b.name = fmt::format("Substation {}-{}", r, c);
            b.lat = spec.lat_south + (spec.lat_north - spec.lat_south) * r / (spec.rows - 1) + jl;
            b.lon = spec.lon_west + (spec.lon_east - spec.lon_west) * c / (spec.cols - 1) + jo;
            b.voltage_kv = (r == 0 || r == spec.rows - 1) ? 230.0 : 115.0;
            b.region = fmt::format("{}-{}", 2 * r < spec.rows ? "south" : "north",
                                   ew[std::min(2, 3 * c / spec.cols)]);
            g.buses.push_back(b);
        }
    }

    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            if (c + 1 < spec.cols) {
                edges.emplace_back(node(r, c), node(r, c + 1));
            }
            if (r + 1 < spec.rows) {
                edges.emplace_back(node(r, c), node(r + 1, c));
            }
        }
    }
    std::vector<double> key(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        key[e] = uniform(spec.seed, fmt::format("edge{}-{}", edges[e].first, edges[e].second));
    }
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return key[a] < key[b]; });
    std::vector<char> keep(edges.size(), 1);
    const auto target = static_cast<std::size_t>(std::round(spec.drop_fraction * edges.size()));
    std::size_t dropped = 0;
    for (std::size_t e : order) {
        if (dropped >= target) {
            break;
        }
        keep[e] = 0;
        std::vector<std::pair<int, int>> rest;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            if (keep[k]) {
                rest.push_back(edges[k]);
            }
        }
        if (connected(n, rest)) {
            ++dropped;
        } else {
            keep[e] = 1;
        }
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!keep[e]) {
            continue;
        }
        const Bus& a = g.buses[static_cast<std::size_t>(edges[e].first)];
        const Bus& b = g.buses[static_cast<std::size_t>(edges[e].second)];
        Line l;
        l.id = fmt::format("L{:03d}", g.lines.size() + 1);
        l.from_bus = a.id;
        l.to_bus = b.id;
        LatLon mid = geo::intermediate(a.location(), b.location(), 0.5);
        mid.lat += (uniform(spec.seed, l.id + "bend") - 0.5) * 0.02;
        l.route = {a.location(), mid, b.location()};
        l.reactance_pu = std::max(0.002, spec.reactance_pu_per_km * geo::route_length_km(l.route));
        l.rating_mw = 1e6;
        l.emergency_mw = 1e6;
        g.lines.push_back(l);
    }

    std::map<GeneratorKind, int> counter;
    for (const auto& u : spec.units) {
        Generator gen;
        gen.id = fmt::format("{}{}", kind_prefix(u.kind), ++counter[u.kind]);
        gen.bus = bus_id(node(std::clamp(u.row, 0, spec.rows - 1), std::clamp(u.col, 0, spec.cols - 1)));
        gen.kind = u.kind;
        gen.p_max = u.p_max;
        gen.p_min = u.p_min;
        gen.ramp_mw_per_min = u.ramp_mw_per_min;
        gen.inertia_s = u.inertia_s;
        gen.marginal_cost = u.cost;
        g.generators.push_back(gen);
    }

    std::vector<double> shape;
    for (int k = 0; k < horizon.steps; ++k) {
        shape.push_back(std::round(demand_multiplier(horizon.time_at(k)) * 1e6) / 1e6);
    }
    std::vector<double> weight;
    for (int i = 0; i < n; ++i) {
        const int r = i / spec.cols;
        const double north = 1.0 + (spec.north_weight - 1.0) * r / (spec.rows - 1);
        weight.push_back(north * (0.7 + 0.6 * uniform(spec.seed, fmt::format("load{}", i))));
    }
    const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
    for (int i = 0; i < n; ++i) {
        const Bus& b = g.buses[static_cast<std::size_t>(i)];
        Feeder f;
        f.id = fmt::format("F{:03d}", i + 1);
        f.substation_bus = b.id;
        f.peak_mw = std::round(spec.peak_mw * weight[static_cast<std::size_t>(i)] / wsum * 100.0) / 100.0;
        f.customers = std::round(f.peak_mw * spec.customers_per_mw);
        f.btm_solar_mw = std::round(spec.btm_fraction * f.peak_mw * 100.0) / 100.0;
        const double dir = 360.0 * uniform(spec.seed, f.id + "dir");
        const double len = 4.0 + 6.0 * uniform(spec.seed, f.id + "len");
        const double dlat = len / 111.0 * std::cos(geo::deg2rad(dir));
        const double dlon = len / (111.0 * std::cos(geo::deg2rad(b.lat))) * std::sin(geo::deg2rad(dir));
        f.route = {b.location(), {b.lat + dlat, b.lon + dlon}};
        f.shape_id = "daily";
        f.demand_shape = shape;
        g.feeders.push_back(f);
    }
    g.validate();

    const std::vector<double> flows = base_case_flows(g, horizon);
    for (std::size_t l = 0; l < g.lines.size(); ++l) {
        const double rating =
            std::ceil(std::max(spec.rating_floor_mw, spec.rating_margin * flows[l]) / 5.0) * 5.0;
        g.lines[l].rating_mw = rating;
        g.lines[l].emergency_mw = std::round(rating * spec.emergency_ratio);
    }
    g.validate();
    return g;
}

LatticeSpec solar_heavy_spec()
{
    LatticeSpec s;
    s.prefix = "SB";
    s.cols = 6;
    s.rows = 5;
    s.peak_mw = 1000.0;
    s.btm_fraction = 0.10;
    s.drop_fraction = 0.18;
    s.seed = 11;
    using K = GeneratorKind;
    s.units = {
        {K::thermal, 320.0, 110.0, 4.0, 5.0, 42.0, 0, 2},
        {K::thermal, 260.0, 90.0, 4.0, 4.5, 45.0, 0, 3},
        {K::thermal, 220.0, 70.0, 5.0, 4.0, 48.0, 0, 1},
        {K::thermal, 160.0, 50.0, 6.0, 3.5, 35.0, 1, 4},
        {K::thermal, 120.0, 30.0, 8.0, 3.0, 49.0, 3, 5},
        {K::hydro, 60.0, 5.0, 20.0, 3.0, 5.0, 2, 1},
        {K::utility_solar, 60.0, 0.0, 60.0, 0.0, 1.0, 0, 0},
        {K::utility_solar, 50.0, 0.0, 50.0, 0.0, 1.0, 1, 2},
        {K::utility_solar, 40.0, 0.0, 40.0, 0.0, 1.0, 0, 5},
        {K::wind, 40.0, 0.0, 40.0, 0.0, 1.0, 0, 4},
    };
    return s;
}

LatticeSpec throughput_spec()
{
    LatticeSpec s;
    s.prefix = "TB";
    s.cols = 10;
    s.rows = 10;
    s.peak_mw = 2600.0;
    s.btm_fraction = 0.10;
    s.drop_fraction = 0.17;
    s.seed = 23;
    using K = GeneratorKind;
    const double sizes[] = {420, 380, 340, 300, 260, 220, 200, 180, 160, 140, 120, 100};
    const int cols[] = {1, 3, 5, 7, 8, 2, 4, 6, 9, 0, 5, 8};
    const int rows[] = {0, 0, 0, 0, 1, 1, 2, 1, 3, 4, 6, 8};
    for (int i = 0; i < 12; ++i) {
        s.units.push_back({K::thermal, sizes[i], 0.3 * sizes[i], 3.0 + 0.03 * (420 - sizes[i]),
                           3.0 + 0.005 * sizes[i], 30.0 + 1.5 * i, rows[i], cols[i]});
    }
    s.units.push_back({K::hydro, 90.0, 5.0, 20.0, 3.0, 5.0, 5, 2});
    s.units.push_back({K::hydro, 60.0, 5.0, 20.0, 3.0, 5.0, 7, 6});
    for (int i = 0; i < 8; ++i) {
        s.units.push_back({K::utility_solar, 40.0 + 5.0 * i, 0.0, 60.0, 0.0, 1.0, i % 4, (3 * i + 1) % 10});
    }
    for (int i = 0; i < 3; ++i) {
        s.units.push_back({K::wind, 50.0, 0.0, 50.0, 0.0, 1.0, 1 + 3 * i, 9 - 4 * i});
    }
    return s;
}

GridModel toy_radial_grid(const Horizon& horizon)
{
    (void)horizon;
    GridModel g;
    g.buses = {
        {"G", "Generation", 17.98, -66.55, 230.0, "south"},
        {"L1", "Load centre", 18.40, -66.40, 230.0, "north"},
        {"L2", "Spur load", 18.36, -66.05, 115.0, "north"},
    };
    Line tie;
    tie.id = "TIE";
    tie.from_bus = "G";
    tie.to_bus = "L1";
    tie.reactance_pu = 0.05;
    tie.rating_mw = 400.0;
    tie.emergency_mw = 500.0;
    tie.route = {{17.98, -66.55}, {18.20, -66.52}, {18.40, -66.40}};
    Line spur;
    spur.id = "SPUR";
    spur.from_bus = "L1";
    spur.to_bus = "L2";
    spur.reactance_pu = 0.05;
    spur.rating_mw = 100.0;
    spur.emergency_mw = 125.0;
    spur.route = {{18.40, -66.40}, {18.36, -66.05}};
    g.lines = {tie, spur};
    Generator th;
    th.id = "TH1";
    th.bus = "G";
    th.kind = GeneratorKind::thermal;
    th.p_max = 300.0;
    th.p_min = 30.0;
    th.ramp_mw_per_min = 10.0;
    th.inertia_s = 5.0;
    th.marginal_cost = 40.0;
    g.generators = {th};
    Feeder f1;
    f1.id = "FL1";
    f1.substation_bus = "L1";
    f1.peak_mw = 100.0;
    f1.customers = 40000.0;
    f1.route = {{18.40, -66.40}, {18.44, -66.36}};
    Feeder f2;
    f2.id = "FL2";
    f2.substation_bus = "L2";
    f2.peak_mw = 20.0;
    f2.customers = 8000.0;
    f2.route = {{18.36, -66.05}, {18.40, -66.02}};
    g.feeders = {f1, f2};
    g.validate();
    return g;
}

FragilitySet toy_fragility()
{
    FragilitySet s;
    s.set({ComponentClass::transmission_line, 40.0, 0.25});
    s.set({ComponentClass::distribution_feeder, 1000.0, 0.10});
    s.set({ComponentClass::rooftop_solar, 1000.0, 0.10});
    return s;
}

std::vector<std::string> names() { return {"solar-heavy", "throughput", "toy-radial"}; }

void write_track(const StormTrack& track, const std::filesystem::path& path)
{
    std::string out = "time_iso8601,lat,lon,vmax_ms,rmax_km\n";
    for (const auto& p : track.points()) {
        out += fmt::format("{},{},{},{},{}\n", format_utc(p.time), p.lat, p.lon, p.vmax_ms,
                           p.rmax_km);
    }
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path.string());
    }
    f << out;
}

void write_fragility(const FragilitySet& curves, const std::filesystem::path& path)
{
    std::string out = "class,median_ms,beta\n";
    for (const auto& [c, curve] : curves.curves()) {
        out += fmt::format("{},{},{}\n", to_string(c), curve.median_ms, curve.beta);
    }
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path.string());
    }
    f << out;
}

namespace {

/// Rough island mask: land inside an ellipse over the lattice box.
void write_roughness(const std::filesystem::path& path)
{
    const int ncols = 60;
    const int nrows = 40;
    const double x0 = -68.0;
    const double y0 = 17.0;
    const double cell = 0.05;
    std::string out = fmt::format(
        "ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\ncellsize {}\nNODATA_value -9999\n", ncols,
        nrows, x0, y0, cell);
    for (int r = 0; r < nrows; ++r) {
        const double lat = y0 + (nrows - r - 0.5) * cell;
        for (int c = 0; c < ncols; ++c) {
            const double lon = x0 + (c + 0.5) * cell;
            const double u = (lon + 66.4) / 0.95;
            const double v = (lat - 18.22) / 0.36;
            const double e = u * u + v * v;
            const double z0 = e < 0.6 ? 0.03 : e < 1.0 ? 0.01 : 0.0003;
            out += fmt::format("{}{}", c ? " " : "", z0);
        }
        out += "\n";
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path.string());
    }
    f << out;
}

json base_config(const std::string& name)
{
    const DiurnalShape sun = caribbean_clear_sky();
    return {
        {"schema_version", 1},
        {"grid", {{"dir", "grid"}}},
        {"hazard", {{"track", "track.csv"}, {"profile", "modified_rankine"}}},
        {"vulnerability",
         {{"fragility", "fragility.csv"},
          {"solar", {{"diurnal_hourly", sun.hourly}}}}},
        {"horizon", {{"start", "2022-09-18T00:00Z"}, {"end", "2022-09-18T23:00Z"}, {"step_minutes", 10}}},
        {"cascade", {{"rocof_limit", 2.0}}},
        {"dispatch", {{"voll", 10000.0}, {"curtailment", 100.0}}},
        {"ensemble", {{"n", 200}, {"master_seed", 20220918}, {"workers", 1}}},
        {"output_dir", "../../out/" + name},
    };
}

void write_json(const json& j, const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path.string());
    }
    f << j.dump(2) << "\n";
}

} // namespace

void write_testbed(std::string_view name, const std::filesystem::path& dir)
{
    const TimePoint day = parse_utc("2022-09-18T00:00Z");
    const Horizon horizon = Horizon::between(day, parse_utc("2022-09-18T23:00Z"), std::chrono::minutes(10));
    std::filesystem::create_directories(dir);
    json cfg = base_config(std::string(name));
    if (name == "solar-heavy" || name == "throughput") {
        const LatticeSpec spec = name == "solar-heavy" ? solar_heavy_spec() : throughput_spec();
        write_grid(lattice_grid(spec, horizon), dir / "grid");
        write_track(synthetic_track(day + std::chrono::hours(6), 42.0), dir / "track.csv");
        FragilitySet f;
        f.set({ComponentClass::transmission_line, 52.0, 0.25});
        f.set({ComponentClass::transmission_tower, 58.0, 0.20});
        f.set({ComponentClass::distribution_feeder, 34.0, 0.30});
        f.set({ComponentClass::utility_solar, 40.0, 0.30});
        f.set({ComponentClass::rooftop_solar, 38.0, 0.35});
        write_fragility(f, dir / "fragility.csv");
        write_roughness(dir / "roughness.asc");
        cfg["hazard"]["roughness"] = "roughness.asc";
        cfg["hazard"]["gust_factor"] = 1.45;
        cfg["vulnerability"]["tower_spacing_km"] = 2.0;
        if (name == "throughput") {
            cfg["ensemble"]["n"] = 1000;
            cfg["ensemble"]["workers"] = 8;
        }
        write_json(cfg, dir / "config.json");
        json quiet = cfg;
        quiet["hazard"]["vmax_scale"] = 0.1;
        quiet["vulnerability"]["solar"]["min_fraction"] = 1.0;
        quiet["output_dir"] = "../../out/" + std::string(name) + "-quiescent";
        write_json(quiet, dir / "config_quiescent.json");
    } else if (name == "toy-radial") {
        write_grid(toy_radial_grid(horizon), dir / "grid");
        write_track(synthetic_track(day, 40.0), dir / "track.csv");
        write_fragility(toy_fragility(), dir / "fragility.csv");
        cfg["ensemble"]["n"] = 20;
        write_json(cfg, dir / "config.json");
    } else {
        throw ConfigError(fmt::format("unknown testbed '{}'", name));
    }
}

} // namespace crescent::testbed
