#pragma once

// Small hand-built grids and independent reference computations for tests.

#include "crescent/dispatch.hpp"
#include "crescent/grid_model.hpp"
#include "crescent/lp_solver.hpp"
#include "crescent/powerflow.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fixture {

using namespace crescent;

inline Bus bus(std::string id, double lat = 18.0, double lon = -66.0, std::string region = "r")
{
    Bus b;
    b.id = std::move(id);
    b.name = b.id;
    b.lat = lat;
    b.lon = lon;
    b.voltage_kv = 115.0;
    b.region = std::move(region);
    return b;
}

inline Line line(std::string id, std::string from, std::string to, double x = 0.1,
                 double rating = 1000.0, double emergency = 1000.0)
{
    Line l;
    l.id = std::move(id);
    l.from_bus = std::move(from);
    l.to_bus = std::move(to);
    l.reactance_pu = x;
    l.rating_mw = rating;
    l.emergency_mw = emergency;
    return l;
}

inline Generator gen(std::string id, std::string at, GeneratorKind kind, double p_max,
                     double p_min = 0.0, double ramp = 100.0, double h = 0.0, double cost = 10.0)
{
    Generator g;
    g.id = std::move(id);
    g.bus = std::move(at);
    g.kind = kind;
    g.p_max = p_max;
    g.p_min = p_min;
    g.ramp_mw_per_min = ramp;
    g.inertia_s = is_synchronous(kind) ? (h > 0.0 ? h : 4.0) : 0.0;
    g.marginal_cost = cost;
    return g;
}

inline Feeder feeder(std::string id, std::string at, double peak, double customers = 100.0,
                     double btm = 0.0)
{
    Feeder f;
    f.id = std::move(id);
    f.substation_bus = std::move(at);
    f.peak_mw = peak;
    f.customers = customers;
    f.btm_solar_mw = btm;
    return f;
}

/// Fills missing routes from bus coordinates, then validates.
inline GridModel& ready(GridModel& g)
{
    auto at = [&](const std::string& id) {
        for (const auto& b : g.buses) {
            if (b.id == id) {
                return b.location();
            }
        }
        return LatLon{};
    };
    for (auto& l : g.lines) {
        if (l.route.empty()) {
            l.route = {at(l.from_bus), at(l.to_bus)};
        }
    }
    for (auto& f : g.feeders) {
        if (f.route.empty()) {
            f.route = {at(f.substation_bus)};
        }
    }
    g.validate();
    return g;
}

/// Buses B0..B(n-1) spaced along a parallel.
inline GridModel buses_only(int n)
{
    GridModel g;
    for (int i = 0; i < n; ++i) {
        g.buses.push_back(bus("B" + std::to_string(i), 18.0, -66.5 + 0.05 * i));
    }
    return g;
}

/// Random connected network: a random spanning tree plus extra edges.
inline GridModel random_network(std::mt19937_64& rng, int n, int extra)
{
    GridModel g = buses_only(n);
    std::uniform_real_distribution<double> x(0.01, 0.5);
    int k = 0;
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        g.lines.push_back(line("L" + std::to_string(k++), "B" + std::to_string(pick(rng)),
                               "B" + std::to_string(i), x(rng)));
    }
    std::uniform_int_distribution<int> any(0, n - 1);
    for (int e = 0; e < extra; ++e) {
        const int a = any(rng);
        int b = any(rng);
        if (a == b) {
            b = (b + 1) % n;
        }
        g.lines.push_back(line("L" + std::to_string(k++), "B" + std::to_string(a),
                               "B" + std::to_string(b), x(rng)));
    }
    // One synchronous unit keeps the grid valid.
    g.generators.push_back(gen("G0", "B0", GeneratorKind::thermal, 100.0));
    return ready(g);
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) {
                p = r;
            }
        }
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    return x;
}

/// Reference DC flow for a connected grid: B-theta with bus `slack` as the
/// angle reference; injections in MW, returns MW per line.
inline std::vector<double> reference_flows(const GridModel& g, std::vector<double> inj_mw, int slack)
{
    const std::size_t n = g.buses.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i) != slack) {
            sum += inj_mw[i];
        }
    }
    inj_mw[static_cast<std::size_t>(slack)] = -sum;
    std::vector<std::vector<double>> bmat(n, std::vector<double>(n, 0.0));
    const auto& ix = g.idx();
    for (std::size_t l = 0; l < g.lines.size(); ++l) {
        const auto f = static_cast<std::size_t>(ix.line_from[l]);
        const auto t = static_cast<std::size_t>(ix.line_to[l]);
        const double y = 1.0 / g.lines[l].reactance_pu;
        bmat[f][f] += y;
        bmat[t][t] += y;
        bmat[f][t] -= y;
        bmat[t][f] -= y;
    }
    std::vector<std::vector<double>> red;
    std::vector<double> rhs;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i) != slack) {
            keep.push_back(i);
        }
    }
    for (std::size_t i : keep) {
        std::vector<double> row;
        for (std::size_t j : keep) {
            row.push_back(bmat[i][j]);
        }
        red.push_back(row);
        rhs.push_back(inj_mw[i] / g.system_base_mva);
    }
    const std::vector<double> th = gauss_solve(red, rhs);
    std::vector<double> theta(n, 0.0);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        theta[keep[k]] = th[k];
    }
    std::vector<double> flows;
    for (std::size_t l = 0; l < g.lines.size(); ++l) {
        const auto f = static_cast<std::size_t>(ix.line_from[l]);
        const auto t = static_cast<std::size_t>(ix.line_to[l]);
        flows.push_back(g.system_base_mva * (theta[f] - theta[t]) / g.lines[l].reactance_pu);
    }
    return flows;
}

/// The only sub-grid of a fully connected, all-energized grid.
inline SubGrid whole(const GridModel& g)
{
    const NetworkStatus st = NetworkStatus::all_in_service(g);
    std::vector<double> cap(g.generators.size(), 1.0);
    std::vector<double> dem(g.feeders.size(), 1.0);
    return find_subgrids(g, st, {cap, dem, {}}).at(0);
}

/// Random operation problem: up to `max_units` units on `buses` buses, with
/// a network when buses > 1. Ranges follow build_problem's conventions.
inline DispatchProblem random_dispatch(std::mt19937_64& rng, int buses, int max_units,
                                       bool limits = true)
{
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    DispatchProblem p;
    if (buses > 1) {
        const GridModel g = random_network(rng, buses, buses / 2);
        p.network = std::make_shared<DcNetwork>(g, whole(g));
        for (std::size_t l = 0; l < g.lines.size(); ++l) {
            p.line_limit.push_back(limits && u01(rng) < 0.6 ? 30.0 + 200.0 * u01(rng)
                                                            : std::numeric_limits<double>::infinity());
        }
    }
    for (int b = 0; b < buses; ++b) {
        p.bus_demand.push_back(u01(rng) < 0.2 ? 0.0 : 150.0 * u01(rng));
    }
    std::uniform_int_distribution<int> count(1, max_units);
    std::uniform_int_distribution<int> at(0, buses - 1);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        DispatchUnit u;
        u.generator = i;
        u.bus = at(rng);
        u.cost = 10.0 + 70.0 * u01(rng);
        u.available = 20.0 + 130.0 * u01(rng);
        if (u01(rng) < 0.25) {
            u.curtailable = true;
            u.can_run = true;
            u.on_lower = 0.0;
            u.on_upper = u.available;
        } else {
            u.p_min = 0.4 * u.available * u01(rng);
            u.ramp_mw = 10.0 + 60.0 * u01(rng);
            if (u01(rng) < 0.15) {
                u.can_start = true;
            } else if (u01(rng) < 0.5) {
                u.ramp_coupled = true;
                u.p_prev = u.p_min + (u.available - u.p_min) * u01(rng);
                u.can_run = true;
                u.on_upper = std::min(u.available, u.p_prev + u.ramp_mw);
                u.on_lower = std::min(std::max(u.p_min, u.p_prev - u.ramp_mw), u.on_upper);
            } else {
                u.can_run = true;
                u.on_lower = u.p_min;
                u.on_upper = u.available;
            }
        }
        p.units.push_back(u);
    }
    return p;
}

/// Cost of one dispatch under the problem's objective.
inline double dispatch_cost(const DispatchProblem& p, const std::vector<double>& output,
                            const std::vector<double>& shed)
{
    double c = 0.0;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        c += p.units[i].cost * output[i];
        if (p.units[i].curtailable) {
            c += p.weights.curtailment * (p.units[i].available - output[i]);
        }
    }
    for (double s : shed) {
        c += p.weights.voll * s;
    }
    return c;
}

/// Exhaustive commitment enumeration, one LP per pattern with every finite
/// line limit written out in full. Returns the best objective.
// One LP per commitment mask, every finite line limit written out. Returns
// the least weighted objective (or least shed) over all masks.
inline double enumerate_masks(const DispatchProblem& p, bool shed_only, double shed_cap)
{
    std::vector<std::size_t> bin;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        if (p.units[i].binary()) {
            bin.push_back(i);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << bin.size()); ++mask) {
        std::vector<char> on(p.units.size(), 0);
        for (std::size_t k = 0; k < bin.size(); ++k) {
            on[bin[k]] = (mask >> k) & 1u;
        }
        lp::LinearProgram lp;
        std::vector<int> var(p.units.size(), -1);
        double constant = 0.0;
        for (std::size_t i = 0; i < p.units.size(); ++i) {
            const DispatchUnit& u = p.units[i];
            if (u.curtailable) {
                constant += p.weights.curtailment * u.available;
            }
            if (!u.can_run || (u.binary() && !on[i])) {
                continue;
            }
            const double c = u.cost - (u.curtailable ? p.weights.curtailment : 0.0);
            var[i] = lp.add_variable(shed_only ? 0.0 : c, u.on_lower, u.on_upper);
        }
        std::vector<int> shed(p.bus_demand.size());
        double total = 0.0;
        std::vector<std::pair<int, double>> balance;
        for (std::size_t b = 0; b < p.bus_demand.size(); ++b) {
            shed[b] = lp.add_variable(shed_only ? 1.0 : p.weights.voll, 0.0, p.bus_demand[b]);
            balance.emplace_back(shed[b], 1.0);
            total += p.bus_demand[b];
        }
        for (std::size_t i = 0; i < var.size(); ++i) {
            if (var[i] >= 0) {
                balance.emplace_back(var[i], 1.0);
            }
        }
        lp.add_row(balance, lp::RowSense::equal, total);
        if (std::isfinite(shed_cap)) {
            std::vector<std::pair<int, double>> cap;
            for (int v : shed) {
                cap.emplace_back(v, 1.0);
            }
            lp.add_row(cap, lp::RowSense::less_equal, shed_cap);
        }
        if (p.network) {
            const Eigen::MatrixXd& m = p.network->ptdf();
            for (std::size_t k = 0; k < p.line_limit.size(); ++k) {
                if (!std::isfinite(p.line_limit[k])) {
                    continue;
                }
                std::vector<std::pair<int, double>> terms;
                double fixed = 0.0;
                for (std::size_t b = 0; b < p.bus_demand.size(); ++b) {
                    const double a = m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b));
                    fixed -= a * p.bus_demand[b];
                    terms.emplace_back(shed[b], a);
                }
                for (std::size_t i = 0; i < var.size(); ++i) {
                    if (var[i] >= 0) {
                        terms.emplace_back(var[i], m(static_cast<Eigen::Index>(k), p.units[i].bus));
                    }
                }
                lp.add_row(terms, lp::RowSense::less_equal, p.line_limit[k] - fixed);
                lp.add_row(terms, lp::RowSense::greater_equal, -p.line_limit[k] - fixed);
            }
        }
        const lp::Result r = lp::solve(lp);
        if (r.status == lp::Status::optimal) {
            best = std::min(best, r.objective + (shed_only ? 0.0 : constant));
        }
    }
    return best;
}

/// Least shed first, then the least weighted objective at that shed.
inline double enumerate_dispatch(const DispatchProblem& p)
{
    const double least = enumerate_masks(p, true, std::numeric_limits<double>::infinity());
    if (!std::isfinite(least)) {
        return least;
    }
    return enumerate_masks(p, false, least + 1e-6);
}

/// Copper-plate adequacy by pure arithmetic: some commitment brackets demand.
inline bool adequate(const DispatchProblem& p)
{
    double demand = 0.0;
    for (double d : p.bus_demand) {
        demand += d;
    }
    std::vector<std::size_t> bin;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        const DispatchUnit& u = p.units[i];
        if (u.binary()) {
            bin.push_back(i);
        } else if (u.can_run) {
            hi += u.on_upper;
        }
    }
    for (std::uint32_t mask = 0; mask < (1u << bin.size()); ++mask) {
        double l = lo;
        double h = hi;
        for (std::size_t k = 0; k < bin.size(); ++k) {
            if ((mask >> k) & 1u) {
                l += p.units[bin[k]].on_lower;
                h += p.units[bin[k]].on_upper;
            }
        }
        if (l <= demand && demand <= h) {
            return true;
        }
    }
    return false;
}

} // namespace fixture
