#include "crescent/powerflow.hpp"

#include "crescent/errors.hpp"
#include "crescent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace crescent {

NetworkStatus NetworkStatus::all_in_service(const GridModel& grid)
{
    NetworkStatus s;
    s.line_in_service.assign(grid.lines.size(), 1);
    s.bus_energized.assign(grid.buses.size(), 1);
    return s;
}

namespace {

int find_root(std::vector<int>& parent, int x)
{
    while (parent[static_cast<std::size_t>(x)] != x) {
        auto& p = parent[static_cast<std::size_t>(x)];
        p = parent[static_cast<std::size_t>(p)];
        x = p;
    }
    return x;
}

bool flag(std::span<const char> v, std::size_t i) { return !v.empty() && v[i] != 0; }

double value(std::span<const double> v, std::size_t i) { return v.empty() ? 0.0 : v[i]; }

int choose_slack(const GridModel& grid, const SubGrid& sub, const SubgridInputs& in)
{
    const auto& ix = grid.idx();
    int best = -1;
    double best_inertia = 0.0;
    for (int g : sub.generators) {
        const auto gi = static_cast<std::size_t>(g);
        const Generator& gen = grid.generators[gi];
        if (!flag(in.committed, gi) || !is_synchronous(gen.kind) ||
            value(in.generator_capacity, gi) <= 0.0) {
            continue;
        }
        const double h = 2.0 * gen.inertia_s * gen.p_max;
        if (best < 0 || h > best_inertia ||
            (h == best_inertia && gen.id < grid.generators[static_cast<std::size_t>(best)].id)) {
            best = g;
            best_inertia = h;
        }
    }
    if (best < 0) {
        double best_cap = 0.0;
        for (int g : sub.generators) {
            const auto gi = static_cast<std::size_t>(g);
            const double cap = value(in.generator_capacity, gi);
            if (cap <= 0.0) {
                continue;
            }
            if (best < 0 || cap > best_cap ||
                (cap == best_cap &&
                 grid.generators[gi].id < grid.generators[static_cast<std::size_t>(best)].id)) {
                best = g;
                best_cap = cap;
            }
        }
    }
    if (best >= 0) {
        return ix.generator_bus[static_cast<std::size_t>(best)];
    }
    return sub.buses.front();
}

} // namespace

std::vector<SubGrid> find_subgrids(const GridModel& grid, const NetworkStatus& status,
                                   const SubgridInputs& inputs)
{
    const auto& ix = grid.idx();
    const int nb = static_cast<int>(grid.buses.size());
    std::vector<int> parent(static_cast<std::size_t>(nb));
    std::iota(parent.begin(), parent.end(), 0);
    auto live = [&](int b) { return status.bus_energized[static_cast<std::size_t>(b)] != 0; };

    for (std::size_t l = 0; l < grid.lines.size(); ++l) {
        const int f = ix.line_from[l];
        const int t = ix.line_to[l];
        if (!status.line_in_service[l] || !live(f) || !live(t)) {
            continue;
        }
        const int rf = find_root(parent, f);
        const int rt = find_root(parent, t);
        if (rf != rt) {
            parent[static_cast<std::size_t>(std::max(rf, rt))] = std::min(rf, rt);
        }
    }

    std::vector<int> slot(static_cast<std::size_t>(nb), -1);
    std::vector<SubGrid> subs;
    for (int b = 0; b < nb; ++b) {
        if (!live(b)) {
            continue;
        }
        const int r = find_root(parent, b);
        auto& s = slot[static_cast<std::size_t>(r)];
        if (s < 0) {
            s = static_cast<int>(subs.size());
            subs.emplace_back();
        }
        subs[static_cast<std::size_t>(s)].buses.push_back(b);
    }
    auto sub_of_bus = [&](int b) {
        return live(b) ? slot[static_cast<std::size_t>(find_root(parent, b))] : -1;
    };
    for (std::size_t l = 0; l < grid.lines.size(); ++l) {
        const int f = ix.line_from[l];
        if (status.line_in_service[l] && live(f) && live(ix.line_to[l])) {
            subs[static_cast<std::size_t>(sub_of_bus(f))].lines.push_back(static_cast<int>(l));
        }
    }
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
        const int s = sub_of_bus(ix.generator_bus[g]);
        if (s >= 0) {
            subs[static_cast<std::size_t>(s)].generators.push_back(static_cast<int>(g));
        }
    }
    for (std::size_t d = 0; d < grid.feeders.size(); ++d) {
        const int s = sub_of_bus(ix.feeder_bus[d]);
        if (s >= 0) {
            subs[static_cast<std::size_t>(s)].feeders.push_back(static_cast<int>(d));
        }
    }
    for (auto& sub : subs) {
        const bool supply = std::any_of(sub.generators.begin(), sub.generators.end(), [&](int g) {
            return value(inputs.generator_capacity, static_cast<std::size_t>(g)) > 0.0;
        });
        const bool demand = std::any_of(sub.feeders.begin(), sub.feeders.end(), [&](int d) {
            return value(inputs.feeder_demand, static_cast<std::size_t>(d)) > 0.0;
        });
        sub.functional = supply && demand;
        sub.slack_bus = choose_slack(grid, sub, inputs);
    }
    return subs;
}

DcNetwork::DcNetwork(const GridModel& grid, const SubGrid& sub)
    : sub_(sub), base_(grid.system_base_mva)
{
    const auto& ix = grid.idx();
    for (std::size_t i = 0; i < sub.buses.size(); ++i) {
        local_.emplace(sub.buses[i], static_cast<int>(i));
    }
    slack_local_ = local_bus(sub.slack_bus);
    for (int l : sub.lines) {
        const auto li = static_cast<std::size_t>(l);
        from_.push_back(local_bus(ix.line_from[li]));
        to_.push_back(local_bus(ix.line_to[li]));
        x_.push_back(grid.lines[li].reactance_pu);
    }
    const int n = static_cast<int>(sub.buses.size());
    if (n <= 1) {
        return;
    }
    // Reduced susceptance matrix with the slack row/column removed.
    auto reduced = [&](int b) { return b < slack_local_ ? b : b - 1; };
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (std::size_t k = 0; k < x_.size(); ++k) {
        const double y = 1.0 / x_[k];
        const int f = from_[k];
        const int t = to_[k];
        if (f != slack_local_) {
            bmat(reduced(f), reduced(f)) += y;
        }
        if (t != slack_local_) {
            bmat(reduced(t), reduced(t)) += y;
        }
        if (f != slack_local_ && t != slack_local_) {
            bmat(reduced(f), reduced(t)) -= y;
            bmat(reduced(t), reduced(f)) -= y;
        }
    }
    factor_.compute(bmat);
    if (factor_.info() != Eigen::Success) {
        throw SingularSystem(fmt::format("singular network at slack bus {}", sub.slack_bus));
    }
}

int DcNetwork::local_bus(int global_bus) const
{
    auto it = local_.find(global_bus);
    if (it == local_.end()) {
        throw InvariantViolation(fmt::format("bus {} not in sub-grid", global_bus));
    }
    return it->second;
}

FlowSolution DcNetwork::solve(std::span<const double> injection_mw) const
{
    std::vector<double> local(sub_.buses.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
        local[i] = injection_mw[static_cast<std::size_t>(sub_.buses[i])];
    }
    return solve_local(local);
}

FlowSolution DcNetwork::solve_local(std::span<const double> local_injection_mw) const
{
    const int n = static_cast<int>(sub_.buses.size());
    FlowSolution sol;
    sol.angle_rad.assign(static_cast<std::size_t>(n), 0.0);
    sol.flow_mw.assign(x_.size(), 0.0);
    double others = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i != slack_local_) {
            others += local_injection_mw[static_cast<std::size_t>(i)];
        }
    }
    sol.slack_injection_mw = -others;
    if (n <= 1) {
        return sol;
    }
    Eigen::VectorXd p(n - 1);
    for (int i = 0, r = 0; i < n; ++i) {
        if (i != slack_local_) {
            p(r++) = local_injection_mw[static_cast<std::size_t>(i)] / base_;
        }
    }
    const Eigen::VectorXd theta = factor_.solve(p);
    for (int i = 0, r = 0; i < n; ++i) {
        if (i != slack_local_) {
            sol.angle_rad[static_cast<std::size_t>(i)] = theta(r++);
        }
    }
    for (std::size_t k = 0; k < x_.size(); ++k) {
        sol.flow_mw[k] = (sol.angle_rad[static_cast<std::size_t>(from_[k])] -
                          sol.angle_rad[static_cast<std::size_t>(to_[k])]) /
                         x_[k] * base_;
    }
    return sol;
}

const Eigen::MatrixXd& DcNetwork::ptdf() const
{
    if (ptdf_) {
        return *ptdf_;
    }
    const int n = static_cast<int>(sub_.buses.size());
    auto m = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(x_.size()), n));
    if (n > 1) {
        // X = B^-1 (per unit); flow = (X_f - X_t) P / x, base cancels.
        const Eigen::MatrixXd inv =
            factor_.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
        auto row_of = [&](int b, int col) -> double {
            if (b == slack_local_ || col == slack_local_) {
                return 0.0;
            }
            const int rb = b < slack_local_ ? b : b - 1;
            const int rc = col < slack_local_ ? col : col - 1;
            return inv(rb, rc);
        };
        for (std::size_t k = 0; k < x_.size(); ++k) {
            for (int c = 0; c < n; ++c) {
                (*m)(static_cast<Eigen::Index>(k), c) =
                    (row_of(from_[k], c) - row_of(to_[k], c)) / x_[k];
            }
        }
    }
    ptdf_ = std::move(m);
    return *ptdf_;
}

std::shared_ptr<const DcNetwork> DcNetworkCache::get(const GridModel& grid,
                                                     const SubGrid& sub)
{
    auto key = std::make_pair(sub.lines, sub.slack_bus);
    if (sub.lines.empty()) {
        // Single-bus islands have no equations; key on the bus itself.
        key.first = {-1 - sub.buses.front()};
    }
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        return it->second;
    }
    auto net = std::make_shared<const DcNetwork>(grid, sub);
    cache_.emplace(std::move(key), net);
    return net;
}

FlowSolution dc_power_flow(const GridModel& grid, const SubGrid& sub,
                           std::span<const double> injection_mw)
{
    return DcNetwork(grid, sub).solve(injection_mw);
}

CascadeResult cascade(const GridModel& grid, NetworkStatus& status,
                      const SubgridInputs& inputs,
                      std::span<const double> injection_mw, const TripRule& rule,
                      DcNetworkCache* cache)
{
    CascadeResult result;
    DcNetworkCache local_cache;
    DcNetworkCache& nets = cache ? *cache : local_cache;
    const int max_iterations = static_cast<int>(grid.lines.size()) + 1;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        result.iterations = iter;
        result.subgrids = find_subgrids(grid, status, inputs);
        std::vector<LineTrip> trips;
        for (auto& sub : result.subgrids) {
            if (!sub.functional || sub.lines.empty()) {
                continue;
            }
            FlowSolution flow;
            try {
                flow = nets.get(grid, sub)->solve(injection_mw);
            } catch (const SingularSystem&) {
                sub.singular = true;
                sub.functional = false;
                continue;
            }
            for (std::size_t k = 0; k < sub.lines.size(); ++k) {
                const int l = sub.lines[k];
                const Line& line = grid.lines[static_cast<std::size_t>(l)];
                const double f = std::abs(flow.flow_mw[k]);
                bool trip = f > line.emergency_mw + rule.tolerance_mw;
                if (!trip && rule.probabilistic && f > line.rating_mw + rule.tolerance_mw) {
                    const double u = rng::keyed_uniform(
                        rule.seed, fmt::format("trip:{}:{}:{}", rule.step, iter, line.id));
                    trip = u < rule.trip_probability;
                }
                if (trip) {
                    trips.push_back({l, iter, flow.flow_mw[k]});
                }
            }
        }
        if (trips.empty()) {
            break;
        }
        std::sort(trips.begin(), trips.end(),
                  [](const LineTrip& a, const LineTrip& b) { return a.line < b.line; });
        for (const auto& t : trips) {
            status.line_in_service[static_cast<std::size_t>(t.line)] = 0;
        }
        result.trips.insert(result.trips.end(), trips.begin(), trips.end());
    }
    return result;
}

double power_imbalance(const SubGrid& sub, std::span<const double> generation_mw,
                       std::span<const double> demand_mw)
{
    double gen = 0.0;
    for (int g : sub.generators) {
        gen += generation_mw[static_cast<std::size_t>(g)];
    }
    double load = 0.0;
    for (int d : sub.feeders) {
        load += demand_mw[static_cast<std::size_t>(d)];
    }
    return gen - load;
}

double synchronous_inertia(const GridModel& grid, const SubGrid& sub,
                           std::span<const char> committed)
{
    double h = 0.0;
    for (int g : sub.generators) {
        const auto gi = static_cast<std::size_t>(g);
        const Generator& gen = grid.generators[gi];
        if (is_synchronous(gen.kind) && flag(committed, gi)) {
            h += 2.0 * gen.inertia_s * gen.p_max;
        }
    }
    return h;
}

double max_rocof(double imbalance_mw, double f0_hz, double inertia_mws)
{
    if (inertia_mws <= 0.0) {
        if (imbalance_mw == 0.0) {
            return 0.0;
        }
        return imbalance_mw > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
    }
    return f0_hz * imbalance_mw / inertia_mws;
}

StabilityVerdict stability_verdict(double imbalance_mw, double f0_hz,
                                   double inertia_mws, double rocof_limit)
{
    StabilityVerdict v;
    v.imbalance_mw = imbalance_mw;
    v.max_rocof_hz_s = max_rocof(imbalance_mw, f0_hz, inertia_mws);
    v.stable = std::abs(v.max_rocof_hz_s) <= rocof_limit;
    return v;
}

ScreenResult stability_screen(const GridModel& grid, std::span<const SubGrid> subgrids,
                              std::span<const double> generation_mw,
                              std::span<const double> demand_mw,
                              std::span<const char> committed, double rocof_limit)
{
    ScreenResult out;
    for (std::size_t i = 0; i < subgrids.size(); ++i) {
        const SubGrid& sub = subgrids[i];
        StabilityVerdict v;
        if (sub.functional) {
            v = stability_verdict(power_imbalance(sub, generation_mw, demand_mw),
                                  grid.rated_frequency_hz,
                                  synchronous_inertia(grid, sub, committed), rocof_limit);
            (v.stable ? out.surviving : out.removed).push_back(static_cast<int>(i));
        }
        out.verdicts.push_back(v);
    }
    return out;
}

} // namespace crescent
