#include "crescent/simulation.hpp"

#include "crescent/errors.hpp"
#include "crescent/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace crescent {

std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::component_failed: return "component_failed";
    case EventKind::line_tripped_overload: return "line_tripped_overload";
    case EventKind::subgrid_removed_rocof: return "subgrid_removed_rocof";
    case EventKind::shed_change: return "shed_change";
    case EventKind::island_deenergized: return "island_deenergized";
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view text)
{
    for (auto k : {EventKind::component_failed, EventKind::line_tripped_overload,
                   EventKind::subgrid_removed_rocof, EventKind::shed_change,
                   EventKind::island_deenergized}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw ConfigError(fmt::format("unknown event kind '{}'", text));
}

LargestFailure largest_failure(const std::vector<double>& performance)
{
    LargestFailure best;
    for (std::size_t t = 1; t < performance.size(); ++t) {
        const double drop = performance[t - 1] - performance[t];
        if (drop > best.drop) {
            best = {static_cast<int>(t), drop};
        }
    }
    return best;
}

std::optional<int> blackout_step(const std::vector<double>& performance)
{
    for (std::size_t t = 0; t < performance.size(); ++t) {
        if (performance[t] <= 0.0) {
            return static_cast<int>(t);
        }
    }
    return std::nullopt;
}

HazardTable HazardTable::compute(const GridModel& grid, const StormTrack& track,
                                 const RoughnessMap& roughness,
                                 const SimulationSettings& settings)
{
    settings.wind.validate();
    settings.solar.validate();
    const auto& ix = grid.idx();
    const double step_km = settings.wind.resample_km;

    std::vector<std::vector<LatLon>> line_pts;
    for (std::size_t l = 0; l < grid.lines.size(); ++l) {
        std::vector<LatLon> route = grid.lines[l].route;
        if (route.size() < 2) {
            route = {grid.buses[static_cast<std::size_t>(ix.line_from[l])].location(),
                     grid.buses[static_cast<std::size_t>(ix.line_to[l])].location()};
        }
        line_pts.push_back(geo::densify(route, step_km));
    }
    std::vector<std::vector<LatLon>> feeder_pts;
    std::vector<LatLon> feeder_site;
    for (std::size_t d = 0; d < grid.feeders.size(); ++d) {
        const auto& route = grid.feeders[d].route;
        const LatLon bus = grid.buses[static_cast<std::size_t>(ix.feeder_bus[d])].location();
        feeder_pts.push_back(route.empty() ? std::vector<LatLon>{bus}
                                           : geo::densify(route, step_km));
        feeder_site.push_back(route.empty() ? bus : geo::centroid(route));
    }
    std::vector<LatLon> gen_site;
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
        gen_site.push_back(grid.buses[static_cast<std::size_t>(ix.generator_bus[g])].location());
    }

    HazardTable h;
    for (int k = 0; k < settings.horizon.steps; ++k) {
        const TimePoint t = settings.horizon.time_at(k);
        ComponentWinds w;
        w.line.assign(grid.lines.size(), 0.0);
        w.feeder.assign(grid.feeders.size(), 0.0);
        w.generator.assign(grid.generators.size(), 0.0);
        std::vector<double> gs(grid.generators.size());
        std::vector<double> fs(grid.feeders.size());
        const double clear = settings.solar.diurnal.at(t);
        if (track.covers(t)) {
            const StormState s = storm_state(track, t);
            for (std::size_t l = 0; l < line_pts.size(); ++l) {
                w.line[l] = max_wind(s, line_pts[l], settings.wind, roughness);
            }
            for (std::size_t d = 0; d < feeder_pts.size(); ++d) {
                w.feeder[d] = max_wind(s, feeder_pts[d], settings.wind, roughness);
                fs[d] = solar_fraction(s, t, feeder_site[d], settings.solar);
            }
            for (std::size_t g = 0; g < gen_site.size(); ++g) {
                w.generator[g] =
                    max_wind(s, std::span<const LatLon>(&gen_site[g], 1), settings.wind, roughness);
                gs[g] = solar_fraction(s, t, gen_site[g], settings.solar);
            }
        } else {
            std::fill(gs.begin(), gs.end(), clear);
            std::fill(fs.begin(), fs.end(), clear);
        }
        h.winds.push_back(std::move(w));
        h.generator_solar.push_back(std::move(gs));
        h.feeder_solar.push_back(std::move(fs));
    }
    return h;
}

namespace {

void put(std::string& key, const void* p, std::size_t n)
{
    key.append(static_cast<const char*>(p), n);
}

void put(std::string& key, double v) { put(key, &v, sizeof v); }
void put(std::string& key, int v) { put(key, &v, sizeof v); }

std::string problem_key(const DispatchProblem& p, const DispatchOptions& o)
{
    std::string key;
    key.reserve(64 + p.units.size() * 80 + p.bus_demand.size() * 8 + p.line_limit.size() * 8);
    put(key, static_cast<int>(o.path));
    put(key, o.exact_unit_limit);
    put(key, o.start_margin);
    put(key, p.weights.voll);
    put(key, p.weights.curtailment);
    put(key, p.step_minutes);
    put(key, static_cast<int>(p.units.size()));
    for (const auto& u : p.units) {
        put(key, u.generator);
        put(key, u.bus);
        const int flags = (u.curtailable ? 1 : 0) | (u.can_run ? 2 : 0) | (u.can_start ? 4 : 0) |
                          (u.ramp_coupled ? 8 : 0);
        put(key, flags);
        for (double v : {u.cost, u.available, u.on_lower, u.on_upper, u.p_min, u.p_prev,
                         u.ramp_mw}) {
            put(key, v);
        }
    }
    put(key, static_cast<int>(p.bus_demand.size()));
    for (double v : p.bus_demand) {
        put(key, v);
    }
    for (double v : p.line_limit) {
        put(key, v);
    }
    if (p.network) {
        const SubGrid& s = p.network->subgrid();
        put(key, s.slack_bus);
        for (int b : s.buses) {
            put(key, b);
        }
        put(key, -1);
        for (int l : s.lines) {
            put(key, l);
        }
    } else {
        put(key, -2);
    }
    return key;
}

} // namespace

DispatchSolution DispatchCache::solve(const DispatchProblem& problem,
                                      const DispatchOptions& options)
{
    std::string key = problem_key(problem, options);
    {
        std::lock_guard lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            return it->second;
        }
    }
    DispatchSolution s = solve_dispatch(problem, options);
    std::lock_guard lock(mutex_);
    if (map_.size() < capacity_) {
        map_.emplace(std::move(key), s);
    }
    return s;
}

std::size_t DispatchCache::size() const
{
    std::lock_guard lock(mutex_);
    return map_.size();
}

RealizationResult run_realization(const RealizationInputs& in, std::uint64_t seed, int index)
{
    const ResistanceAssignment r =
        sample_resistances(in.grid, in.curves, seed, in.settings.tower_spacing_km);
    return run_realization(in, r, seed, index);
}

namespace {

class Realization
{
public:
    Realization(const RealizationInputs& in, const ResistanceAssignment& resistances,
                std::uint64_t seed)
        : grid_(in.grid), hz_(in.hazard), st_(in.settings), cache_(in.cache), r_(resistances),
          seed_(seed), ix_(in.grid.idx())
    {
        const std::size_t ng = grid_.generators.size();
        const std::size_t nf = grid_.feeders.size();
        status_ = NetworkStatus::all_in_service(grid_);
        damage_ = DamageState::intact(grid_);
        memory_.assign(ng, {});
        shed_frac_.assign(nf, 0.0);
        out_frac_.assign(nf, 0.0);
        for (const auto& f : st_.forced_failures) {
            forced_.emplace_back(f.step, resolve_component(grid_, f.component));
        }
        total_customers_ = grid_.total_customers();
        if (!st_.generation_cost.empty() && st_.generation_cost.size() != ng) {
            throw ConfigError("generation cost table does not match the generator count");
        }
    }

    RealizationResult run(int index)
    {
        RealizationResult res;
        res.index = index;
        res.seed = seed_;
        for (int t = 0; t < hz_.steps(); ++t) {
            step(t, res);
        }
        res.blackout_step = blackout_step(res.performance);
        res.largest = largest_failure(res.performance);
        return res;
    }

private:
    void log(RealizationResult& res, int t, EventKind k, std::string c, double m)
    {
        res.events.push_back({t, k, std::move(c), m});
    }

    std::string subgrid_name(const SubGrid& s) const
    {
        return "subgrid:" + grid_.buses[static_cast<std::size_t>(s.buses.front())].id;
    }

    void step(int t, RealizationResult& res)
    {
        const std::size_t ng = grid_.generators.size();
        const std::size_t nf = grid_.feeders.size();

        // Damage.
        std::vector<NewFailure> fails = update_damage(damage_, r_, hz_.winds[static_cast<std::size_t>(t)], t);
        for (const auto& [s, ref] : forced_) {
            if (s == t && !damage_.failed(ref)) {
                damage_.step_of(ref) = t;
                fails.push_back({ref, 0.0, r_.at(ref)});
            }
        }
        for (const auto& f : fails) {
            if (f.ref.type == ComponentType::line) {
                status_.line_in_service[static_cast<std::size_t>(f.ref.index)] = 0;
            }
            log(res, t, EventKind::component_failed, component_key(grid_, f.ref), f.wind_ms);
        }

        // Availability and net demand.
        const SiteConditions site{hz_.winds[static_cast<std::size_t>(t)].generator,
                                  hz_.generator_solar[static_cast<std::size_t>(t)],
                                  hz_.feeder_solar[static_cast<std::size_t>(t)]};
        Availability av = available_generation(grid_, damage_, site, status_.bus_energized,
                                               st_.turbine_cutout_ms);
        std::vector<double> net(nf, 0.0);
        double total_net = 0.0;
        for (std::size_t d = 0; d < nf; ++d) {
            if (damage_.feeder[d] == kIntact) {
                net[d] = std::max(0.0, grid_.feeders[d].demand_at(t) - av.rooftop_mw[d]);
                total_net += net[d];
            }
        }
        for (std::size_t g = 0; g < ng; ++g) {
            if (!status_.bus_energized[static_cast<std::size_t>(ix_.generator_bus[g])]) {
                av.generator_mw[g] = 0.0;
            }
        }

        if (blacked_out_) {
            res.performance.push_back(0.0);
            res.served_mw.push_back(0.0);
            res.shed_mw.push_back(total_net);
            return;
        }

        // Operating point carried over from the previous dispatch.
        std::vector<char> committed(ng, 0);
        std::vector<double> gen_carry(ng, 0.0);
        std::vector<double> dem_carry(nf, 0.0);
        std::vector<double> inj(grid_.buses.size(), 0.0);
        for (std::size_t g = 0; g < ng; ++g) {
            if (memory_[g].state == UnitState::online) {
                committed[g] = 1;
                gen_carry[g] = std::min(memory_[g].p_prev, av.generator_mw[g]);
                inj[static_cast<std::size_t>(ix_.generator_bus[g])] += gen_carry[g];
            }
        }
        for (std::size_t d = 0; d < nf; ++d) {
            dem_carry[d] = net[d] * (1.0 - shed_frac_[d]);
            inj[static_cast<std::size_t>(ix_.feeder_bus[d])] -= dem_carry[d];
        }

        const SubgridInputs inputs{av.generator_mw, net, committed};
        std::vector<SubGrid> subs;
        if (t == 0) {
            subs = find_subgrids(grid_, status_, inputs);
        } else {
            TripRule rule;
            rule.probabilistic = st_.probabilistic_trip;
            rule.trip_probability = st_.trip_probability;
            rule.seed = seed_;
            rule.step = t;
            CascadeResult cr = cascade(grid_, status_, inputs, inj, rule, &networks_);
            for (const auto& trip : cr.trips) {
                log(res, t, EventKind::line_tripped_overload,
                    "line:" + grid_.lines[static_cast<std::size_t>(trip.line)].id,
                    std::abs(trip.flow_mw));
            }
            subs = std::move(cr.subgrids);
        }

        // Classify islands.
        std::vector<double> new_out(nf, 1.0);
        std::vector<double> new_shed(nf, 1.0);
        std::vector<int> candidates;
        for (std::size_t s = 0; s < subs.size(); ++s) {
            const SubGrid& sub = subs[s];
            const bool supply = std::any_of(sub.generators.begin(), sub.generators.end(), [&](int g) {
                return av.generator_mw[static_cast<std::size_t>(g)] > 0.0;
            });
            if (!supply || sub.singular) {
                kill(res, t, sub, EventKind::island_deenergized, demand_of(sub, net));
            } else if (!sub.functional) {
                // Energised but nothing to serve: every unit idles.
                for (int g : sub.generators) {
                    memory_[static_cast<std::size_t>(g)] = {};
                }
                for (int d : sub.feeders) {
                    new_out[static_cast<std::size_t>(d)] = 0.0;
                    new_shed[static_cast<std::size_t>(d)] = 0.0;
                }
            } else {
                candidates.push_back(static_cast<int>(s));
            }
        }

        // Frequency stability screen on the carried operating point.
        std::vector<int> surviving = candidates;
        if (t > 0 && !candidates.empty()) {
            std::vector<SubGrid> screened;
            for (int s : candidates) {
                screened.push_back(subs[static_cast<std::size_t>(s)]);
            }
            const ScreenResult sr = stability_screen(grid_, screened, gen_carry, dem_carry,
                                                     committed, st_.rocof_limit);
            surviving.clear();
            for (int k : sr.surviving) {
                surviving.push_back(candidates[static_cast<std::size_t>(k)]);
            }
            for (int k : sr.removed) {
                const SubGrid& sub = subs[static_cast<std::size_t>(candidates[static_cast<std::size_t>(k)])];
                kill(res, t, sub, EventKind::subgrid_removed_rocof,
                     sr.verdicts[static_cast<std::size_t>(k)].max_rocof_hz_s);
            }
        }

        // Operation problem per surviving island.
        std::vector<char> dispatched(ng, 0);
        for (int s : surviving) {
            const SubGrid& sub = subs[static_cast<std::size_t>(s)];
            std::shared_ptr<const DcNetwork> network;
            if (sub.buses.size() > 1) {
                try {
                    network = networks_.get(grid_, sub);
                } catch (const SingularSystem& e) {
                    spdlog::warn("step {}: {}", t, e.what());
                    kill(res, t, sub, EventKind::island_deenergized, demand_of(sub, net));
                    continue;
                }
            }
            const DispatchInputs di{av.generator_mw, net, memory_, st_.generation_cost, t > 0};
            const DispatchProblem p =
                build_problem(grid_, sub, network, di, st_.weights, st_.horizon.step.count());
            const DispatchSolution sol =
                cache_ ? cache_->solve(p, st_.dispatch) : solve_dispatch(p, st_.dispatch);
            if (sol.status == DispatchStatus::infeasible) {
                spdlog::warn("step {}: dispatch infeasible in {}", t, subgrid_name(sub));
                kill(res, t, sub, EventKind::island_deenergized, demand_of(sub, net));
                continue;
            }
            for (std::size_t i = 0; i < p.units.size(); ++i) {
                const auto g = static_cast<std::size_t>(p.units[i].generator);
                dispatched[g] = 1;
                if (sol.committed[i]) {
                    memory_[g] = {UnitState::online, sol.output[i]};
                } else if (sol.starting[i]) {
                    memory_[g] = {UnitState::starting, 0.0};
                } else {
                    memory_[g] = {};
                }
            }
            const std::vector<double> shed = allocate_shed(grid_, sub, p, sol, net);
            for (std::size_t k = 0; k < sub.feeders.size(); ++k) {
                const auto d = static_cast<std::size_t>(sub.feeders[k]);
                const double frac = net[d] > 0.0 ? std::clamp(shed[k] / net[d], 0.0, 1.0) : 0.0;
                new_shed[d] = frac;
                new_out[d] = frac;
            }
        }
        for (std::size_t g = 0; g < ng; ++g) {
            if (!dispatched[g] && memory_[g].state != UnitState::offline &&
                !status_.bus_energized[static_cast<std::size_t>(ix_.generator_bus[g])]) {
                memory_[g] = {};
            }
        }

        // Performance.
        double served_customers = 0.0;
        double served_mw = 0.0;
        for (std::size_t d = 0; d < nf; ++d) {
            if (damage_.feeder[d] != kIntact) {
                new_out[d] = 1.0;
                new_shed[d] = 1.0;
            }
            served_customers += grid_.feeders[d].customers * (1.0 - new_out[d]);
            served_mw += net[d] * (1.0 - new_shed[d]);
            if (new_out[d] != out_frac_[d]) {
                log(res, t, EventKind::shed_change, "feeder:" + grid_.feeders[d].id, new_out[d]);
            }
        }
        shed_frac_ = std::move(new_shed);
        out_frac_ = std::move(new_out);
        const double perf =
            total_customers_ > 0.0 ? std::clamp(served_customers / total_customers_, 0.0, 1.0) : 0.0;
        res.performance.push_back(perf);
        res.served_mw.push_back(served_mw);
        res.shed_mw.push_back(std::max(0.0, total_net - served_mw));
        if (perf <= 0.0) {
            blacked_out_ = true;
        }
    }

    double demand_of(const SubGrid& sub, const std::vector<double>& net) const
    {
        double sum = 0.0;
        for (int d : sub.feeders) {
            sum += net[static_cast<std::size_t>(d)];
        }
        return sum;
    }

    /// De-energises an island for the rest of the event.
    void kill(RealizationResult& res, int t, const SubGrid& sub, EventKind why, double magnitude)
    {
        if (!sub.generators.empty() || !sub.feeders.empty()) {
            log(res, t, why, subgrid_name(sub), magnitude);
        }
        for (int b : sub.buses) {
            status_.bus_energized[static_cast<std::size_t>(b)] = 0;
        }
        for (int g : sub.generators) {
            memory_[static_cast<std::size_t>(g)] = {};
        }
    }

    const GridModel& grid_;
    const HazardTable& hz_;
    const SimulationSettings& st_;
    DispatchCache* cache_;
    const ResistanceAssignment& r_;
    std::uint64_t seed_;
    const GridIndex& ix_;
    NetworkStatus status_;
    DamageState damage_;
    std::vector<UnitMemory> memory_;
    std::vector<double> shed_frac_;
    std::vector<double> out_frac_;
    std::vector<std::pair<int, ComponentRef>> forced_;
    DcNetworkCache networks_;
    double total_customers_ = 0.0;
    bool blacked_out_ = false;
};

} // namespace

RealizationResult run_realization(const RealizationInputs& in,
                                  const ResistanceAssignment& resistances,
                                  std::uint64_t seed, int index)
{
    if (in.hazard.steps() != in.settings.horizon.steps) {
        throw InvariantViolation("hazard table does not cover the horizon");
    }
    Realization r(in, resistances, seed);
    return r.run(index);
}

} // namespace crescent
