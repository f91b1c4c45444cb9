#include "crescent/dispatch.hpp"

#include "crescent/errors.hpp"
#include "crescent/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace crescent {

std::map<GeneratorKind, double> default_generation_costs()
{
    return {{GeneratorKind::thermal, 50.0},
            {GeneratorKind::hydro, 5.0},
            {GeneratorKind::utility_solar, 1.0},
            {GeneratorKind::wind, 1.0}};
}

std::string_view to_string(UnitState s)
{
    switch (s) {
    case UnitState::offline: return "offline";
    case UnitState::starting: return "starting";
    case UnitState::online: return "online";
    }
    return "unknown";
}

std::string_view to_string(DispatchStatus s)
{
    switch (s) {
    case DispatchStatus::optimal: return "optimal";
    case DispatchStatus::heuristic: return "heuristic";
    case DispatchStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

double DispatchProblem::total_demand() const
{
    return std::accumulate(bus_demand.begin(), bus_demand.end(), 0.0);
}

int DispatchProblem::binary_units() const
{
    return static_cast<int>(
        std::count_if(units.begin(), units.end(), [](const DispatchUnit& u) { return u.binary(); }));
}

double DispatchSolution::total_shed() const
{
    return std::accumulate(bus_shed.begin(), bus_shed.end(), 0.0);
}

double DispatchSolution::total_output() const
{
    return std::accumulate(output.begin(), output.end(), 0.0);
}

DispatchProblem build_problem(const GridModel& grid, const SubGrid& sub,
                              std::shared_ptr<const DcNetwork> network,
                              const DispatchInputs& inputs, const CostWeights& weights,
                              double step_minutes)
{
    if (!(step_minutes > 0.0)) {
        throw InvariantViolation("dispatch step length must be positive");
    }
    if (!(weights.voll > weights.curtailment) || !(weights.curtailment > 0.0)) {
        throw InvariantViolation("cost weights must satisfy VOLL > curtailment > 0");
    }
    const auto& ix = grid.idx();
    std::map<int, int> local;
    for (std::size_t i = 0; i < sub.buses.size(); ++i) {
        local.emplace(sub.buses[i], static_cast<int>(i));
    }
    DispatchProblem p;
    p.network = network && sub.buses.size() > 1 ? std::move(network) : nullptr;
    p.weights = weights;
    p.step_minutes = step_minutes;
    p.bus_demand.assign(sub.buses.size(), 0.0);
    for (int d : sub.feeders) {
        const auto di = static_cast<std::size_t>(d);
        const double net = std::max(0.0, inputs.feeder_net_demand[di]);
        p.bus_demand[static_cast<std::size_t>(local.at(ix.feeder_bus[di]))] += net;
    }
    for (int l : sub.lines) {
        p.line_limit.push_back(grid.lines[static_cast<std::size_t>(l)].emergency_mw);
    }

    for (int g : sub.generators) {
        const auto gi = static_cast<std::size_t>(g);
        const Generator& gen = grid.generators[gi];
        DispatchUnit u;
        u.generator = g;
        u.bus = local.at(ix.generator_bus[gi]);
        u.cost = inputs.generator_cost.empty() ? gen.marginal_cost : inputs.generator_cost[gi];
        if (gen.kind != GeneratorKind::thermal && gen.kind != GeneratorKind::hydro &&
            gen.kind != GeneratorKind::utility_solar && gen.kind != GeneratorKind::wind) {
            throw InvariantViolation(fmt::format("generator {} is not dispatchable", gen.id));
        }
        u.curtailable = is_renewable(gen.kind);
        u.available = std::max(0.0, inputs.generator_available[gi]);
        u.p_min = u.curtailable ? 0.0 : gen.p_min;
        u.ramp_mw = gen.ramp_mw_per_min * step_minutes;
        const UnitMemory mem = inputs.memory.empty() ? UnitMemory{} : inputs.memory[gi];

        const bool enough = u.available > 0.0 && u.available >= u.p_min;
        if (!inputs.has_previous) {
            u.can_run = enough;
            u.on_lower = u.p_min;
            u.on_upper = u.available;
        } else if (mem.state == UnitState::offline) {
            if (u.curtailable) {
                u.can_run = enough;
                u.on_lower = 0.0;
                u.on_upper = u.available;
            } else {
                u.can_start = enough;
            }
        } else {
            // A unit that began starting last step synchronises at p_min.
            u.p_prev = mem.state == UnitState::starting ? u.p_min : mem.p_prev;
            u.ramp_coupled = true;
            u.can_run = enough;
            const double hi = std::min(u.available, u.p_prev + u.ramp_mw);
            const double lo = std::max(u.p_min, u.p_prev - u.ramp_mw);
            u.on_upper = hi;
            // Availability below the ramp-down floor forces a deeper cut.
            u.on_lower = std::min(lo, hi);
            if (u.on_upper < u.p_min) {
                u.can_run = false;
            }
        }
        if (!u.can_run) {
            u.on_lower = 0.0;
            u.on_upper = 0.0;
        }
        p.units.push_back(u);
    }
    return p;
}

namespace {

enum class Mode : char { off, on, relaxed };

struct Outcome
{
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> output;
    std::vector<double> commit; // relaxed commitment value per unit
    std::vector<double> bus_shed;
};

constexpr double kLineSlack = 1e-7;
constexpr double kShedTol = 1e-6;

/// What the LP minimises: the weighted cost, or shed alone. A finite cap
/// bounds total shed.
struct Goal
{
    bool shed_only = false;
    double shed_cap = std::numeric_limits<double>::infinity();
};

/// Solves the LP for one commitment pattern, adding PTDF rows for lines
/// found overloaded until none are.
class Evaluator
{
public:
    explicit Evaluator(const DispatchProblem& p, Goal goal = {})
        : p_(p), goal_(goal), active_(p.line_limit.size(), 0)
    {
        for (const auto& u : p.units) {
            if (u.curtailable && !goal.shed_only) {
                curtail_const_ += p.weights.curtailment * u.available;
            }
        }
    }

    Outcome run(std::span<const Mode> modes)
    {
        for (;;) {
            Outcome out = solve_once(modes);
            ++solves_;
            if (!out.feasible || !add_violated(out)) {
                return out;
            }
        }
    }

    int solves() const { return solves_; }

private:
    Outcome solve_once(std::span<const Mode> modes) const
    {
        const std::size_t nu = p_.units.size();
        const std::size_t nb = p_.bus_demand.size();
        lp::LinearProgram lp;
        std::vector<int> pvar(nu, -1);
        std::vector<int> uvar(nu, -1);
        std::vector<int> svar(nb, -1);
        for (std::size_t i = 0; i < nu; ++i) {
            const DispatchUnit& u = p_.units[i];
            const double c = goal_.shed_only
                                 ? 0.0
                                 : u.cost - (u.curtailable ? p_.weights.curtailment : 0.0);
            if (modes[i] == Mode::on) {
                pvar[i] = lp.add_variable(c, u.on_lower, u.on_upper);
            } else if (modes[i] == Mode::relaxed) {
                pvar[i] = lp.add_variable(c, 0.0, u.on_upper);
                uvar[i] = lp.add_variable(0.0, 0.0, 1.0);
                lp.add_row({{pvar[i], 1.0}, {uvar[i], -u.on_upper}}, lp::RowSense::less_equal, 0.0);
                lp.add_row({{pvar[i], 1.0}, {uvar[i], -u.on_lower}}, lp::RowSense::greater_equal,
                           0.0);
            }
        }
        double total = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            if (p_.bus_demand[b] > 0.0) {
                svar[b] = lp.add_variable(goal_.shed_only ? 1.0 : p_.weights.voll, 0.0,
                                          p_.bus_demand[b]);
                total += p_.bus_demand[b];
            }
        }
        if (std::isfinite(goal_.shed_cap)) {
            std::vector<std::pair<int, double>> shed;
            for (int v : svar) {
                if (v >= 0) {
                    shed.emplace_back(v, 1.0);
                }
            }
            lp.add_row(std::move(shed), lp::RowSense::less_equal, goal_.shed_cap);
        }
        std::vector<std::pair<int, double>> balance;
        for (std::size_t i = 0; i < nu; ++i) {
            if (pvar[i] >= 0) {
                balance.emplace_back(pvar[i], 1.0);
            }
        }
        for (std::size_t b = 0; b < nb; ++b) {
            if (svar[b] >= 0) {
                balance.emplace_back(svar[b], 1.0);
            }
        }
        lp.add_row(std::move(balance), lp::RowSense::equal, total);

        if (p_.network) {
            const Eigen::MatrixXd& ptdf = p_.network->ptdf();
            for (std::size_t k = 0; k < active_.size(); ++k) {
                if (!active_[k]) {
                    continue;
                }
                const auto kr = static_cast<Eigen::Index>(k);
                std::vector<std::pair<int, double>> terms;
                double base = 0.0; // flow from demand alone
                for (std::size_t i = 0; i < nu; ++i) {
                    const double a = ptdf(kr, p_.units[i].bus);
                    if (pvar[i] >= 0 && a != 0.0) {
                        terms.emplace_back(pvar[i], a);
                    }
                }
                for (std::size_t b = 0; b < nb; ++b) {
                    const double a = ptdf(kr, static_cast<Eigen::Index>(b));
                    base -= a * p_.bus_demand[b];
                    if (svar[b] >= 0 && a != 0.0) {
                        terms.emplace_back(svar[b], a);
                    }
                }
                const double e = p_.line_limit[k];
                lp.add_row(terms, lp::RowSense::less_equal, e - base);
                lp.add_row(std::move(terms), lp::RowSense::greater_equal, -e - base);
            }
        }

        const lp::Result r = lp::solve(lp);
        Outcome out;
        if (r.status != lp::Status::optimal) {
            return out;
        }
        out.feasible = true;
        out.objective = r.objective + curtail_const_;
        out.output.assign(nu, 0.0);
        out.commit.assign(nu, 0.0);
        out.bus_shed.assign(nb, 0.0);
        for (std::size_t i = 0; i < nu; ++i) {
            if (pvar[i] >= 0) {
                out.output[i] = r.x[static_cast<std::size_t>(pvar[i])];
                out.commit[i] = uvar[i] >= 0 ? r.x[static_cast<std::size_t>(uvar[i])] : 1.0;
            }
        }
        for (std::size_t b = 0; b < nb; ++b) {
            if (svar[b] >= 0) {
                out.bus_shed[b] = r.x[static_cast<std::size_t>(svar[b])];
            }
        }
        return out;
    }

    bool add_violated(const Outcome& out)
    {
        if (!p_.network) {
            return false;
        }
        const std::vector<double> inj = injections(p_, out.output, out.bus_shed);
        const Eigen::MatrixXd& ptdf = p_.network->ptdf();
        bool added = false;
        for (std::size_t k = 0; k < active_.size(); ++k) {
            if (active_[k] || !std::isfinite(p_.line_limit[k])) {
                continue;
            }
            double flow = 0.0;
            for (std::size_t b = 0; b < inj.size(); ++b) {
                flow += ptdf(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b)) * inj[b];
            }
            if (std::abs(flow) > p_.line_limit[k] + kLineSlack) {
                active_[k] = 1;
                added = true;
            }
        }
        return added;
    }

public:
    static std::vector<double> injections(const DispatchProblem& p,
                                          std::span<const double> output,
                                          std::span<const double> shed)
    {
        std::vector<double> inj(p.bus_demand.size(), 0.0);
        for (std::size_t b = 0; b < inj.size(); ++b) {
            inj[b] = shed[b] - p.bus_demand[b];
        }
        for (std::size_t i = 0; i < p.units.size(); ++i) {
            inj[static_cast<std::size_t>(p.units[i].bus)] += output[i];
        }
        return inj;
    }

private:
    const DispatchProblem& p_;
    Goal goal_;
    std::vector<char> active_;
    double curtail_const_ = 0.0;
    int solves_ = 0;
};

/// Unit modes for a full on/off choice; units that are not binary are fixed.
std::vector<Mode> modes_for(const DispatchProblem& p, std::span<const char> commit)
{
    std::vector<Mode> m(p.units.size(), Mode::off);
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        const DispatchUnit& u = p.units[i];
        if (!u.can_run) {
            continue;
        }
        m[i] = !u.binary() || commit[i] ? Mode::on : Mode::off;
    }
    return m;
}

bool improves(double candidate, double incumbent)
{
    return candidate < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

DispatchSolution to_solution(const DispatchProblem& p, std::span<const Mode> modes,
                             const Outcome& out, DispatchStatus status, int solves)
{
    DispatchSolution s;
    s.lp_solves = solves;
    s.committed.assign(p.units.size(), 0);
    s.starting.assign(p.units.size(), 0);
    s.output.assign(p.units.size(), 0.0);
    s.bus_shed.assign(p.bus_demand.size(), 0.0);
    if (!out.feasible) {
        s.status = DispatchStatus::infeasible;
        return s;
    }
    s.status = status;
    s.objective = out.objective;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        if (modes[i] == Mode::on) {
            s.committed[i] = 1;
            s.output[i] = std::clamp(out.output[i], p.units[i].on_lower, p.units[i].on_upper);
        }
    }
    for (std::size_t b = 0; b < s.bus_shed.size(); ++b) {
        s.bus_shed[b] = std::clamp(out.bus_shed[b], 0.0, p.bus_demand[b]);
    }
    return s;
}

struct Candidate
{
    std::vector<char> commit;
    Outcome outcome;
};

std::vector<int> binary_indices(const DispatchProblem& p)
{
    std::vector<int> idx;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        if (p.units[i].binary()) {
            idx.push_back(static_cast<int>(i));
        }
    }
    return idx;
}

/// Merit-order commitment, repaired until feasible, then 1-flip and swap
/// local search. A feasible `seed` replaces the start when it is better.
Candidate heuristic(const DispatchProblem& p, Evaluator& ev, const std::vector<char>* seed)
{
    const std::vector<int> bins = binary_indices(p);
    std::vector<int> order = bins;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return p.units[static_cast<std::size_t>(a)].cost <
               p.units[static_cast<std::size_t>(b)].cost;
    });
    const double demand = p.total_demand();
    double floor = 0.0;
    double cap = 0.0;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        if (p.units[i].can_run && !p.units[i].binary()) {
            cap += p.units[i].on_upper;
        }
    }
    std::vector<char> commit(p.units.size(), 0);
    for (int i : order) {
        const DispatchUnit& u = p.units[static_cast<std::size_t>(i)];
        if (cap >= demand) {
            break;
        }
        if (floor + u.on_lower <= demand) {
            commit[static_cast<std::size_t>(i)] = 1;
            floor += u.on_lower;
            cap += u.on_upper;
        }
    }

    auto evaluate = [&](const std::vector<char>& c) { return ev.run(modes_for(p, c)); };
    Candidate best{commit, evaluate(commit)};
    // Drop the most expensive committed unit until the pattern is feasible.
    for (auto it = order.rbegin(); !best.outcome.feasible && it != order.rend(); ++it) {
        auto& slot = best.commit[static_cast<std::size_t>(*it)];
        if (slot) {
            slot = 0;
            best.outcome = evaluate(best.commit);
        }
    }
    if (seed) {
        Outcome o = evaluate(*seed);
        if (o.feasible &&
            (!best.outcome.feasible || improves(o.objective, best.outcome.objective))) {
            best = {*seed, std::move(o)};
        }
    }
    if (!best.outcome.feasible) {
        return best;
    }

    bool improved = true;
    while (improved) {
        improved = false;
        for (int i : bins) {
            std::vector<char> c = best.commit;
            c[static_cast<std::size_t>(i)] ^= 1;
            Outcome o = evaluate(c);
            if (o.feasible && improves(o.objective, best.outcome.objective)) {
                best = {std::move(c), std::move(o)};
                improved = true;
            }
        }
        if (improved) {
            continue;
        }
        for (int on : bins) {
            if (!best.commit[static_cast<std::size_t>(on)]) {
                continue;
            }
            for (int off : bins) {
                if (best.commit[static_cast<std::size_t>(off)]) {
                    continue;
                }
                std::vector<char> c = best.commit;
                c[static_cast<std::size_t>(on)] = 0;
                c[static_cast<std::size_t>(off)] = 1;
                Outcome o = evaluate(c);
                if (o.feasible && improves(o.objective, best.outcome.objective)) {
                    best = {std::move(c), std::move(o)};
                    improved = true;
                    break;
                }
            }
            if (improved) {
                break;
            }
        }
    }
    return best;
}

/// Depth-first branch and bound over the binary units on the LP relaxation.
Candidate branch_and_bound(const DispatchProblem& p, Evaluator& ev, Candidate incumbent)
{
    const std::vector<int> bins = binary_indices(p);
    // -1 free, 0 off, 1 on.
    std::vector<std::vector<signed char>> stack{std::vector<signed char>(p.units.size(), -1)};
    while (!stack.empty()) {
        std::vector<signed char> node = std::move(stack.back());
        stack.pop_back();
        std::vector<Mode> modes(p.units.size(), Mode::off);
        for (std::size_t i = 0; i < p.units.size(); ++i) {
            const DispatchUnit& u = p.units[i];
            if (!u.can_run) {
                continue;
            }
            if (!u.binary()) {
                modes[i] = Mode::on;
            } else {
                modes[i] = node[i] < 0 ? Mode::relaxed : (node[i] ? Mode::on : Mode::off);
            }
        }
        Outcome o = ev.run(modes);
        if (!o.feasible ||
            (incumbent.outcome.feasible && !improves(o.objective, incumbent.outcome.objective))) {
            continue;
        }
        int branch = -1;
        double frac = 1e-7;
        for (int i : bins) {
            const auto ii = static_cast<std::size_t>(i);
            if (node[ii] >= 0) {
                continue;
            }
            const double f = std::min(o.commit[ii], 1.0 - o.commit[ii]);
            if (f > frac) {
                frac = f;
                branch = i;
            }
        }
        if (branch < 0) {
            std::vector<char> c(p.units.size(), 0);
            for (int i : bins) {
                const auto ii = static_cast<std::size_t>(i);
                c[ii] = node[ii] >= 0 ? static_cast<char>(node[ii])
                                      : static_cast<char>(o.commit[ii] > 0.5);
            }
            Outcome exact = ev.run(modes_for(p, c));
            if (exact.feasible && (!incumbent.outcome.feasible ||
                                   improves(exact.objective, incumbent.outcome.objective))) {
                incumbent = {std::move(c), std::move(exact)};
            }
            continue;
        }
        const auto bi = static_cast<std::size_t>(branch);
        std::vector<signed char> up = node;
        std::vector<signed char> down = std::move(node);
        up[bi] = 1;
        down[bi] = 0;
        // Explore the side the relaxation leans towards first.
        if (o.commit[bi] >= 0.5) {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        } else {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        }
    }
    return incumbent;
}

// Offline units are started (online from p_min next step) to cover any shed
// and to keep the committed units able to reach demand plus a margin within
// one ramp step.
void mark_starts(const DispatchProblem& p, DispatchSolution& s, double margin)
{
    double demand = 0.0;
    for (double d : p.bus_demand) {
        demand += d;
    }
    double reach = 0.0;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        const DispatchUnit& u = p.units[i];
        if (u.binary()) {
            reach += s.committed[i] ? std::min(u.available, s.output[i] + u.ramp_mw) : 0.0;
        } else if (u.can_run) {
            reach += u.ramp_coupled ? std::min(u.available, s.output[i] + u.ramp_mw) : u.available;
        }
    }
    double need = std::max(s.total_shed(), (1.0 + margin) * (demand - s.total_shed()) - reach);
    if (need <= 1e-6) {
        return;
    }
    std::vector<int> order;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        if (p.units[i].can_start) {
            order.push_back(static_cast<int>(i));
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return p.units[static_cast<std::size_t>(a)].cost <
               p.units[static_cast<std::size_t>(b)].cost;
    });
    for (int i : order) {
        if (need <= 1e-6) {
            break;
        }
        s.starting[static_cast<std::size_t>(i)] = 1;
        need -= p.units[static_cast<std::size_t>(i)].available;
    }
}

} // namespace

DispatchSolution evaluate_commitment(const DispatchProblem& problem,
                                     std::span<const char> commit)
{
    Evaluator ev(problem);
    const std::vector<Mode> modes = modes_for(problem, commit);
    const Outcome o = ev.run(modes);
    return to_solution(problem, modes, o, DispatchStatus::optimal, ev.solves());
}

namespace {

Candidate solve_stage(const DispatchProblem& p, Evaluator& ev, bool exact,
                      const std::vector<char>* seed)
{
    Candidate best = heuristic(p, ev, seed);
    if (exact && p.binary_units() > 0) {
        best = branch_and_bound(p, ev, std::move(best));
    }
    return best;
}

double shed_of(const Outcome& o)
{
    return std::accumulate(o.bus_shed.begin(), o.bus_shed.end(), 0.0);
}

} // namespace

DispatchSolution solve_dispatch(const DispatchProblem& problem, const DispatchOptions& options)
{
    const int nbin = problem.binary_units();
    const bool exact = options.path == SolvePath::exact ||
                       (options.path == SolvePath::automatic && nbin <= options.exact_unit_limit);
    Evaluator ev(problem);
    Candidate best = solve_stage(problem, ev, exact, nullptr);
    int solves = ev.solves();
    // Load is never shed to save cost: when the weighted optimum sheds, find
    // the least shed any commitment allows and re-optimise cost under it.
    if (best.outcome.feasible && shed_of(best.outcome) > kShedTol) {
        Evaluator shed_ev(problem, {true});
        const Candidate least = solve_stage(problem, shed_ev, exact, &best.commit);
        solves += shed_ev.solves();
        if (least.outcome.feasible && least.outcome.objective < shed_of(best.outcome) - kShedTol) {
            Evaluator capped(problem, {false, least.outcome.objective + kShedTol});
            Candidate c = solve_stage(problem, capped, exact, &least.commit);
            solves += capped.solves();
            if (c.outcome.feasible) {
                best = std::move(c);
            }
        }
    }
    const std::vector<Mode> modes = modes_for(problem, best.commit);
    const auto status = exact || nbin == 0 ? DispatchStatus::optimal : DispatchStatus::heuristic;
    DispatchSolution s = to_solution(problem, modes, best.outcome, status, solves);
    if (s.status != DispatchStatus::infeasible) {
        mark_starts(problem, s, options.start_margin);
    }
    return s;
}

std::vector<std::string> check_solution(const DispatchProblem& p, const DispatchSolution& s,
                                        double tol)
{
    std::vector<std::string> issues;
    const std::size_t nu = p.units.size();
    const std::size_t nb = p.bus_demand.size();
    if (s.output.size() != nu || s.committed.size() != nu || s.bus_shed.size() != nb) {
        issues.emplace_back("solution dimensions do not match the problem");
        return issues;
    }
    double supply = 0.0;
    for (std::size_t i = 0; i < nu; ++i) {
        const DispatchUnit& u = p.units[i];
        const double x = s.output[i];
        supply += x;
        if (!s.committed[i]) {
            if (std::abs(x) > tol) {
                issues.push_back(fmt::format("unit {} produces {} MW while off", i, x));
            }
            continue;
        }
        if (!u.can_run) {
            issues.push_back(fmt::format("unit {} committed but cannot run", i));
        }
        if (x > u.available + tol) {
            issues.push_back(fmt::format("unit {} output {} above available {}", i, x, u.available));
        }
        if (x < u.p_min - tol && x < u.available - tol) {
            issues.push_back(fmt::format("unit {} output {} below p_min {}", i, x, u.p_min));
        }
        if (u.ramp_coupled) {
            if (x > u.p_prev + u.ramp_mw + tol) {
                issues.push_back(fmt::format("unit {} ramps up beyond limit", i));
            }
            if (x < u.p_prev - u.ramp_mw - tol && x < u.available - tol) {
                issues.push_back(fmt::format("unit {} ramps down beyond limit", i));
            }
        }
    }
    double served = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        if (s.bus_shed[b] < -tol || s.bus_shed[b] > p.bus_demand[b] + tol) {
            issues.push_back(fmt::format("bus {} shed {} outside [0, {}]", b, s.bus_shed[b],
                                         p.bus_demand[b]));
        }
        served += p.bus_demand[b] - s.bus_shed[b];
    }
    if (std::abs(supply - served) > tol) {
        issues.push_back(fmt::format("balance residual {} MW", supply - served));
    }
    if (p.network) {
        const FlowSolution f =
            p.network->solve_local(Evaluator::injections(p, s.output, s.bus_shed));
        for (std::size_t k = 0; k < f.flow_mw.size(); ++k) {
            if (std::abs(f.flow_mw[k]) > p.line_limit[k] + tol) {
                issues.push_back(fmt::format("line {} flow {} MW exceeds {}", k, f.flow_mw[k],
                                             p.line_limit[k]));
            }
        }
    }
    return issues;
}

std::vector<double> allocate_shed(const GridModel& grid, const SubGrid& sub,
                                  const DispatchProblem& problem,
                                  const DispatchSolution& solution,
                                  std::span<const double> feeder_net_demand)
{
    const auto& ix = grid.idx();
    std::map<int, int> local;
    for (std::size_t i = 0; i < sub.buses.size(); ++i) {
        local.emplace(sub.buses[i], static_cast<int>(i));
    }
    std::vector<double> out;
    out.reserve(sub.feeders.size());
    for (int d : sub.feeders) {
        const auto di = static_cast<std::size_t>(d);
        const auto b = static_cast<std::size_t>(local.at(ix.feeder_bus[di]));
        const double net = std::max(0.0, feeder_net_demand[di]);
        const double bus = problem.bus_demand[b];
        const double shed = solution.bus_shed.empty() ? 0.0 : solution.bus_shed[b];
        out.push_back(bus > 0.0 ? std::min(net, shed * net / bus) : 0.0);
    }
    return out;
}

double customers_out(double customers, double shed_mw, double net_demand_mw,
                     bool feeder_failed)
{
    if (feeder_failed) {
        return customers;
    }
    if (net_demand_mw <= 0.0) {
        return 0.0;
    }
    return customers * std::clamp(shed_mw / net_demand_mw, 0.0, 1.0);
}

} // namespace crescent
