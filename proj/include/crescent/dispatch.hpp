#pragma once

#include "crescent/grid_model.hpp"
#include "crescent/powerflow.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crescent {

/// Objective weights. VOLL > curtailment > every generation cost.
struct CostWeights
{
    double voll = 10000.0;
    double curtailment = 100.0;
};

/// Default marginal cost by kind, $/MWh, applied by the config loader when a
/// generator has no cost of its own.
std::map<GeneratorKind, double> default_generation_costs();

enum class UnitState { offline, starting, online };

std::string_view to_string(UnitState s);

/// Commitment memory of one generator between steps.
struct UnitMemory
{
    UnitState state = UnitState::offline;
    double p_prev = 0.0;

    bool operator==(const UnitMemory&) const = default;
};

/// One generator as the operation problem sees it.
struct DispatchUnit
{
    int generator = 0;  ///< global generator index
    int bus = 0;        ///< local bus index within the sub-grid
    double cost = 0.0;  ///< $/MWh
    bool curtailable = false;
    double available = 0.0; ///< output limit this step
    /// Output range when committed; meaningless if !can_run.
    double on_lower = 0.0;
    double on_upper = 0.0;
    bool can_run = false;
    /// Offline synchronous unit that may be started (produces from the next step).
    bool can_start = false;
    /// Inputs the range was derived from, kept for the constraint checker.
    double p_min = 0.0;
    double p_prev = 0.0;
    double ramp_mw = 0.0;
    bool ramp_coupled = false;

    /// Committing is a real choice: off (0 MW) or on within [lower, upper]
    /// with lower > 0.
    bool binary() const { return can_run && on_lower > 0.0; }
};

struct DispatchProblem
{
    std::vector<DispatchUnit> units;
    /// Net demand per local bus, MW (rooftop solar already netted, floored at 0).
    std::vector<double> bus_demand;
    /// Null for a single-bus (copper plate) sub-grid.
    std::shared_ptr<const DcNetwork> network;
    /// Emergency rating per sub-grid line, MW (may be +infinity).
    std::vector<double> line_limit;
    CostWeights weights;
    double step_minutes = 10.0;

    double total_demand() const;
    int binary_units() const;
};

enum class DispatchStatus { optimal, heuristic, infeasible };

std::string_view to_string(DispatchStatus s);

struct DispatchSolution
{
    std::vector<char> committed; ///< per unit
    std::vector<char> starting;  ///< per unit: start-up initiated this step
    std::vector<double> output;  ///< per unit, MW
    std::vector<double> bus_shed; ///< per local bus, MW
    double objective = 0.0;
    DispatchStatus status = DispatchStatus::infeasible;
    int lp_solves = 0;

    double total_shed() const;
    double total_output() const;
};

/// Inputs to build_problem for one sub-grid.
struct DispatchInputs
{
    std::span<const double> generator_available; ///< per generator, MW
    std::span<const double> feeder_net_demand;   ///< per feeder, MW
    std::span<const UnitMemory> memory;          ///< per generator
    std::span<const double> generator_cost;      ///< per generator, $/MWh
    /// False on the first step: no ramp coupling and every unit may run.
    bool has_previous = false;
};

/// Assembles the operation problem. Rooftop solar must already be netted
/// into `feeder_net_demand`.
DispatchProblem build_problem(const GridModel& grid, const SubGrid& sub,
                              std::shared_ptr<const DcNetwork> network,
                              const DispatchInputs& inputs, const CostWeights& weights,
                              double step_minutes);

enum class SolvePath { automatic, exact, heuristic };

struct DispatchOptions
{
    SolvePath path = SolvePath::automatic;
    /// Automatic path uses branch and bound up to this many binary units.
    int exact_unit_limit = 12;
    /// Offline units are started when committed units cannot reach this
    /// fraction above served demand within one ramp step.
    double start_margin = 0.1;
};

/// Minimises VOLL * shed + curtailment * curtailed + cost * output subject to
/// nodal balance, emergency line limits, unit ranges and ramp limits. Total
/// shed is minimised first: when the weighted optimum sheds load that another
/// commitment could serve, cost is re-optimised with shed held at its least
/// attainable value.
DispatchSolution solve_dispatch(const DispatchProblem& problem,
                                const DispatchOptions& options = {});

/// Best solution with the on/off state of every binary unit fixed
/// (`commit` is indexed like problem.units; non-binary entries are ignored).
/// Status is infeasible when no dispatch satisfies the fixed commitment.
DispatchSolution evaluate_commitment(const DispatchProblem& problem,
                                     std::span<const char> commit);

/// Independent feasibility check; returns a description of every violation.
std::vector<std::string> check_solution(const DispatchProblem& problem,
                                        const DispatchSolution& solution,
                                        double tolerance_mw = 1e-6);

/// Splits each bus's shed over its feeders in proportion to net demand.
/// Returns MW shed per feeder of `sub` (same order as sub.feeders).
std::vector<double> allocate_shed(const GridModel& grid, const SubGrid& sub,
                                  const DispatchProblem& problem,
                                  const DispatchSolution& solution,
                                  std::span<const double> feeder_net_demand);

/// Customers without power on one feeder.
double customers_out(double customers, double shed_mw, double net_demand_mw,
                     bool feeder_failed);

} // namespace crescent
