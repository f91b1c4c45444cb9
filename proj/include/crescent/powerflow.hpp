#pragma once

#include "crescent/grid_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace crescent {

/// Which lines conduct and which buses are still alive. Buses are
/// de-energized for good once their island is removed.
struct NetworkStatus
{
    std::vector<char> line_in_service;
    std::vector<char> bus_energized;

    static NetworkStatus all_in_service(const GridModel& grid);
};

/// Per-generator and per-feeder facts that decide whether an island can
/// operate and where its slack sits. Spans are indexed like the grid.
struct SubgridInputs
{
    /// Output limit right now, MW; zero means the unit cannot supply.
    std::span<const double> generator_capacity;
    /// Demand present on the feeder, MW; zero means no load there.
    std::span<const double> feeder_demand;
    /// Units currently online; may be empty (none).
    std::span<const char> committed;
};

/// A connected component of the energized network.
struct SubGrid
{
    std::vector<int> buses;
    std::vector<int> lines;
    std::vector<int> generators;
    std::vector<int> feeders;
    int slack_bus = -1;
    /// Has at least one supplying generator and some demand.
    bool functional = false;
    /// Its network equations could not be solved.
    bool singular = false;

    bool operator==(const SubGrid&) const = default;
};

/// Partitions energized buses by connectivity over in-service lines, in
/// order of each component's lowest bus index. The slack is the bus of the
/// committed synchronous unit with the largest 2*H*Pmax (ties: lowest id),
/// falling back to the largest available unit, then the lowest bus.
std::vector<SubGrid> find_subgrids(const GridModel& grid, const NetworkStatus& status,
                                   const SubgridInputs& inputs);

struct FlowSolution
{
    /// MW on each of sub.lines, positive from -> to.
    std::vector<double> flow_mw;
    /// Radians for each of sub.buses, zero at the slack.
    std::vector<double> angle_rad;
    /// MW the slack injects after absorbing the residual.
    double slack_injection_mw = 0.0;
};

/// Factorised DC network of one sub-grid.
class DcNetwork
{
public:
    /// Throws SingularSystem when the reduced susceptance matrix cannot be
    /// factorised.
    DcNetwork(const GridModel& grid, const SubGrid& sub);

    /// `injection_mw` is indexed by global bus id; the slack entry is
    /// replaced by minus the sum of the others.
    FlowSolution solve(std::span<const double> injection_mw) const;

    /// Same, with injections given per sub-grid bus (sub.buses order).
    FlowSolution solve_local(std::span<const double> local_injection_mw) const;

    /// Sensitivity of each sub-grid line flow (rows, in sub.lines order) to
    /// a 1 MW injection at each sub-grid bus (columns, in sub.buses order)
    /// withdrawn at the slack.
    const Eigen::MatrixXd& ptdf() const;

    int local_bus(int global_bus) const;
    const SubGrid& subgrid() const { return sub_; }

private:
    SubGrid sub_;
    std::map<int, int> local_;
    std::vector<int> from_;
    std::vector<int> to_;
    std::vector<double> x_;
    double base_ = 100.0;
    int slack_local_ = 0;
    Eigen::LLT<Eigen::MatrixXd> factor_;
    mutable std::shared_ptr<Eigen::MatrixXd> ptdf_;
};

/// Reuses factorisations for topologies seen before within one realization.
class DcNetworkCache
{
public:
    std::shared_ptr<const DcNetwork> get(const GridModel& grid, const SubGrid& sub);

private:
    std::map<std::pair<std::vector<int>, int>, std::shared_ptr<const DcNetwork>> cache_;
};

FlowSolution dc_power_flow(const GridModel& grid, const SubGrid& sub,
                           std::span<const double> injection_mw);

/// Overload trip rule. Lines above their emergency rating always trip; the
/// optional probabilistic rule also trips lines loaded between the normal
/// and emergency ratings with `trip_probability`.
struct TripRule
{
    bool probabilistic = false;
    double trip_probability = 0.0;
    std::uint64_t seed = 0;
    int step = 0;
    /// Flows within this many MW of the emergency rating do not trip.
    double tolerance_mw = 1e-6;
};

struct LineTrip
{
    int line = 0;
    int iteration = 0;
    double flow_mw = 0.0;
};

struct CascadeResult
{
    std::vector<SubGrid> subgrids;
    std::vector<LineTrip> trips;
    /// Flow solutions performed, including the final trip-free one.
    int iterations = 0;
};

/// OPA-style overload cascade: solve flows in every functional sub-grid,
/// trip overloaded lines, recompute connectivity, repeat to a fixed point.
/// Tripped lines are cleared in `status`. Singular sub-grids come back
/// flagged and non-functional.
CascadeResult cascade(const GridModel& grid, NetworkStatus& status,
                      const SubgridInputs& inputs,
                      std::span<const double> injection_mw, const TripRule& rule,
                      DcNetworkCache* cache = nullptr);

/// Generation minus demand over the sub-grid's members, MW.
double power_imbalance(const SubGrid& sub, std::span<const double> generation_mw,
                       std::span<const double> demand_mw);

/// Sum of 2 * H * Pmax over committed synchronous units, MW*s.
double synchronous_inertia(const GridModel& grid, const SubGrid& sub,
                           std::span<const char> committed);

/// f0 * imbalance / inertia; +-infinity without inertia unless the
/// imbalance is also zero.
double max_rocof(double imbalance_mw, double f0_hz, double inertia_mws);

struct StabilityVerdict
{
    double imbalance_mw = 0.0;
    double max_rocof_hz_s = 0.0;
    bool stable = true;
};

inline constexpr double kDefaultRocofLimit = 2.0;

/// |RoCoF| <= limit survives (closed interval).
StabilityVerdict stability_verdict(double imbalance_mw, double f0_hz,
                                   double inertia_mws, double rocof_limit);

struct ScreenResult
{
    std::vector<int> surviving;
    std::vector<int> removed;
    std::vector<StabilityVerdict> verdicts; // one per input sub-grid
};

/// Screens the functional sub-grids; non-functional ones are neither
/// surviving nor removed.
ScreenResult stability_screen(const GridModel& grid, std::span<const SubGrid> subgrids,
                              std::span<const double> generation_mw,
                              std::span<const double> demand_mw,
                              std::span<const char> committed, double rocof_limit);

} // namespace crescent
