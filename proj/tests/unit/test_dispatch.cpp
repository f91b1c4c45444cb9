#include "crescent/dispatch.hpp"
#include "crescent/errors.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <random>

using namespace crescent;

namespace {

struct Built
{
    GridModel grid;
    SubGrid sub;
    DispatchProblem problem;
};

Built build(GridModel g, std::vector<double> available, std::vector<double> net_demand,
            std::vector<UnitMemory> memory = {}, bool has_previous = false)
{
    fixture::ready(g);
    Built b{g, fixture::whole(g), {}};
    std::shared_ptr<const DcNetwork> net;
    if (b.sub.buses.size() > 1) {
        net = std::make_shared<DcNetwork>(b.grid, b.sub);
    }
    DispatchInputs in;
    in.generator_available = available;
    in.feeder_net_demand = net_demand;
    in.memory = memory;
    in.has_previous = has_previous;
    b.problem = build_problem(b.grid, b.sub, net, in, CostWeights{}, 10.0);
    return b;
}

GridModel copper(double p_max, double load)
{
    GridModel g = fixture::buses_only(1);
    g.generators.push_back(fixture::gen("G", "B0", GeneratorKind::thermal, p_max, 10.0));
    g.feeders.push_back(fixture::feeder("F", "B0", load));
    return g;
}

} // namespace

TEST_CASE("adequate copper plate serves all demand")
{
    const Built b = build(copper(150, 100), {150}, {100});
    const DispatchSolution s = solve_dispatch(b.problem);
    CHECK(s.status == DispatchStatus::optimal);
    CHECK(s.total_shed() == doctest::Approx(0.0));
    CHECK(s.output[0] == doctest::Approx(100.0));
    CHECK(check_solution(b.problem, s).empty());
}

TEST_CASE("deficit on a copper plate equals shedding")
{
    const Built b = build(copper(150, 100), {70}, {100});
    const DispatchSolution s = solve_dispatch(b.problem);
    CHECK(s.total_shed() == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(s.output[0] == doctest::Approx(70.0));
}

TEST_CASE("a congested line forces shedding behind it")
{
    GridModel g = fixture::buses_only(2);
    g.lines.push_back(fixture::line("T", "B0", "B1", 0.1, 50, 50));
    g.generators.push_back(fixture::gen("GA", "B0", GeneratorKind::thermal, 200, 0, 100, 4, 20));
    g.generators.push_back(fixture::gen("GB", "B1", GeneratorKind::thermal, 20, 0, 100, 4, 60));
    g.feeders.push_back(fixture::feeder("F", "B1", 80));
    const Built b = build(g, {200, 20}, {80});
    const DispatchSolution s = solve_dispatch(b.problem);
    CHECK(s.total_shed() == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(s.output[0] == doctest::Approx(50.0));
    CHECK(s.output[1] == doctest::Approx(20.0));
    CHECK(check_solution(b.problem, s).empty());
    CHECK(fixture::enumerate_dispatch(b.problem) == doctest::Approx(s.objective).epsilon(1e-9));
}

TEST_CASE("rooftop netting floors at zero and the first step is unramped")
{
    GridModel g = copper(150, 10);
    g.generators[0].ramp_mw_per_min = 0.1;
    const Built b = build(g, {150}, {-4});
    CHECK(b.problem.bus_demand[0] == 0.0);

    const Built first = build(copper(150, 100), {150}, {100});
    CHECK(first.problem.units[0].on_upper == 150.0);
    CHECK_FALSE(first.problem.units[0].ramp_coupled);
}

TEST_CASE("ramp limits bind after the first step")
{
    GridModel g = copper(150, 100);
    g.generators[0].ramp_mw_per_min = 1.0;
    const std::vector<UnitMemory> mem{{UnitState::online, 60.0}};
    const Built b = build(g, {150}, {100}, mem, true);
    CHECK(b.problem.units[0].on_upper == 70.0);
    const DispatchSolution s = solve_dispatch(b.problem);
    CHECK(s.output[0] == doctest::Approx(70.0));
    CHECK(s.total_shed() == doctest::Approx(30.0));
    CHECK(check_solution(b.problem, s).empty());
}

TEST_CASE("offline units start only when needed")
{
    GridModel g = copper(150, 100);
    g.generators.push_back(fixture::gen("G2", "B0", GeneratorKind::thermal, 100, 10, 5, 4, 50));
    const std::vector<UnitMemory> mem{{UnitState::online, 100.0}, {UnitState::offline, 0.0}};
    Built b = build(g, {150, 100}, {100}, mem, true);
    CHECK(b.problem.units[1].can_start);
    CHECK_FALSE(b.problem.units[1].can_run);
    DispatchSolution s = solve_dispatch(b.problem);
    CHECK(s.committed[1] == 0);
    CHECK(s.starting[1] == 0);

    // Demand beyond what the running unit can reach next step.
    b = build(g, {150, 100}, {240}, mem, true);
    s = solve_dispatch(b.problem);
    CHECK(s.starting[1] == 1);
    CHECK(s.output[1] == 0.0);
}

TEST_CASE("curtailable renewables run before thermal")
{
    GridModel g = copper(150, 100);
    g.generators.push_back(fixture::gen("PV", "B0", GeneratorKind::utility_solar, 80, 0, 100, 0, 0));
    const Built b = build(g, {150, 60}, {100});
    const DispatchSolution s = solve_dispatch(b.problem);
    CHECK(s.output[1] == doctest::Approx(60.0));
    CHECK(s.output[0] == doctest::Approx(40.0));
}

TEST_CASE("shed allocation and customers out")
{
    GridModel g = fixture::buses_only(1);
    g.generators.push_back(fixture::gen("G", "B0", GeneratorKind::thermal, 70));
    g.feeders.push_back(fixture::feeder("F1", "B0", 60, 600));
    g.feeders.push_back(fixture::feeder("F2", "B0", 40, 400));
    const std::vector<double> net{60, 40};
    const Built b = build(g, {70}, net);
    const DispatchSolution s = solve_dispatch(b.problem);
    const auto shed = allocate_shed(b.grid, b.sub, b.problem, s, net);
    CHECK(shed[0] == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(shed[1] == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(customers_out(600, shed[0], 60, false) == doctest::Approx(180.0));
    CHECK(customers_out(600, 0.0, 60, false) == 0.0);
    CHECK(customers_out(600, 0.0, 60, true) == 600.0);
    CHECK(customers_out(600, 0.0, 0.0, false) == 0.0);
}

TEST_CASE("the checker catches violations")
{
    const Built b = build(copper(150, 100), {150}, {100});
    DispatchSolution s = solve_dispatch(b.problem);
    DispatchSolution bad = s;
    bad.output[0] = 160.0;
    CHECK_FALSE(check_solution(b.problem, bad).empty());
    bad = s;
    bad.bus_shed[0] = 5.0;
    CHECK_FALSE(check_solution(b.problem, bad).empty());
    bad = s;
    bad.committed[0] = 0;
    CHECK_FALSE(check_solution(b.problem, bad).empty());
}

TEST_CASE("invalid weights are rejected")
{
    GridModel g = copper(150, 100);
    fixture::ready(g);
    const SubGrid sub = fixture::whole(g);
    const std::vector<double> av{150};
    const std::vector<double> dem{100};
    DispatchInputs in;
    in.generator_available = av;
    in.feeder_net_demand = dem;
    CHECK_THROWS_AS(build_problem(g, sub, nullptr, in, CostWeights{50.0, 100.0}, 10.0), InvariantViolation);
    CHECK_THROWS_AS(build_problem(g, sub, nullptr, in, CostWeights{}, 0.0), InvariantViolation);
}

TEST_CASE("random instances match exhaustive enumeration")
{
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 60; ++trial) {
        const DispatchProblem p = fixture::random_dispatch(rng, 1 + trial % 4, 8);
        const double ref = fixture::enumerate_dispatch(p);
        const DispatchSolution exact = solve_dispatch(p, {SolvePath::exact});
        CHECK(exact.status == DispatchStatus::optimal);
        CHECK(exact.objective == doctest::Approx(ref).epsilon(1e-6));
        CHECK(check_solution(p, exact).empty());
        CHECK(fixture::dispatch_cost(p, exact.output, exact.bus_shed) ==
              doctest::Approx(exact.objective).epsilon(1e-6));

        const DispatchSolution h = solve_dispatch(p, {SolvePath::heuristic});
        CHECK(h.status != DispatchStatus::infeasible);
        CHECK(h.objective >= ref - 1e-6 * std::abs(ref));
        CHECK(check_solution(p, h).empty());
    }
}

TEST_CASE("adequate unconstrained instances shed nothing")
{
    std::mt19937_64 rng(8);
    int adequate = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const DispatchProblem p = fixture::random_dispatch(rng, 1 + trial % 3, 8, false);
        if (!fixture::adequate(p)) {
            continue;
        }
        ++adequate;
        const DispatchSolution s = solve_dispatch(p);
        CHECK(s.total_shed() < 1e-6);
    }
    CHECK(adequate > 20);
}
