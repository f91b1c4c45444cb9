#pragma once

#include <limits>
#include <string_view>
#include <utility>
#include <vector>

namespace crescent::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { less_equal, greater_equal, equal };

struct Row
{
    std::vector<std::pair<int, double>> terms;
    RowSense sense = RowSense::equal;
    double rhs = 0.0;
};

/// minimize cost . x  subject to rows and lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be kInfinity.
struct LinearProgram
{
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Row> rows;

    int add_variable(double c, double lo, double hi);
    void add_row(std::vector<std::pair<int, double>> terms, RowSense sense, double rhs);
    int variables() const { return static_cast<int>(cost.size()); }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string_view to_string(Status s);

struct Result
{
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

struct Options
{
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-11;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int degenerate_switch = 30;
    int max_iterations = 100000;
};

/// Two-phase bounded-variable primal simplex on a dense tableau.
Result solve(const LinearProgram& problem, const Options& options = {});

} // namespace crescent::lp
