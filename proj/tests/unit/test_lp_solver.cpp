#include "crescent/lp_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <random>

using namespace crescent;

namespace {

struct Half
{
    std::vector<double> a; // a . x <= b
    double b = 0.0;
};

std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) {
                p = r;
            }
        }
        if (std::abs(a[p][c]) < 1e-10) {
            return std::nullopt;
        }
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[i] / a[i][i];
    }
    return x;
}

/// Best objective over all basic feasible points of a bounded polytope.
std::optional<double> vertex_minimum(const std::vector<double>& cost, const std::vector<Half>& hs)
{
    const std::size_t n = cost.size();
    std::optional<double> best;
    std::vector<std::size_t> pick(n);
    // Iterate over n-subsets of the half-spaces.
    std::vector<bool> sel(hs.size(), false);
    std::fill(sel.begin(), sel.begin() + static_cast<long>(n), true);
    do {
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        for (std::size_t h = 0; h < hs.size(); ++h) {
            if (sel[h]) {
                a.push_back(hs[h].a);
                b.push_back(hs[h].b);
            }
        }
        const auto x = solve_square(a, b);
        if (!x) {
            continue;
        }
        bool ok = true;
        for (const auto& h : hs) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += h.a[j] * (*x)[j];
            }
            ok = ok && s <= h.b + 1e-7;
        }
        if (ok) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                v += cost[j] * (*x)[j];
            }
            if (!best || v < *best) {
                best = v;
            }
        }
    } while (std::prev_permutation(sel.begin(), sel.end()));
    return best;
}

} // namespace

TEST_CASE("textbook two-variable problem")
{
    // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
    lp::LinearProgram p;
    const int x = p.add_variable(-3.0, 0.0, lp::kInfinity);
    const int y = p.add_variable(-5.0, 0.0, lp::kInfinity);
    p.add_row({{x, 1.0}}, lp::RowSense::less_equal, 4.0);
    p.add_row({{y, 2.0}}, lp::RowSense::less_equal, 12.0);
    p.add_row({{x, 3.0}, {y, 2.0}}, lp::RowSense::less_equal, 18.0);
    const lp::Result r = lp::solve(p);
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.objective == doctest::Approx(-36.0));
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.x[1] == doctest::Approx(6.0));
}

TEST_CASE("infeasible and unbounded problems are recognised")
{
    lp::LinearProgram p;
    const int x = p.add_variable(1.0, 0.0, 5.0);
    p.add_row({{x, 1.0}}, lp::RowSense::greater_equal, 6.0);
    CHECK(lp::solve(p).status == lp::Status::infeasible);

    lp::LinearProgram q;
    const int a = q.add_variable(-1.0, 0.0, lp::kInfinity);
    const int b = q.add_variable(0.0, 0.0, lp::kInfinity);
    q.add_row({{a, 1.0}, {b, -1.0}}, lp::RowSense::less_equal, 1.0);
    CHECK(lp::solve(q).status == lp::Status::unbounded);
}

TEST_CASE("equality rows and shifted bounds")
{
    lp::LinearProgram p;
    const int x = p.add_variable(2.0, 10.0, 50.0);
    const int y = p.add_variable(1.0, 5.0, 30.0);
    p.add_row({{x, 1.0}, {y, 1.0}}, lp::RowSense::equal, 40.0);
    const lp::Result r = lp::solve(p);
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.x[0] == doctest::Approx(10.0));
    CHECK(r.x[1] == doctest::Approx(30.0));
    CHECK(r.objective == doctest::Approx(50.0));
}

TEST_CASE("random bounded problems match vertex enumeration")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    std::uniform_real_distribution<double> pos(0.5, 10.0);
    int solved = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 3;
        const int m = 1 + trial % 4;
        lp::LinearProgram p;
        std::vector<Half> hs;
        std::vector<double> cost;
        for (int j = 0; j < n; ++j) {
            const double lo = coef(rng);
            const double hi = lo + pos(rng);
            cost.push_back(coef(rng));
            p.add_variable(cost.back(), lo, hi);
            std::vector<double> e(static_cast<std::size_t>(n), 0.0);
            e[static_cast<std::size_t>(j)] = 1.0;
            hs.push_back({e, hi});
            e[static_cast<std::size_t>(j)] = -1.0;
            hs.push_back({e, -lo});
        }
        for (int i = 0; i < m; ++i) {
            std::vector<std::pair<int, double>> terms;
            std::vector<double> a(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(j)] = coef(rng);
                terms.emplace_back(j, a[static_cast<std::size_t>(j)]);
            }
            const double rhs = coef(rng) * 3.0;
            if (i % 2 == 0) {
                p.add_row(terms, lp::RowSense::less_equal, rhs);
                hs.push_back({a, rhs});
            } else {
                p.add_row(terms, lp::RowSense::greater_equal, rhs);
                for (double& v : a) {
                    v = -v;
                }
                hs.push_back({a, -rhs});
            }
        }
        const lp::Result r = lp::solve(p);
        const auto ref = vertex_minimum(cost, hs);
        if (!ref) {
            CHECK(r.status == lp::Status::infeasible);
            continue;
        }
        ++solved;
        REQUIRE(r.status == lp::Status::optimal);
        CHECK(r.objective == doctest::Approx(*ref).epsilon(1e-7));
    }
    CHECK(solved > 100);
}
