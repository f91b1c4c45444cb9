#include "crescent/lp_solver.hpp"

#include "crescent/errors.hpp"

#include <algorithm>
#include <cmath>

namespace crescent::lp {

int LinearProgram::add_variable(double c, double lo, double hi)
{
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(cost.size()) - 1;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> terms, RowSense sense,
                            double rhs)
{
    rows.push_back({std::move(terms), sense, rhs});
}

std::string_view to_string(Status s)
{
    switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

// Variables are shifted to [0, ub]. Column layout: structurals, then one
// slack per inequality row, then artificials.
class Tableau
{
public:
    Tableau(const LinearProgram& lp, const Options& opt) : opt_(opt)
    {
        n_struct_ = lp.variables();
        m_ = static_cast<int>(lp.rows.size());
        for (int j = 0; j < n_struct_; ++j) {
            const double lo = lp.lower[static_cast<std::size_t>(j)];
            const double hi = lp.upper[static_cast<std::size_t>(j)];
            if (!std::isfinite(lo) || hi < lo) {
                throw InvariantViolation("LP variable bounds must be finite and ordered");
            }
            ub_.push_back(hi - lo);
            cost_.push_back(lp.cost[static_cast<std::size_t>(j)]);
        }
        std::vector<double> rhs(static_cast<std::size_t>(m_));
        std::vector<int> slack_col(static_cast<std::size_t>(m_), -1);
        std::vector<double> slack_sign(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            const Row& row = lp.rows[static_cast<std::size_t>(i)];
            double b = row.rhs;
            for (auto [j, a] : row.terms) {
                b -= a * lp.lower[static_cast<std::size_t>(j)];
            }
            rhs[static_cast<std::size_t>(i)] = b;
            if (row.sense != RowSense::equal) {
                slack_col[static_cast<std::size_t>(i)] = static_cast<int>(ub_.size());
                slack_sign[static_cast<std::size_t>(i)] =
                    row.sense == RowSense::less_equal ? 1.0 : -1.0;
                ub_.push_back(kInfinity);
                cost_.push_back(0.0);
            }
        }
        // A slack can start basic when its sign matches the rhs.
        std::vector<int> basic_of_row(static_cast<std::size_t>(m_), -1);
        std::vector<double> basic_sign(static_cast<std::size_t>(m_), 1.0);
        first_artificial_ = static_cast<int>(ub_.size());
        for (int i = 0; i < m_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double s = slack_sign[ii];
            if (slack_col[ii] >= 0 && s * rhs[ii] >= 0.0) {
                basic_of_row[ii] = slack_col[ii];
                basic_sign[ii] = s;
            } else {
                basic_of_row[ii] = static_cast<int>(ub_.size());
                basic_sign[ii] = rhs[ii] >= 0.0 ? 1.0 : -1.0;
                ub_.push_back(kInfinity);
                cost_.push_back(0.0);
            }
        }
        n_ = static_cast<int>(ub_.size());
        t_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_), 0.0);
        beta_.assign(static_cast<std::size_t>(m_), 0.0);
        basis_ = basic_of_row;
        at_upper_.assign(static_cast<std::size_t>(n_), 0);
        is_basic_.assign(static_cast<std::size_t>(n_), 0);
        for (int i = 0; i < m_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double inv = 1.0 / basic_sign[ii];
            for (auto [j, a] : lp.rows[ii].terms) {
                at(i, j) += a * inv;
            }
            if (slack_col[ii] >= 0) {
                at(i, slack_col[ii]) = slack_sign[ii] * inv;
            }
            if (basis_[ii] >= first_artificial_) {
                at(i, basis_[ii]) = 1.0;
            }
            beta_[ii] = rhs[ii] * inv;
            is_basic_[static_cast<std::size_t>(basis_[ii])] = 1;
        }
    }

    Status run_phase(const std::vector<double>& c, int& iterations)
    {
        compute_reduced_costs(c);
        int degenerate = 0;
        while (true) {
            if (iterations >= opt_.max_iterations) {
                return Status::iteration_limit;
            }
            const bool bland = degenerate >= opt_.degenerate_switch;
            int q = -1;
            double best = 0.0;
            for (int j = 0; j < n_; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                if (is_basic_[jj] || ub_[jj] <= 0.0) {
                    continue;
                }
                const double dj = d_[jj];
                const double gain = at_upper_[jj] ? dj : -dj;
                if (gain > opt_.optimality_tol && (q < 0 || (!bland && gain > best))) {
                    q = j;
                    best = gain;
                    if (bland) {
                        break;
                    }
                }
            }
            if (q < 0) {
                return Status::optimal;
            }
            ++iterations;
            const auto qq = static_cast<std::size_t>(q);
            const double dir = at_upper_[qq] ? -1.0 : 1.0;

            int r = -1;
            double t_min = kInfinity;
            bool leave_to_upper = false;
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                const double alpha = at(i, q) * dir;
                double t = kInfinity;
                bool to_upper = false;
                if (alpha > opt_.pivot_tol) {
                    t = std::max(0.0, beta_[ii]) / alpha;
                } else if (alpha < -opt_.pivot_tol) {
                    const double u = ub_[static_cast<std::size_t>(basis_[ii])];
                    if (std::isfinite(u)) {
                        t = std::max(0.0, u - beta_[ii]) / -alpha;
                        to_upper = true;
                    }
                }
                if (t == kInfinity) {
                    continue;
                }
                const bool better =
                    t < t_min - 1e-12 ||
                    (t <= t_min + 1e-12 &&
                     (bland ? basis_[ii] < basis_[static_cast<std::size_t>(r)]
                            : std::abs(alpha) > best_pivot));
                if (r < 0 || better) {
                    r = i;
                    t_min = t;
                    leave_to_upper = to_upper;
                    best_pivot = std::abs(alpha);
                }
            }
            const double flip = ub_[qq];
            if (flip <= t_min) {
                if (!std::isfinite(flip)) {
                    return Status::unbounded;
                }
                for (int i = 0; i < m_; ++i) {
                    beta_[static_cast<std::size_t>(i)] -= at(i, q) * dir * flip;
                }
                at_upper_[qq] = !at_upper_[qq];
                degenerate = 0;
                continue;
            }
            degenerate = t_min < 1e-12 ? degenerate + 1 : 0;
            for (int i = 0; i < m_; ++i) {
                beta_[static_cast<std::size_t>(i)] -= at(i, q) * dir * t_min;
            }
            const double entering_value = (at_upper_[qq] ? ub_[qq] : 0.0) + dir * t_min;
            const auto rr = static_cast<std::size_t>(r);
            const int leaving = basis_[rr];
            is_basic_[static_cast<std::size_t>(leaving)] = 0;
            at_upper_[static_cast<std::size_t>(leaving)] = leave_to_upper ? 1 : 0;
            pivot(r, q);
            basis_[rr] = q;
            is_basic_[qq] = 1;
            at_upper_[qq] = 0;
            beta_[rr] = entering_value;
        }
    }

    Result solve(const LinearProgram& lp)
    {
        Result res;
        int iterations = 0;
        if (first_artificial_ < n_) {
            std::vector<double> phase1(static_cast<std::size_t>(n_), 0.0);
            for (int j = first_artificial_; j < n_; ++j) {
                phase1[static_cast<std::size_t>(j)] = 1.0;
            }
            const Status s = run_phase(phase1, iterations);
            if (s == Status::iteration_limit) {
                res.status = s;
                res.iterations = iterations;
                return res;
            }
            double infeasibility = 0.0;
            double scale = 1.0;
            for (int i = 0; i < m_; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                scale = std::max(scale, std::abs(beta_[ii]));
                if (basis_[ii] >= first_artificial_) {
                    infeasibility += std::max(0.0, beta_[ii]);
                }
            }
            if (infeasibility > opt_.feasibility_tol * scale * 10.0) {
                res.status = Status::infeasible;
                res.iterations = iterations;
                return res;
            }
            drive_out_artificials();
            for (int j = first_artificial_; j < n_; ++j) {
                ub_[static_cast<std::size_t>(j)] = 0.0;
                at_upper_[static_cast<std::size_t>(j)] = 0;
            }
        }
        const Status s = run_phase(cost_, iterations);
        res.status = s;
        res.iterations = iterations;
        if (s != Status::optimal) {
            return res;
        }
        std::vector<double> shifted(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < n_; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            if (!is_basic_[jj] && at_upper_[jj]) {
                shifted[jj] = ub_[jj];
            }
        }
        for (int i = 0; i < m_; ++i) {
            shifted[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] =
                beta_[static_cast<std::size_t>(i)];
        }
        res.x.resize(static_cast<std::size_t>(n_struct_));
        for (int j = 0; j < n_struct_; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double v = std::clamp(shifted[jj], 0.0, ub_[jj]);
            res.x[jj] = std::min(lp.lower[jj] + v, lp.upper[jj]);
            res.objective += lp.cost[jj] * res.x[jj];
        }
        return res;
    }

private:
    double& at(int i, int j)
    {
        return t_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                  static_cast<std::size_t>(j)];
    }

    void compute_reduced_costs(const std::vector<double>& c)
    {
        d_ = c;
        for (int i = 0; i < m_; ++i) {
            const double cb = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) {
                continue;
            }
            for (int j = 0; j < n_; ++j) {
                d_[static_cast<std::size_t>(j)] -= cb * at(i, j);
            }
        }
    }

    void pivot(int r, int q)
    {
        const double p = at(r, q);
        double* row_r = &at(r, 0);
        for (int j = 0; j < n_; ++j) {
            row_r[j] /= p;
        }
        row_r[q] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            double* row_i = &at(i, 0);
            const double f = row_i[q];
            if (f == 0.0) {
                continue;
            }
            for (int j = 0; j < n_; ++j) {
                row_i[j] -= f * row_r[j];
            }
            row_i[q] = 0.0;
        }
        const double fq = d_[static_cast<std::size_t>(q)];
        if (fq != 0.0) {
            for (int j = 0; j < n_; ++j) {
                d_[static_cast<std::size_t>(j)] -= fq * row_r[j];
            }
            d_[static_cast<std::size_t>(q)] = 0.0;
        }
    }

    void drive_out_artificials()
    {
        for (int i = 0; i < m_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            if (basis_[ii] < first_artificial_) {
                continue;
            }
            int best = -1;
            double best_abs = 1e-9;
            for (int j = 0; j < first_artificial_; ++j) {
                if (is_basic_[static_cast<std::size_t>(j)]) {
                    continue;
                }
                const double a = std::abs(at(i, j));
                if (a > best_abs) {
                    best = j;
                    best_abs = a;
                }
            }
            if (best < 0) {
                continue; // redundant row
            }
            const auto bb = static_cast<std::size_t>(best);
            const double value = at_upper_[bb] ? ub_[bb] : 0.0;
            is_basic_[static_cast<std::size_t>(basis_[ii])] = 0;
            at_upper_[static_cast<std::size_t>(basis_[ii])] = 0;
            pivot(i, best);
            basis_[ii] = best;
            is_basic_[bb] = 1;
            at_upper_[bb] = 0;
            // The artificial sits at (numerically) zero, so the entering
            // variable keeps its bound value.
            beta_[ii] = value;
        }
    }

    Options opt_;
    int n_struct_ = 0;
    int m_ = 0;
    int n_ = 0;
    int first_artificial_ = 0;
    std::vector<double> ub_;
    std::vector<double> cost_;
    std::vector<double> t_;
    std::vector<double> beta_;
    std::vector<double> d_;
    std::vector<int> basis_;
    std::vector<char> at_upper_;
    std::vector<char> is_basic_;
};

} // namespace

Result solve(const LinearProgram& problem, const Options& options)
{
    if (problem.lower.size() != problem.cost.size() ||
        problem.upper.size() != problem.cost.size()) {
        throw InvariantViolation("LP bound vectors do not match the cost vector");
    }
    Tableau tab(problem, options);
    return tab.solve(problem);
}

} // namespace crescent::lp
