#include "rms/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "rms/errors.hpp"

namespace rms::lp {

Constraint& Problem::add_constraint(Relation relation, double rhs) {
    constraints.push_back({std::vector<double>(num_vars, 0.0), relation, rhs});
    return constraints.back();
}

const char* to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "unknown";
}

double max_violation(const Problem& problem, std::span<const double> x) {
    double worst = 0.0;
    for (double v : x) worst = std::max(worst, -v);
    for (const auto& c : problem.constraints) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < problem.num_vars; ++j) lhs += c.coefficients[j] * x[j];
        double r = lhs - c.rhs;
        switch (c.relation) {
            case Relation::LessEqual: worst = std::max(worst, r); break;
            case Relation::GreaterEqual: worst = std::max(worst, -r); break;
            case Relation::Equal: worst = std::max(worst, std::abs(r)); break;
        }
    }
    return worst;
}

namespace {

struct Row {
    std::size_t source = 0;  // index into problem.constraints
    double factor = 1.0;     // sign * (1 / row scale)
    long slack = -1;         // column of the slack/surplus variable
    double slack_sign = 0.0;
    long artificial = -1;
};

class Tableau {
public:
    Tableau(const Problem& problem, const SolveOptions& options)
        : problem_(problem), opts_(options), n_(problem.num_vars) {
        build();
    }

    Solution run();

private:
    double& at(std::size_t r, std::size_t c) { return t_[r * stride_ + c]; }
    double at(std::size_t r, std::size_t c) const { return t_[r * stride_ + c]; }
    double rhs(std::size_t r) const { return at(r, cols_); }

    void build();
    void price(const std::vector<double>& cost);
    void pivot(std::size_t r, std::size_t e);
    // Returns false when the phase stops because the problem is unbounded.
    bool optimize(int phase);
    void drive_out_artificials();
    void erase_row(std::size_t r);
    std::vector<double> extract() const;
    void refine(std::vector<double>& x) const;

    const Problem& problem_;
    const SolveOptions& opts_;
    std::size_t n_;
    std::size_t cols_ = 0;  // structural + slack + artificial, excluding rhs
    std::size_t stride_ = 0;
    std::vector<Row> rows_;
    std::vector<double> t_;
    std::vector<double> z_;  // reduced costs, z_[cols_] = -objective
    std::vector<std::size_t> basis_;
    std::vector<bool> is_artificial_;
    std::size_t iterations_ = 0;
    std::size_t max_iterations_ = 0;
    bool infeasible_rows_ = false;
};

void Tableau::build() {
    std::size_t slacks = 0, artificials = 0;
    for (std::size_t i = 0; i < problem_.constraints.size(); ++i) {
        const auto& c = problem_.constraints[i];
        double scale = 0.0;
        for (double v : c.coefficients) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) {
            bool ok = (c.relation == Relation::LessEqual && c.rhs >= -opts_.feasibility_tolerance) ||
                      (c.relation == Relation::GreaterEqual && c.rhs <= opts_.feasibility_tolerance) ||
                      (c.relation == Relation::Equal && std::abs(c.rhs) <= opts_.feasibility_tolerance);
            if (!ok) infeasible_rows_ = true;
            continue;
        }
        Row row;
        row.source = i;
        row.factor = 1.0 / scale;
        Relation rel = c.relation;
        if (c.rhs < 0.0) {
            row.factor = -row.factor;
            if (rel == Relation::LessEqual) rel = Relation::GreaterEqual;
            else if (rel == Relation::GreaterEqual) rel = Relation::LessEqual;
        }
        if (rel != Relation::Equal) {
            row.slack = static_cast<long>(slacks++);
            row.slack_sign = rel == Relation::LessEqual ? 1.0 : -1.0;
        }
        if (rel != Relation::LessEqual) row.artificial = static_cast<long>(artificials++);
        rows_.push_back(row);
    }
    cols_ = n_ + slacks + artificials;
    stride_ = cols_ + 1;
    is_artificial_.assign(cols_, false);
    t_.assign(rows_.size() * stride_, 0.0);
    basis_.resize(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        auto& row = rows_[r];
        const auto& c = problem_.constraints[row.source];
        for (std::size_t j = 0; j < n_; ++j) at(r, j) = c.coefficients[j] * row.factor;
        at(r, cols_) = c.rhs * row.factor;
        if (row.slack >= 0) {
            row.slack += static_cast<long>(n_);
            at(r, static_cast<std::size_t>(row.slack)) = row.slack_sign;
        }
        if (row.artificial >= 0) {
            row.artificial += static_cast<long>(n_ + slacks);
            auto a = static_cast<std::size_t>(row.artificial);
            at(r, a) = 1.0;
            is_artificial_[a] = true;
            basis_[r] = a;
        } else {
            basis_[r] = static_cast<std::size_t>(row.slack);
        }
    }
    max_iterations_ = opts_.max_iterations ? opts_.max_iterations : 50 * (rows_.size() + cols_ + 1);
}

void Tableau::price(const std::vector<double>& cost) {
    z_.assign(stride_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) z_[j] = cost[j];
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        double cb = cost[basis_[r]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < stride_; ++j) z_[j] -= cb * at(r, j);
    }
}

void Tableau::pivot(std::size_t r, std::size_t e) {
    double p = at(r, e);
    if (!std::isfinite(p) || std::abs(p) < std::numeric_limits<double>::min()) {
        std::ostringstream os;
        os << "simplex pivot element " << p << " at row " << r << ", column " << e << " is unusable";
        throw NumericFailure(os.str());
    }
    double* pr = &t_[r * stride_];
    for (std::size_t j = 0; j < stride_; ++j) pr[j] /= p;
    pr[e] = 1.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (i == r) continue;
        double* pi = &t_[i * stride_];
        double f = pi[e];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < stride_; ++j) pi[j] -= f * pr[j];
        pi[e] = 0.0;
    }
    double f = z_[e];
    if (f != 0.0) {
        for (std::size_t j = 0; j < stride_; ++j) z_[j] -= f * pr[j];
        z_[e] = 0.0;
    }
    basis_[r] = e;
}

bool Tableau::optimize(int phase) {
    const double tol = opts_.pivot_tolerance;
    const std::size_t stall_limit = 2 * (rows_.size() + cols_);
    std::size_t degenerate = 0;
    bool bland = false;
    for (;;) {
        if (++iterations_ > max_iterations_) {
            throw NumericFailure("simplex exceeded " + std::to_string(max_iterations_) +
                                 " iterations (phase " + std::to_string(phase) + ")");
        }
        std::size_t enter = cols_;
        double best = tol;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (phase == 2 && is_artificial_[j]) continue;
            if (z_[j] > best) {
                enter = j;
                if (bland) break;
                best = z_[j];
            }
        }
        if (enter == cols_) return true;

        std::size_t leave = rows_.size();
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            double a = at(r, enter);
            if (a <= tol) continue;
            double ratio = std::max(rhs(r), 0.0) / a;
            if (leave == rows_.size() || ratio < best_ratio - 1e-12) {
                leave = r;
                best_ratio = ratio;
            } else if (ratio <= best_ratio + 1e-12) {
                bool take = bland ? basis_[r] < basis_[leave] : a > at(leave, enter);
                if (take) {
                    leave = r;
                    best_ratio = std::min(best_ratio, ratio);
                }
            }
        }
        if (leave == rows_.size()) return false;

        if (best_ratio <= tol) {
            if (++degenerate > stall_limit && !bland) {
                bland = true;
                if (opts_.debug) *opts_.debug << "lp: switching to Bland's rule after " << degenerate
                                              << " degenerate pivots\n";
            }
        } else {
            degenerate = 0;
        }
        if (opts_.debug) {
            *opts_.debug << "lp: phase " << phase << " iter " << iterations_ << " enter " << enter
                         << " leave row " << leave << " (basic " << basis_[leave] << ") step " << best_ratio
                         << " objective " << -z_[cols_] << "\n";
        }
        pivot(leave, enter);
    }
}

void Tableau::erase_row(std::size_t r) {
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r * stride_),
             t_.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride_));
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
}

void Tableau::drive_out_artificials() {
    for (std::size_t r = 0; r < rows_.size();) {
        if (!is_artificial_[basis_[r]]) {
            ++r;
            continue;
        }
        std::size_t best = cols_;
        double mag = opts_.pivot_tolerance;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (is_artificial_[j]) continue;
            if (std::abs(at(r, j)) > mag) {
                mag = std::abs(at(r, j));
                best = j;
            }
        }
        if (best == cols_) {
            if (opts_.debug) *opts_.debug << "lp: dropping redundant row " << rows_[r].source << "\n";
            erase_row(r);
            continue;
        }
        pivot(r, best);
        ++r;
    }
}

std::vector<double> Tableau::extract() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r)
        if (basis_[r] < n_) x[basis_[r]] = std::max(rhs(r), 0.0);
    return x;
}

// Recomputes the basic values from the original (scaled) rows to shed the
// rounding accumulated by the tableau updates.
void Tableau::refine(std::vector<double>& x) const {
    const std::size_t m = rows_.size();
    if (m == 0) return;
    std::vector<double> a(m * m, 0.0), b(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = rows_[r];
        const auto& c = problem_.constraints[row.source];
        b[r] = c.rhs * row.factor;
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t col = basis_[k];
            double v = 0.0;
            if (col < n_) v = c.coefficients[col] * row.factor;
            else if (row.slack >= 0 && static_cast<std::size_t>(row.slack) == col) v = row.slack_sign;
            else if (row.artificial >= 0 && static_cast<std::size_t>(row.artificial) == col) v = 1.0;
            a[r * m + k] = v;
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < m; ++r)
            if (std::abs(a[r * m + k]) > std::abs(a[piv * m + k])) piv = r;
        if (std::abs(a[piv * m + k]) < 1e-12) return;
        if (piv != k) {
            for (std::size_t j = 0; j < m; ++j) std::swap(a[k * m + j], a[piv * m + j]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t r = k + 1; r < m; ++r) {
            double f = a[r * m + k] / a[k * m + k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < m; ++j) a[r * m + j] -= f * a[k * m + j];
            b[r] -= f * b[k];
        }
    }
    std::vector<double> xb(m);
    for (std::size_t k = m; k-- > 0;) {
        double acc = b[k];
        for (std::size_t j = k + 1; j < m; ++j) acc -= a[k * m + j] * xb[j];
        xb[k] = acc / a[k * m + k];
    }
    std::vector<double> candidate(n_, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        if (xb[k] < -1e-9) return;
        if (basis_[k] < n_) candidate[basis_[k]] = std::max(xb[k], 0.0);
    }
    x = std::move(candidate);
}

Solution Tableau::run() {
    Solution sol;
    if (infeasible_rows_) {
        sol.status = Status::Infeasible;
        return sol;
    }
    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j)
        if (is_artificial_[j]) cost[j] = -1.0;
    price(cost);
    optimize(1);
    double phase1 = -z_[cols_];
    double rhs_scale = 1.0;
    for (std::size_t r = 0; r < rows_.size(); ++r) rhs_scale = std::max(rhs_scale, std::abs(rhs(r)));
    if (phase1 < -1e-9 * rhs_scale) {
        sol.status = Status::Infeasible;
        sol.iterations = iterations_;
        return sol;
    }
    drive_out_artificials();

    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost[j] = problem_.objective[j];
    price(cost);
    if (!optimize(2)) {
        sol.status = Status::Unbounded;
        sol.iterations = iterations_;
        return sol;
    }
    sol.x = extract();
    refine(sol.x);
    sol.status = Status::Optimal;
    sol.iterations = iterations_;
    for (std::size_t j = 0; j < n_; ++j) sol.objective_value += problem_.objective[j] * sol.x[j];

    double worst = 0.0;
    std::size_t worst_row = 0;
    for (std::size_t i = 0; i < problem_.constraints.size(); ++i) {
        const auto& c = problem_.constraints[i];
        double scale = 0.0, lhs = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            scale = std::max(scale, std::abs(c.coefficients[j]));
            lhs += c.coefficients[j] * sol.x[j];
        }
        double r = lhs - c.rhs;
        double v = c.relation == Relation::LessEqual ? r : c.relation == Relation::GreaterEqual ? -r : std::abs(r);
        if (scale > 0.0) v /= scale;
        if (v > worst) {
            worst = v;
            worst_row = i;
        }
    }
    if (worst > opts_.feasibility_tolerance) {
        std::ostringstream os;
        os << "simplex solution violates constraint " << worst_row << " by " << worst
           << " (relative to the row scale) after " << iterations_ << " iterations";
        throw NumericFailure(os.str());
    }
    return sol;
}

}  // namespace

Solution solve(const Problem& problem, const SolveOptions& options) {
    if (problem.objective.size() != problem.num_vars) {
        throw ValidationError("lp: objective has " + std::to_string(problem.objective.size()) +
                              " coefficients for " + std::to_string(problem.num_vars) + " variables");
    }
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
        const auto& c = problem.constraints[i];
        if (c.coefficients.size() != problem.num_vars) {
            throw ValidationError("lp: constraint " + std::to_string(i) + " has " +
                                  std::to_string(c.coefficients.size()) + " coefficients for " +
                                  std::to_string(problem.num_vars) + " variables");
        }
        bool finite = std::isfinite(c.rhs) &&
                      std::all_of(c.coefficients.begin(), c.coefficients.end(), [](double v) { return std::isfinite(v); });
        if (!finite) throw ValidationError("lp: constraint " + std::to_string(i) + " is not finite");
    }
    if (!std::all_of(problem.objective.begin(), problem.objective.end(), [](double v) { return std::isfinite(v); }))
        throw ValidationError("lp: objective is not finite");
    Tableau tableau(problem, options);
    return tableau.run();
}

MarginPoint max_margin_point(std::span<const std::vector<double>> rows, std::size_t dim, double box,
                             const SolveOptions& options) {
    if (dim == 0) throw ValidationError("max_margin_point: dimension must be positive");
    // Variables: x_0..x_{dim-1}, t_plus, t_minus.
    Problem lp(dim + 2);
    const std::size_t tp = dim, tn = dim + 1;
    lp.objective[tp] = 1.0;
    lp.objective[tn] = -1.0;
    for (const auto& a : rows) {
        if (a.size() != dim) throw DimensionError("max_margin_point: constraint length mismatch");
        auto& c = lp.add_constraint(Relation::GreaterEqual, 0.0);
        std::copy(a.begin(), a.end(), c.coefficients.begin());
        c.coefficients[tp] = -1.0;
        c.coefficients[tn] = 1.0;
    }
    auto& norm = lp.add_constraint(Relation::Equal, 1.0);
    std::fill(norm.coefficients.begin(), norm.coefficients.begin() + static_cast<std::ptrdiff_t>(dim), 1.0);
    lp.add_constraint(Relation::LessEqual, box).coefficients[tp] = 1.0;

    auto sol = solve(lp, options);
    if (sol.status != Status::Optimal) {
        throw NumericFailure(std::string("max_margin_point: auxiliary LP is ") + to_string(sol.status));
    }
    MarginPoint out;
    out.margin = sol.x[tp] - sol.x[tn];
    out.x.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(dim));
    return out;
}

}  // namespace rms::lp
