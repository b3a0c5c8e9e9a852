#pragma once

// Dense two-phase simplex for small linear programs in the form
//   maximize c.x  subject to  a_r.x (<=, =, >=) b_r,  x >= 0.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace rms::lp {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Constraint {
    std::vector<double> coefficients;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

struct Problem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<Constraint> constraints;

    explicit Problem(std::size_t vars = 0) : num_vars(vars), objective(vars, 0.0) {}

    /// Appends a zero row with the given relation and returns it for filling in.
    Constraint& add_constraint(Relation relation, double rhs);
};

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status status);

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
    std::size_t iterations = 0;
};

struct SolveOptions {
    double pivot_tolerance = 1e-9;
    double feasibility_tolerance = 1e-7;
    /// Zero means 50 * (rows + cols).
    std::size_t max_iterations = 0;
    /// When set, receives a human-readable trace of every pivot.
    std::ostream* debug = nullptr;
};

/// Throws ValidationError for malformed problems, NumericFailure when the
/// pivoting loses reliability or the final residuals exceed the feasibility
/// tolerance.
Solution solve(const Problem& problem, const SolveOptions& options = {});

/// Largest residual of `x` against the constraints (violations only) and nonnegativity.
double max_violation(const Problem& problem, std::span<const double> x);

struct MarginPoint {
    double margin = 0.0;
    std::vector<double> x;
};

/// maximize t  s.t.  a.x >= t for each row a,  sum(x) = 1,  x >= 0,  t <= box.
/// A positive margin certifies that the open cone {a.x > 0} meets the
/// nonnegative orthant in a full-dimensional set.
MarginPoint max_margin_point(std::span<const std::vector<double>> rows, std::size_t dim,
                             double box = 1.0, const SolveOptions& options = {});

}  // namespace rms::lp
