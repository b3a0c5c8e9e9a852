#include "rms/solver_bayes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "rms/errors.hpp"
#include "scheme_extract.hpp"

namespace rms {

namespace {

using Rows = std::vector<std::vector<double>>;

std::vector<LabelPair> ordered_pairs(std::size_t bidders) {
    std::vector<LabelPair> out;
    for (std::size_t a = 0; a < bidders; ++a)
        for (std::size_t b = 0; b < bidders; ++b)
            if (a != b) out.push_back({a, b});
    return out;
}

std::vector<double> row_difference(const Matrix& table, std::size_t a, std::size_t b) {
    std::vector<double> out(table.cols());
    for (std::size_t j = 0; j < table.cols(); ++j) out[j] = table(a, j) - table(b, j);
    return out;
}

/// Unscaled ranking rows for every outcome covered by the label.
Rows raw_ranking_rows(const BayesInstance& inst, const LabelTuple& label) {
    Rows rows;
    auto tables = inst.weighted_tables();
    for (std::size_t l = 0; l < label.pairs.size(); ++l) {
        const auto& table = tables[l];
        const auto [top, second] = label.pairs[l];
        rows.push_back(row_difference(table, top, second));
        for (std::size_t i = 0; i < inst.bidders(); ++i)
            if (i != top && i != second) rows.push_back(row_difference(table, second, i));
    }
    return rows;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const unsigned workers = std::min<std::size_t>(threads, count);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

Lp2 build_block_lp(const BayesInstance& inst, std::span<const LabelTuple> labels,
                   const std::vector<std::optional<Rows>>& ordering_rows) {
    Lp2 out{lp::Problem(0), Lp2Layout{inst.goods(), {labels.begin(), labels.end()}}};
    const auto& layout = out.layout;
    out.problem = lp::Problem(layout.num_vars());
    auto& problem = out.problem;
    auto tables = inst.weighted_tables();
    const std::size_t m = inst.goods();

    for (std::size_t b = 0; b < layout.labels.size(); ++b) {
        const auto& label = layout.labels[b];
        problem.objective[layout.revenue_var(b)] = 1.0;
        problem.add_constraint(lp::Relation::LessEqual, 0.0);
        problem.add_constraint(lp::Relation::Equal, 0.0);
        auto& upper = problem.constraints[problem.constraints.size() - 2];
        auto& equal = problem.constraints.back();
        upper.coefficients[layout.revenue_var(b)] = 1.0;
        equal.coefficients[layout.revenue_var(b)] = 1.0;
        for (std::size_t l = 0; l < label.pairs.size(); ++l) {
            for (std::size_t j = 0; j < m; ++j) {
                upper.coefficients[layout.phi_var(b, j)] -= tables[l](label.pairs[l].top, j);
                equal.coefficients[layout.phi_var(b, j)] -= tables[l](label.pairs[l].second, j);
            }
        }
        if (ordering_rows[b]) {
            for (const auto& row : *ordering_rows[b]) {
                auto& c = problem.add_constraint(lp::Relation::GreaterEqual, 0.0);
                for (std::size_t j = 0; j < m; ++j) c.coefficients[layout.phi_var(b, j)] = row[j];
            }
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        auto& column = problem.add_constraint(lp::Relation::Equal, 1.0);
        for (std::size_t b = 0; b < layout.labels.size(); ++b) column.coefficients[layout.phi_var(b, j)] = 1.0;
    }
    return out;
}

SolveResult solve_block_lp(const BayesInstance& inst, const Lp2& lp2, const lp::SolveOptions& options) {
    auto sol = lp::solve(lp2.problem, options);
    if (sol.status != lp::Status::Optimal) {
        throw NumericFailure(std::string("internal error: label LP reported ") + lp::to_string(sol.status));
    }
    const auto& layout = lp2.layout;
    auto raw = detail::extract_scheme(sol.x, layout.labels.size(), layout.goods,
                                      [&](std::size_t b, std::size_t j) { return layout.phi_var(b, j); });
    SolveResult out;
    out.scheme = merge_equal_label_signals(inst, raw);
    out.report = make_report(inst, out.scheme);
    out.lp_objective = sol.objective_value;
    return out;
}

double binomial(double t, std::size_t i) {
    double out = 1.0;
    for (std::size_t r = 0; r < i; ++r) out *= (t - static_cast<double>(r)) / static_cast<double>(r + 1);
    return std::max(out, 0.0);
}

// Columns of `a` (rows x cols) admit a nonzero x with a x = 0 whenever cols > rank.
std::vector<double> null_vector(std::vector<std::vector<double>> a, std::size_t cols) {
    const std::size_t rows = a.size();
    double scale = 0.0;
    for (const auto& r : a)
        for (double v : r) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * std::max(scale, 1e-300);

    std::vector<std::size_t> pivot_col;  // pivot column for each reduced row
    std::size_t rank = 0;
    std::size_t free_col = cols;
    for (std::size_t c = 0; c < cols && free_col == cols; ++c) {
        if (rank >= rows) {
            free_col = c;
            break;
        }
        std::size_t best = rank;
        for (std::size_t r = rank; r < rows; ++r)
            if (std::abs(a[r][c]) > std::abs(a[best][c])) best = r;
        if (std::abs(a[best][c]) <= tol) {
            free_col = c;
            break;
        }
        std::swap(a[rank], a[best]);
        double p = a[rank][c];
        for (auto& v : a[rank]) v /= p;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank) continue;
            double f = a[r][c];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < cols; ++k) a[r][k] -= f * a[rank][k];
        }
        pivot_col.push_back(c);
        ++rank;
    }
    std::vector<double> x(cols, 0.0);
    if (free_col == cols) return x;
    x[free_col] = 1.0;
    for (std::size_t r = 0; r < rank; ++r) x[pivot_col[r]] = -a[r][free_col];
    return x;
}

SignalingScheme reduce_signals(std::span<const Matrix> tables, const SignalingScheme& scheme) {
    const std::size_t m = scheme.goods();
    auto current = drop_zero_signals(scheme);
    Matrix phi = current.phi();

    auto contribution = [&](std::span<const double> signal) {
        double total = 0.0;
        for (const auto& table : tables) total += second_max(signal_bids(table, signal));
        return total;
    };

    while (phi.rows() > m) {
        const std::size_t s = phi.rows();
        std::vector<std::vector<double>> a(m, std::vector<double>(s));
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t z = 0; z < s; ++z) a[j][z] = phi(z, j);
        auto x = null_vector(a, s);

        double xmax = 0.0;
        for (double v : x) xmax = std::max(xmax, std::abs(v));
        if (xmax == 0.0) throw NumericFailure("reduce_to_m_signals: no linear dependence found among " +
                                              std::to_string(s) + " signals over " + std::to_string(m) + " goods");
        for (auto& v : x)
            if (std::abs(v) < 1e-12 * xmax) v = 0.0;
        double residual = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t z = 0; z < s; ++z) acc += phi(z, j) * x[z];
            residual = std::max(residual, std::abs(acc));
        }
        if (residual > 1e-9 * xmax) {
            std::ostringstream os;
            os << "reduce_to_m_signals: dependence residual " << residual << " exceeds tolerance";
            throw NumericFailure(os.str());
        }

        double pos_max = 0.0, neg_max = 0.0, drift = 0.0;
        for (std::size_t z = 0; z < s; ++z) {
            if (x[z] > 0.0) pos_max = std::max(pos_max, x[z]);
            if (x[z] < 0.0) neg_max = std::max(neg_max, -x[z]);
            if (x[z] != 0.0) drift += x[z] * contribution(phi.row(z));
        }
        if (pos_max == 0.0 || neg_max == 0.0) {
            throw NumericFailure("reduce_to_m_signals: dependence among nonnegative signals has one-signed weights");
        }
        // Revenue moves by eps * drift; pick the endpoint that does not lose any.
        const double eps = drift >= 0.0 ? 1.0 / neg_max : -1.0 / pos_max;

        Matrix next(0, m);
        for (std::size_t z = 0; z < s; ++z) {
            double factor = 1.0 + eps * x[z];
            if (factor <= 1e-12) continue;
            std::vector<double> row(phi.row(z).begin(), phi.row(z).end());
            for (auto& v : row) v *= factor;
            next.append_row(row);
        }
        for (std::size_t j = 0; j < m; ++j) {
            double sum = 0.0;
            for (std::size_t z = 0; z < next.rows(); ++z) sum += next(z, j);
            if (sum > 0.0)
                for (std::size_t z = 0; z < next.rows(); ++z) next(z, j) /= sum;
        }
        phi = drop_zero_signals(SignalingScheme(std::move(next))).phi();
        if (phi.rows() >= s) throw NumericFailure("reduce_to_m_signals: elimination step removed no signal");
    }
    return SignalingScheme(std::move(phi));
}

}  // namespace

double label_count(std::size_t bidders, std::size_t outcomes) {
    return std::pow(static_cast<double>(bidders) * static_cast<double>(bidders - 1), static_cast<double>(outcomes));
}

std::vector<LabelTuple> all_label_tuples(std::size_t bidders, std::size_t outcomes, std::size_t max_labels) {
    const double count = label_count(bidders, outcomes);
    if (count > static_cast<double>(max_labels)) {
        std::ostringstream os;
        os << "label enumeration needs (n(n-1))^k = (" << bidders << "*" << bidders - 1 << ")^" << outcomes << " = "
           << static_cast<long double>(count) << " labels, exceeding the guard of " << max_labels;
        throw GuardExceeded(os.str(), count, static_cast<double>(max_labels));
    }
    const auto pairs = ordered_pairs(bidders);
    std::vector<LabelTuple> out{LabelTuple{}};
    for (std::size_t l = 0; l < outcomes; ++l) {
        std::vector<LabelTuple> next;
        next.reserve(out.size() * pairs.size());
        for (const auto& prefix : out) {
            for (const auto& p : pairs) {
                auto t = prefix;
                t.pairs.push_back(p);
                next.push_back(std::move(t));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::optional<Rows> ranking_constraints(const BayesInstance& inst, const LabelTuple& label) {
    Rows out;
    auto tables = inst.weighted_tables();
    auto add = [&](const Matrix& table, std::size_t hi, std::size_t lo) {
        double table_scale = 0.0;
        for (std::size_t i = 0; i < table.rows(); ++i)
            for (double v : table.row(i)) table_scale = std::max(table_scale, std::abs(v));
        auto row = row_difference(table, hi, lo);
        double scale = 0.0;
        for (double v : row) scale = std::max(scale, std::abs(v));
        if (scale <= 1e-12 * table_scale) return hi < lo;  // tied rows rank by index
        for (auto& v : row) v /= scale;
        out.push_back(std::move(row));
        return true;
    };
    for (std::size_t l = 0; l < label.pairs.size(); ++l) {
        const auto& table = tables[l];
        const auto [top, second] = label.pairs[l];
        if (!add(table, top, second)) return std::nullopt;
        for (std::size_t i = 0; i < inst.bidders(); ++i)
            if (i != top && i != second && !add(table, second, i)) return std::nullopt;
    }
    return out;
}

Lp2 build_lp2(const BayesInstance& inst, bool ordering, std::span<const LabelTuple> labels) {
    if (labels.empty()) throw ValidationError("build_lp2: label set is empty");
    for (const auto& label : labels) {
        if (label.pairs.size() != inst.outcomes())
            throw DimensionError("build_lp2: label tuple length differs from the outcome count");
        for (const auto& p : label.pairs)
            if (p.top == p.second || p.top >= inst.bidders() || p.second >= inst.bidders())
                throw ValidationError("build_lp2: invalid bidder pair in label tuple");
    }
    std::vector<std::optional<Rows>> ordering_rows(labels.size());
    if (ordering)
        for (std::size_t b = 0; b < labels.size(); ++b) ordering_rows[b] = raw_ranking_rows(inst, labels[b]);
    return build_block_lp(inst, labels, ordering_rows);
}

SolveResult solve_fixed_k(const BayesInstance& inst, const BayesSolveOptions& options) {
    auto labels = all_label_tuples(inst.bidders(), inst.outcomes(), options.max_labels);
    auto lp2 = build_lp2(inst, options.ordering, labels);
    return solve_block_lp(inst, lp2, options.lp);
}

double whitney_bound(std::size_t dimension, double hyperplanes) {
    double total = 0.0;
    for (std::size_t i = 0; i <= dimension; ++i) total += binomial(hyperplanes, i);
    return total;
}

std::vector<Region> enumerate_regions(const BayesInstance& inst, const BayesSolveOptions& options) {
    const std::size_t n = inst.bidders(), m = inst.goods(), k = inst.outcomes();
    const auto pairs = ordered_pairs(n);
    std::vector<Region> level{Region{}};
    std::size_t checks = 0;
    for (std::size_t l = 0; l < k; ++l) {
        const std::size_t candidates = level.size() * pairs.size();
        if (checks + candidates > options.max_region_checks) {
            const double hyperplanes = static_cast<double>(n * n * k);
            std::ostringstream os;
            os << "region enumeration needs more than " << checks + candidates
               << " candidate checks (outcome " << l + 1 << " of " << k << "), exceeding the guard of "
               << options.max_region_checks << "; Whitney bound on regions W(" << m << ", " << n * n * k
               << ") = " << whitney_bound(m, hyperplanes);
            throw GuardExceeded(os.str(), static_cast<double>(checks + candidates),
                                static_cast<double>(options.max_region_checks));
        }
        checks += candidates;
        std::vector<std::optional<Region>> results(candidates);
        parallel_for(candidates, options.threads, [&](std::size_t idx) {
            Region r;
            r.label = level[idx / pairs.size()].label;
            r.label.pairs.push_back(pairs[idx % pairs.size()]);
            auto rows = ranking_constraints(inst, r.label);
            if (!rows) return;
            auto point = lp::max_margin_point(*rows, m, 1.0, options.lp);
            if (!(point.margin > kRegionMargin)) return;
            r.constraints = std::move(*rows);
            r.margin = point.margin;
            r.interior_witness = std::move(point.x);
            results[idx] = std::move(r);
        });
        std::vector<Region> next;
        for (auto& r : results)
            if (r) next.push_back(std::move(*r));
        level = std::move(next);
    }
    std::sort(level.begin(), level.end(), [](const Region& a, const Region& b) { return a.label < b.label; });
    return level;
}

SolveResult solve_fixed_m(const BayesInstance& inst, const BayesSolveOptions& options) {
    auto regions = enumerate_regions(inst, options);
    if (regions.empty()) throw NumericFailure("internal error: no region with nonempty interior was found");
    std::vector<LabelTuple> labels;
    std::vector<std::optional<Rows>> rows;
    for (auto& r : regions) {
        labels.push_back(r.label);
        rows.emplace_back(std::move(r.constraints));
    }
    auto lp2 = build_block_lp(inst, labels, rows);
    return solve_block_lp(inst, lp2, options.lp);
}

SignalingScheme reduce_to_m_signals(const KnownInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return reduce_signals(inst.weighted_tables(), scheme);
}

SignalingScheme reduce_to_m_signals(const BayesInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return reduce_signals(inst.weighted_tables(), scheme);
}

}  // namespace rms
