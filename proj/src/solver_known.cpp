#include "rms/solver_known.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rms/errors.hpp"
#include "scheme_extract.hpp"

namespace rms {

namespace {

PairBlockLayout pair_layout(std::size_t bidders, std::size_t goods) {
    PairBlockLayout layout;
    layout.goods = goods;
    for (std::size_t a = 0; a < bidders; ++a)
        for (std::size_t b = 0; b < bidders; ++b)
            if (a != b) layout.blocks.push_back({a, b});
    return layout;
}

SolveResult finish(const KnownInstance& inst, const Lp1& lp1, const lp::Solution& sol) {
    const auto& layout = lp1.layout;
    auto raw = detail::extract_scheme(sol.x, layout.blocks.size(), layout.goods,
                                      [&](std::size_t b, std::size_t j) { return layout.phi_var(b, j); });
    SolveResult out;
    out.scheme = merge_equal_label_signals(inst, raw);
    out.report = make_report(inst, out.scheme);
    out.lp_objective = sol.objective_value;
    return out;
}

}  // namespace

Lp1 build_lp1(const KnownInstance& inst, bool strict_ordering) {
    const auto& psi = inst.normalized();
    const std::size_t n = inst.bidders(), m = inst.goods();
    Lp1 out{lp::Problem(0), pair_layout(n, m)};
    const auto& layout = out.layout;
    out.problem = lp::Problem(layout.num_vars());
    auto& problem = out.problem;

    for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
        const auto [top, second] = layout.blocks[b];
        problem.objective[layout.revenue_var(b)] = 1.0;

        auto& upper = problem.add_constraint(lp::Relation::LessEqual, 0.0);
        upper.coefficients[layout.revenue_var(b)] = 1.0;
        for (std::size_t j = 0; j < m; ++j) upper.coefficients[layout.phi_var(b, j)] = -psi(top, j);

        auto& equal = problem.add_constraint(lp::Relation::Equal, 0.0);
        equal.coefficients[layout.revenue_var(b)] = 1.0;
        for (std::size_t j = 0; j < m; ++j) equal.coefficients[layout.phi_var(b, j)] = -psi(second, j);

        if (strict_ordering) {
            for (std::size_t other = 0; other < n; ++other) {
                if (other == top || other == second) continue;
                auto& order = problem.add_constraint(lp::Relation::GreaterEqual, 0.0);
                for (std::size_t j = 0; j < m; ++j)
                    order.coefficients[layout.phi_var(b, j)] = psi(second, j) - psi(other, j);
            }
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        auto& column = problem.add_constraint(lp::Relation::Equal, 1.0);
        for (std::size_t b = 0; b < layout.blocks.size(); ++b) column.coefficients[layout.phi_var(b, j)] = 1.0;
    }
    return out;
}

SolveResult solve_optimal(const KnownInstance& inst, const KnownSolveOptions& options) {
    auto lp1 = build_lp1(inst, options.strict_ordering);
    auto sol = lp::solve(lp1.problem, options.lp);
    if (sol.status != lp::Status::Optimal) {
        throw NumericFailure(std::string("internal error: signaling LP reported ") + lp::to_string(sol.status) +
                             " although the zero scheme per block is feasible and the objective is bounded");
    }
    return finish(inst, lp1, sol);
}

std::optional<SolveResult> solve_welfare_constrained(const KnownInstance& inst, double beta,
                                                     const KnownSolveOptions& options) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ValidationError("welfare beta must lie in [0,1], got " + std::to_string(beta));
    }
    auto lp1 = build_lp1(inst, options.strict_ordering);
    const auto& layout = lp1.layout;
    const auto& psi = inst.normalized();
    auto& floor = lp1.problem.add_constraint(lp::Relation::GreaterEqual, beta * optimal_welfare_star(inst));
    for (std::size_t b = 0; b < layout.blocks.size(); ++b)
        for (std::size_t j = 0; j < layout.goods; ++j)
            floor.coefficients[layout.phi_var(b, j)] = psi(layout.blocks[b].top, j);

    auto sol = lp::solve(lp1.problem, options.lp);
    if (sol.status == lp::Status::Infeasible) return std::nullopt;
    if (sol.status != lp::Status::Optimal) {
        throw NumericFailure(std::string("internal error: welfare-constrained LP reported ") +
                             lp::to_string(sol.status));
    }
    return finish(inst, lp1, sol);
}

SignalingScheme welfare_repair(const KnownInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    const auto& psi = inst.normalized();
    const auto mu = welfare_maximizers(inst);
    Matrix phi = scheme.phi();

    for (std::size_t s = 0; s < phi.rows(); ++s) {
        for (;;) {
            auto row = phi.row(s);
            if (std::count_if(row.begin(), row.end(), [](double v) { return v > 0.0; }) <= 1) break;
            auto lab = top_two(signal_bids(psi, row));
            std::size_t violating = row.size();
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (row[j] > 0.0 && mu[j] != lab.top && mu[j] != lab.second) {
                    violating = j;
                    break;
                }
            }
            if (violating == row.size()) break;
            std::vector<double> singleton(row.size(), 0.0);
            singleton[violating] = row[violating];
            row[violating] = 0.0;
            phi.append_row(singleton);
        }
    }
    return SignalingScheme(std::move(phi));
}

void validate_partition(const ClusterPartition& partition, std::size_t goods) {
    std::vector<int> seen(goods, 0);
    for (std::size_t c = 0; c < partition.clusters.size(); ++c) {
        const auto& cluster = partition.clusters[c];
        if (cluster.empty()) throw ValidationError("cluster " + std::to_string(c + 1) + " is empty");
        for (auto j : cluster) {
            if (j >= goods) {
                throw ValidationError("cluster " + std::to_string(c + 1) + " names good " + std::to_string(j + 1) +
                                      " but there are only " + std::to_string(goods));
            }
            if (seen[j]++) throw ValidationError("good " + std::to_string(j + 1) + " appears in two clusters");
        }
    }
    for (std::size_t j = 0; j < goods; ++j)
        if (!seen[j]) throw ValidationError("good " + std::to_string(j + 1) + " is not in any cluster");
}

SignalingScheme partition_scheme(const ClusterPartition& partition, std::size_t goods) {
    validate_partition(partition, goods);
    Matrix phi(partition.clusters.size(), goods);
    for (std::size_t c = 0; c < partition.clusters.size(); ++c)
        for (auto j : partition.clusters[c]) phi(c, j) = 1.0;
    return SignalingScheme(std::move(phi));
}

double clustering_revenue(const KnownInstance& inst, const ClusterPartition& partition) {
    return revenue(inst, partition_scheme(partition, inst.goods()));
}

ClusteringOptimum clustering_bruteforce(const KnownInstance& inst, std::size_t max_goods) {
    const std::size_t n = inst.bidders(), m = inst.goods();
    if (m > max_goods) {
        throw GuardExceeded("clustering brute force over " + std::to_string(m) +
                                " goods exceeds the partition guard of " + std::to_string(max_goods) + " goods",
                            static_cast<double>(m), static_cast<double>(max_goods));
    }
    const auto& psi = inst.normalized();
    ClusteringOptimum best;
    best.revenue = -1.0;
    std::vector<double> sums(m * n);
    std::vector<std::size_t> best_labels;
    for_each_set_partition(m, [&](const std::vector<std::size_t>& labels) {
        ++best.partitions_checked;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::size_t clusters = 0;
        for (std::size_t j = 0; j < m; ++j) {
            clusters = std::max(clusters, labels[j] + 1);
            for (std::size_t i = 0; i < n; ++i) sums[labels[j] * n + i] += psi(i, j);
        }
        double total = 0.0;
        for (std::size_t c = 0; c < clusters; ++c) total += second_max(std::span<const double>(&sums[c * n], n));
        if (total > best.revenue) {
            best.revenue = total;
            best_labels = labels;
        }
    });
    std::size_t clusters = best_labels.empty() ? 0 : *std::max_element(best_labels.begin(), best_labels.end()) + 1;
    best.partition.clusters.assign(clusters, {});
    for (std::size_t j = 0; j < best_labels.size(); ++j) best.partition.clusters[best_labels[j]].push_back(j);
    return best;
}

double clustering_bound(const KnownInstance& inst) {
    const auto& psi = inst.normalized();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t removed = 0; removed < inst.bidders(); ++removed) {
        double total = 0.0;
        for (std::size_t j = 0; j < inst.goods(); ++j) {
            double top = 0.0;
            for (std::size_t i = 0; i < inst.bidders(); ++i)
                if (i != removed) top = std::max(top, psi(i, j));
            total += top;
        }
        best = std::min(best, total);
    }
    return best;
}

}  // namespace rms
