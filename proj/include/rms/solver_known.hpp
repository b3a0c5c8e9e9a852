#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "rms/lp.hpp"
#include "rms/model.hpp"

namespace rms {

/// One signal block per ordered bidder pair (top, second). Each block owns
/// `goods` phi variables followed by one revenue variable.
struct PairBlockLayout {
    std::size_t goods = 0;
    std::vector<LabelPair> blocks;

    std::size_t block_width() const noexcept { return goods + 1; }
    std::size_t phi_var(std::size_t block, std::size_t good) const noexcept { return block * block_width() + good; }
    std::size_t revenue_var(std::size_t block) const noexcept { return block * block_width() + goods; }
    std::size_t num_vars() const noexcept { return blocks.size() * block_width(); }
};

struct Lp1 {
    lp::Problem problem;
    PairBlockLayout layout;
};

/// The signaling LP over ordered bidder pairs. With `strict_ordering` every
/// block additionally requires its labeled second bidder to weakly beat all
/// remaining bidders.
Lp1 build_lp1(const KnownInstance& inst, bool strict_ordering = false);

struct KnownSolveOptions {
    bool strict_ordering = false;
    lp::SolveOptions lp;
};

/// Revenue-maximizing scheme: LP solution, zero signals dropped, equal labels merged.
SolveResult solve_optimal(const KnownInstance& inst, const KnownSolveOptions& options = {});

/// Best revenue subject to the labeled top bids keeping at least beta * W*.
/// Returns nullopt when the floor cannot be met.
std::optional<SolveResult> solve_welfare_constrained(const KnownInstance& inst, double beta,
                                                     const KnownSolveOptions& options = {});

/// Splits off every good whose welfare-maximizing bidder is neither label of
/// its signal, until none remain. Revenue never decreases.
SignalingScheme welfare_repair(const KnownInstance& inst, const SignalingScheme& scheme);

struct ClusterPartition {
    std::vector<std::vector<std::size_t>> clusters;
};

/// Throws ValidationError unless the clusters are nonempty, disjoint and cover [0, goods).
void validate_partition(const ClusterPartition& partition, std::size_t goods);
SignalingScheme partition_scheme(const ClusterPartition& partition, std::size_t goods);
double clustering_revenue(const KnownInstance& inst, const ClusterPartition& partition);

struct ClusteringOptimum {
    ClusterPartition partition;
    double revenue = 0.0;
    std::size_t partitions_checked = 0;
};

inline constexpr std::size_t kDefaultPartitionGuard = 10;

/// Exact best clustering by enumerating every set partition of the goods.
/// Throws GuardExceeded when goods > max_goods.
ClusteringOptimum clustering_bruteforce(const KnownInstance& inst, std::size_t max_goods = kDefaultPartitionGuard);

/// min over i' of sum_j max_{i != i'} Psi(i, j); an upper bound on any scheme's revenue.
double clustering_bound(const KnownInstance& inst);

/// Calls `visit(labels)` for every restricted growth string of length `n`,
/// i.e. every set partition of n elements, in lexicographic order.
template <typename Visitor>
void for_each_set_partition(std::size_t n, Visitor&& visit) {
    if (n == 0) return;
    std::vector<std::size_t> a(n, 0), maxima(n, 0);
    for (;;) {
        visit(static_cast<const std::vector<std::size_t>&>(a));
        std::size_t i = n - 1;
        while (i > 0 && a[i] == maxima[i - 1] + 1) --i;
        if (i == 0) return;
        ++a[i];
        maxima[i] = std::max(maxima[i - 1], a[i]);
        for (std::size_t k = i + 1; k < n; ++k) {
            a[k] = 0;
            maxima[k] = maxima[i];
        }
    }
}

}  // namespace rms
