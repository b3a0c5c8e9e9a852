#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rms/lp.hpp"
#include "rms/model.hpp"

namespace rms {

/// (top, second) bidder pair for every Bayesian outcome.
struct LabelTuple {
    std::vector<LabelPair> pairs;
    friend auto operator<=>(const LabelTuple&, const LabelTuple&) = default;
};

/// Cone of signal vectors whose per-outcome bid ranking matches `label`:
/// every row a satisfies a.x >= 0. Rows are scaled to unit max-norm.
struct Region {
    LabelTuple label;
    std::vector<std::vector<double>> constraints;
    std::optional<std::vector<double>> interior_witness;
    double margin = 0.0;
};

inline constexpr std::size_t kDefaultMaxLabels = 1000;
inline constexpr std::size_t kDefaultMaxRegionChecks = 100000;
inline constexpr double kRegionMargin = 1e-9;

struct BayesSolveOptions {
    std::size_t max_labels = kDefaultMaxLabels;
    std::size_t max_region_checks = kDefaultMaxRegionChecks;
    bool ordering = true;
    unsigned threads = 1;
    lp::SolveOptions lp;
};

/// (n(n-1))^k, saturating at the largest double.
double label_count(std::size_t bidders, std::size_t outcomes);

/// Every label tuple, lexicographic. Throws GuardExceeded above `max_labels`.
std::vector<LabelTuple> all_label_tuples(std::size_t bidders, std::size_t outcomes, std::size_t max_labels);

/// Ranking constraints for the first `label.pairs.size()` outcomes. Returns
/// nullopt when two identical bidder rows would have to rank against the
/// lowest-index tie rule.
std::optional<std::vector<std::vector<double>>> ranking_constraints(const BayesInstance& inst,
                                                                    const LabelTuple& label);

struct Lp2Layout {
    std::size_t goods = 0;
    std::vector<LabelTuple> labels;

    std::size_t block_width() const noexcept { return goods + 1; }
    std::size_t phi_var(std::size_t block, std::size_t good) const noexcept { return block * block_width() + good; }
    std::size_t revenue_var(std::size_t block) const noexcept { return block * block_width() + goods; }
    std::size_t num_vars() const noexcept { return labels.size() * block_width(); }
};

struct Lp2 {
    lp::Problem problem;
    Lp2Layout layout;
};

/// One signal block per label tuple. With `ordering`, each block's signal is
/// confined to its ranking cone so the labeled second bids are the realized
/// second-highest bids.
Lp2 build_lp2(const BayesInstance& inst, bool ordering, std::span<const LabelTuple> labels);

SolveResult solve_fixed_k(const BayesInstance& inst, const BayesSolveOptions& options = {});

/// Label tuples whose ranking cone has nonempty interior, sorted by label.
/// Throws GuardExceeded once more than `max_region_checks` candidates would be tested.
std::vector<Region> enumerate_regions(const BayesInstance& inst, const BayesSolveOptions& options = {});

/// Whitney bound sum_{i<=m} C(t, i) for t hyperplanes in m dimensions.
double whitney_bound(std::size_t dimension, double hyperplanes);

SolveResult solve_fixed_m(const BayesInstance& inst, const BayesSolveOptions& options = {});

/// Removes linearly dependent signals until at most `goods` remain, never lowering revenue.
SignalingScheme reduce_to_m_signals(const KnownInstance& inst, const SignalingScheme& scheme);
SignalingScheme reduce_to_m_signals(const BayesInstance& inst, const SignalingScheme& scheme);

}  // namespace rms
