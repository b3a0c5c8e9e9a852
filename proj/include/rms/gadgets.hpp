#pragma once

// Instance generators for the worked examples, the MAX-CUT gadget, and the
// brute-force / random-search oracles used by the tests.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rms/model.hpp"

namespace rms {

/// m bidders, m equally likely goods, bidder i values only good i at 1.
KnownInstance gen_identity(std::size_t goods);

/// n bidders and one good per ordered pair (i, i'): i values it at 1, i' at 1/2.
KnownInstance gen_many_signals(std::size_t bidders);
/// Index of the good owned by the ordered pair (first, second) in gen_many_signals.
std::size_t many_signals_good(std::size_t bidders, std::size_t first, std::size_t second);

/// n + 1 bidders and goods 0..n; bidder 0 values good 0 at n, bidder i values good i at 1.
KnownInstance gen_gap(std::size_t n);
/// The n-signal scheme pairing good i with 1/n of good 0.
SignalingScheme gap_optimal_scheme(std::size_t n);

struct Graph {
    std::vector<std::string> vertices;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t x = 0;
    std::size_t y = 1;

    /// Throws ValidationError on unknown names, self-loops, duplicate edges or x == y.
    static Graph from_names(std::vector<std::string> vertices,
                            const std::vector<std::pair<std::string, std::string>>& edges, const std::string& x,
                            const std::string& y);
    void validate() const;
    std::size_t index_of(const std::string& name) const;
};

struct MaxCutGadget {
    BayesInstance instance;
    double k1 = 0.0;
    double k2 = 0.0;
    /// Per outcome: "st", "s:<u>", "t:<u>" or "e:<u>-<v>".
    std::vector<std::string> outcome_tags;

    /// 2 K1 + (|V| - 2) K2 + |E|: the cut-independent part of a cut scheme's revenue.
    double base_revenue() const;
};

double default_k2(const Graph& graph);
double default_k1(const Graph& graph);

/// Three bidders, one good per vertex, 2|V| + |E| - 3 outcomes. Uniform p and
/// q, with V_l = Phi_l * k * m so that q(l) p(j) V_l(i, j) = Phi_l(i, j).
/// Requires k1 > k2 > 1.
MaxCutGadget gen_maxcut(const Graph& graph, double k1, double k2);

struct CutSignal {
    std::vector<std::size_t> members;
    double weight = 1.0;
};

struct CutScheme {
    std::vector<CutSignal> subsets;
    SignalingScheme scheme;
};

/// Two 0/1 signals: one on `cut`, one on its complement. `cut` must contain
/// exactly one of x and y.
CutScheme cut_to_scheme(const Graph& graph, const std::vector<std::size_t>& cut);

/// Number of edges with exactly one endpoint in `cut`.
std::size_t cut_size(const Graph& graph, const std::vector<std::size_t>& cut);

struct MaxCut {
    std::size_t value = 0;
    std::vector<std::size_t> witness;
};

inline constexpr std::size_t kDefaultMaxCutGuard = 20;

/// Largest cut separating x from y, by enumeration. Throws GuardExceeded above `max_vertices`.
MaxCut maxcut_bruteforce(const Graph& graph, std::size_t max_vertices = kDefaultMaxCutGuard);

/// Calls visit(cut) for every vertex subset containing x but not y.
template <typename Visitor>
void for_each_separating_cut(const Graph& graph, Visitor&& visit) {
    const std::size_t n = graph.vertices.size();
    std::vector<std::size_t> others;
    for (std::size_t v = 0; v < n; ++v)
        if (v != graph.x && v != graph.y) others.push_back(v);
    const std::uint64_t total = std::uint64_t{1} << others.size();
    std::vector<std::size_t> cut;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        cut.assign(1, graph.x);
        for (std::size_t b = 0; b < others.size(); ++b)
            if (mask >> b & 1U) cut.push_back(others[b]);
        visit(static_cast<const std::vector<std::size_t>&>(cut));
    }
}

struct ValueRange {
    double low = 0.0;
    double high = 1.0;
};

KnownInstance random_known_instance(std::uint64_t seed, std::size_t bidders, std::size_t goods,
                                    ValueRange range = {}, bool random_prior = false);
BayesInstance random_bayes_instance(std::uint64_t seed, std::size_t bidders, std::size_t goods,
                                    std::size_t outcomes, ValueRange range = {}, bool random_priors = false);

/// Valid s x m scheme with each good's column drawn uniformly from the simplex.
SignalingScheme random_scheme(std::mt19937_64& rng, std::size_t signals, std::size_t goods);

struct SearchResult {
    SignalingScheme scheme;
    double revenue = 0.0;
};

/// Hill climbing over s-signal schemes: perturb one good's column, keep strict improvements.
SearchResult random_search(const KnownInstance& inst, std::size_t signals, std::size_t iterations,
                           std::uint64_t seed);
SearchResult random_search(const BayesInstance& inst, std::size_t signals, std::size_t iterations,
                           std::uint64_t seed);

}  // namespace rms
