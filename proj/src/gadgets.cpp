#include "rms/gadgets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rms/errors.hpp"

namespace rms {

KnownInstance gen_identity(std::size_t goods) {
    if (goods < 2) throw ValidationError("identity instance needs m >= 2");
    return KnownInstance(std::vector<double>(goods, 1.0 / static_cast<double>(goods)), Matrix::identity(goods));
}

std::size_t many_signals_good(std::size_t bidders, std::size_t first, std::size_t second) {
    // Goods are ordered lexicographically by (first, second), skipping first == second.
    return first * (bidders - 1) + (second < first ? second : second - 1);
}

KnownInstance gen_many_signals(std::size_t bidders) {
    if (bidders < 2) throw ValidationError("many-signals instance needs n >= 2");
    const std::size_t goods = bidders * (bidders - 1);
    Matrix values(bidders, goods);
    for (std::size_t a = 0; a < bidders; ++a) {
        for (std::size_t b = 0; b < bidders; ++b) {
            if (a == b) continue;
            const std::size_t j = many_signals_good(bidders, a, b);
            values(a, j) = 1.0;
            values(b, j) = 0.5;
        }
    }
    return KnownInstance(std::vector<double>(goods, 1.0 / static_cast<double>(goods)), std::move(values));
}

KnownInstance gen_gap(std::size_t n) {
    if (n < 2) throw ValidationError("gap instance needs n >= 2");
    Matrix values(n + 1, n + 1);
    values(0, 0) = static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) values(i, i) = 1.0;
    return KnownInstance(std::vector<double>(n + 1, 1.0 / static_cast<double>(n + 1)), std::move(values));
}

SignalingScheme gap_optimal_scheme(std::size_t n) {
    Matrix phi(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        phi(i, 0) = 1.0 / static_cast<double>(n);
        phi(i, i + 1) = 1.0;
    }
    return SignalingScheme(std::move(phi));
}

std::size_t Graph::index_of(const std::string& name) const {
    auto it = std::find(vertices.begin(), vertices.end(), name);
    if (it == vertices.end()) throw ValidationError("graph: unknown vertex '" + name + "'");
    return static_cast<std::size_t>(it - vertices.begin());
}

Graph Graph::from_names(std::vector<std::string> vertices,
                        const std::vector<std::pair<std::string, std::string>>& edges, const std::string& x,
                        const std::string& y) {
    Graph g;
    g.vertices = std::move(vertices);
    for (const auto& [u, v] : edges) g.edges.emplace_back(g.index_of(u), g.index_of(v));
    g.x = g.index_of(x);
    g.y = g.index_of(y);
    g.validate();
    return g;
}

void Graph::validate() const {
    std::set<std::string> names(vertices.begin(), vertices.end());
    if (names.size() != vertices.size()) throw ValidationError("graph: duplicate vertex names");
    if (x >= vertices.size() || y >= vertices.size()) throw ValidationError("graph: x or y is not a vertex");
    if (x == y) throw ValidationError("graph: x and y must be distinct");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [u, v] : edges) {
        if (u >= vertices.size() || v >= vertices.size()) throw ValidationError("graph: edge endpoint out of range");
        if (u == v) throw ValidationError("graph: self-loop on '" + vertices[u] + "'");
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
            throw ValidationError("graph: duplicate edge " + vertices[u] + "-" + vertices[v]);
        }
    }
}

double MaxCutGadget::base_revenue() const {
    const double vertices = static_cast<double>(instance.goods());
    const double edges = static_cast<double>(instance.outcomes()) - 2.0 * vertices + 3.0;
    return 2.0 * k1 + (vertices - 2.0) * k2 + edges;
}

double default_k2(const Graph& graph) {
    return 100.0 * static_cast<double>(std::max<std::size_t>(graph.edges.size(), 1));
}

double default_k1(const Graph& graph) {
    return 100.0 * static_cast<double>(graph.vertices.size()) * default_k2(graph);
}

MaxCutGadget gen_maxcut(const Graph& graph, double k1, double k2) {
    graph.validate();
    if (!(k1 > k2 && k2 > 1.0)) throw ValidationError("MAX-CUT gadget requires K1 > K2 > 1");
    const std::size_t m = graph.vertices.size();
    std::vector<std::size_t> inner;
    for (std::size_t v = 0; v < m; ++v)
        if (v != graph.x && v != graph.y) inner.push_back(v);

    // Phi tables over bidders {0, 1, 2} and vertex goods.
    std::vector<Matrix> phi;
    std::vector<std::string> tags;
    {
        Matrix t(3, m);
        t(0, graph.x) = k1;
        t(1, graph.y) = k1;
        t(2, graph.x) = k1;
        t(2, graph.y) = k1;
        phi.push_back(std::move(t));
        tags.emplace_back("st");
    }
    for (std::size_t anchor : {graph.x, graph.y}) {
        for (std::size_t u : inner) {
            Matrix t(3, m);
            t(0, anchor) = k2;
            t(1, u) = k2;
            phi.push_back(std::move(t));
            tags.push_back((anchor == graph.x ? "s:" : "t:") + graph.vertices[u]);
        }
    }
    for (const auto& [u, v] : graph.edges) {
        Matrix t(3, m);
        t(0, u) = 1.0;
        t(1, v) = 1.0;
        t(2, u) = 1.0;
        t(2, v) = 1.0;
        phi.push_back(std::move(t));
        tags.push_back("e:" + graph.vertices[u] + "-" + graph.vertices[v]);
    }

    const std::size_t k = phi.size();
    const double factor = static_cast<double>(k) * static_cast<double>(m);
    for (auto& t : phi)
        for (std::size_t i = 0; i < t.rows(); ++i)
            for (auto& v : t.row(i)) v *= factor;
    BayesInstance inst(std::vector<double>(m, 1.0 / static_cast<double>(m)),
                       std::vector<double>(k, 1.0 / static_cast<double>(k)), std::move(phi));
    return MaxCutGadget{std::move(inst), k1, k2, std::move(tags)};
}

CutScheme cut_to_scheme(const Graph& graph, const std::vector<std::size_t>& cut) {
    graph.validate();
    const std::size_t m = graph.vertices.size();
    std::vector<bool> in(m, false);
    for (auto v : cut) {
        if (v >= m) throw ValidationError("cut names a vertex outside the graph");
        in[v] = true;
    }
    if (in[graph.x] == in[graph.y]) throw ValidationError("cut must contain exactly one of x and y");
    CutScheme out;
    Matrix phi(2, m);
    CutSignal side_x, side_y;
    const bool x_inside = in[graph.x];
    for (std::size_t v = 0; v < m; ++v) {
        bool with_x = in[v] == x_inside;
        phi(with_x ? 0 : 1, v) = 1.0;
        (with_x ? side_x : side_y).members.push_back(v);
    }
    out.subsets = {std::move(side_x), std::move(side_y)};
    out.scheme = SignalingScheme(std::move(phi));
    return out;
}

std::size_t cut_size(const Graph& graph, const std::vector<std::size_t>& cut) {
    std::vector<bool> in(graph.vertices.size(), false);
    for (auto v : cut) in.at(v) = true;
    std::size_t crossing = 0;
    for (const auto& [u, v] : graph.edges)
        if (in[u] != in[v]) ++crossing;
    return crossing;
}

MaxCut maxcut_bruteforce(const Graph& graph, std::size_t max_vertices) {
    graph.validate();
    if (graph.vertices.size() > max_vertices) {
        throw GuardExceeded("max-cut enumeration over " + std::to_string(graph.vertices.size()) +
                                " vertices exceeds the guard of " + std::to_string(max_vertices),
                            static_cast<double>(graph.vertices.size()), static_cast<double>(max_vertices));
    }
    MaxCut best;
    bool first = true;
    for_each_separating_cut(graph, [&](const std::vector<std::size_t>& cut) {
        std::size_t value = cut_size(graph, cut);
        if (first || value > best.value) {
            best.value = value;
            best.witness = cut;
            first = false;
        }
    });
    return best;
}

namespace {

std::vector<double> simplex_point(std::mt19937_64& rng, std::size_t dim) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> out(dim);
    double sum = 0.0;
    for (auto& v : out) sum += (v = expo(rng));
    for (auto& v : out) v /= sum;
    return out;
}

Matrix random_values(std::mt19937_64& rng, std::size_t bidders, std::size_t goods, ValueRange range) {
    if (!(range.high >= range.low && range.low >= 0.0)) throw ValidationError("invalid valuation range");
    std::uniform_real_distribution<double> dist(range.low, range.high);
    Matrix v(bidders, goods);
    for (std::size_t i = 0; i < bidders; ++i)
        for (auto& x : v.row(i)) x = dist(rng);
    return v;
}

template <typename Instance>
SearchResult hill_climb(const Instance& inst, std::size_t signals, std::size_t iterations, std::uint64_t seed) {
    if (signals == 0) throw ValidationError("random_search needs at least one signal");
    std::mt19937_64 rng(seed);
    const std::size_t m = inst.goods();
    auto tables = inst.weighted_tables();
    auto score = [&](const Matrix& phi) {
        double total = 0.0;
        for (const auto& table : tables)
            for (std::size_t s = 0; s < phi.rows(); ++s) total += second_max(signal_bids(table, phi.row(s)));
        return total;
    };
    Matrix best = random_scheme(rng, signals, m).phi();
    double best_value = score(best);
    std::uniform_int_distribution<std::size_t> pick_good(0, m - 1);
    std::uniform_int_distribution<std::size_t> pick_signal(0, signals - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t it = 0; it < iterations; ++it) {
        Matrix trial = best;
        const std::size_t j = pick_good(rng);
        const double mix = unit(rng) < 0.3 ? 1.0 : 0.5 * unit(rng);
        std::vector<double> fresh;
        if (unit(rng) < 0.2) {
            fresh.assign(signals, 0.0);
            fresh[pick_signal(rng)] = 1.0;
        } else {
            fresh = simplex_point(rng, signals);
        }
        for (std::size_t s = 0; s < signals; ++s) trial(s, j) = (1.0 - mix) * trial(s, j) + mix * fresh[s];
        double value = score(trial);
        if (value > best_value) {
            best_value = value;
            best = std::move(trial);
        }
    }
    return {SignalingScheme(std::move(best)), best_value};
}

}  // namespace

KnownInstance random_known_instance(std::uint64_t seed, std::size_t bidders, std::size_t goods, ValueRange range,
                                    bool random_prior) {
    if (bidders < 2 || goods < 1) throw ValidationError("random instance needs n >= 2 and m >= 1");
    std::mt19937_64 rng(seed);
    auto values = random_values(rng, bidders, goods, range);
    auto prior = random_prior ? simplex_point(rng, goods)
                              : std::vector<double>(goods, 1.0 / static_cast<double>(goods));
    return KnownInstance(std::move(prior), std::move(values));
}

BayesInstance random_bayes_instance(std::uint64_t seed, std::size_t bidders, std::size_t goods,
                                    std::size_t outcomes, ValueRange range, bool random_priors) {
    if (bidders < 2 || goods < 1 || outcomes < 1)
        throw ValidationError("random instance needs n >= 2, m >= 1, k >= 1");
    std::mt19937_64 rng(seed);
    std::vector<Matrix> values;
    for (std::size_t l = 0; l < outcomes; ++l) values.push_back(random_values(rng, bidders, goods, range));
    auto prior = random_priors ? simplex_point(rng, goods)
                               : std::vector<double>(goods, 1.0 / static_cast<double>(goods));
    auto q = random_priors ? simplex_point(rng, outcomes)
                           : std::vector<double>(outcomes, 1.0 / static_cast<double>(outcomes));
    return BayesInstance(std::move(prior), std::move(q), std::move(values));
}

SignalingScheme random_scheme(std::mt19937_64& rng, std::size_t signals, std::size_t goods) {
    Matrix phi(signals, goods);
    for (std::size_t j = 0; j < goods; ++j) {
        auto column = simplex_point(rng, signals);
        for (std::size_t s = 0; s < signals; ++s) phi(s, j) = column[s];
    }
    return SignalingScheme(std::move(phi));
}

SearchResult random_search(const KnownInstance& inst, std::size_t signals, std::size_t iterations,
                           std::uint64_t seed) {
    return hill_climb(inst, signals, iterations, seed);
}

SearchResult random_search(const BayesInstance& inst, std::size_t signals, std::size_t iterations,
                           std::uint64_t seed) {
    return hill_climb(inst, signals, iterations, seed);
}

}  // namespace rms
