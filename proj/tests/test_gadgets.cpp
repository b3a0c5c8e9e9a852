#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rms/errors.hpp"
#include "rms/gadgets.hpp"
#include "rms/solver_bayes.hpp"
#include "rms/solver_known.hpp"

using namespace rms;
using doctest::Approx;

namespace {

Graph triangle() { return Graph::from_names({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}, "a", "b"); }

Graph four_cycle() {
    return Graph::from_names({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}}, "a", "b");
}

/// Edge count across a cut, computed from a membership mask.
std::size_t crossing(const Graph& g, const std::vector<std::size_t>& cut) {
    std::vector<bool> in(g.vertices.size(), false);
    for (auto v : cut) in[v] = true;
    std::size_t c = 0;
    for (auto [u, v] : g.edges) c += in[u] != in[v];
    return c;
}

double cut_formula(const MaxCutGadget& gadget, const Graph& g, std::size_t cut) {
    return 2 * gadget.k1 + double(g.vertices.size() - 2) * gadget.k2 + double(g.edges.size()) + double(cut);
}

}  // namespace

TEST_CASE("generators produce the worked examples") {
    auto id = gen_identity(4);
    CHECK(id.bidders() == 4);
    CHECK(revenue(id, trivial_schemes(4).no_reveal) == Approx(0.25));
    CHECK(revenue(gen_identity(2), trivial_schemes(2).full_reveal) == Approx(0.0));
    CHECK_THROWS_AS(gen_identity(1), ValidationError);

    auto many = gen_many_signals(3);
    CHECK(many.goods() == 6);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            if (a == b) continue;
            auto j = many_signals_good(3, a, b);
            CHECK(many.values()(a, j) == 1.0);
            CHECK(many.values()(b, j) == 0.5);
            CHECK(many.values()(3 - a - b, j) == 0.0);
        }

    auto gap = gen_gap(3);
    CHECK(gap.bidders() == 4);
    CHECK(gap.values()(0, 0) == 3.0);
    CHECK(revenue(gap, gap_optimal_scheme(3)) == Approx(0.75));
    CHECK(oracle::column_stochastic(gap_optimal_scheme(5), 6));
}

TEST_CASE("graph validation") {
    CHECK_THROWS_AS(Graph::from_names({"a", "b"}, {{"a", "a"}}, "a", "b"), ValidationError);
    CHECK_THROWS_AS(Graph::from_names({"a", "b"}, {{"a", "b"}, {"b", "a"}}, "a", "b"), ValidationError);
    CHECK_THROWS_AS(Graph::from_names({"a", "b"}, {{"a", "z"}}, "a", "b"), ValidationError);
    CHECK_THROWS_AS(Graph::from_names({"a", "b"}, {}, "a", "a"), ValidationError);
    CHECK_THROWS_AS(Graph::from_names({"a", "b"}, {}, "a", "q"), ValidationError);
    CHECK_THROWS_AS(gen_maxcut(triangle(), 10, 20), ValidationError);
    CHECK_THROWS_AS(gen_maxcut(triangle(), 10, 1), ValidationError);
}

TEST_CASE("gadget shape and factoring") {
    auto g = triangle();
    auto gadget = gen_maxcut(g, 1e5, 1e2);
    const auto& inst = gadget.instance;
    CHECK(inst.bidders() == 3);
    CHECK(inst.goods() == 3);
    CHECK(inst.outcomes() == 6);
    CHECK(gadget.outcome_tags.size() == 6);
    CHECK(gadget.outcome_tags.front() == "st");
    for (double q : inst.outcome_probs()) CHECK(q == Approx(1.0 / 6));
    for (double p : inst.prior()) CHECK(p == Approx(1.0 / 3));
    // Phi tables carry the integer patterns: K1 on goods x and y in the first outcome.
    const auto& phi0 = inst.weighted_tables()[0];
    CHECK(phi0(2, 0) == Approx(1e5));
    CHECK(phi0(2, 1) == Approx(1e5));

    CHECK(default_k2(g) == 300);
    CHECK(default_k1(g) == 100 * 3 * 300);
}

TEST_CASE("cut schemes") {
    auto g = triangle();
    auto cs = cut_to_scheme(g, {0, 2});
    CHECK(cs.scheme.phi() == Matrix::from_rows({{1, 0, 1}, {0, 1, 0}}));
    CHECK(cs.subsets.size() == 2);
    CHECK_THROWS_AS(cut_to_scheme(g, {0, 1}), ValidationError);
    CHECK_THROWS_AS(cut_to_scheme(g, {2}), ValidationError);

    auto single = cut_to_scheme(four_cycle(), {0});
    CHECK(single.scheme.phi() == Matrix::from_rows({{1, 0, 0, 0}, {0, 1, 1, 1}}));

    auto gadget = gen_maxcut(g, 1e5, 1e2);
    CHECK(revenue(gadget.instance, cs.scheme) == Approx(2e5 + 1e2 + 5).epsilon(1e-12));

    auto edge = Graph::from_names({"x", "y"}, {{"x", "y"}}, "x", "y");
    auto eg = gen_maxcut(edge, 1e5, 1e2);
    CHECK(eg.instance.outcomes() == 2);
    CHECK(revenue(eg.instance, cut_to_scheme(edge, {0}).scheme) == Approx(2e5 + 2));

    auto path = Graph::from_names({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, "a", "c");
    auto pg = gen_maxcut(path, 1e5, 1e2);
    CHECK(revenue(pg.instance, cut_to_scheme(path, {0, 1}).scheme) == Approx(2e5 + 1e2 + 2 + 1));
}

TEST_CASE("cut identity holds for every separating cut") {
    std::vector<Graph> graphs{triangle(), four_cycle()};
    // A random graph on 7 vertices.
    std::mt19937_64 rng(8);
    std::vector<std::string> names{"v0", "v1", "v2", "v3", "v4", "v5", "v6"};
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t a = 0; a < names.size(); ++a)
        for (std::size_t b = a + 1; b < names.size(); ++b)
            if (rng() % 2) edges.emplace_back(names[a], names[b]);
    graphs.push_back(Graph::from_names(names, edges, "v0", "v3"));

    for (const auto& g : graphs) {
        auto gadget = gen_maxcut(g, default_k1(g), default_k2(g));
        double best = 0.0;
        std::size_t cuts = 0;
        for_each_separating_cut(g, [&](const std::vector<std::size_t>& cut) {
            ++cuts;
            const std::size_t c = crossing(g, cut);
            CHECK(cut_size(g, cut) == c);
            const double r = revenue(gadget.instance, cut_to_scheme(g, cut).scheme);
            CHECK(r == Approx(cut_formula(gadget, g, c)).epsilon(1e-12));
            best = std::max(best, r);
        });
        CHECK(cuts == (std::size_t{1} << (g.vertices.size() - 2)));
        auto mc = maxcut_bruteforce(g);
        CHECK(crossing(g, mc.witness) == mc.value);
        CHECK(best == Approx(cut_formula(gadget, g, mc.value)).epsilon(1e-12));
        CHECK(gadget.base_revenue() + double(mc.value) == Approx(best).epsilon(1e-12));
    }
    CHECK(maxcut_bruteforce(triangle()).value == 2);
    CHECK(maxcut_bruteforce(four_cycle()).value == 4);
    CHECK(maxcut_bruteforce(Graph::from_names({"x", "y"}, {{"x", "y"}}, "x", "y")).value == 1);
}

TEST_CASE("maxcut guard") {
    std::vector<std::string> names;
    for (int i = 0; i < 22; ++i) names.push_back("v" + std::to_string(i));
    auto g = Graph::from_names(names, {}, "v0", "v1");
    CHECK_THROWS_AS(maxcut_bruteforce(g), GuardExceeded);
}

TEST_CASE("triangle gadget solved exactly") {
    auto g = triangle();
    auto gadget = gen_maxcut(g, 1e5, 1e2);
    auto sol = solve_fixed_m(gadget.instance);
    CHECK(sol.lp_objective == Approx(200105).epsilon(1e-6));
    CHECK(revenue(gadget.instance, sol.scheme) == Approx(200105).epsilon(1e-6));
}

TEST_CASE("random instances") {
    auto a = random_known_instance(5, 3, 4), b = random_known_instance(5, 3, 4);
    CHECK(a.values() == b.values());
    CHECK(a.prior() == b.prior());
    CHECK(random_known_instance(6, 3, 4).values() != a.values());
    auto c = random_known_instance(1, 2, 2, {2, 3}, true);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK((c.values()(i, j) >= 2 && c.values()(i, j) <= 3));
    auto bay = random_bayes_instance(3, 3, 2, 2);
    CHECK(bay.outcomes() == 2);
    CHECK(bay.outcome_probs()[0] == Approx(0.5));
    CHECK(random_bayes_instance(3, 3, 2, 2).values(1) == bay.values(1));

    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) CHECK(oracle::column_stochastic(random_scheme(rng, 1 + t % 5, 1 + t % 7), 1 + t % 7));
}

TEST_CASE("random search") {
    auto gap = gen_gap(2);
    CHECK(random_search(gap, 1, 2000, 3).revenue <= 1.0 / 3.0 + 1e-6);

    auto id4 = gen_identity(4);
    auto best = random_search(id4, 2, 20000, 9);
    CHECK(best.revenue <= 0.5 + 1e-9);
    CHECK(best.revenue > 0.45);

    auto start = random_search(id4, 3, 0, 4);
    CHECK(oracle::column_stochastic(start.scheme, 4));
    CHECK(start.revenue == Approx(revenue(id4, start.scheme)));

    auto bay = random_bayes_instance(2, 3, 3, 2);
    auto bs = random_search(bay, 2, 500, 2);
    CHECK(bs.revenue <= solve_fixed_k(bay).lp_objective + 1e-9);
    CHECK_THROWS_AS(random_search(id4, 0, 10, 1), ValidationError);
}
