#include <algorithm>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rms/errors.hpp"
#include "rms/gadgets.hpp"
#include "rms/solver_known.hpp"

using namespace rms;
using doctest::Approx;

namespace {

ClusterPartition part(std::vector<std::vector<std::size_t>> clusters) { return ClusterPartition{std::move(clusters)}; }

/// Bell numbers by the triangle recurrence.
std::size_t bell(std::size_t n) {
    std::vector<std::size_t> row{1};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<std::size_t> next{row.back()};
        for (auto v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

}  // namespace

TEST_CASE("LP1 shape") {
    KnownInstance inst({1.0}, Matrix::from_rows({{1}, {2}}));
    auto lp1 = build_lp1(inst);
    CHECK(lp1.layout.blocks.size() == 2);
    CHECK(lp1.problem.num_vars == 4);
    CHECK(lp1.problem.constraints.size() == 5);

    auto g = build_lp1(gen_gap(3));  // 4 bidders, 4 goods
    CHECK(g.layout.blocks.size() == 12);
    CHECK(g.problem.num_vars == 12 * 5);
    CHECK(g.problem.constraints.size() == 12 * 2 + 4);
    std::set<LabelPair> distinct(g.layout.blocks.begin(), g.layout.blocks.end());
    CHECK(distinct.size() == 12);
}

TEST_CASE("solve_optimal worked examples") {
    auto id2 = solve_optimal(gen_identity(2));
    CHECK(id2.lp_objective == Approx(0.5));
    CHECK(revenue(gen_identity(2), id2.scheme) == Approx(0.5));

    for (std::size_t n = 2; n <= 6; ++n) {
        auto inst = gen_gap(n);
        auto sol = solve_optimal(inst);
        const double expected = double(n) / double(n + 1);
        CHECK(sol.lp_objective == Approx(expected).epsilon(1e-9));
        CHECK(sol.report.revenue == Approx(expected).epsilon(1e-9));
        CHECK(oracle::revenue(inst, sol.scheme) == Approx(expected).epsilon(1e-9));
        CHECK(sol.scheme.signals() <= (n + 1) * n);
    }

    CHECK(solve_optimal(gen_many_signals(2)).lp_objective == Approx(0.75));
    CHECK(solve_optimal(gen_identity(4)).lp_objective == Approx(0.5));
}

TEST_CASE("solve_optimal on random instances is sound and bounded") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const std::size_t n = 2 + seed % 3, m = 1 + seed % 5;
        auto inst = random_known_instance(seed, n, m, {0, 3}, seed % 3 == 0);
        auto sol = solve_optimal(inst);
        CHECK(oracle::column_stochastic(sol.scheme, m));
        CHECK(sol.scheme.signals() <= n * (n - 1));
        CHECK(oracle::revenue(inst, sol.scheme) == Approx(sol.lp_objective).epsilon(1e-6).scale(1.0));
        CHECK(sol.lp_objective <= clustering_bound(inst) + 1e-6);

        // Any scheme found by search is a lower bound.
        auto search = random_search(inst, 3, 300, seed);
        CHECK(search.revenue <= sol.lp_objective + 1e-9);

        // Strict mode has the same optimum on known instances.
        KnownSolveOptions strict;
        strict.strict_ordering = true;
        CHECK(solve_optimal(inst, strict).lp_objective == Approx(sol.lp_objective).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("solve_welfare_constrained") {
    auto gap = gen_gap(2);
    auto half = solve_welfare_constrained(gap, 0.5);
    REQUIRE(half);
    CHECK(half->lp_objective == Approx(2.0 / 3.0));

    auto id2 = gen_identity(2);
    auto full = solve_welfare_constrained(id2, 1.0);
    REQUIRE(full);
    CHECK(full->lp_objective == Approx(0.0).scale(1.0));
    CHECK(welfare(id2, full->scheme) == Approx(1.0));

    CHECK_THROWS_AS(solve_welfare_constrained(id2, 1.5), ValidationError);
    CHECK_THROWS_AS(solve_welfare_constrained(id2, -0.1), ValidationError);

    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        auto inst = random_known_instance(seed, 3, 4);
        const double opt = solve_optimal(inst).lp_objective;
        CHECK(solve_welfare_constrained(inst, 0.0)->lp_objective == Approx(opt).epsilon(1e-7).scale(1.0));
        double prev = opt;
        for (double beta : {0.25, 0.5, 0.75, 0.9, 1.0}) {
            auto res = solve_welfare_constrained(inst, beta);
            if (!res) continue;
            CHECK(res->lp_objective <= prev + 1e-7);
            CHECK(welfare(inst, res->scheme) >= beta * optimal_welfare_star(inst) - 1e-6);
            if (beta <= 0.5) CHECK(res->lp_objective == Approx(opt).epsilon(1e-6).scale(1.0));
            prev = res->lp_objective;
        }
    }
}

TEST_CASE("welfare_repair") {
    auto id2 = gen_identity(2);
    auto no = trivial_schemes(2).no_reveal;
    CHECK(welfare_repair(id2, no).phi() == no.phi());

    KnownInstance three({0.5, 0.5}, Matrix::from_rows({{1, 0}, {0, 1}, {0, 0}}));
    CHECK(welfare_repair(three, no).phi() == no.phi());

    // Bidder 2 wins good 2 but is not labeled on the pooled signal.
    KnownInstance split({1.0 / 3, 1.0 / 3, 1.0 / 3}, Matrix::from_rows({{3, 3, 0}, {2, 2, 0}, {0, 0, 1}}));
    auto pooled = trivial_schemes(3).no_reveal;
    auto repaired = welfare_repair(split, pooled);
    CHECK(repaired.signals() == 2);
    CHECK(revenue(split, repaired) >= revenue(split, pooled) - 1e-12);

    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto inst = random_known_instance(seed, 4, 4);
        auto sol = solve_optimal(inst);
        auto out = welfare_repair(inst, sol.scheme);
        CHECK(oracle::column_stochastic(out, 4));
        CHECK(revenue(inst, out) == Approx(revenue(inst, sol.scheme)).epsilon(1e-9).scale(1.0));
        CHECK(welfare(inst, out) >= optimal_welfare_star(inst) / 2 - 1e-9);
        auto mu = welfare_maximizers(inst);
        auto lab = labels(inst, out);
        for (std::size_t s = 0; s < out.signals(); ++s)
            for (std::size_t j = 0; j < 4; ++j)
                if (out.phi()(s, j) > 0) CHECK((mu[j] == lab[s][0].top || mu[j] == lab[s][0].second));
    }
}

TEST_CASE("clustering_revenue") {
    auto id4 = gen_identity(4);
    CHECK(clustering_revenue(id4, part({{0, 1}, {2, 3}})) == Approx(0.5));
    CHECK(clustering_revenue(id4, part({{0}, {1}, {2}, {3}})) == Approx(0.0));
    CHECK(clustering_revenue(gen_gap(2), part({{0}, {1, 2}})) == Approx(1.0 / 3.0));
    CHECK_THROWS_AS(clustering_revenue(id4, part({{0, 1}, {1, 2, 3}})), ValidationError);
    CHECK_THROWS_AS(clustering_revenue(id4, part({{0, 1}, {2}})), ValidationError);
    CHECK_THROWS_AS(clustering_revenue(id4, part({{0, 1, 2, 3}, {}})), ValidationError);
    CHECK_THROWS_AS(clustering_revenue(id4, part({{0, 1, 2, 7}})), ValidationError);
    auto sch = partition_scheme(part({{2, 0}, {1, 3}}), 4);
    CHECK(sch.phi() == Matrix::from_rows({{1, 0, 1, 0}, {0, 1, 0, 1}}));
}

TEST_CASE("set partition enumeration") {
    for (std::size_t n = 1; n <= 8; ++n) {
        std::size_t count = 0;
        std::set<std::vector<std::size_t>> seen;
        for_each_set_partition(n, [&](const std::vector<std::size_t>& a) {
            ++count;
            seen.insert(a);
            CHECK(a[0] == 0);
            std::size_t mx = 0;
            for (std::size_t i = 1; i < n; ++i) {
                CHECK(a[i] <= mx + 1);
                mx = std::max(mx, a[i]);
            }
        });
        CHECK(count == bell(n));
        CHECK(seen.size() == count);
    }
}

TEST_CASE("clustering_bruteforce") {
    auto gap = clustering_bruteforce(gen_gap(2));
    CHECK(gap.revenue == Approx(1.0 / 3.0));
    CHECK(gap.partitions_checked == 5);

    CHECK(clustering_bruteforce(gen_identity(4)).revenue == Approx(0.5));

    KnownInstance single({1.0}, Matrix::from_rows({{4}, {2}, {3}}));
    auto one = clustering_bruteforce(single);
    CHECK(one.revenue == Approx(3.0));
    CHECK(one.partition.clusters.size() == 1);

    auto big = random_known_instance(1, 2, 11);
    CHECK_THROWS_AS(clustering_bruteforce(big), GuardExceeded);
    try {
        clustering_bruteforce(big);
    } catch (const GuardExceeded& e) {
        CHECK(e.limit() == 10);
        CHECK(std::string(e.what()).find("10") != std::string::npos);
    }
}

TEST_CASE("clustering_bound") {
    CHECK(clustering_bound(gen_gap(2)) == Approx(2.0 / 3.0));
    CHECK(clustering_bound(gen_identity(2)) == Approx(0.5));
    KnownInstance flat({0.25, 0.25, 0.25, 0.25}, Matrix(3, 4, 2.0));
    CHECK(clustering_bound(flat) == Approx(4 * 0.5));
}

TEST_CASE("sandwich on small random instances") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        auto inst = random_known_instance(seed, 2 + seed % 3, 1 + seed % 6);
        const double opt = solve_optimal(inst).lp_objective;
        const double clust = clustering_bruteforce(inst).revenue;
        CHECK(clust <= opt + 1e-6);
        CHECK(opt <= 2 * clust + 1e-6);
        CHECK(opt <= clustering_bound(inst) + 1e-6);
    }
}

TEST_CASE("gap family clustering optimum counts earning clusters") {
    // Good 0 earns only alongside another good; unit goods earn in pairs.
    for (std::size_t n = 2; n <= 7; ++n) {
        const double earning = 1.0 + double((n - 1) / 2);
        CHECK(clustering_bruteforce(gen_gap(n)).revenue == Approx(earning / double(n + 1)));
        if (n % 2 == 0) CHECK(clustering_bruteforce(gen_gap(n)).revenue == Approx(double(n) / (2.0 * double(n + 1))));
    }
    ClusterPartition odd{{{0, 1}, {2, 3}}};
    CHECK(clustering_revenue(gen_gap(3), odd) == Approx(0.5));
}
