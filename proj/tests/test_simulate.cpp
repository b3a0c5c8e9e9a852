#include <cmath>
#include <random>

#include "doctest.h"
#include "rms/errors.hpp"
#include "rms/gadgets.hpp"
#include "rms/simulate.hpp"
#include "rms/solver_known.hpp"

using namespace rms;
using doctest::Approx;

TEST_CASE("simulated revenue on the worked examples") {
    auto id2 = gen_identity(2);
    auto r = simulate_revenue(id2, trivial_schemes(2).no_reveal, 100000, 1);
    CHECK(r.samples == 100000);
    CHECK(r.seed == 1);
    CHECK(std::abs(r.estimate - 0.5) <= 4 * r.standard_error + 1e-12);

    auto gap = gen_gap(2);
    auto g = simulate_revenue(gap, gap_optimal_scheme(2), 100000, 2);
    // Both signals pay exactly 2/3, so every sample is identical.
    CHECK(g.standard_error == Approx(0.0).scale(1.0));
    CHECK(std::abs(g.estimate - 2.0 / 3.0) <= 4 * g.standard_error + 1e-12);

    auto full = simulate_revenue(gen_identity(3), trivial_schemes(3).full_reveal, 5000, 3);
    CHECK(full.estimate == 0.0);
    CHECK(full.standard_error == 0.0);
}

TEST_CASE("simulation is deterministic and independent of threads") {
    auto inst = random_known_instance(4, 3, 4);
    std::mt19937_64 rng(4);
    auto sch = random_scheme(rng, 3, 4);
    auto a = simulate_revenue(inst, sch, 30000, 77, 1);
    auto b = simulate_revenue(inst, sch, 30000, 77, 4);
    auto c = simulate_revenue(inst, sch, 30000, 77, 1);
    CHECK(a.estimate == b.estimate);
    CHECK(a.standard_error == b.standard_error);
    CHECK(a.estimate == c.estimate);
    CHECK(simulate_revenue(inst, sch, 30000, 78).estimate != a.estimate);
    CHECK_THROWS_AS(simulate_revenue(inst, sch, 0, 1), ValidationError);
}

TEST_CASE("simulation matches analytic revenue on random instances") {
    int within = 0;
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto inst = random_bayes_instance(seed, 2 + seed % 3, 1 + seed % 4, 1 + seed % 3, {0, 1}, true);
        auto sch = random_scheme(rng, 1 + seed % 3, inst.goods());
        auto rep = simulate_revenue(inst, sch, 100000, seed);
        within += std::abs(rep.estimate - revenue(inst, sch)) <= 4 * rep.standard_error + 1e-12;
    }
    CHECK(within >= 19);
}

TEST_CASE("degenerate priors never draw zero-probability goods") {
    KnownInstance inst({0.0, 1.0, 0.0}, Matrix::from_rows({{100, 1, 100}, {0, 2, 0}}));
    auto rep = simulate_revenue(inst, trivial_schemes(3).full_reveal, 10000, 9);
    CHECK(rep.estimate == 1.0);
}

TEST_CASE("truthfulness") {
    auto grid = default_deviation_grid();
    CHECK(grid.size() == 4);
    CHECK(truthfulness_check(gen_identity(2), trivial_schemes(2).no_reveal, grid, 1) <= 1e-9);
    CHECK(truthfulness_check(gen_gap(2), gap_optimal_scheme(2), grid, 1) <= 1e-9);

    // Losing bidder overbidding above its value pays more than it gains.
    KnownInstance two({1.0}, Matrix::from_rows({{5}, {3}}));
    std::vector<Deviation> overbid{{Deviation::Kind::Scale, 3.0}, {Deviation::Kind::Shift, 4.0}};
    CHECK(truthfulness_check(two, trivial_schemes(1).no_reveal, overbid, 2) <= 1e-9);

    std::mt19937_64 rng(6);
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto inst = random_known_instance(seed, 2 + seed % 4, 1 + seed % 5);
        auto sch = random_scheme(rng, 1 + seed % 4, inst.goods());
        CHECK(truthfulness_check(inst, sch, grid, seed) <= 1e-9);
        CHECK(truthfulness_check(inst, solve_optimal(inst).scheme, grid, seed) <= 1e-9);
        auto bay = random_bayes_instance(seed, 3, 2, 2);
        CHECK(truthfulness_check(bay, random_scheme(rng, 2, 2), grid, seed) <= 1e-9);
    }
}
