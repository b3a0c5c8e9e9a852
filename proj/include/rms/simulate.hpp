#pragma once

// Monte Carlo check of the closed-form revenue and an exact check that
// truthful posterior bidding is a best response in the second-price auction.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rms/model.hpp"

namespace rms {

struct SimReport {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kSimulationBatch = 4096;

/// Draws (outcome, good, signal) triples, lets every bidder bid its posterior
/// expected value, and averages the second-highest bid. Samples are split
/// into fixed batches with derived seeds, so the result does not depend on
/// `threads`.
SimReport simulate_revenue(const KnownInstance& inst, const SignalingScheme& scheme, std::size_t samples,
                           std::uint64_t seed, unsigned threads = 1);
SimReport simulate_revenue(const BayesInstance& inst, const SignalingScheme& scheme, std::size_t samples,
                           std::uint64_t seed, unsigned threads = 1);

struct Deviation {
    enum class Kind { Scale, Shift };
    Kind kind = Kind::Scale;
    double amount = 1.0;

    double apply(double truthful) const { return kind == Kind::Scale ? truthful * amount : truthful + amount; }
};

/// Multiplicative deviations x0.5, x0.9, x1.1, x2.0.
std::vector<Deviation> default_deviation_grid();

inline constexpr std::size_t kRandomDeviations = 8;

/// Largest expected-utility gain any bidder can get, for any emitted signal
/// and outcome, by bidding a deviation of its posterior value while the others
/// bid truthfully. `seed` drives kRandomDeviations extra scale factors in [0, 3].
double truthfulness_check(const KnownInstance& inst, const SignalingScheme& scheme,
                          std::span<const Deviation> grid, std::uint64_t seed);
double truthfulness_check(const BayesInstance& inst, const SignalingScheme& scheme,
                          std::span<const Deviation> grid, std::uint64_t seed);

}  // namespace rms
