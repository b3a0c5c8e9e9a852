#include "rms/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "rms/errors.hpp"

namespace rms {

namespace {

/// Posterior bids for every (outcome, signal); signals never emitted are flagged.
struct Posterior {
    std::vector<double> signal_prob;
    std::vector<std::vector<std::vector<double>>> bids;  // [outcome][signal][bidder]
};

Posterior posterior_bids(const std::vector<double>& prior, std::span<const Matrix> values,
                         const SignalingScheme& scheme) {
    Posterior out;
    const std::size_t s = scheme.signals(), m = scheme.goods();
    out.signal_prob.assign(s, 0.0);
    for (std::size_t sig = 0; sig < s; ++sig)
        for (std::size_t j = 0; j < m; ++j) out.signal_prob[sig] += prior[j] * scheme.phi()(sig, j);
    for (const auto& v : values) {
        auto& per_signal = out.bids.emplace_back(s, std::vector<double>(v.rows(), 0.0));
        for (std::size_t sig = 0; sig < s; ++sig) {
            if (out.signal_prob[sig] <= 0.0) continue;
            for (std::size_t i = 0; i < v.rows(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; ++j) acc += prior[j] * scheme.phi()(sig, j) * v(i, j);
                per_signal[sig][i] = acc / out.signal_prob[sig];
            }
        }
    }
    return out;
}

class InverseCdf {
public:
    explicit InverseCdf(std::span<const double> weights) : cumulative_(weights.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += std::max(weights[i], 0.0);
            cumulative_[i] = acc;
            if (weights[i] > 0.0) last_positive_ = i;
        }
        total_ = acc;
    }

    std::size_t draw(std::mt19937_64& rng) const {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) return last_positive_;
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
    double total_ = 0.0;
    std::size_t last_positive_ = 0;
};

struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1.0;
        double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.count == 0.0) return;
        double total = count + o.count;
        double d = o.mean - mean;
        mean += d * o.count / total;
        m2 += o.m2 + d * d * count * o.count / total;
        count = total;
    }
};

SimReport simulate(const std::vector<double>& prior, const std::vector<double>& outcome_probs,
                   std::span<const Matrix> values, const SignalingScheme& scheme, std::size_t samples,
                   std::uint64_t seed, unsigned threads) {
    if (samples == 0) throw ValidationError("simulate_revenue needs at least one sample");
    require_valid(scheme, prior.size());
    auto posterior = posterior_bids(prior, values, scheme);

    std::vector<std::vector<double>> payment(values.size(), std::vector<double>(scheme.signals(), 0.0));
    for (std::size_t l = 0; l < values.size(); ++l)
        for (std::size_t sig = 0; sig < scheme.signals(); ++sig)
            if (posterior.signal_prob[sig] > 0.0) payment[l][sig] = second_max(posterior.bids[l][sig]);

    InverseCdf outcome_draw(outcome_probs), good_draw(prior);
    std::vector<InverseCdf> signal_draw;
    std::vector<double> column(scheme.signals());
    for (std::size_t j = 0; j < scheme.goods(); ++j) {
        for (std::size_t sig = 0; sig < scheme.signals(); ++sig) column[sig] = scheme.phi()(sig, j);
        signal_draw.emplace_back(column);
    }

    const std::size_t batches = (samples + kSimulationBatch - 1) / kSimulationBatch;
    std::vector<Moments> moments(batches);
    auto run_batch = [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        std::mt19937_64 rng(seq);
        const std::size_t begin = b * kSimulationBatch;
        const std::size_t end = std::min(samples, begin + kSimulationBatch);
        Moments acc;
        for (std::size_t n = begin; n < end; ++n) {
            const std::size_t l = outcome_draw.draw(rng);
            const std::size_t j = good_draw.draw(rng);
            const std::size_t sig = signal_draw[j].draw(rng);
            acc.add(payment[l][sig]);
        }
        moments[b] = acc;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(batches)));
    if (workers == 1) {
        for (std::size_t b = 0; b < batches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < batches; b += workers) run_batch(b);
            });
        for (auto& t : pool) t.join();
    }

    // Pairwise merge in a fixed tree order.
    while (moments.size() > 1) {
        std::vector<Moments> next;
        for (std::size_t i = 0; i + 1 < moments.size(); i += 2) {
            Moments m = moments[i];
            m.merge(moments[i + 1]);
            next.push_back(m);
        }
        if (moments.size() % 2) next.push_back(moments.back());
        moments = std::move(next);
    }
    const auto& total = moments.front();
    SimReport report;
    report.estimate = total.mean;
    report.samples = samples;
    report.seed = seed;
    report.standard_error = samples > 1 ? std::sqrt(total.m2 / (total.count - 1.0)) / std::sqrt(total.count) : 0.0;
    return report;
}

double utility(std::span<const double> bids, std::size_t bidder, double bid, double value) {
    double price = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bids.size(); ++i) {
        if (i == bidder) continue;
        if (bids[i] > bid || (bids[i] == bid && i < bidder)) return 0.0;
        price = std::max(price, bids[i]);
    }
    return value - price;
}

double truthfulness(const std::vector<double>& prior, std::span<const Matrix> values, const SignalingScheme& scheme,
                    std::span<const Deviation> grid, std::uint64_t seed) {
    require_valid(scheme, prior.size());
    auto posterior = posterior_bids(prior, values, scheme);
    std::vector<Deviation> deviations(grid.begin(), grid.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> factor(0.0, 3.0);
    for (std::size_t r = 0; r < kRandomDeviations; ++r) deviations.push_back({Deviation::Kind::Scale, factor(rng)});

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < values.size(); ++l) {
        for (std::size_t sig = 0; sig < scheme.signals(); ++sig) {
            if (posterior.signal_prob[sig] <= 0.0) continue;
            const auto& bids = posterior.bids[l][sig];
            for (std::size_t i = 0; i < bids.size(); ++i) {
                const double truthful = utility(bids, i, bids[i], bids[i]);
                for (const auto& d : deviations)
                    worst = std::max(worst, utility(bids, i, d.apply(bids[i]), bids[i]) - truthful);
            }
        }
    }
    return worst;
}

}  // namespace

SimReport simulate_revenue(const KnownInstance& inst, const SignalingScheme& scheme, std::size_t samples,
                           std::uint64_t seed, unsigned threads) {
    std::vector<Matrix> values{inst.values()};
    return simulate(inst.prior(), {1.0}, values, scheme, samples, seed, threads);
}

SimReport simulate_revenue(const BayesInstance& inst, const SignalingScheme& scheme, std::size_t samples,
                           std::uint64_t seed, unsigned threads) {
    std::vector<Matrix> values;
    for (std::size_t l = 0; l < inst.outcomes(); ++l) values.push_back(inst.values(l));
    return simulate(inst.prior(), inst.outcome_probs(), values, scheme, samples, seed, threads);
}

std::vector<Deviation> default_deviation_grid() {
    return {{Deviation::Kind::Scale, 0.5}, {Deviation::Kind::Scale, 0.9}, {Deviation::Kind::Scale, 1.1},
            {Deviation::Kind::Scale, 2.0}};
}

double truthfulness_check(const KnownInstance& inst, const SignalingScheme& scheme, std::span<const Deviation> grid,
                          std::uint64_t seed) {
    std::vector<Matrix> values{inst.values()};
    return truthfulness(inst.prior(), values, scheme, grid, seed);
}

double truthfulness_check(const BayesInstance& inst, const SignalingScheme& scheme, std::span<const Deviation> grid,
                          std::uint64_t seed) {
    std::vector<Matrix> values;
    for (std::size_t l = 0; l < inst.outcomes(); ++l) values.push_back(inst.values(l));
    return truthfulness(inst.prior(), values, scheme, grid, seed);
}

}  // namespace rms
