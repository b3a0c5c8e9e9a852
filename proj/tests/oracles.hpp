#pragma once

// Straightforward reference computations used as test oracles. They work from
// posterior bids rather than the weighted tables the library uses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "rms/model.hpp"

namespace oracle {

inline double second_largest(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return v.at(1);
}

inline double largest(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

/// Pr(sigma) * secondmax of posterior expected values, summed over outcomes and signals.
inline double revenue(const std::vector<double>& p, const std::vector<double>& q, const std::vector<rms::Matrix>& vs,
                      const rms::Matrix& phi, bool welfare = false) {
    double total = 0.0;
    for (std::size_t l = 0; l < vs.size(); ++l) {
        for (std::size_t s = 0; s < phi.rows(); ++s) {
            double pr = 0.0;
            for (std::size_t j = 0; j < phi.cols(); ++j) pr += p[j] * phi(s, j);
            if (pr <= 0.0) continue;
            std::vector<double> bids(vs[l].rows(), 0.0);
            for (std::size_t i = 0; i < bids.size(); ++i)
                for (std::size_t j = 0; j < phi.cols(); ++j) bids[i] += p[j] * phi(s, j) / pr * vs[l](i, j);
            total += q[l] * pr * (welfare ? largest(bids) : second_largest(bids));
        }
    }
    return total;
}

inline double revenue(const rms::KnownInstance& inst, const rms::SignalingScheme& scheme) {
    return revenue(inst.prior(), {1.0}, {inst.values()}, scheme.phi());
}

inline double welfare(const rms::KnownInstance& inst, const rms::SignalingScheme& scheme) {
    return revenue(inst.prior(), {1.0}, {inst.values()}, scheme.phi(), true);
}

inline double revenue(const rms::BayesInstance& inst, const rms::SignalingScheme& scheme) {
    std::vector<rms::Matrix> vs;
    for (std::size_t l = 0; l < inst.outcomes(); ++l) vs.push_back(inst.values(l));
    return revenue(inst.prior(), inst.outcome_probs(), vs, scheme.phi());
}

inline bool column_stochastic(const rms::SignalingScheme& scheme, std::size_t goods, double tol = 1e-9) {
    if (scheme.goods() != goods || scheme.signals() == 0) return false;
    for (std::size_t j = 0; j < goods; ++j) {
        double sum = 0.0;
        for (std::size_t s = 0; s < scheme.signals(); ++s) {
            double v = scheme.phi()(s, j);
            if (v < -tol || v > 1.0 + tol) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

}  // namespace oracle
