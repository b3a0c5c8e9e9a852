#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

#include "rms/model.hpp"

namespace rms::detail {

inline constexpr double kExtractZero = 1e-12;

/// Reads phi(block, good) = x[phi_var(block, good)], zeroes LP dust and
/// rescales every good's column to sum to one. Empty blocks are skipped.
template <typename PhiVar>
SignalingScheme extract_scheme(std::span<const double> x, std::size_t blocks, std::size_t goods, PhiVar phi_var) {
    Matrix phi(0, goods);
    std::vector<double> row(goods);
    for (std::size_t b = 0; b < blocks; ++b) {
        bool any = false;
        for (std::size_t j = 0; j < goods; ++j) {
            double v = x[phi_var(b, j)];
            row[j] = v > kExtractZero ? std::min(v, 1.0) : 0.0;
            any = any || row[j] > 0.0;
        }
        if (any) phi.append_row(row);
    }
    for (std::size_t j = 0; j < goods; ++j) {
        double sum = 0.0;
        for (std::size_t s = 0; s < phi.rows(); ++s) sum += phi(s, j);
        if (sum > 0.0)
            for (std::size_t s = 0; s < phi.rows(); ++s) phi(s, j) /= sum;
    }
    return SignalingScheme(std::move(phi));
}

}  // namespace rms::detail
