#pragma once

// Auction environments, signaling schemes and their exact evaluation.
//
// Revenue and welfare are evaluated through the outcome-weighted normalized
// valuation tables Phi_l(i, j) = q(l) * p(j) * V_l(i, j). A known-valuation
// instance is the single-outcome case with q = (1). For a signal row
// phi(sigma, .) the bid vector of outcome l is Phi_l * phi(sigma, .)^T, and
// the signal contributes the second-highest entry of that vector.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rms/matrix.hpp"

namespace rms {

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kTieTolerance = 1e-9;

class KnownInstance {
public:
    /// `values` is bidders x goods. Renormalizes `prior` when its sum is
    /// within `tol` of 1, throws ValidationError otherwise.
    KnownInstance(std::vector<double> prior, Matrix values, double tol = kProbabilityTolerance);

    std::size_t bidders() const noexcept { return values_.rows(); }
    std::size_t goods() const noexcept { return values_.cols(); }
    const std::vector<double>& prior() const noexcept { return prior_; }
    const Matrix& values() const noexcept { return values_; }
    /// Psi(i, j) = p(j) * V(i, j).
    const Matrix& normalized() const noexcept { return tables_.front(); }
    std::span<const Matrix> weighted_tables() const noexcept { return tables_; }

    KnownInstance scaled(double factor) const;

private:
    std::vector<double> prior_;
    Matrix values_;
    std::vector<Matrix> tables_;
};

class BayesInstance {
public:
    BayesInstance(std::vector<double> prior, std::vector<double> outcome_probs,
                  std::vector<Matrix> values, double tol = kProbabilityTolerance);

    static BayesInstance from_known(const KnownInstance& inst);

    std::size_t bidders() const noexcept { return values_.front().rows(); }
    std::size_t goods() const noexcept { return values_.front().cols(); }
    std::size_t outcomes() const noexcept { return values_.size(); }
    const std::vector<double>& prior() const noexcept { return prior_; }
    const std::vector<double>& outcome_probs() const noexcept { return outcome_probs_; }
    const Matrix& values(std::size_t outcome) const { return values_.at(outcome); }
    /// Psi_l(i, j) = p(j) * V_l(i, j).
    Matrix normalized(std::size_t outcome) const;
    /// Phi_l(i, j) = q(l) * Psi_l(i, j).
    std::span<const Matrix> weighted_tables() const noexcept { return tables_; }

    BayesInstance scaled(double factor) const;

private:
    std::vector<double> prior_;
    std::vector<double> outcome_probs_;
    std::vector<Matrix> values_;
    std::vector<Matrix> tables_;
};

/// s x m matrix; phi(sigma, j) is the probability of emitting sigma when good j is drawn.
class SignalingScheme {
public:
    SignalingScheme() = default;
    explicit SignalingScheme(Matrix phi) : phi_(std::move(phi)) {}

    std::size_t signals() const noexcept { return phi_.rows(); }
    std::size_t goods() const noexcept { return phi_.cols(); }
    const Matrix& phi() const noexcept { return phi_; }
    std::span<const double> signal(std::size_t sigma) const { return phi_.row(sigma); }

    friend bool operator==(const SignalingScheme&, const SignalingScheme&) = default;

private:
    Matrix phi_;
};

struct SchemeViolation {
    enum class Kind { Dimension, EntryOutOfRange, ColumnSum };
    Kind kind;
    std::size_t signal = 0;  // EntryOutOfRange only
    std::size_t good = 0;
    double value = 0.0;
    std::string message;
};

std::vector<SchemeViolation> validate_scheme(const SignalingScheme& scheme, std::size_t goods,
                                             double tol = kProbabilityTolerance);
/// Throws ValidationError listing the violations.
void require_valid(const SignalingScheme& scheme, std::size_t goods, double tol = kProbabilityTolerance);

struct TrivialSchemes {
    SignalingScheme no_reveal;
    SignalingScheme full_reveal;
};
TrivialSchemes trivial_schemes(std::size_t goods);

/// Second-largest entry counting multiplicity. Throws DimensionError for fewer than two entries.
double second_max(std::span<const double> values);

/// Winner and runner-up of a bid vector. Bids within kTieTolerance * max|bid|
/// of each other tie, and ties go to the lowest index.
struct LabelPair {
    std::size_t top = 0;
    std::size_t second = 1;
    friend auto operator<=>(const LabelPair&, const LabelPair&) = default;
};
LabelPair top_two(std::span<const double> bids);

/// Bids of every bidder for one signal under one weighted table.
std::vector<double> signal_bids(const Matrix& table, std::span<const double> signal);

double revenue(const KnownInstance& inst, const SignalingScheme& scheme);
double revenue(const BayesInstance& inst, const SignalingScheme& scheme);
double welfare(const KnownInstance& inst, const SignalingScheme& scheme);
double welfare(const BayesInstance& inst, const SignalingScheme& scheme);

/// Sum over goods of the best normalized valuation.
double optimal_welfare_star(const KnownInstance& inst);
/// mu(j): the bidder with the highest Psi(., j), ties to the lowest index.
std::vector<std::size_t> welfare_maximizers(const KnownInstance& inst);

/// Labels per signal; entry [sigma][l] holds (h1, h2) for outcome l.
using SignalLabels = std::vector<LabelPair>;
std::vector<SignalLabels> labels(const KnownInstance& inst, const SignalingScheme& scheme);
std::vector<SignalLabels> labels(const BayesInstance& inst, const SignalingScheme& scheme);

/// Sums signals with identical label tuples; first appearance fixes the output order.
SignalingScheme merge_equal_label_signals(const KnownInstance& inst, const SignalingScheme& scheme);
SignalingScheme merge_equal_label_signals(const BayesInstance& inst, const SignalingScheme& scheme);

/// Removes signals whose row is entirely (within `tol`) zero.
SignalingScheme drop_zero_signals(const SignalingScheme& scheme, double tol = 0.0);

struct SignalContribution {
    std::size_t signal = 0;
    double contribution = 0.0;
    SignalLabels labels;
};

struct SchemeReport {
    double revenue = 0.0;
    double welfare = 0.0;
    std::vector<SignalContribution> per_signal;
    std::size_t signal_count_after_merge = 0;
};

SchemeReport make_report(const KnownInstance& inst, const SignalingScheme& scheme);
SchemeReport make_report(const BayesInstance& inst, const SignalingScheme& scheme);

/// Output of the optimizing solvers.
struct SolveResult {
    SignalingScheme scheme;
    SchemeReport report;
    double lp_objective = 0.0;
};

}  // namespace rms
