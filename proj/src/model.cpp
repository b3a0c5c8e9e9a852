#include "rms/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "rms/errors.hpp"

namespace rms {

namespace {

void normalize_distribution(std::vector<double>& probs, const char* name, double tol) {
    if (probs.empty()) throw ValidationError(std::string(name) + " is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
            std::ostringstream os;
            os << name << "[" << i + 1 << "] = " << probs[i] << " is not a nonnegative probability";
            throw ValidationError(os.str());
        }
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > tol) {
        std::ostringstream os;
        os << name << " sums to " << sum << ", not 1";
        throw ValidationError(os.str());
    }
    for (auto& v : probs) v /= sum;
}

void check_values(const Matrix& values, std::size_t goods, const std::string& name) {
    if (values.rows() < 2) {
        throw ValidationError(name + ": at least two bidders are required, got " +
                              std::to_string(values.rows()));
    }
    if (values.cols() != goods) {
        throw DimensionError(name + ": expected " + std::to_string(goods) + " goods, got " +
                             std::to_string(values.cols()));
    }
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t j = 0; j < values.cols(); ++j) {
            double v = values(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                std::ostringstream os;
                os << name << "(" << i + 1 << "," << j + 1 << ") = " << v
                   << " is not a finite nonnegative valuation";
                throw ValidationError(os.str());
            }
        }
    }
}

Matrix weighted_table(const Matrix& values, const std::vector<double>& prior, double weight) {
    Matrix out(values.rows(), values.cols());
    for (std::size_t i = 0; i < values.rows(); ++i)
        for (std::size_t j = 0; j < values.cols(); ++j) out(i, j) = weight * prior[j] * values(i, j);
    return out;
}

double evaluate(std::span<const Matrix> tables, const SignalingScheme& scheme, bool top) {
    double total = 0.0;
    for (const auto& table : tables) {
        for (std::size_t s = 0; s < scheme.signals(); ++s) {
            auto bids = signal_bids(table, scheme.signal(s));
            total += top ? *std::max_element(bids.begin(), bids.end()) : second_max(bids);
        }
    }
    return total;
}

std::vector<SignalLabels> label_signals(std::span<const Matrix> tables, const SignalingScheme& scheme) {
    std::vector<SignalLabels> out(scheme.signals());
    for (std::size_t s = 0; s < scheme.signals(); ++s) {
        out[s].reserve(tables.size());
        for (const auto& table : tables) out[s].push_back(top_two(signal_bids(table, scheme.signal(s))));
    }
    return out;
}

SignalingScheme merge_by_labels(std::span<const Matrix> tables, const SignalingScheme& scheme) {
    auto lab = label_signals(tables, scheme);
    std::map<SignalLabels, std::size_t> slot;
    Matrix merged(0, scheme.goods());
    for (std::size_t s = 0; s < scheme.signals(); ++s) {
        auto [it, inserted] = slot.try_emplace(lab[s], merged.rows());
        if (inserted) {
            merged.append_row(scheme.signal(s));
        } else {
            auto dst = merged.row(it->second);
            auto src = scheme.signal(s);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
    }
    return SignalingScheme(std::move(merged));
}

SchemeReport build_report(std::span<const Matrix> tables, const SignalingScheme& scheme) {
    SchemeReport report;
    auto lab = label_signals(tables, scheme);
    for (std::size_t s = 0; s < scheme.signals(); ++s) {
        double contribution = 0.0;
        for (const auto& table : tables) contribution += second_max(signal_bids(table, scheme.signal(s)));
        report.per_signal.push_back({s, contribution, lab[s]});
        report.revenue += contribution;
    }
    report.welfare = evaluate(tables, scheme, true);
    report.signal_count_after_merge = merge_by_labels(tables, scheme).signals();
    return report;
}

}  // namespace

KnownInstance::KnownInstance(std::vector<double> prior, Matrix values, double tol)
    : prior_(std::move(prior)), values_(std::move(values)) {
    normalize_distribution(prior_, "p", tol);
    check_values(values_, prior_.size(), "V");
    tables_.push_back(weighted_table(values_, prior_, 1.0));
}

KnownInstance KnownInstance::scaled(double factor) const {
    Matrix v = values_;
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (auto& x : v.row(i)) x *= factor;
    return KnownInstance(prior_, std::move(v));
}

BayesInstance::BayesInstance(std::vector<double> prior, std::vector<double> outcome_probs,
                             std::vector<Matrix> values, double tol)
    : prior_(std::move(prior)), outcome_probs_(std::move(outcome_probs)), values_(std::move(values)) {
    normalize_distribution(prior_, "p", tol);
    normalize_distribution(outcome_probs_, "q", tol);
    if (values_.size() != outcome_probs_.size()) {
        throw DimensionError("q has " + std::to_string(outcome_probs_.size()) + " entries but " +
                             std::to_string(values_.size()) + " valuation matrices were given");
    }
    for (std::size_t l = 0; l < values_.size(); ++l) {
        check_values(values_[l], prior_.size(), "V_" + std::to_string(l + 1));
        if (values_[l].rows() != values_.front().rows()) {
            throw DimensionError("V_" + std::to_string(l + 1) + " has a different bidder count");
        }
        tables_.push_back(weighted_table(values_[l], prior_, outcome_probs_[l]));
    }
}

BayesInstance BayesInstance::from_known(const KnownInstance& inst) {
    return BayesInstance(inst.prior(), {1.0}, {inst.values()});
}

Matrix BayesInstance::normalized(std::size_t outcome) const {
    return weighted_table(values_.at(outcome), prior_, 1.0);
}

BayesInstance BayesInstance::scaled(double factor) const {
    auto v = values_;
    for (auto& m : v)
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (auto& x : m.row(i)) x *= factor;
    return BayesInstance(prior_, outcome_probs_, std::move(v));
}

std::vector<SchemeViolation> validate_scheme(const SignalingScheme& scheme, std::size_t goods, double tol) {
    std::vector<SchemeViolation> out;
    if (scheme.goods() != goods || scheme.signals() == 0) {
        std::ostringstream os;
        os << "scheme is " << scheme.signals() << "x" << scheme.goods() << ", expected s x " << goods
           << " with s >= 1";
        out.push_back({SchemeViolation::Kind::Dimension, 0, 0, 0.0, os.str()});
        return out;
    }
    const auto& phi = scheme.phi();
    for (std::size_t j = 0; j < goods; ++j) {
        double sum = 0.0;
        for (std::size_t s = 0; s < scheme.signals(); ++s) {
            double v = phi(s, j);
            if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
                std::ostringstream os;
                os << "phi(" << s + 1 << "," << j + 1 << ") = " << v << " outside [0,1]";
                out.push_back({SchemeViolation::Kind::EntryOutOfRange, s, j, v, os.str()});
            }
            sum += v;
        }
        if (!(std::abs(sum - 1.0) <= tol)) {
            std::ostringstream os;
            os << "column " << j + 1 << " sums to " << sum;
            out.push_back({SchemeViolation::Kind::ColumnSum, 0, j, sum, os.str()});
        }
    }
    return out;
}

void require_valid(const SignalingScheme& scheme, std::size_t goods, double tol) {
    auto violations = validate_scheme(scheme, goods, tol);
    if (violations.empty()) return;
    std::string msg = "invalid signaling scheme:";
    for (const auto& v : violations) msg += " " + v.message + ";";
    msg.pop_back();
    if (violations.front().kind == SchemeViolation::Kind::Dimension) throw DimensionError(msg);
    throw ValidationError(msg);
}

TrivialSchemes trivial_schemes(std::size_t goods) {
    if (goods == 0) throw ValidationError("trivial_schemes: at least one good is required");
    return {SignalingScheme(Matrix(1, goods, 1.0)), SignalingScheme(Matrix::identity(goods))};
}

double second_max(std::span<const double> values) {
    if (values.size() < 2) {
        throw DimensionError("second_max needs at least two values, got " + std::to_string(values.size()));
    }
    double first = values[0] >= values[1] ? values[0] : values[1];
    double second = values[0] >= values[1] ? values[1] : values[0];
    for (std::size_t i = 2; i < values.size(); ++i) {
        if (values[i] > first) {
            second = first;
            first = values[i];
        } else if (values[i] > second) {
            second = values[i];
        }
    }
    return second;
}

LabelPair top_two(std::span<const double> bids) {
    if (bids.size() < 2) throw DimensionError("top_two needs at least two bids");
    double scale = 0.0;
    for (double b : bids) scale = std::max(scale, std::abs(b));
    const double tol = kTieTolerance * scale;

    auto best_excluding = [&](std::size_t skip) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < bids.size(); ++i)
            if (i != skip) best = std::max(best, bids[i]);
        for (std::size_t i = 0; i < bids.size(); ++i)
            if (i != skip && bids[i] >= best - tol) return i;
        return skip == 0 ? std::size_t{1} : std::size_t{0};
    };
    LabelPair out;
    out.top = best_excluding(bids.size());
    out.second = best_excluding(out.top);
    return out;
}

std::vector<double> signal_bids(const Matrix& table, std::span<const double> signal) {
    if (signal.size() != table.cols()) {
        throw DimensionError("signal has " + std::to_string(signal.size()) + " goods, table has " +
                             std::to_string(table.cols()));
    }
    std::vector<double> bids(table.rows(), 0.0);
    for (std::size_t i = 0; i < table.rows(); ++i) {
        auto row = table.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * signal[j];
        bids[i] = acc;
    }
    return bids;
}

double revenue(const KnownInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return evaluate(inst.weighted_tables(), scheme, false);
}

double revenue(const BayesInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return evaluate(inst.weighted_tables(), scheme, false);
}

double welfare(const KnownInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return evaluate(inst.weighted_tables(), scheme, true);
}

double welfare(const BayesInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return evaluate(inst.weighted_tables(), scheme, true);
}

double optimal_welfare_star(const KnownInstance& inst) {
    const auto& psi = inst.normalized();
    double total = 0.0;
    for (std::size_t j = 0; j < psi.cols(); ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < psi.rows(); ++i) best = std::max(best, psi(i, j));
        total += best;
    }
    return total;
}

std::vector<std::size_t> welfare_maximizers(const KnownInstance& inst) {
    const auto& psi = inst.normalized();
    std::vector<std::size_t> mu(psi.cols());
    std::vector<double> column(psi.rows());
    for (std::size_t j = 0; j < psi.cols(); ++j) {
        for (std::size_t i = 0; i < psi.rows(); ++i) column[i] = psi(i, j);
        mu[j] = top_two(column).top;
    }
    return mu;
}

std::vector<SignalLabels> labels(const KnownInstance& inst, const SignalingScheme& scheme) {
    return label_signals(inst.weighted_tables(), scheme);
}

std::vector<SignalLabels> labels(const BayesInstance& inst, const SignalingScheme& scheme) {
    return label_signals(inst.weighted_tables(), scheme);
}

SignalingScheme merge_equal_label_signals(const KnownInstance& inst, const SignalingScheme& scheme) {
    return merge_by_labels(inst.weighted_tables(), scheme);
}

SignalingScheme merge_equal_label_signals(const BayesInstance& inst, const SignalingScheme& scheme) {
    return merge_by_labels(inst.weighted_tables(), scheme);
}

SignalingScheme drop_zero_signals(const SignalingScheme& scheme, double tol) {
    Matrix kept(0, scheme.goods());
    for (std::size_t s = 0; s < scheme.signals(); ++s) {
        auto row = scheme.signal(s);
        if (std::any_of(row.begin(), row.end(), [tol](double v) { return v > tol; })) kept.append_row(row);
    }
    return SignalingScheme(std::move(kept));
}

SchemeReport make_report(const KnownInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return build_report(inst.weighted_tables(), scheme);
}

SchemeReport make_report(const BayesInstance& inst, const SignalingScheme& scheme) {
    require_valid(scheme, inst.goods());
    return build_report(inst.weighted_tables(), scheme);
}

}  // namespace rms
