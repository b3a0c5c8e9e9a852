#pragma once

#include <stdexcept>
#include <string>

namespace rms {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed instance, scheme, partition or graph.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Wrong vector/matrix length, e.g. second_max on fewer than two bids.
class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A combinatorial enumeration would exceed its configured cap.
class GuardExceeded : public Error {
public:
    GuardExceeded(const std::string& what, double count, double limit)
        : Error(what), count_(count), limit_(limit) {}

    double count() const noexcept { return count_; }
    double limit() const noexcept { return limit_; }

private:
    double count_;
    double limit_;
};

/// Loss of numerical reliability (pivot blow-up, residual breach, no dependence found).
class NumericFailure : public Error {
public:
    using Error::Error;
};

}  // namespace rms
