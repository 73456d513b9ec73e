#pragma once

#include <stdexcept>
#include <string>

namespace mcurve {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument outside the documented domain (t outside [0,1], k < 2, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Gram–Schmidt pivot collapsed: derivative vectors are (numerically) dependent.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// No C0 in the search ladder produced a valid cover.
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// A quadrature or Monte Carlo estimate could not reach its accuracy target.
/// Carries the best value obtained and the error bound that was attained.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double best_estimate, double error_bound)
        : Error(what + " (best estimate " + std::to_string(best_estimate) + ", bound " +
                std::to_string(error_bound) + ")"),
          best_estimate_(best_estimate),
          error_bound_(error_bound)
    {
    }

    double best_estimate() const { return best_estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double best_estimate_;
    double error_bound_;
};

/// Invalid run configuration; names the offending field.
class UsageError : public Error {
public:
    UsageError(std::string field, const std::string& what)
        : Error("invalid '" + field + "': " + what), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

} // namespace mcurve
