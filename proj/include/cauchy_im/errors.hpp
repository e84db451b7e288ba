#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cauchy_im {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Quadrature or root finding did not reach the requested accuracy.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double best_estimate, double error_bound)
        : std::runtime_error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double best_estimate_;
    double error_bound_;
};

/// Requested assertion / random-set / map combination is not supported.
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Sample is degenerate for the requested construction (e.g. tie at the minimum).
class DegenerateDataError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// One iterate of an optimizer, kept for diagnostics.
struct OptimizerStep {
    int iteration;
    double mu;
    double sigma;
    double log_likelihood;
};

class OptimizationError : public std::runtime_error {
public:
    OptimizationError(const std::string& what, std::vector<OptimizerStep> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const std::vector<OptimizerStep>& trace() const noexcept { return trace_; }

private:
    std::vector<OptimizerStep> trace_;
};

}  // namespace cauchy_im
