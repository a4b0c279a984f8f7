#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hap {

// Root of every error thrown by the library. Callers that only need to
// report failures can catch this; the harness maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside a tabulated or fitted domain (atmosphere table, surrogate
// fit range, airfoil polar coverage).
class RangeError : public Error {
public:
    using Error::Error;
};

// Caller violated a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Platform power sinks exceed the available supply.
class InfeasibleBudgetError : public Error {
public:
    InfeasibleBudgetError(const std::string& what, double deficit_w)
        : Error(what), deficit_w_(deficit_w) {}
    double deficit_w() const noexcept { return deficit_w_; }

private:
    double deficit_w_;
};

class FitError : public Error {
public:
    using Error::Error;
};

// Blade section with non-positive thrust-direction force coefficient.
class SectionError : public Error {
public:
    SectionError(const std::string& what, double r_m) : Error(what), r_m_(r_m) {}
    double r_m() const noexcept { return r_m_; }

private:
    double r_m_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

// Steering matrix rank-deficient or too ill-conditioned for zero forcing.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, double condition_number)
        : Error(what), condition_number_(condition_number) {}
    double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& what, std::size_t epoch) : Error(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

// Malformed or missing configuration input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hap
