#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (k = 0, p outside [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A series failed to meet its truncation tolerance within the term budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double partial_sum, std::size_t terms)
        : Error(what), partial_sum_(partial_sum), terms_(terms) {}

    double partial_sum() const noexcept { return partial_sum_; }
    std::size_t terms() const noexcept { return terms_; }

private:
    double partial_sum_;
    std::size_t terms_;
};

class NumericInstabilityError : public Error {
public:
    using Error::Error;
};

class NoSolutionError : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ccsim
