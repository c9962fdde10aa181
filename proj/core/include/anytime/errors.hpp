#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace anytime {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value is missing, malformed or out of range. `key()` names
/// the offending entry using dotted paths such as `availability.tau`.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Vector dimensions do not match the plant.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// The decrease test V(f(chi, u, 0)) <= rho V(chi) failed while building a
/// tentative sequence. `step()` is the 1-based position in the sequence.
class CertificateViolation : public Error {
public:
    CertificateViolation(int step, const std::string& message) : Error(message), step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

/// A series behind a closed-form certificate does not converge.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A Markov processor state with p_{0|s} = 1 was used where a state that can
/// compute at least one input is required.
class DegenerateStateError : public Error {
public:
    using Error::Error;
};

/// A function argument violates its documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace anytime
