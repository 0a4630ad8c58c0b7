#pragma once

#include <stdexcept>
#include <string>

namespace nlwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form expression (radicand or log argument <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An integrator produced a non-finite state.
class StepError : public Error {
public:
    using Error::Error;
};

/// The analytic bound on a truncated improper integral exceeds tolerance.
class TailError : public Error {
public:
    using Error::Error;
};

/// A least-squares fit could not be formed (too few points, noise floor, degenerate design).
class FitError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A sample point lies outside the stored region of a run.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A fit window is too short for the requested discrimination.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Phase samples are too coarse to unwrap reliably.
class UnwrapError : public Error {
public:
    using Error::Error;
};

class IOError : public Error {
public:
    using Error::Error;
};

/// The field exceeded the blow-up threshold or became non-finite.
class BlowupDetected : public Error {
public:
    BlowupDetected(const std::string& what, double time)
        : Error(what + " (t=" + std::to_string(time) + ")"), time_(time)
    {
    }
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace nlwave
