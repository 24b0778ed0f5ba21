#pragma once

#include <stdexcept>
#include <string>

namespace rsaloc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad parameter values, mismatched dimensions,
/// inconsistent experiment inputs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Target coincides with an anchor (or similar zero-distance situation).
class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

/// The linear system is rank deficient beyond the usable threshold.
class SingularGeometryError : public Error {
public:
    using Error::Error;
};

/// On-disk data could not be parsed (bad magic, truncated, wrong version).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Training diverged or could not proceed; carries the offending epoch.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int epoch)
        : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace rsaloc
