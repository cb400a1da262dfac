#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace rankdemand {

/// Malformed or inconsistent input data (CLI exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy answer (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear system whose condition estimate exceeds the accepted bound.
class IllConditionedError : public NumericalError {
public:
    IllConditionedError(const std::string& what, double condition)
        : NumericalError(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_ = std::numeric_limits<double>::infinity();
};

/// A stage artifact is absent or unreadable (CLI exit code 4).
class ArtifactError : public std::runtime_error {
public:
    ArtifactError(const std::string& artifact, const std::string& what)
        : std::runtime_error(artifact + ": " + what), artifact_(artifact) {}
    const std::string& artifact() const noexcept { return artifact_; }

private:
    std::string artifact_;
};

} // namespace rankdemand
