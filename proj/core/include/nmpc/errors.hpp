#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace nmpc {

/// Violated precondition: wrong dimensions, out-of-range index, bad parameter.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A simulated state became non-finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int coordinate, std::optional<int> stage = std::nullopt)
        : std::runtime_error(what), coordinate_(coordinate), stage_(stage) {}

    int coordinate() const noexcept { return coordinate_; }
    std::optional<int> stage() const noexcept { return stage_; }

private:
    int coordinate_;
    std::optional<int> stage_;
};

/// An iterative numerical procedure failed to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal data disagrees with itself (e.g. a splice against the wrong state).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A bounded search ended without a result.
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nmpc
