#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace itof {

/// Raised when an operation receives arguments that violate its precondition.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Phase of a zero phasor.
class UndefinedPhaseError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed binary container. `offset()` is the byte position of the problem.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace itof
