#ifndef GAZEFILT_ERRORS_HPP
#define GAZEFILT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gazefilt {

/// A precondition on an argument was violated (bad size, out-of-range frequency, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but carries no information (e.g. zero variance).
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A design procedure produced an unusable result (e.g. unstable poles).
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Floating-point evaluation broke down (division by a vanishing denominator).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 when the problem is not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw InvalidArgument(message);
    }
}

} // namespace detail
} // namespace gazefilt

#endif // GAZEFILT_ERRORS_HPP
