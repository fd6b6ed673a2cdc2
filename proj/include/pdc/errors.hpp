#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdc {

// Input text could not be parsed. `line` is 1-based; 0 means "not line oriented".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg
                                  : std::move(msg)),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Inputs parsed fine but contradict each other (e.g. a foreground count
// exceeding the background count for the same term).
class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal structural invariant was violated (nesting, grid placement, ...).
class ConsistencyError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration value or an unknown configuration key.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failure: missing file, short read, unwritable output.
class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pdc
