#pragma once

#include <stdexcept>
#include <string>

namespace mrf {

// Invalid configuration values (bad ranges, empty grids, overlapping thresholds).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate an operation's preconditions.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The data itself cannot support the operation (empty mask, degenerate map, zero fingerprint).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API misuse, e.g. backward() on a tensor that was not produced by a recorded graph.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mrf
