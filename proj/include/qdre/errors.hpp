#pragma once

#include <stdexcept>
#include <string>

namespace qdre {

// Bad user configuration: malformed spec/config files, invalid options.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data: bad rows, dimension mismatches, empty partitions.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite risk, non-finite ratios and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qdre
